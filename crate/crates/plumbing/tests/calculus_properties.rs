mod common;

use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use common::{blows_down_to, det, matrix, random_construction, same_labeled, trees, Goal, Small};
use plumbing::birational::{
    apply_move, blow_down, blow_up, blowdown_search, can_blow_down, normalize_augmentation, Locus, Move,
    SearchOutcome, Target,
};
use plumbing::PlumbingGraph;

fn loci(g: &PlumbingGraph) -> Vec<Locus> {
    let mut out: Vec<Locus> = g.ids().into_iter().map(Locus::Vertex).collect();
    out.extend(g.edges().into_iter().map(|(i, j)| Locus::Edge(g.id(i).clone(), g.id(j).clone())));
    out
}

/// Graphs with a fair chance of blowing down: built by blowups from a seed,
/// sometimes with one framing nudged.
fn blowdown_candidates() -> impl Strategy<Value = PlumbingGraph> {
    (any::<u64>(), prop::bool::ANY, 0..3usize).prop_filter_map("at most 8 vertices", |(seed, zero, nudge)| {
        let mut rng = StdRng::seed_from_u64(seed);
        let (c, _) = random_construction(&mut rng, if zero { 0 } else { -1 });
        let mut g = c.build().unwrap();
        if nudge > 0 {
            let i = rng.gen_range(0..g.len());
            g.set_framing(i, g.framing(i) + if nudge == 1 { 1 } else { -1 });
        }
        (g.len() <= 8).then_some(g)
    })
}

proptest! {
    #[test]
    fn blow_up_then_down_is_identity(g in trees(7, -5, 0)) {
        for l in loci(&g) {
            let (h, n) = blow_up(&g, &l).unwrap();
            prop_assert_eq!(&blow_down(&h, &n).unwrap(), &g);
        }
    }

    #[test]
    fn determinant_magnitude_survives_moves(g in trees(6, -5, 0), seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let d0 = det(&matrix(&g)).abs();
        let mut g = g;
        for _ in 0..30 {
            let downs: Vec<usize> = (0..g.len()).filter(|&i| can_blow_down(&g, i).is_ok()).collect();
            let m = if !downs.is_empty() && g.len() > 1 && rng.gen_bool(0.5) {
                Move::blow_down(g.id(downs[rng.gen_range(0..downs.len())]).clone())
            } else {
                let l = loci(&g);
                match l[rng.gen_range(0..l.len())].clone() {
                    Locus::Vertex(v) => Move::blow_up_vertex(v),
                    Locus::Edge(a, b) => Move::blow_up_edge(a, b),
                }
            };
            g = apply_move(&g, &m).unwrap().0;
            prop_assert_eq!(det(&matrix(&g)).abs(), d0);
        }
    }

    #[test]
    fn blowdown_search_agrees_with_exhaustive_orders(g in blowdown_candidates()) {
        for (target, goal) in [(Target::Empty, Goal::Empty), (Target::ZeroVertex, Goal::ZeroVertex)] {
            let oracle = blows_down_to(&Small::from_graph(&g), goal);
            match blowdown_search(&g, target) {
                SearchOutcome::Found(seq) => {
                    prop_assert!(target.reached(&seq.replay(&g).unwrap()));
                    prop_assert!(oracle);
                }
                SearchOutcome::NotFound => prop_assert!(!oracle),
                SearchOutcome::Inconclusive { .. } => prop_assert!(false, "state cap hit on {} vertices", g.len()),
            }
        }
    }

    #[test]
    fn normalized_augmentations_hang_leaves_off_the_kept_graph(seed in any::<u64>(), zero in prop::bool::ANY) {
        let mut rng = StdRng::seed_from_u64(seed);
        let (c, keep) = random_construction(&mut rng, if zero { 0 } else { -1 });
        let full = c.build().unwrap();
        let gamma = full.induced(&keep.iter().map(|k| full.index_of(k).unwrap()).collect::<Vec<_>>());
        let (g, c2) = normalize_augmentation(&c, &keep).unwrap();
        prop_assert_eq!(&c2.build().unwrap(), &g);
        for i in 0..g.len() {
            if keep.contains(g.id(i)) {
                continue;
            }
            prop_assert_eq!(g.framing(i), -1);
            prop_assert_eq!(g.degree(i), 1);
            prop_assert!(keep.contains(g.id(g.neighbors(i)[0])));
        }
        let kept: Vec<usize> = gamma.ids().iter().map(|k| g.index_of(k).unwrap()).collect();
        prop_assert!(same_labeled(&g.induced(&kept), &gamma));
        let goal = if zero { Goal::ZeroVertex } else { Goal::Empty };
        prop_assert!(blows_down_to(&Small::from_graph(&g), goal));
    }
}
