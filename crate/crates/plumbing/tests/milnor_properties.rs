mod common;

use std::collections::BTreeMap;

use num_integer::Integer;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

use common::{matrix, negative_definite, negative_definite_trees, random_construction, random_pm_setup};
use plumbing::birational::MoveKind;
use plumbing::embedding::{decide_pm, Verdict};
use plumbing::lattice::determinant;
use plumbing::milnor::{
    arrows_from_divisor, cap_binding_component, divisor_from_arrows, fiber_invariants, hj_expansion, pm_null_divisor,
    riemann_roch_chi,
};
use plumbing::rationality::{check_rational, lipman_cone_check};
use plumbing::{Divisor, Rational, VertexId};

#[test]
fn hj_chains_evaluate_back_and_have_determinant_b() {
    for b in 1..=30u64 {
        for a in 1..=b {
            if b.gcd(&a) != 1 {
                continue;
            }
            let c = hj_expansion(b, a).unwrap();
            // b/a = c1 − 1/(c2 − 1/(…)), folded from the back
            let mut v = Rational::from_integer(c.coefficients.last().copied().unwrap().into());
            for &k in c.coefficients.iter().rev().skip(1) {
                v = Rational::from_integer(k.into()) - v.recip();
            }
            assert_eq!(v, Rational::new(b.into(), a.into()), "{b}/{a}");
            assert_eq!(c.value(), v);
            let fr = c.framings();
            let n = fr.len();
            let m: Vec<Vec<i64>> = (0..n)
                .map(|i| (0..n).map(|j| if i == j { fr[i] } else if i.abs_diff(j) == 1 { 1 } else { 0 }).collect())
                .collect();
            assert_eq!(determinant(&m).magnitude(), &num_bigint::BigUint::from(b), "{b}/{a}");
        }
    }
}

proptest! {
    #[test]
    fn null_divisors_of_constructions(seed in any::<u64>()) {
        let (c, keep) = random_pm_setup(&mut StdRng::seed_from_u64(seed));
        let full = c.build().unwrap();
        let nd = pm_null_divisor(&c, &keep).unwrap();
        let f = nd.full.to_vec(&full).unwrap();
        let q = matrix(&full);
        prop_assert!(q.iter().all(|row| row.iter().zip(&f).map(|(a, b)| a * b).sum::<i64>() == 0));
        prop_assert_eq!(f.iter().fold(0i64, |g, &x| g.gcd(&x)), 1);
        prop_assert_eq!(riemann_roch_chi(&full, &nd.full).unwrap(), Rational::from_integer(1.into()));
        let mut gamma = full.induced(&keep.iter().map(|k| full.index_of(k).unwrap()).collect::<Vec<_>>());
        for (at, m) in &nd.arrows {
            gamma.add_arrow(at.clone(), *m).unwrap();
        }
        let fib = fiber_invariants(&gamma, &nd.restricted).unwrap();
        let total: u64 = nd.arrows.iter().map(|(_, m)| m).sum();
        prop_assert_eq!(fib.genus, 0);
        prop_assert_eq!(fib.euler, 2 - total as i64);
    }

    #[test]
    fn arrows_and_divisors_invert_each_other(
        g in negative_definite_trees(6, -5, -1),
        mults in prop::collection::vec(0u64..=3, 6),
        coeffs in prop::collection::vec(1i64..=6, 6),
    ) {
        let arrows: BTreeMap<VertexId, u64> =
            g.ids().into_iter().zip(&mults).filter(|(_, &m)| m > 0).map(|(v, &m)| (v, m)).collect();
        if let Ok(d) = divisor_from_arrows(&g, &arrows) {
            let back: BTreeMap<VertexId, u64> =
                arrows_from_divisor(&g, &d).unwrap().into_iter().filter(|&(_, m)| m > 0).collect();
            prop_assert_eq!(back, arrows);
        }
        let d = Divisor::from_vec(&g, &coeffs[..g.len()]);
        if lipman_cone_check(&g, &d) {
            let a = arrows_from_divisor(&g, &d).unwrap();
            let nonzero: BTreeMap<VertexId, u64> = a.into_iter().filter(|&(_, m)| m > 0).collect();
            prop_assert_eq!(divisor_from_arrows(&g, &nonzero).unwrap(), d);
        }
    }

    /// A sandwiched presentation from a (−1)-seed `s0`, with the arrows of a
    /// generic line through the blown-up point: one of multiplicity 1 on
    /// `s0`, and one per removed leaf carrying that leaf's multiplicity.
    /// Capping the line's arrow must give a pm graph whenever the result is
    /// still negative definite.
    #[test]
    fn capping_a_sandwiched_line_gives_pm(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let (c, keep) = random_construction(&mut rng, -1);
        let s0 = VertexId::new("s0");
        prop_assume!(keep.contains(&s0));
        let (full, created) = c.build_trace().unwrap();
        let mut mult: BTreeMap<VertexId, i64> = BTreeMap::from([(s0.clone(), 1)]);
        for (m, n) in c.moves.moves.iter().zip(&created) {
            let v = match &m.kind {
                MoveKind::BlowUpVertex(v) => mult[v],
                MoveKind::BlowUpEdge(u, w) => mult[u] + mult[w],
                MoveKind::BlowDown(_) => unreachable!(),
            };
            mult.insert(n.clone(), v);
        }
        let idx: Vec<usize> = keep.iter().map(|k| full.index_of(k).unwrap()).collect();
        let mut gamma = full.induced(&idx);
        gamma.add_arrow(s0.clone(), 1).unwrap();
        for i in 0..full.len() {
            if !keep.contains(full.id(i)) {
                gamma.add_arrow(full.id(full.neighbors(i)[0]).clone(), mult[full.id(i)] as u64).unwrap();
            }
        }
        let d = Divisor(mult).restrict(&keep);
        let q = matrix(&gamma);
        let dv = d.to_vec(&gamma).unwrap();
        for i in 0..gamma.len() {
            let pairing: i64 = q[i].iter().zip(&dv).map(|(a, b)| a * b).sum();
            let arrows: u64 = gamma.arrows_at(i).map(|a| a.multiplicity).sum();
            prop_assert_eq!(pairing, -(arrows as i64));
        }
        let capped = cap_binding_component(&gamma, &s0, 1, 1).unwrap();
        let i0 = capped.index_of(&s0).unwrap();
        prop_assert_eq!(capped.framing(i0), gamma.framing(gamma.index_of(&s0).unwrap()) + 1);
        prop_assert_eq!(capped.arrows().len(), gamma.arrows().len() - 1);
        let bare = capped.without_arrows();
        if negative_definite(&matrix(&bare)) {
            prop_assert_eq!(decide_pm(&bare).unwrap().verdict, Verdict::True);
            prop_assert!(check_rational(&bare).unwrap());
        }
    }
}
