//! The classification pipeline and its JSON and text renderings.

use std::fmt::Write as _;
use std::time::Instant;

use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;

use crate::birational::Target;
use crate::embedding::{
    decide_pm_with, decide_sandwiched_with, DecideOptions, Decision, SandwichCertificate, Verdict,
};
use crate::graph::PlumbingGraph;
use crate::io::{emit_embedding, emit_graph};
use crate::lattice::{classify_definiteness, intersection_matrix, Divisor};
use crate::milnor::{fiber_invariants, FiberInvariants};
use crate::rationality::{fundamental_cycle, LauferTrace};
use crate::{DefinitenessClass, Result};

pub const SCHEMA: u32 = 1;

#[derive(Clone, Debug, Default)]
pub struct ClassifyOptions {
    pub decide: DecideOptions,
    pub divisor: Option<Divisor>,
    /// Recorded in the metadata only.
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct InputEcho {
    pub vertices: usize,
    pub edges: usize,
    pub arrows: usize,
    pub graph: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct LatticeSummary {
    pub class: DefinitenessClass,
    pub nullity: usize,
    pub determinant: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Rationality {
    pub value: Option<bool>,
    pub trace: Option<LauferTrace>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// A certificate in text-format pieces, so another process can replay it
/// with nothing but the graph and move parsers.
#[derive(Clone, Debug, Serialize)]
pub struct CertificateReport {
    pub target: Target,
    pub added_leaves: Vec<(String, String)>,
    pub augmented: String,
    pub blowdown: Vec<String>,
}

impl From<&SandwichCertificate> for CertificateReport {
    fn from(c: &SandwichCertificate) -> Self {
        CertificateReport {
            target: c.target,
            added_leaves: c
                .added_leaves
                .iter()
                .map(|(h, l)| (h.to_string(), l.to_string()))
                .collect(),
            augmented: emit_graph(&c.augmented),
            blowdown: c.blowdown.moves.iter().map(ToString::to_string).collect(),
        }
    }
}

/// `false`, `"inconclusive"`, or `{"value": true, "certificate": ...}`.
#[derive(Clone, Debug)]
pub enum TriState {
    True(Box<SandwichCertificate>),
    False { note: Option<String> },
    Inconclusive { note: Option<String> },
}

impl TriState {
    fn from_decision(d: &Decision) -> Self {
        match (d.verdict, &d.certificate) {
            (Verdict::True, Some(c)) => TriState::True(Box::new(c.clone())),
            (Verdict::False, _) => TriState::False { note: d.note.clone() },
            _ => TriState::Inconclusive { note: d.note.clone() },
        }
    }

    pub fn verdict(&self) -> Verdict {
        match self {
            TriState::True(_) => Verdict::True,
            TriState::False { .. } => Verdict::False,
            TriState::Inconclusive { .. } => Verdict::Inconclusive,
        }
    }

    pub fn certificate(&self) -> Option<&SandwichCertificate> {
        match self {
            TriState::True(c) => Some(c),
            _ => None,
        }
    }

    fn note(&self) -> Option<&str> {
        match self {
            TriState::True(_) => None,
            TriState::False { note } | TriState::Inconclusive { note } => note.as_deref(),
        }
    }
}

impl Serialize for TriState {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            TriState::True(c) => {
                let mut m = s.serialize_map(Some(2))?;
                m.serialize_entry("value", &true)?;
                m.serialize_entry("certificate", &CertificateReport::from(&**c))?;
                m.end()
            }
            TriState::False { .. } => s.serialize_bool(false),
            TriState::Inconclusive { .. } => s.serialize_str("inconclusive"),
        }
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Embeddings {
    pub s: Option<String>,
    pub p: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Budget {
    pub basis_budget: Option<usize>,
    pub node_limit: Option<u64>,
    pub subset_cap: usize,
    pub exhausted: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Metadata {
    pub elapsed_ms: u128,
    pub budget: Budget,
    /// Reasons behind `false` or `"inconclusive"` answers.
    pub notes: Vec<String>,
    pub seed: Option<u64>,
    pub version: &'static str,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema: u32,
    pub input: InputEcho,
    pub lattice: LatticeSummary,
    pub rationality: Rationality,
    pub sandwiched: TriState,
    pub pm: TriState,
    pub embeddings: Embeddings,
    pub fiber: Option<FiberInvariants>,
    pub metadata: Metadata,
}

/// Runs every decision on `g`. Certificates are replayed by the deciders
/// before they are returned; a `true` without one never reaches the report.
pub fn classify(g: &PlumbingGraph, options: &ClassifyOptions) -> Result<Report> {
    let start = Instant::now();
    let q = intersection_matrix(g);
    let def = classify_definiteness(&q);
    let rationality = match fundamental_cycle(g, None) {
        Ok(t) => Rationality {
            value: Some(t.rational),
            trace: Some(t),
            note: None,
        },
        Err(e) => Rationality {
            value: None,
            trace: None,
            note: Some(e.to_string()),
        },
    };
    let sw = decide_sandwiched_with(g, &options.decide)?;
    let pm = decide_pm_with(g, &options.decide)?;
    let fiber = options
        .divisor
        .as_ref()
        .map(|d| fiber_invariants(g, d))
        .transpose()?;
    let sandwiched = TriState::from_decision(&sw);
    let pm_state = TriState::from_decision(&pm);
    let mut notes = Vec::new();
    for (name, t) in [("sandwiched", &sandwiched), ("pm", &pm_state)] {
        if let Some(n) = t.note() {
            notes.push(format!("{name}: {n}"));
        }
    }
    let search = &options.decide.search;
    Ok(Report {
        schema: SCHEMA,
        input: InputEcho {
            vertices: g.len(),
            edges: g.edge_count(),
            arrows: g.arrows().len(),
            graph: emit_graph(g),
        },
        lattice: LatticeSummary {
            class: def.class,
            nullity: def.nullity,
            determinant: q.determinant().to_string(),
        },
        rationality,
        embeddings: Embeddings {
            s: sw.embedding.as_ref().map(emit_embedding),
            p: pm.embedding.as_ref().map(emit_embedding),
        },
        metadata: Metadata {
            elapsed_ms: start.elapsed().as_millis(),
            budget: Budget {
                basis_budget: search.basis_budget,
                node_limit: search.node_limit,
                subset_cap: search.subset_cap,
                exhausted: [&sandwiched, &pm_state]
                    .iter()
                    .any(|t| t.verdict() == Verdict::Inconclusive),
            },
            notes,
            seed: options.seed,
            version: env!("CARGO_PKG_VERSION"),
        },
        sandwiched,
        pm: pm_state,
        fiber,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Text,
}

pub fn emit_report(r: &Report, format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(r).expect("report serializes"),
        Format::Text => emit_text(r),
    }
}

fn emit_text(r: &Report) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "graph: {} vertices, {} edges, {} arrows",
        r.input.vertices, r.input.edges, r.input.arrows
    );
    let _ = writeln!(
        s,
        "lattice: {:?}, nullity {}, det {}",
        r.lattice.class, r.lattice.nullity, r.lattice.determinant
    );
    match (&r.rationality.value, &r.rationality.trace) {
        (Some(v), Some(t)) => {
            let _ = writeln!(s, "rational: {v}");
            let z: Vec<String> = t.fundamental_cycle.0.iter().map(|(k, c)| format!("{k}={c}")).collect();
            let _ = writeln!(s, "  fundamental cycle: {}", z.join(" "));
            if let Some(k) = t.violation {
                let st = &t.steps[k];
                let _ = writeln!(s, "  step {}: Z·E_{} = {}", k + 1, st.vertex, st.pairing);
            }
        }
        _ => {
            let _ = writeln!(s, "rational: undetermined ({})", r.rationality.note.as_deref().unwrap_or(""));
        }
    }
    for (name, t) in [("sandwiched", &r.sandwiched), ("pm", &r.pm)] {
        let _ = writeln!(s, "{name}: {}", t.verdict());
        if let Some(n) = t.note() {
            let _ = writeln!(s, "  {n}");
        }
        if let Some(c) = t.certificate() {
            transcript(&mut s, c);
        }
    }
    for (mode, e) in [("s", &r.embeddings.s), ("p", &r.embeddings.p)] {
        if let Some(e) = e {
            let _ = writeln!(s, "{mode}-embedding:");
            for line in e.lines().filter(|l| l.contains(':')) {
                let _ = writeln!(s, "  {line}");
            }
        }
    }
    if let Some(f) = &r.fiber {
        let _ = writeln!(
            s,
            "fiber: euler {}, boundary {}, genus {}, planar {}",
            f.euler, f.total_boundary, f.genus, f.planar
        );
    }
    let _ = writeln!(s, "elapsed: {} ms", r.metadata.elapsed_ms);
    s
}

fn framings(g: &PlumbingGraph) -> String {
    if g.is_empty() {
        return "(empty)".into();
    }
    g.vertices()
        .iter()
        .map(|v| format!("{}:{}", v.id, v.framing))
        .collect::<Vec<_>>()
        .join(" ")
}

fn transcript(s: &mut String, c: &SandwichCertificate) {
    for (h, l) in &c.added_leaves {
        let _ = writeln!(s, "  add (-1)-leaf {l} at {h}");
    }
    let Ok(states) = c.blowdown.replay_states(&c.augmented) else {
        let _ = writeln!(s, "  certificate does not replay");
        return;
    };
    let _ = writeln!(s, "  start  {}", framings(&states[0]));
    for (m, g) in c.blowdown.moves.iter().zip(&states[1..]) {
        let _ = writeln!(s, "  {m:<6} {}", framings(g));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::parse_graph;

    fn d4() -> PlumbingGraph {
        parse_graph("vertex c -2\nvertex a -2\nvertex b -2\nvertex d -2\nedge c a\nedge c b\nedge c d\n").unwrap()
    }

    #[test]
    fn d4_json_shape() {
        let r = classify(&d4(), &ClassifyOptions::default()).unwrap();
        let v: serde_json::Value = serde_json::from_str(&emit_report(&r, Format::Json)).unwrap();
        assert_eq!(v["schema"], 1);
        assert_eq!(v["sandwiched"], false);
        assert_eq!(v["pm"]["value"], true);
        assert_eq!(v["pm"]["certificate"]["target"], "zero_vertex");
        assert_eq!(v["rationality"]["value"], true);
        assert!(v["embeddings"]["p"].is_string());
    }

    #[test]
    fn inconclusive_carries_budget() {
        let g = parse_graph("vertex c -2\nvertex a -2\nvertex b -3\nvertex d -2\nedge c a\nedge c b\nedge c d\n").unwrap();
        let mut o = ClassifyOptions::default();
        o.decide.search.node_limit = Some(0);
        o.decide.cross_check_max = 0;
        let r = classify(&g, &o).unwrap();
        let v: serde_json::Value = serde_json::from_str(&emit_report(&r, Format::Json)).unwrap();
        assert_eq!(v["sandwiched"], "inconclusive");
        assert_eq!(v["metadata"]["budget"]["node_limit"], 0);
        assert_eq!(v["metadata"]["budget"]["exhausted"], true);
    }

    #[test]
    fn text_replays_moves() {
        let r = classify(&d4(), &ClassifyOptions::default()).unwrap();
        let t = emit_report(&r, Format::Text);
        let cert = r.pm.certificate().unwrap();
        for m in &cert.blowdown.moves {
            assert!(t.contains(&format!("  {m}")));
        }
        assert!(t.contains("sandwiched: false"));
    }
}
