//! Line-oriented text formats. Every format ignores blank lines and `#`
//! comments; tokens are separated by whitespace.
//!
//! ```text
//! vertex <id> <framing> [genus]      edge <id> <id>      arrow <id> <mult>
//! bu_v <id> [as <id>]   bu_e <id> <id> [as <id>]   bd <id>   seed <id> <framing>
//! mode s|p   basis <n>   <id> : [+k] [- k1 k2 ...]
//! coeff <id> <n>
//! page disk|sphere   hole <id>   orbit <id> <holes..>   cycle <id> <holes..>   interchange <hole> <hole>
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::str::FromStr;

use crate::birational::{Construction, Move, MoveSequence};
use crate::embedding::{Embedding, Image, Mode};
use crate::graph::{PlumbingGraph, VertexId};
use crate::lattice::Divisor;
use crate::nlf::{Factorization, Orbit, PageShape, VanishingCycle};
use crate::{Error, Result};

struct Token<'a> {
    text: &'a str,
    column: usize,
}

struct Line<'a> {
    number: usize,
    tokens: Vec<Token<'a>>,
    end: usize,
}

impl<'a> Line<'a> {
    fn err(&self, column: usize, message: impl Into<String>) -> Error {
        Error::Syntax {
            line: self.number,
            column,
            message: message.into(),
        }
    }

    fn keyword(&self) -> &'a str {
        self.tokens[0].text
    }

    fn arity(&self, min: usize, max: usize) -> Result<()> {
        let n = self.tokens.len() - 1;
        if n < min {
            return Err(self.err(self.end, format!("`{}` expects at least {min} arguments", self.keyword())));
        }
        if n > max {
            let t = &self.tokens[max + 1];
            return Err(self.err(t.column, format!("unexpected `{}`", t.text)));
        }
        Ok(())
    }

    fn id(&self, k: usize) -> Result<VertexId> {
        let t = &self.tokens[k];
        if VertexId::is_well_formed(t.text) {
            Ok(VertexId::new(t.text))
        } else {
            Err(self.err(t.column, format!("`{}` is not a valid id", t.text)))
        }
    }

    fn num<T: FromStr>(&self, k: usize) -> Result<T> {
        let t = &self.tokens[k];
        t.text
            .parse()
            .map_err(|_| self.err(t.column, format!("`{}` is not a valid number", t.text)))
    }
}

fn lines(text: &str) -> impl Iterator<Item = Line<'_>> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let body = raw.split('#').next().unwrap_or("");
        let mut tokens = Vec::new();
        let mut start = None;
        for (col, ch) in body.char_indices().chain(std::iter::once((body.len(), ' '))) {
            match (ch.is_whitespace(), start) {
                (false, None) => start = Some(col),
                (true, Some(s)) => {
                    tokens.push(Token {
                        text: &body[s..col],
                        column: body[..s].chars().count() + 1,
                    });
                    start = None;
                }
                _ => {}
            }
        }
        (!tokens.is_empty()).then(|| Line {
            number: i + 1,
            tokens,
            end: body.chars().count() + 1,
        })
    })
}

fn unknown(l: &Line) -> Error {
    l.err(1, format!("unknown keyword `{}`", l.keyword()))
}

pub fn parse_graph(text: &str) -> Result<PlumbingGraph> {
    let mut g = PlumbingGraph::new();
    let mut edges = Vec::new();
    let mut arrows = Vec::new();
    for l in lines(text) {
        match l.keyword() {
            "vertex" => {
                l.arity(2, 3)?;
                let genus = if l.tokens.len() == 4 { l.num(3)? } else { 0 };
                g.add_vertex_with_genus(l.id(1)?, l.num(2)?, genus)?;
            }
            "edge" => {
                l.arity(2, 2)?;
                edges.push((l.id(1)?, l.id(2)?));
            }
            "arrow" => {
                l.arity(2, 2)?;
                let m: u64 = l.num(2)?;
                if m == 0 {
                    return Err(l.err(l.tokens[2].column, "arrow multiplicity must be positive"));
                }
                arrows.push((l.id(1)?, m));
            }
            _ => return Err(unknown(&l)),
        }
    }
    for (a, b) in edges {
        g.add_edge(a, b)?;
    }
    for (a, m) in arrows {
        g.add_arrow(a, m)?;
    }
    Ok(g)
}

pub fn emit_graph(g: &PlumbingGraph) -> String {
    let mut s = String::new();
    for v in g.vertices() {
        if v.genus == 0 {
            let _ = writeln!(s, "vertex {} {}", v.id, v.framing);
        } else {
            let _ = writeln!(s, "vertex {} {} {}", v.id, v.framing, v.genus);
        }
    }
    for (i, j) in g.edges() {
        let _ = writeln!(s, "edge {} {}", g.id(i), g.id(j));
    }
    for a in g.arrows() {
        let _ = writeln!(s, "arrow {} {}", a.at, a.multiplicity);
    }
    s
}

fn parse_move(l: &Line) -> Result<Move> {
    let (m, rest) = match l.keyword() {
        "bu_v" if l.tokens.len() >= 2 => (Move::blow_up_vertex(l.id(1)?), 2),
        "bu_e" if l.tokens.len() >= 3 => (Move::blow_up_edge(l.id(1)?, l.id(2)?), 3),
        "bd" => {
            l.arity(1, 1)?;
            return Ok(Move::blow_down(l.id(1)?));
        }
        "bu_v" | "bu_e" => return Err(l.err(l.end, format!("`{}` is missing its locus", l.keyword()))),
        _ => return Err(unknown(l)),
    };
    match l.tokens.len() - rest {
        0 => Ok(m),
        2 if l.tokens[rest].text == "as" => Ok(m.creating(l.id(rest + 1)?)),
        _ => Err(l.err(l.tokens[rest].column, "expected `as <id>` or end of line")),
    }
}

pub fn parse_moves(text: &str) -> Result<MoveSequence> {
    lines(text).map(|l| parse_move(&l)).collect::<Result<_>>().map(MoveSequence::new)
}

pub fn emit_moves(s: &MoveSequence) -> String {
    s.to_string()
}

/// A `seed` line followed by blowup moves.
pub fn parse_construction(text: &str) -> Result<Construction> {
    let mut it = lines(text);
    let Some(first) = it.next() else {
        return Err(Error::Syntax {
            line: 1,
            column: 1,
            message: "missing `seed` line".into(),
        });
    };
    if first.keyword() != "seed" {
        return Err(first.err(1, "a construction starts with `seed <id> <framing>`"));
    }
    first.arity(2, 2)?;
    let mut moves = Vec::new();
    for l in it {
        let m = parse_move(&l)?;
        if matches!(m.kind, crate::birational::MoveKind::BlowDown(_)) {
            return Err(l.err(1, "constructions only blow up"));
        }
        moves.push(m);
    }
    Ok(Construction::new(first.id(1)?, first.num(2)?, moves))
}

pub fn emit_construction(c: &Construction) -> String {
    c.to_string()
}

pub fn parse_embedding(text: &str) -> Result<Embedding> {
    let mut mode = None;
    let mut basis = None;
    let mut images: Vec<(VertexId, Image)> = Vec::new();
    let mut seen = BTreeSet::new();
    for l in lines(text) {
        match l.keyword() {
            "mode" => {
                l.arity(1, 1)?;
                mode = Some(match l.tokens[1].text {
                    "s" => Mode::S,
                    "p" => Mode::P,
                    t => return Err(l.err(l.tokens[1].column, format!("unknown mode `{t}`"))),
                });
            }
            "basis" => {
                l.arity(1, 1)?;
                basis = Some(l.num::<usize>(1)?);
            }
            _ => {
                let id = l.id(0)?;
                if l.tokens.get(1).map(|t| t.text) != Some(":") {
                    return Err(l.err(l.tokens.get(1).map_or(l.end, |t| t.column), "expected `:`"));
                }
                let mut positive = None;
                let mut negatives = BTreeSet::new();
                let mut in_neg = false;
                for (k, t) in l.tokens.iter().enumerate().skip(2) {
                    if t.text == "-" && !in_neg {
                        in_neg = true;
                    } else if let Some(p) = t.text.strip_prefix('+').filter(|_| !in_neg && positive.is_none()) {
                        let v: usize = p.parse().map_err(|_| l.err(t.column, "bad basis index"))?;
                        positive = Some(index(&l, k, v)?);
                    } else if in_neg {
                        let v: usize = l.num(k)?;
                        negatives.insert(index(&l, k, v)?);
                    } else {
                        return Err(l.err(t.column, format!("unexpected `{}`", t.text)));
                    }
                }
                if !seen.insert(id.clone()) {
                    return Err(Error::DuplicateId(id));
                }
                images.push((id, Image::with_negatives(positive, negatives)));
            }
        }
    }
    let used = images
        .iter()
        .flat_map(|(_, im)| im.positive.iter().chain(&im.negatives).copied())
        .max()
        .map_or(0, |m| m + 1);
    let basis_size = basis.unwrap_or(used);
    if basis_size < used {
        return Err(Error::DimensionMismatch(format!(
            "basis {basis_size} is smaller than index {used}"
        )));
    }
    Ok(Embedding {
        mode: mode.unwrap_or(Mode::S),
        basis_size,
        images,
    })
}

fn index(l: &Line, k: usize, v: usize) -> Result<usize> {
    v.checked_sub(1)
        .ok_or_else(|| l.err(l.tokens[k].column, "basis indices start at 1"))
}

pub fn emit_embedding(e: &Embedding) -> String {
    let mode = match e.mode {
        Mode::S => "s",
        Mode::P => "p",
    };
    format!("mode {mode}\nbasis {}\n{e}", e.basis_size)
}

pub fn parse_divisor(text: &str) -> Result<Divisor> {
    let mut d = BTreeMap::new();
    for l in lines(text) {
        if l.keyword() != "coeff" {
            return Err(unknown(&l));
        }
        l.arity(2, 2)?;
        let id = l.id(1)?;
        if d.insert(id.clone(), l.num(2)?).is_some() {
            return Err(Error::DuplicateId(id));
        }
    }
    Ok(Divisor(d))
}

pub fn emit_divisor(d: &Divisor) -> String {
    d.0.iter().map(|(k, v)| format!("coeff {k} {v}\n")).collect()
}

pub fn parse_factorization(text: &str) -> Result<Factorization> {
    let mut page = None;
    let mut holes: Vec<String> = Vec::new();
    let mut pending = Vec::new();
    for l in lines(text) {
        match l.keyword() {
            "page" => {
                l.arity(1, 1)?;
                page = Some(match l.tokens[1].text {
                    "disk" => PageShape::Disk,
                    "sphere" => PageShape::Sphere,
                    t => return Err(l.err(l.tokens[1].column, format!("unknown page `{t}`"))),
                });
            }
            "hole" => {
                l.arity(1, 1)?;
                let id = l.id(1)?;
                if holes.iter().any(|h| h == id.as_str()) {
                    return Err(Error::DuplicateId(id));
                }
                holes.push(id.to_string());
            }
            "orbit" | "cycle" | "interchange" => pending.push(l),
            _ => return Err(unknown(&l)),
        }
    }
    let page = page.ok_or(Error::Syntax {
        line: 1,
        column: 1,
        message: "missing `page` line".into(),
    })?;
    let hole = |l: &Line, k: usize| -> Result<usize> {
        let id = l.id(k)?;
        holes
            .iter()
            .position(|h| h == id.as_str())
            .ok_or(Error::DanglingReference(id))
    };
    let (mut orbits, mut cycles, mut interchanges) = (Vec::new(), Vec::new(), Vec::new());
    for l in &pending {
        match l.keyword() {
            "orbit" | "cycle" => {
                l.arity(2, usize::MAX - 1)?;
                let id = l.id(1)?.to_string();
                let hs = (2..l.tokens.len()).map(|k| hole(l, k)).collect::<Result<Vec<_>>>()?;
                if l.keyword() == "orbit" {
                    orbits.push(Orbit { id, holes: hs });
                } else {
                    let encloses: BTreeSet<usize> = hs.iter().copied().collect();
                    if encloses.len() != hs.len() {
                        return Err(l.err(1, "cycle lists a hole twice"));
                    }
                    cycles.push(VanishingCycle { id, encloses });
                }
            }
            _ => {
                l.arity(2, 2)?;
                interchanges.push((hole(l, 1)?, hole(l, 2)?));
            }
        }
    }
    Factorization::new(page, holes, orbits, cycles, interchanges)
}

pub fn emit_factorization(f: &Factorization) -> String {
    let mut s = format!("page {}\n", f.page);
    for h in &f.holes {
        let _ = writeln!(s, "hole {h}");
    }
    let names = |hs: &mut dyn Iterator<Item = &usize>| -> String {
        hs.map(|&h| f.holes[h].as_str()).collect::<Vec<_>>().join(" ")
    };
    for o in &f.orbits {
        let _ = writeln!(s, "orbit {} {}", o.id, names(&mut o.holes.iter()));
    }
    for c in &f.cycles {
        let _ = writeln!(s, "cycle {} {}", c.id, names(&mut c.encloses.iter()));
    }
    for &(a, b) in &f.interchanges {
        let _ = writeln!(s, "interchange {} {}", f.holes[a], f.holes[b]);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_of_two() {
        let g = parse_graph("vertex a -2\nvertex b -2\nedge a b").unwrap();
        assert_eq!(g.len(), 2);
        assert!(g.has_edge(0, 1));
        assert_eq!(parse_graph(&emit_graph(&g)).unwrap(), g);
    }

    #[test]
    fn graph_errors() {
        assert_eq!(parse_graph("edge a b"), Err(Error::DanglingReference("a".into())));
        assert_eq!(parse_graph("vertex a -1\nvertex a -2"), Err(Error::DuplicateId("a".into())));
        let e = parse_graph("# header\nvertex a -2\n  vertex b x\n").unwrap_err();
        assert_eq!(e, Error::Syntax { line: 3, column: 12, message: "`x` is not a valid number".into() });
        let e = parse_graph("vertex a-b -2").unwrap_err();
        assert!(matches!(e, Error::Syntax { line: 1, column: 8, .. }));
        let e = parse_graph("vertex a").unwrap_err();
        assert!(matches!(e, Error::Syntax { line: 1, column: 9, .. }));
        let e = parse_graph("node a -2").unwrap_err();
        assert!(matches!(e, Error::Syntax { line: 1, column: 1, .. }));
    }

    #[test]
    fn genus_and_arrows_round_trip() {
        let text = "vertex a -1 2 # comment\nvertex b -3\nedge b a\narrow b 2\narrow b 1\n";
        let g = parse_graph(text).unwrap();
        assert_eq!(g.vertex(0).genus, 2);
        let out = emit_graph(&g);
        assert_eq!(out, "vertex a -1 2\nvertex b -3\nedge a b\narrow b 2\narrow b 1\n");
        assert_eq!(emit_graph(&parse_graph(&out).unwrap()), out);
    }

    #[test]
    fn moves_and_constructions() {
        let s = parse_moves("bu_v a\nbu_e a b as x\n\nbd x\n").unwrap();
        assert_eq!(s.moves.len(), 3);
        assert_eq!(parse_moves(&emit_moves(&s)).unwrap(), s);
        assert!(parse_moves("bu_e a").is_err());
        assert!(parse_moves("bd a b").is_err());
        assert!(parse_moves("bu_v a at b").is_err());
        let c = parse_construction("seed s 0\nbu_v s\n").unwrap();
        assert_eq!(c.seed_framing, 0);
        assert_eq!(parse_construction(&emit_construction(&c)).unwrap(), c);
        assert!(parse_construction("seed s 0\nbd s").is_err());
    }

    #[test]
    fn embeddings_round_trip() {
        let text = "mode p\nbasis 4\nc : +1 - 2 3\na : - 1\nb : +4\n";
        let e = parse_embedding(text).unwrap();
        assert_eq!(e.mode, Mode::P);
        assert_eq!(e.images[0].1, Image::with_negatives(Some(0), [1, 2]));
        assert_eq!(e.images[1].1, Image::with_negatives(None, [0]));
        assert_eq!(emit_embedding(&e), text);
        assert!(parse_embedding("c : +0").is_err());
        assert!(parse_embedding("basis 1\nc : +2").is_err());
    }

    #[test]
    fn divisors() {
        let d = parse_divisor("coeff a 2\ncoeff b 1\n").unwrap();
        assert_eq!(d.get(&"a".into()), 2);
        assert_eq!(parse_divisor(&emit_divisor(&d)).unwrap(), d);
        assert!(parse_divisor("coeff a 1\ncoeff a 2").is_err());
    }

    #[test]
    fn factorizations() {
        let text = "page disk\nhole h1\nhole h2\norbit o h1 h2\ncycle a0 h1 h2\ncycle a1 h1\ninterchange h1 h2\n";
        let f = parse_factorization(text).unwrap();
        assert_eq!(f.cycles.len(), 2);
        assert_eq!(emit_factorization(&f), text);
        assert!(matches!(
            parse_factorization("page disk\nhole h1\norbit o h1 h9"),
            Err(Error::DanglingReference(_))
        ));
        assert!(parse_factorization("hole h1").is_err());
    }
}
