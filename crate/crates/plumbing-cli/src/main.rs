use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use plumbing::birational::Target;
use plumbing::embedding::{find_embedding_with, Mode, SearchOptions, SearchResult};
use plumbing::io::{emit_embedding, emit_graph, parse_divisor, parse_factorization, parse_graph, parse_moves};
use plumbing::milnor::fiber_invariants;
use plumbing::nlf::{check_admissible, classify_sphere_classes, h1_w0, h2_kernel, intersection_form};
use plumbing::report::{classify, emit_report, ClassifyOptions, Format};
use plumbing::PlumbingGraph;

#[derive(Parser)]
#[command(name = "plumbing", version, about = "Classify plumbing graphs of surface singularities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Print JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Cap on embedding search placements; exhausting it yields "inconclusive".
    #[arg(long, global = true)]
    budget: Option<u64>,
    /// Recorded in reports; decisions never depend on it.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Rationality, sandwiched and pm decisions with certificates.
    Classify {
        file: PathBuf,
        /// Divisor file for fiber invariants.
        #[arg(long)]
        divisor: Option<PathBuf>,
    },
    /// Search for an s- or p-embedding.
    Embed {
        file: PathBuf,
        #[arg(long, value_enum)]
        mode: ModeArg,
    },
    /// Euler characteristic, boundary and genus of the Milnor fiber.
    Fiber { graph: PathBuf, divisor: PathBuf },
    /// Homology of a nearly Lefschetz factorization.
    Nlf { file: PathBuf },
    /// Apply a move file to a graph, showing every step.
    Replay { graph: PathBuf, moves: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    S,
    P,
}

fn read(p: &Path) -> Result<String> {
    std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))
}

fn graph(p: &Path) -> Result<PlumbingGraph> {
    parse_graph(&read(p)?).with_context(|| format!("parsing {}", p.display()))
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let search = SearchOptions {
        node_limit: cli.budget,
        ..SearchOptions::default()
    };
    match &cli.command {
        Command::Classify { file, divisor } => {
            let g = graph(file)?;
            let mut opts = ClassifyOptions {
                seed: cli.seed,
                ..ClassifyOptions::default()
            };
            opts.decide.search = search;
            if let Some(d) = divisor {
                opts.divisor = Some(parse_divisor(&read(d)?)?);
            }
            let r = classify(&g, &opts)?;
            let format = if cli.json { Format::Json } else { Format::Text };
            println!("{}", emit_report(&r, format).trim_end());
        }
        Command::Embed { file, mode } => {
            let g = graph(file)?;
            let mode = match mode {
                ModeArg::S => Mode::S,
                ModeArg::P => Mode::P,
            };
            let (status, text) = match find_embedding_with(&g, mode, &search)? {
                SearchResult::Found(e) => ("found", Some(emit_embedding(&e))),
                SearchResult::Absent => ("none", None),
                SearchResult::BudgetExceeded(_) => ("inconclusive", None),
            };
            if cli.json {
                println!("{}", json!({ "schema": 1, "status": status, "embedding": text }));
            } else {
                match text {
                    Some(t) => print!("{t}"),
                    None => println!("{status}"),
                }
            }
        }
        Command::Fiber { graph: gp, divisor } => {
            let g = graph(gp)?;
            let d = parse_divisor(&read(divisor)?)?;
            let f = fiber_invariants(&g, &d)?;
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&json!({ "schema": 1, "fiber": f }))?);
            } else {
                println!("euler {}", f.euler);
                for b in &f.boundary_components {
                    println!("arrow {} {}: {} boundary circles", b.at, b.multiplicity, b.count);
                }
                println!("boundary {}\ngenus {}\nplanar {}", f.total_boundary, f.genus, f.planar);
            }
        }
        Command::Nlf { file } => {
            let f = parse_factorization(&read(file)?)?;
            if let Err(v) = check_admissible(&f) {
                if cli.json {
                    println!("{}", json!({ "schema": 1, "admissible": false, "violation": v.to_string() }));
                } else {
                    println!("admissible: false ({v})");
                }
                std::process::exit(2);
            }
            let h1 = h1_w0(&f)?;
            let (free, torsion) = h1.structure();
            let basis = h2_kernel(&f)?;
            let gram = intersection_form(&basis)?;
            let spheres = classify_sphere_classes(&f)?;
            if cli.json {
                let show = |cs: &[plumbing::nlf::HomologyClass]| -> Vec<serde_json::Value> {
                    cs.iter()
                        .map(|c| json!({ "w": c.w, "a": c.a, "text": c.describe(&f) }))
                        .collect()
                };
                let v = json!({
                    "schema": 1,
                    "admissible": true,
                    "h1": { "generators": h1.generators, "relations": h1.relations, "free_rank": free, "torsion": torsion },
                    "h2_basis": show(&basis),
                    "intersection_form": gram,
                    "sphere_classes": show(&spheres),
                });
                println!("{}", serde_json::to_string_pretty(&v)?);
            } else {
                println!("admissible: true");
                println!("H1(W0): free rank {free}, torsion {torsion:?}");
                println!("H2(W) basis:");
                for c in &basis {
                    println!("  {}", c.describe(&f));
                }
                println!("intersection form:");
                for row in &gram {
                    println!("  {row:?}");
                }
                println!("sphere classes:");
                for c in &spheres {
                    println!("  {}", c.describe(&f));
                }
            }
        }
        Command::Replay { graph: gp, moves } => {
            let g = graph(gp)?;
            let seq = parse_moves(&read(moves)?)?;
            let states = seq.replay_states(&g)?;
            let end = states.last().unwrap();
            let reached = [Target::Empty, Target::ZeroVertex].into_iter().find(|t| t.reached(end));
            if cli.json {
                let v = json!({ "schema": 1, "moves": seq.moves.len(), "final": emit_graph(end), "reached": reached });
                println!("{}", serde_json::to_string_pretty(&v)?);
            } else {
                for (m, s) in seq.moves.iter().zip(&states[1..]) {
                    println!("{m:<12} -> {} vertices", s.len());
                }
                print!("final:\n{}", emit_graph(end));
                match reached {
                    Some(Target::Empty) => println!("reached: empty graph"),
                    Some(Target::ZeroVertex) => println!("reached: single 0-framed vertex"),
                    None => {}
                }
            }
        }
    }
    Ok(())
}

