use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use traceable::binary::{build_table, sample_model};
use traceable::edge::{induced_regression, partial_closure};
use traceable::gaussian::{partial_inversion, structural_zero_audit};
use traceable::graph::classify_vs;
use traceable::independence::{markov_equivalent, separated};
use traceable::io;
use traceable::{Error, NodeSet, RegressionGraph};

#[derive(Parser)]
#[command(name = "traceable", version, about = "Induced graphs and independences of regression graph models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Out {
    Dot,
    Json,
    Text,
    Csv,
}

#[derive(Args)]
struct GraphArg {
    /// Graph file in `.rg` format.
    #[arg(long)]
    graph: PathBuf,
}

#[derive(Args)]
struct Split {
    /// The set `a` (marginalized / responses), comma-separated.
    #[arg(long, allow_hyphen_values = true)]
    margin: Option<String>,
    /// The set `b` (conditioned on / regressors), comma-separated.
    #[arg(long, allow_hyphen_values = true)]
    condition: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a graph file.
    Validate {
        #[command(flatten)]
        graph: GraphArg,
        #[arg(long, value_enum)]
        out: Option<Out>,
    },
    /// List the Vs of a graph with their types.
    Vs {
        #[command(flatten)]
        graph: GraphArg,
        #[arg(long, value_enum)]
        out: Option<Out>,
    },
    /// Induced edge matrices for the split (a, b).
    Induce {
        #[command(flatten)]
        graph: GraphArg,
        #[command(flatten)]
        split: Split,
        #[arg(long, value_enum)]
        out: Option<Out>,
    },
    /// Is `α _||_ β | c` implied by the graph?
    Query {
        #[command(flatten)]
        graph: GraphArg,
        #[arg(long)]
        query: String,
        #[arg(long, value_enum)]
        out: Option<Out>,
    },
    /// Markov equivalence of two graphs.
    Equiv {
        first: PathBuf,
        second: PathBuf,
        #[arg(long, value_enum)]
        out: Option<Out>,
    },
    /// Compare induced zeros with sampled Gaussian parameters.
    GaussianAudit {
        #[command(flatten)]
        graph: GraphArg,
        #[command(flatten)]
        split: Split,
        /// First of five consecutive seeds.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, value_enum)]
        out: Option<Out>,
    },
    /// Joint table of a symmetric binary model over a parent graph.
    BinaryTable {
        #[command(flatten)]
        graph: GraphArg,
        /// Coefficients as JSON keyed `"i<-j"`; sampled from `--seed` if absent.
        #[arg(long)]
        eta: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum)]
        out: Option<Out>,
    },
    /// Partial closure of an edge matrix on `--margin`.
    Closure {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        margin: String,
        #[arg(long, value_enum)]
        out: Option<Out>,
    },
    /// Partial inversion of a real matrix on `--margin`.
    Invert {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        margin: String,
        #[arg(long, value_enum)]
        out: Option<Out>,
    },
}

enum Failure {
    Usage(String),
    Domain(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(e.to_string())
    }
}

type Outcome = Result<String, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Domain(format!("cannot read {}: {e}", path.display())))
}

fn load_graph(path: &Path) -> Result<RegressionGraph, Failure> {
    io::parse_graph(&read(path)?).map_err(|e| Failure::Domain(format!("{}: {e}", path.display())))
}

fn pick(out: Option<Out>, default: Out, allowed: &[Out]) -> Result<Out, Failure> {
    let out = out.unwrap_or(default);
    if allowed.contains(&out) {
        Ok(out)
    } else {
        let names: Vec<String> = allowed.iter().filter_map(|o| o.to_possible_value()).map(|v| v.get_name().to_string()).collect();
        Err(Failure::Usage(format!("this command supports --out {}", names.join(", "))))
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("plain data");
    s.push('\n');
    s
}

/// The split `a` from `--margin` or `--condition`; the other side is the remainder.
fn split_a(graph: &RegressionGraph, split: &Split) -> Result<NodeSet, Failure> {
    let nodes = graph.nodes();
    let parse = |s: &str| io::parse_node_list(s).map_err(Failure::from);
    let check = |s: &NodeSet| match s.iter().find(|n| !nodes.contains(n)) {
        Some(n) => Err(Failure::Domain(Error::UnknownNode(*n).to_string())),
        None => Ok(()),
    };
    match (&split.margin, &split.condition) {
        (Some(m), None) => {
            let a = parse(m)?;
            check(&a)?;
            Ok(a)
        }
        (None, Some(c)) => {
            let b = parse(c)?;
            check(&b)?;
            Ok(nodes.difference(&b).copied().collect())
        }
        (Some(m), Some(c)) => {
            let (a, b) = (parse(m)?, parse(c)?);
            check(&a)?;
            check(&b)?;
            if !a.is_disjoint(&b) || a.len() + b.len() != nodes.len() {
                return Err(Failure::Domain(
                    Error::InvalidSplit("--margin and --condition must partition the nodes".into()).to_string(),
                ));
            }
            Ok(a)
        }
        (None, None) => Err(Failure::Usage("give --margin or --condition".into())),
    }
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Validate { graph, out } => {
            let out = pick(out, Out::Json, &[Out::Json, Out::Text, Out::Dot])?;
            let g = load_graph(&graph.graph)?;
            Ok(match out {
                Out::Dot => io::emit_dot(&g),
                Out::Text => io::emit_graph(&g),
                _ => pretty(&json!({
                    "valid": true,
                    "nodes": g.node_count(),
                    "blocks": g.blocks().responses.len() + usize::from(!g.blocks().context.is_empty()),
                    "edges": g.edges().len(),
                    "parent_graph": g.is_parent_graph(),
                })),
            })
        }
        Command::Vs { graph, out } => {
            let out = pick(out, Out::Json, &[Out::Json, Out::Text])?;
            let vs = classify_vs(&load_graph(&graph.graph)?)?;
            Ok(match out {
                Out::Text => vs.iter().map(|v| format!("{} {} {} {:?}\n", v.outer.0, v.inner, v.outer.1, v.kind)).collect(),
                _ => pretty(&serde_json::to_value(&vs).expect("plain data")),
            })
        }
        Command::Induce { graph, split, out } => {
            let out = pick(out, Out::Json, &[Out::Json, Out::Text, Out::Dot])?;
            let g = load_graph(&graph.graph)?;
            let a = split_a(&g, &split)?;
            let set = induced_regression(&g.h_matrix(), &g.w_matrix(), &a)?;
            Ok(match out {
                Out::Dot => io::emit_dot_induced(&set),
                Out::Text => format!(
                    "N_aa|b\n{}\nN_a|b\n{}\nN^bb.a\n{}",
                    io::edge_matrix_text(&set.cov_aa_given_b),
                    io::edge_matrix_text(&set.arrows_a_given_b),
                    io::edge_matrix_text(&set.con_bb)
                ),
                _ => pretty(&io::induced_json(&set)),
            })
        }
        Command::Query { graph, query, out } => {
            let out = pick(out, Out::Text, &[Out::Json, Out::Text])?;
            let g = load_graph(&graph.graph)?;
            let q = io::parse_query(&query)?;
            let verdict = if separated(&g, &q)? { "independent" } else { "dependent" };
            Ok(match out {
                Out::Json => pretty(&json!({ "query": q.to_string(), "result": verdict })),
                _ => format!("{verdict}\n"),
            })
        }
        Command::Equiv { first, second, out } => {
            let out = pick(out, Out::Text, &[Out::Json, Out::Text])?;
            let eq = markov_equivalent(&load_graph(&first)?, &load_graph(&second)?);
            Ok(match out {
                Out::Json => pretty(&json!({ "markov_equivalent": eq })),
                _ => format!("markov-equivalent: {eq}\n"),
            })
        }
        Command::GaussianAudit { graph, split, seed, tol, out } => {
            let out = pick(out, Out::Json, &[Out::Json, Out::Text])?;
            let g = load_graph(&graph.graph)?;
            let a = split_a(&g, &split)?;
            let seeds: Vec<u64> = (0..5).map(|k| seed.wrapping_add(k)).collect();
            let report = structural_zero_audit(&g, &a, &seeds, tol)?;
            Ok(match out {
                Out::Text => {
                    let mut s = format!(
                        "cells: {}\nviolated zeros: {}\nnon-structural zeros: {}\n",
                        report.cells.len(),
                        report.violations().count(),
                        report.non_structural_zeros().count()
                    );
                    for c in report.violations().chain(report.non_structural_zeros()) {
                        s.push_str(&format!("  {:?} ({}, {}) edge={} max|x|={:e}\n", c.part, c.i, c.j, c.edge, c.max_abs));
                    }
                    s
                }
                _ => {
                    let mut v = serde_json::to_value(&report).expect("plain data");
                    v["consistent"] = json!(report.is_consistent());
                    v["seeds"] = json!(seeds);
                    pretty(&v)
                }
            })
        }
        Command::BinaryTable { graph, eta, seed, out } => {
            let out = pick(out, Out::Json, &[Out::Json, Out::Csv])?;
            let g = load_graph(&graph.graph)?;
            let model = match eta {
                Some(path) => io::parse_eta(&g, &read(&path)?)?,
                None => sample_model(&g, seed)?,
            };
            let table = build_table(&model)?;
            Ok(match out {
                Out::Csv => io::table_csv(&table),
                _ => {
                    let mut v = io::table_json(&table);
                    v["eta"] = io::eta_json(&model);
                    pretty(&v)
                }
            })
        }
        Command::Closure { matrix, margin, out } => {
            let out = pick(out, Out::Json, &[Out::Json, Out::Text])?;
            let m = io::parse_edge_matrix(&read(&matrix)?)?;
            let a = io::parse_node_list(&margin)?;
            let z = partial_closure(&m, &a)?;
            Ok(match out {
                Out::Text => io::edge_matrix_text(&z),
                _ => pretty(&io::edge_matrix_json(&z)),
            })
        }
        Command::Invert { matrix, margin, out } => {
            let out = pick(out, Out::Json, &[Out::Json, Out::Text])?;
            let m = io::parse_real_matrix(&read(&matrix)?)?;
            let a = io::parse_node_list(&margin)?;
            let inv = partial_inversion(&m, &a)?;
            Ok(match out {
                Out::Text => io::real_matrix_text(&inv),
                _ => pretty(&io::real_matrix_json(&inv)),
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Domain(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
