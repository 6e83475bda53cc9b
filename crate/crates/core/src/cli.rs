//! Command-line front end. [`run`] never prints; it returns the exit code
//! and both output streams so tests can drive it directly.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 domain error (the graph
//! or data is well formed but not of the kind the command needs).

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use serde_json::Value;

use crate::cupflow::vanishing_minor;
use crate::equivalence::{compare, essential_graph, Comparison};
use crate::error::Error;
use crate::graph::{classify, parse_graph, HybridGraph};
use crate::imset::standard_imset;
use crate::numeric::{
    concentration, maximal_invariant, parse_csv, sample_data, sample_parameters, sampled_minors, DenseMatrix,
};
use crate::symmetry::{breakdown_bound, group_description};
use crate::vertex_set::VertexSet;

#[derive(Debug, Parser)]
#[command(
    name = "nfcg",
    version,
    about = "Equivalence, symmetry and vanishing minors of chain graphs without flags"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the graph class.
    Validate { graph: PathBuf },
    /// Print the essential graph in the graph file format.
    Essential { graph: PathBuf },
    /// Decide Markov equivalence of two graphs.
    Equivalent { first: PathBuf, second: PathBuf },
    /// Print the standard imset of a DAG.
    Imset { graph: PathBuf },
    /// Describe the symmetry group of the model.
    Group {
        graph: PathBuf,
        /// Sample size for the breakdown bound.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        json: bool,
    },
    /// Decide whether det K[rows, cols] vanishes on the model.
    Vanishing {
        graph: PathBuf,
        /// Comma-separated 1-based vertices, e.g. 1,2
        #[arg(long)]
        rows: String,
        #[arg(long)]
        cols: String,
        /// Also evaluate the minor at random parameters.
        #[arg(long)]
        numeric: bool,
        #[arg(long, default_value_t = 5)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Print the maximal invariant of a data set.
    Invariant {
        graph: PathBuf,
        /// CSV file with one variable per line.
        #[arg(long)]
        data: PathBuf,
    },
    /// Print a random concentration matrix, or a data sample with --data.
    Sample {
        graph: PathBuf,
        #[arg(long)]
        seed: u64,
        /// Number of observations.
        #[arg(long)]
        data: Option<usize>,
    },
}

/// Failure with its exit code and message.
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: 1,
            message: message.into(),
        }
    }

    fn from_lib(context: &str, e: Error) -> Self {
        let code = if e.is_domain_error() { 2 } else { 1 };
        let message = if context.is_empty() {
            e.to_string()
        } else {
            format!("{context}: {e}")
        };
        Failure { code, message }
    }
}

type CmdResult = std::result::Result<String, Failure>;

/// Runs the tool on `argv` (including the program name).
pub fn run<I, T>(argv: I) -> (i32, String, String)
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => (0, rendered, String::new()),
                _ => (1, String::new(), rendered),
            };
        }
    };
    match dispatch(cli.command) {
        Ok(out) => (0, out, String::new()),
        Err(f) => (f.code, String::new(), format!("error: {}\n", f.message)),
    }
}

fn read_graph(path: &Path) -> std::result::Result<HybridGraph, Failure> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
    parse_graph(&text).map_err(|e| Failure::from_lib(&path.display().to_string(), e))
}

/// Parses a comma-separated list of 1-based vertices for `flag`.
fn parse_vertex_list(flag: &str, text: &str, m: usize) -> std::result::Result<VertexSet, Failure> {
    let mut set = VertexSet::EMPTY;
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let v: usize = part
            .parse()
            .map_err(|_| Failure::usage(format!("--{flag}: '{part}' is not a vertex number")))?;
        if v == 0 || v > m {
            return Err(Failure::usage(format!("--{flag}: vertex {v} out of range 1..{m}")));
        }
        if set.contains(v - 1) {
            return Err(Failure::usage(format!("--{flag}: vertex {v} listed twice")));
        }
        set.insert(v - 1);
    }
    Ok(set)
}

fn dispatch(command: Command) -> CmdResult {
    match command {
        Command::Validate { graph } => {
            let h = read_graph(&graph)?;
            Ok(format!("{}\n", classify(&h)))
        }
        Command::Essential { graph } => {
            let h = read_graph(&graph)?;
            let ess = essential_graph(&h).map_err(|e| Failure::from_lib("", e))?;
            Ok(ess.graph.serialize())
        }
        Command::Equivalent { first, second } => {
            let (g, h) = (read_graph(&first)?, read_graph(&second)?);
            if g.m() != h.m() {
                return Ok("not equivalent: vertex counts differ\n".into());
            }
            let verdict = compare(&g, &h).map_err(|e| Failure::from_lib("", e))?;
            Ok(match verdict {
                Comparison::Equivalent => "equivalent\n",
                Comparison::SkeletonMismatch => "not equivalent: skeletons differ\n",
                Comparison::ImmoralityMismatch => "not equivalent: immoralities differ\n",
            }
            .into())
        }
        Command::Imset { graph } => {
            let h = read_graph(&graph)?;
            let u = standard_imset(&h).map_err(|e| Failure::from_lib("", e))?;
            Ok(u.to_string())
        }
        Command::Group { graph, n, json } => group(&graph, n, json),
        Command::Vanishing {
            graph,
            rows,
            cols,
            numeric,
            trials,
            seed,
            tol,
        } => {
            let h = read_graph(&graph)?;
            let a = parse_vertex_list("rows", &rows, h.m())?;
            let b = parse_vertex_list("cols", &cols, h.m())?;
            if a.len() != b.len() {
                return Err(Failure::usage(format!(
                    "--rows has {} vertices but --cols has {}",
                    a.len(),
                    b.len()
                )));
            }
            if numeric && (trials == 0 || tol.is_nan() || tol <= 0.0) {
                return Err(Failure::usage(
                    "--trials must be positive and --tol must be a positive number",
                ));
            }
            let vanishes = vanishing_minor(&h, a, b).map_err(|e| Failure::from_lib("", e))?;
            let mut out = format!("rows: {a}\ncols: {b}\nvanishes: {}\n", yes_no(vanishes));
            if numeric {
                let dets = sampled_minors(&h, a, b, trials, seed).map_err(|e| Failure::from_lib("", e))?;
                let max = dets.iter().fold(0.0f64, |m, &d| m.max(d));
                let _ = writeln!(out, "numeric_vanishes: {}", yes_no(max < tol));
                let _ = writeln!(out, "max_abs_det: {max:e}");
            }
            Ok(out)
        }
        Command::Invariant { graph, data } => {
            let h = read_graph(&graph)?;
            let text = std::fs::read_to_string(&data)
                .map_err(|e| Failure::usage(format!("cannot read {}: {e}", data.display())))?;
            let x = parse_csv(&text).map_err(|e| Failure::from_lib(&data.display().to_string(), e))?;
            let inv = maximal_invariant(&h, &x).map_err(|e| Failure::from_lib("", e))?;
            let mut out = String::new();
            for ((class, down), p) in inv.classes.iter().zip(&inv.down_sets).zip(&inv.projections) {
                let _ = writeln!(out, "class {class} down_set {down}");
                out.push_str(&p.to_string());
            }
            Ok(out)
        }
        Command::Sample { graph, seed, data } => {
            let h = read_graph(&graph)?;
            let m: DenseMatrix = match data {
                None => sample_parameters(&h, seed).map(|p| concentration(&p)),
                Some(n) => sample_data(&h, seed, n),
            }
            .map_err(|e| Failure::from_lib("", e))?;
            Ok(to_csv(&m))
        }
    }
}

fn group(path: &Path, n: Option<usize>, json: bool) -> CmdResult {
    let h = read_graph(path)?;
    let desc = group_description(&h).map_err(|e| Failure::from_lib("", e))?;
    let bound = match n {
        Some(n) => Some(breakdown_bound(&h, n).map_err(|e| Failure::from_lib("--n", e))?),
        None => None,
    };
    if json {
        let mut v = desc.to_json();
        if let (Some(b), Value::Object(map)) = (bound, &mut v) {
            map.insert("breakdown_bound".into(), Value::String(b.to_string()));
        }
        return Ok(format!("{}\n", serde_json::to_string_pretty(&v).expect("serializable")));
    }
    let mut out = desc.to_string();
    if let Some(b) = bound {
        let _ = writeln!(out, "breakdown_bound: {b}");
    }
    Ok(out)
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

/// Comma-separated rows, readable by [`parse_csv`].
fn to_csv(m: &DenseMatrix) -> String {
    let mut out = String::new();
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(|v| format!("{v}")).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}
