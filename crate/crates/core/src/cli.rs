//! The `ksb` command line.
//!
//! Exit codes: 0 on success, 1 when the library reports an error (a JSON
//! record `{"error", "message"}` goes to stderr), 2 on bad usage.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::dot::{self, FrameStep};
use crate::enumerate::{self, EnumerationParams, Target};
use crate::error::{Error, Result};
use crate::frac::{parse_rational, Rational};
use crate::numerics;
use crate::prune::{prune_with_order, LeafPolicy, PruneTrace};
use crate::tree::PrunedTree;
use crate::weierstrass::{self, WeierstrassProfile};

#[derive(Parser, Debug)]
#[command(name = "ksb", version, about = "Sliced and pruned trees of elliptic surfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TargetArg {
    Sliced,
    Pruned,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a tree against the sliced-tree conditions.
    Validate {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Prune a tree to a stable one.
    Prune {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "id")]
        policy: String,
        /// Emit the whole trace instead of the final tree.
        #[arg(long)]
        trace: bool,
        #[arg(long)]
        json: Option<PathBuf>,
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Prune and emit the trace; `--dot` writes one frame per event, or per
    /// round with `--policy rounds`.
    Trace {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "id")]
        policy: String,
        #[arg(long)]
        json: Option<PathBuf>,
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// List every tree of a given height up to isomorphism.
    Enumerate {
        #[arg(long)]
        height: u32,
        #[arg(long, value_enum)]
        target: TargetArg,
        #[arg(long)]
        json: Option<PathBuf>,
        #[arg(long)]
        dot: Option<PathBuf>,
        #[arg(long, default_value_t = enumerate::DEFAULT_MAX_ENTRIES)]
        max_entries: usize,
        #[arg(long, default_value_t = enumerate::DEFAULT_MAX_VERTICES)]
        max_vertices: usize,
    },
    /// Classify the points of a Weierstrass profile.
    Classify {
        #[arg(long)]
        profile: PathBuf,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Window, volumes and dimension for height n.
    Formulas {
        #[arg(long)]
        n: i64,
        #[arg(long, num_args = 1..)]
        eps: Vec<String>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Write DOT for a tree or trace JSON file.
    ExportDot {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        dot: PathBuf,
    },
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "{}", error_record(&e));
            1
        }
    }
}

fn error_record(e: &Error) -> String {
    let mut rec = json!({ "error": e.kind(), "message": e.to_string() });
    if let Error::CapExceeded { partial, .. } = e {
        rec["partial"] = json!({
            "total": partial.total,
            "complete_through_vertices": partial.complete_through_vertices,
        });
    }
    rec.to_string()
}

fn read(path: &Path) -> Result<String> {
    Ok(fs::read_to_string(path)?)
}

fn emit(out: &mut dyn Write, dest: Option<&Path>, text: &str) -> Result<()> {
    match dest {
        Some(p) => fs::write(p, format!("{text}\n"))?,
        None => writeln!(out, "{text}")?,
    }
    Ok(())
}

fn pretty<T: Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)?)
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Validate { input, json } => {
            let tree = PrunedTree::from_json(&read(&input)?)?;
            let report = tree.validate();
            let tsm = if tree.is_marked() {
                None
            } else {
                tree.base().is_tsm_stable().ok()
            };
            let body = json!({
                "ok": report.ok,
                "violations": report.violations,
                "tsm_stable": tsm,
                "height": tree.height(),
                "sum_weights": tree.sum_weights(),
                "stable": report.ok && tree.is_stable(),
            });
            emit(out, json.as_deref(), &pretty(&body)?)?;
            if report.ok {
                Ok(0)
            } else {
                Err(Error::InvalidTree(report.summary()))
            }
        }
        Command::Prune {
            input,
            policy,
            trace,
            json,
            dot,
        } => {
            let t = run_prune(&input, &policy)?;
            let text = if trace {
                t.to_json()
            } else {
                t.final_tree.to_json()
            };
            emit(out, json.as_deref(), &text)?;
            if let Some(dir) = dot {
                dot::write_tree(&dir, "final", &t.final_tree)?;
            }
            Ok(0)
        }
        Command::Trace {
            input,
            policy,
            json,
            dot,
        } => {
            let t = run_prune(&input, &policy)?;
            emit(out, json.as_deref(), &t.to_json())?;
            if let Some(dir) = dot {
                let step = if policy == "rounds" {
                    FrameStep::PerRound
                } else {
                    FrameStep::PerEvent
                };
                dot::write_frames(&dir, &dot::trace_frames(&t, step)?)?;
            }
            Ok(0)
        }
        Command::Enumerate {
            height,
            target,
            json,
            dot,
            max_entries,
            max_vertices,
        } => {
            let target = match target {
                TargetArg::Sliced => Target::Sliced,
                TargetArg::Pruned => Target::Pruned,
            };
            let params = EnumerationParams::new(height, target)
                .max_entries(max_entries)
                .max_vertices(max_vertices);
            let census = enumerate::enumerate(&params)?;
            match json {
                Some(p) => {
                    fs::write(&p, census.to_json()? + "\n")?;
                    let summary = json!({
                        "height": census.height,
                        "target": census.target,
                        "total": census.total,
                        "counts": census.counts,
                    });
                    writeln!(out, "{}", pretty(&summary)?)?;
                }
                None => writeln!(out, "{}", census.to_json()?)?,
            }
            if let Some(dir) = dot {
                for (k, e) in census.entries.iter().enumerate() {
                    dot::write_tree(&dir, &format!("tree_{k:05}"), &e.tree()?)?;
                }
            }
            Ok(0)
        }
        Command::Classify { profile, json } => {
            let p = WeierstrassProfile::from_json(&read(&profile)?)?;
            let points = weierstrass::classify_profile(&p);
            let lc = match weierstrass::lc_factorize(&p) {
                Ok((q, m)) => json!({ "lc": true, "m": m, "minimal_height": q.n }),
                Err(Error::NotLC(label)) => json!({ "lc": false, "non_lc_point": label }),
                Err(e) => return Err(e),
            };
            let body = json!({ "n": p.n, "points": points, "factorization": lc });
            emit(out, json.as_deref(), &pretty(&body)?)?;
            Ok(0)
        }
        Command::Formulas { n, eps, json } => {
            let window = numerics::ksba_window(n)?;
            let mut rows = Vec::new();
            for e in &eps {
                let e: Rational = parse_rational(e)?;
                let (c, v) = numerics::epsilon_data(n, e)?;
                rows.push(json!({ "eps": e.to_string(), "c": c.to_string(), "v": v.to_string() }));
            }
            let body = json!({
                "n": n,
                "window": window,
                "ksb_volume": numerics::ksb_volume(n)?.to_string(),
                "dimension": numerics::moduli_dimension(n)?,
                "v_of_eps": rows,
            });
            emit(out, json.as_deref(), &pretty(&body)?)?;
            Ok(0)
        }
        Command::ExportDot { input, dot } => {
            let text = read(&input)?;
            let value: serde_json::Value = serde_json::from_str(&text)?;
            if value.get("events").is_some() {
                let trace: PruneTrace = serde_json::from_value(value)?;
                let frames = dot::trace_frames(&trace, FrameStep::PerEvent)?;
                let paths = dot::write_frames(&dot, &frames)?;
                writeln!(out, "wrote {} frames to {}", paths.len(), dot.display())?;
            } else {
                let tree = PrunedTree::from_json(&text)?;
                let path = dot::write_tree(&dot, "tree", &tree)?;
                writeln!(out, "wrote {}", path.display())?;
            }
            Ok(0)
        }
    }
}

fn run_prune(input: &Path, policy: &str) -> Result<PruneTrace> {
    let policy: LeafPolicy = policy.parse()?;
    let tree = PrunedTree::from_json(&read(input)?)?;
    prune_with_order(tree, &policy)
}
