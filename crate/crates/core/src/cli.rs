//! Batch front end. Each invocation prints a single JSON report on stdout; DOT and
//! ball JSON go to files named by `--dot` / `--json`.
//!
//! Exit codes: 0 success or Found, 2 usage, 3 NonExistent, 4 BudgetExceeded,
//! 5 library error.

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use num_rational::Ratio;
use serde::Serialize;
use serde_json::{json, Value};

use crate::cayley::{
    build_ball, convergence_check, kernel_disagreement, local_agreement_radius, BallOptions, MarkedGroup,
    DEFAULT_WORD_BUDGET,
};
use crate::families::{bowditch_metric_report, bowditch_word, e_word, BowditchParams, Selector};
use crate::golden::golden_suite;
use crate::oracles::{check_metric_condition, symmetrize, Presentation};
use crate::qiwitness::{
    check_witness, identity_witness, qi_scan, search_witness, SearchOutcome, WitnessPair, DEFAULT_NODE_BUDGET,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NONEXISTENT: i32 = 3;
pub const EXIT_BUDGET: i32 = 4;
pub const EXIT_ERROR: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "marked-groups", version, about = "Finite-scale computations in the space of marked groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Maximum number of candidate words examined per Cayley ball
    #[arg(long = "word-budget", global = true, default_value_t = DEFAULT_WORD_BUDGET)]
    word_budget: u64,
    /// Worker threads for ball construction (does not affect output)
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
struct Pair {
    /// First group selector
    #[arg(short = 'a', long = "a")]
    a: String,
    /// Second group selector
    #[arg(short = 'b', long = "b")]
    b: String,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Build the ball B(r) and summarise it
    Ball {
        #[arg(long)]
        group: String,
        #[arg(long)]
        radius: usize,
        /// Write a Graphviz rendering here
        #[arg(long)]
        dot: Option<PathBuf>,
        /// Write the ball as JSON here
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Decide r-local isomorphism
    Compare {
        #[command(flatten)]
        #[serde(flatten)]
        pair: Pair,
        #[arg(long)]
        radius: usize,
    },
    /// Largest r <= R with r-local isomorphism
    AgreeRadius {
        #[command(flatten)]
        #[serde(flatten)]
        pair: Pair,
        #[arg(long)]
        radius: usize,
    },
    /// Compare kernels on all reduced words up to a length
    KernelAgree {
        #[command(flatten)]
        #[serde(flatten)]
        pair: Pair,
        #[arg(long)]
        length: usize,
    },
    /// First index from which a chain agrees with a limit on B(2r)
    Converge {
        /// Chain element (repeat in order)
        #[arg(long, required = true)]
        chain: Vec<String>,
        #[arg(long)]
        limit: String,
        #[arg(long)]
        radius: usize,
    },
    /// Check a witnessing pair (default: both maps read vertex words verbatim)
    QiCheck {
        #[command(flatten)]
        #[serde(flatten)]
        pair: Pair,
        #[arg(long = "C")]
        c: u64,
        #[arg(long = "M")]
        m: usize,
        /// Witness JSON file {C, M, phi, psi}
        #[arg(long)]
        witness: Option<PathBuf>,
    },
    /// Search for a witnessing pair at (C, M)
    QiSearch {
        #[command(flatten)]
        #[serde(flatten)]
        pair: Pair,
        #[arg(long = "C")]
        c: u64,
        #[arg(long = "M")]
        m: usize,
        /// Node budget for the backtracking search
        #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
        budget: u64,
    },
    /// Search over C <= Cmax and a schedule of radii
    QiScan {
        #[command(flatten)]
        #[serde(flatten)]
        pair: Pair,
        #[arg(long = "Cmax")]
        c_max: u64,
        #[arg(long = "M-list", value_delimiter = ',', required = true)]
        m_list: Vec<usize>,
        #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
        budget: u64,
    },
    /// Check the metric small-cancellation condition C'(lambda)
    CheckSc {
        /// A bowditch:<subset>:<m> selector
        #[arg(long, required_unless_present = "presentation", conflicts_with = "presentation")]
        group: Option<String>,
        /// Presentation file: `rank <n>` then one relator per line
        #[arg(long)]
        presentation: Option<PathBuf>,
        #[arg(long, default_value = "1/6")]
        lambda: String,
    },
    /// Describe a group selector
    FamilyInfo {
        #[arg(long)]
        group: String,
    },
    /// Recompute the golden values and report mismatches
    Golden,
}

/// What a run produced: the exit code and the text for each stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

type Output = Result<(i32, Value), String>;

fn group(selector: &str) -> Result<MarkedGroup, String> {
    Ok(MarkedGroup::new(Selector::parse(selector).and_then(|s| s.oracle()).map_err(|e| e.to_string())?))
}

fn groups(p: &Pair) -> Result<(MarkedGroup, MarkedGroup), String> {
    Ok((group(&p.a)?, group(&p.b)?))
}

fn write_file(path: &PathBuf, contents: &str) -> Result<(), String> {
    fs::write(path, contents).map_err(|e| format!("{}: {e}", path.display()))
}

fn err(e: impl ToString) -> String {
    e.to_string()
}

fn ok(v: Value) -> Output {
    Ok((EXIT_OK, v))
}

fn dispatch(command: &Command, opts: &BallOptions) -> Output {
    match command {
        Command::Ball { group: sel, radius, dot, json } => {
            let ball = build_ball(&group(sel)?, *radius, opts).map_err(err)?;
            if let Some(path) = dot {
                write_file(path, &ball.to_dot())?;
            }
            if let Some(path) = json {
                write_file(path, &(serde_json::to_string_pretty(&ball.to_json()).map_err(err)? + "\n"))?;
            }
            ok(json!({
                "vertex_count": ball.len(),
                "edge_count": ball.edge_count(),
                "signature": ball.signature().fingerprint(),
            }))
        }
        Command::Compare { pair, radius } => {
            let (a, b) = groups(pair)?;
            if a.rank() != b.rank() {
                return Err(format!("rank mismatch: {} vs {}", a.rank(), b.rank()));
            }
            let (ba, bb) = (build_ball(&a, *radius, opts).map_err(err)?, build_ball(&b, *radius, opts).map_err(err)?);
            let (sa, sb) = (ba.signature(), bb.signature());
            ok(json!({
                "isomorphic": sa == sb,
                "vertex_count_a": ba.len(),
                "vertex_count_b": bb.len(),
                "signature_a": sa.fingerprint(),
                "signature_b": sb.fingerprint(),
            }))
        }
        Command::AgreeRadius { pair, radius } => {
            let (a, b) = groups(pair)?;
            ok(json!({"agreement_radius": local_agreement_radius(&a, &b, *radius, opts).map_err(err)?}))
        }
        Command::KernelAgree { pair, length } => {
            let (a, b) = groups(pair)?;
            let witness = kernel_disagreement(&a, &b, *length).map_err(err)?;
            ok(json!({"agree": witness.is_none(), "witness": witness.map(|w| w.to_string())}))
        }
        Command::Converge { chain, limit, radius } => {
            let chain = chain.iter().map(|s| group(s)).collect::<Result<Vec<_>, _>>()?;
            let limit = group(limit)?;
            if let Some(g) = chain.iter().find(|g| g.rank() != limit.rank()) {
                return Err(format!("rank mismatch: {} vs {}", g.rank(), limit.rank()));
            }
            let index = convergence_check(&chain, &limit, *radius).map_err(err)?;
            ok(json!({
                "status": if index.is_some() { "Stabilized" } else { "NotStabilized" },
                "index": index,
            }))
        }
        Command::QiCheck { pair, c, m, witness } => {
            let (a, b) = groups(pair)?;
            let p = match witness {
                Some(path) => {
                    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
                    let v: Value = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
                    let p = WitnessPair::from_json(&v, a.rank(), b.rank()).map_err(err)?;
                    if (p.c, p.m) != (*c, *m) {
                        return Err(format!("witness file has C={}, M={}; flags say C={c}, M={m}", p.c, p.m));
                    }
                    p
                }
                None => identity_witness(&a, &b, *c, *m, opts).map_err(err)?,
            };
            let report = check_witness(&a, &b, &p, opts).map_err(err)?;
            ok(serde_json::to_value(report).map_err(err)?)
        }
        Command::QiSearch { pair, c, m, budget } => {
            let (a, b) = groups(pair)?;
            let outcome = search_witness(&a, &b, *c, *m, *budget, opts).map_err(err)?;
            let code = match outcome {
                SearchOutcome::Found(_) => EXIT_OK,
                SearchOutcome::NonExistent(_) => EXIT_NONEXISTENT,
                SearchOutcome::BudgetExceeded { .. } => EXIT_BUDGET,
            };
            Ok((code, outcome.to_json()))
        }
        Command::QiScan { pair, c_max, m_list, budget } => {
            let (a, b) = groups(pair)?;
            ok(serde_json::to_value(qi_scan(&a, &b, *c_max, m_list, *budget, opts).map_err(err)?).map_err(err)?)
        }
        Command::CheckSc { group: sel, presentation, lambda } => {
            let lambda: Ratio<u64> = lambda.parse().map_err(|_| format!("invalid lambda {lambda:?}"))?;
            let p = match (sel, presentation) {
                (_, Some(path)) => {
                    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
                    Presentation::parse(&text).map_err(err)?
                }
                (Some(sel), None) => match Selector::parse(sel).map_err(err)? {
                    Selector::Bowditch { subset, m } => {
                        let params = BowditchParams::default();
                        let relators = subset.truncate(m as u64).into_iter().map(|i| bowditch_word(i as usize, &params));
                        Presentation::new(2, relators.collect()).map_err(err)?
                    }
                    _ => return Err(format!("{sel} is not a small-cancellation family; use bowditch:<subset>:<m>")),
                },
                (None, None) => unreachable!("clap requires one of the two"),
            };
            let report = check_metric_condition(&symmetrize(&p), lambda).map_err(err)?;
            ok(json!({
                "relator_count": p.relators().len(),
                "relator_lengths": p.relators().iter().map(|r| r.len()).collect::<Vec<_>>(),
                "lambda": lambda.to_string(),
                "report": report,
            }))
        }
        Command::FamilyInfo { group: sel } => family_info(sel),
        Command::Golden => {
            let summary = golden_suite();
            let code = if summary.passed { EXIT_OK } else { EXIT_ERROR };
            Ok((code, serde_json::to_value(summary).map_err(err)?))
        }
    }
}

fn family_info(sel: &str) -> Output {
    let selector = Selector::parse(sel).map_err(err)?;
    let oracle = selector.oracle().map_err(err)?;
    let mut info = json!({
        "label": oracle.label(),
        "rank": oracle.rank(),
        "exact": oracle.is_exact(),
        "normal_form": oracle.has_normal_form(),
    });
    let e_words = |killed: &dyn Fn(u64) -> bool| -> Value {
        (1..=12u64)
            .map(|k| json!({"k": k, "length": e_word(k as usize).len(), "killed": killed(k)}))
            .collect()
    };
    match &selector {
        Selector::Hall(s) => {
            info["family"] = json!("hall");
            info["central_coordinates"] = e_words(&|k| s.contains(k));
        }
        Selector::Pqi(s) => {
            info["family"] = json!("pqi");
            info["central_coordinates"] = e_words(&|k| s.contains(k));
        }
        Selector::Lamplighter => {
            info["family"] = json!("lamplighter");
        }
        Selector::Bowditch { subset, m } => {
            let params = BowditchParams::default();
            info["family"] = json!("bowditch");
            info["block_count"] = json!(params.block_count);
            info["relators"] = (1..=*m)
                .map(|i| {
                    json!({"i": i, "length": bowditch_word(i, &params).len(), "imposed": subset.contains(i as u64)})
                })
                .collect();
            info["metric_all_m"] = serde_json::to_value(bowditch_metric_report(*m, &params)).map_err(err)?;
        }
        _ => {
            info["family"] = json!("reference");
        }
    }
    ok(info)
}

/// Parses `args` (program name first), runs the command, and renders its report.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => Outcome {
                    code: EXIT_OK,
                    stdout: text,
                    stderr: String::new(),
                },
                _ => Outcome {
                    code: EXIT_USAGE,
                    stdout: String::new(),
                    stderr: text,
                },
            };
        }
    };
    let opts = BallOptions {
        word_budget: cli.word_budget,
        threads: cli.threads,
    };
    let started = Instant::now();
    let (code, outputs, stderr) = match dispatch(&cli.command, &opts) {
        Ok((code, outputs)) => (code, outputs, String::new()),
        Err(message) => (EXIT_ERROR, json!({"diagnostic": message}), format!("error: {message}\n")),
    };
    let echo = serde_json::to_value(&cli.command).expect("commands serialize");
    let (name, mut inputs) = match echo {
        Value::Object(map) => map.into_iter().next().expect("one variant"),
        Value::String(name) => (name, json!({})),
        other => unreachable!("unexpected command encoding {other}"),
    };
    inputs["word_budget"] = json!(cli.word_budget);
    let report = json!({
        "tool": "marked-groups",
        "version": env!("CARGO_PKG_VERSION"),
        "command": name,
        "inputs": inputs,
        "outputs": outputs,
        "exit_code": code,
        "timing": {"elapsed_ms": started.elapsed().as_secs_f64() * 1e3},
    });
    Outcome {
        code,
        stdout: serde_json::to_string_pretty(&report).expect("reports serialize") + "\n",
        stderr,
    }
}

/// The report with its timing field removed, for determinism comparisons.
pub fn strip_timing(report: &str) -> Result<Value, serde_json::Error> {
    let mut v: Value = serde_json::from_str(report)?;
    if let Some(map) = v.as_object_mut() {
        map.remove("timing");
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(args: &[&str]) -> (i32, Value) {
        let out = run(std::iter::once("marked-groups").chain(args.iter().copied()));
        let v = if out.stdout.is_empty() { Value::Null } else { strip_timing(&out.stdout).unwrap() };
        (out.code, v)
    }

    #[test]
    fn ball_and_compare() {
        let (code, v) = report(&["ball", "--group", "free:2", "--radius", "2"]);
        assert_eq!(code, 0);
        assert_eq!(v["outputs"]["vertex_count"], 17);
        assert_eq!(v["command"], "ball");
        assert_eq!(v["inputs"]["group"], "free:2");
        let (code, v) = report(&["compare", "--a", "free:2", "--b", "abelian:2", "--radius", "2"]);
        assert_eq!(code, 0);
        assert_eq!(v["outputs"]["isomorphic"], false);
        let (_, v) = report(&["agree-radius", "-a", "free:2", "-b", "abelian:2", "--radius", "5"]);
        assert_eq!(v["outputs"]["agreement_radius"], 1);
        let (_, v) = report(&["kernel-agree", "-a", "free:2", "-b", "abelian:2", "--length", "4"]);
        assert_eq!(v["outputs"]["witness"], "x1 x2 X1 X2");
    }

    #[test]
    fn exit_codes() {
        let (code, v) = report(&["qi-search", "--a", "abelian:1", "--b", "abelian:2", "--C", "1", "--M", "14"]);
        assert_eq!(code, EXIT_NONEXISTENT);
        assert_eq!(v["outputs"]["certificate"]["kind"], "counting");
        let (code, _) = report(&["qi-search", "-a", "abelian:1", "-b", "abelian:1", "--C", "1", "--M", "2", "--budget", "0"]);
        assert_eq!(code, EXIT_BUDGET);
        let (code, _) = report(&["qi-search", "-a", "abelian:1", "-b", "abelian:1", "--C", "1", "--M", "2"]);
        assert_eq!(code, EXIT_OK);
        assert_eq!(report(&["ball", "--radius", "2"]).0, EXIT_USAGE);
        assert_eq!(report(&["frobnicate"]).0, EXIT_USAGE);
        let (code, v) = report(&["ball", "--group", "nope:1", "--radius", "2"]);
        assert_eq!(code, EXIT_ERROR);
        assert!(v["outputs"]["diagnostic"].as_str().unwrap().contains("nope"));
        let help = run(["marked-groups", "--help"]);
        assert_eq!(help.code, EXIT_OK);
        assert!(help.stdout.contains("qi-search"));
    }

    #[test]
    fn converge_and_family_info() {
        let mut args = vec!["converge", "--limit", "hall:cofinite:{}", "--radius", "1"];
        let chain: Vec<String> = (0..=5)
            .map(|k| format!("hall:finite:{{{}}}", (1..=k).map(|i| i.to_string()).collect::<Vec<_>>().join(",")))
            .collect();
        for c in &chain {
            args.extend(["--chain", c.as_str()]);
        }
        let (_, v) = report(&args);
        assert_eq!(v["outputs"]["index"], 0);
        let (_, v) = report(&["converge", "--chain", "free:2", "--chain", "free:2", "--limit", "abelian:2", "--radius", "2"]);
        assert_eq!(v["outputs"]["status"], "NotStabilized");
        let (_, v) = report(&["family-info", "--group", "bowditch:finite:{1}:2"]);
        assert_eq!(v["outputs"]["relators"][1]["length"], 3875);
        assert_eq!(v["outputs"]["metric_all_m"]["satisfied"], true);
    }

    #[test]
    fn check_sc_and_qi_check() {
        let (code, v) = report(&["check-sc", "--group", "bowditch:finite:{1,2}:3"]);
        assert_eq!(code, 0);
        assert_eq!(v["outputs"]["report"]["satisfied"], true);
        assert_eq!(v["outputs"]["relator_count"], 2);
        assert_eq!(report(&["check-sc", "--group", "free:2"]).0, EXIT_ERROR);
        assert_eq!(report(&["check-sc", "--group", "bowditch:finite:{1}:1", "--lambda", "2"]).0, EXIT_ERROR);
        let (_, v) = report(&["qi-check", "-a", "hall:finite:{}", "-b", "hall:finite:{1}", "--C", "9", "--M", "3"]);
        assert_eq!(v["outputs"]["passed"], true);
    }

    #[test]
    fn reports_are_deterministic() {
        for args in [
            vec!["ball", "--group", "lamplighter", "--radius", "4"],
            vec!["qi-scan", "-a", "abelian:1", "-b", "abelian:2", "--Cmax", "1", "--M-list", "14"],
        ] {
            let first = report(&args);
            assert_eq!(first, report(&args));
            let mut threaded = args.clone();
            threaded.extend(["--threads", "4"]);
            assert_eq!(first, report(&threaded));
        }
    }
}
