//! Command-line front end: parse documents, run analyses, print a single
//! JSON verdict object on stdout.
//!
//! Exit codes: 0 analysis completed (the verdict is inside the JSON),
//! 2 invalid input, 3 size guard or resource exhaustion. Output is
//! stable-key-ordered; wall-clock figures appear only under `--timing` so
//! sequential runs stay byte-identical.

use std::fs;
use std::io::Read;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::Serialize;

use ngacsafe::doc::{
    self, parse_constraint_graph, parse_dacc, parse_graph, parse_policy, serialize_constraint_graph,
    serialize_dacc, serialize_policy, TargetDoc,
};
use ngacsafe::oracles::brute_force_mis;
use ngacsafe::reductions::{
    gen_disjoint_triangles, gen_mutex_groups_model, reduce_3col_to_dacc, reduce_dacc_to_cosp,
};
use ngacsafe::safety::{check_safety, SafetyError, SafetyOptions, Witness};
use ngacsafe::{dacc, model, OpTarget};

#[derive(Parser)]
#[command(name = "ngacsafe", version, about = "NGAC safety analysis toolkit")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check a policy document for well-formedness.
    Validate {
        /// Path to a model document, or - for stdin.
        model: String,
    },
    /// Decide safety of a policy.
    CheckSafety {
        model: String,
        /// Also test users/resources that commands could create.
        #[arg(long)]
        all_potential: bool,
        /// Include the replayable witness sequence in the output.
        #[arg(long)]
        witness: bool,
        /// Worker threads for per-tuple checks (1 = sequential).
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Accept models where commands creating the same edge disagree on
        /// conditions (the analysis then approximates).
        #[arg(long)]
        allow_divergent: bool,
        /// Report wall-clock time (breaks byte-for-byte reproducibility).
        #[arg(long)]
        timing: bool,
    },
    /// Decide a constrained-connectivity instance.
    SolveDacc {
        instance: String,
        #[arg(long)]
        timing: bool,
    },
    /// Reduce a three-coloring question to a constrained-connectivity
    /// instance document.
    #[command(name = "reduce-3col")]
    Reduce3Col { graph: String },
    /// Reduce a constrained-connectivity instance to a policy document
    /// whose co-safety matches reachability.
    ReduceDacc { instance: String },
    /// Emit generator outputs.
    Gen {
        #[command(subcommand)]
        what: GenCmd,
    },
    /// Micro-benchmarks.
    Bench {
        #[command(subcommand)]
        what: BenchCmd,
    },
}

#[derive(Subcommand)]
enum GenCmd {
    /// Constraint graph of k disjoint triangles (3^k maximal independent sets).
    Triangles { k: usize },
    /// Model with mutually exclusive attribute groups.
    Mutex {
        #[arg(long)]
        users: usize,
        /// Group sizes, comma separated (each at least 2).
        #[arg(long, value_delimiter = ',', required = true)]
        groups: Vec<usize>,
    },
}

#[derive(Subcommand)]
enum BenchCmd {
    /// Compare maximal-independent-set enumeration against naive subset
    /// search, on k disjoint triangles or a constraint-graph document from
    /// stdin.
    Mis {
        k: Option<usize>,
        #[arg(long)]
        timing: bool,
    },
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct StatsOut {
    tuples_checked: u64,
    mis_enumerated: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    elapsed_ms: Option<u64>,
}

#[derive(Serialize)]
struct DiagOut {
    severity: String,
    code: String,
    message: String,
}

#[derive(Serialize)]
struct ValidateOut {
    verdict: &'static str,
    diagnostics: Vec<DiagOut>,
}

#[derive(Serialize)]
struct StepOut {
    command: String,
    target: TargetDoc,
}

#[derive(Serialize)]
struct WitnessOut {
    user: String,
    resource: String,
    right: String,
    sequence: Vec<StepOut>,
}

#[derive(Serialize)]
struct SafetyOut {
    verdict: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<WitnessOut>,
    stats: StatsOut,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct DaccOut {
    verdict: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness_path: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness_edge_set: Option<Vec<(String, String)>>,
    stats: StatsOut,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct BenchOut {
    verdict: &'static str,
    mis_enumerated: u64,
    /// Size of the subset space a naive search would walk (2^n).
    naive_subsets: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    brute_force_sets: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    enumeration_ms: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    brute_force_ms: Option<u64>,
}

enum CliError {
    /// Exit 2: unusable input.
    Input(String),
    /// Exit 3: a size guard tripped.
    Exhausted(String),
}

impl From<doc::DocError> for CliError {
    fn from(e: doc::DocError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<SafetyError> for CliError {
    fn from(e: SafetyError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<ngacsafe::oracles::SizeGuard> for CliError {
    fn from(e: ngacsafe::oracles::SizeGuard) -> Self {
        CliError::Exhausted(e.to_string())
    }
}

fn read_input(path: &str) -> Result<String, CliError> {
    if path == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| CliError::Input(format!("stdin: {e}")))?;
        Ok(buf)
    } else {
        fs::read_to_string(path).map_err(|e| CliError::Input(format!("{path}: {e}")))
    }
}

fn print_json<T: Serialize>(value: &T) {
    println!(
        "{}",
        serde_json::to_string_pretty(value).expect("output types serialize")
    );
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Exhausted(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

fn run(cmd: Cmd) -> Result<(), CliError> {
    match cmd {
        Cmd::Validate { model } => {
            let model = parse_policy(&read_input(&model)?)?;
            let diags = model::validate_model(&model);
            let verdict = if model::has_errors(&diags) {
                "invalid"
            } else {
                "valid"
            };
            print_json(&ValidateOut {
                verdict,
                diagnostics: diags
                    .into_iter()
                    .map(|d| DiagOut {
                        severity: d.severity.to_string(),
                        code: d.code.to_string(),
                        message: d.message,
                    })
                    .collect(),
            });
            Ok(())
        }
        Cmd::CheckSafety {
            model,
            all_potential,
            witness,
            jobs,
            allow_divergent,
            timing,
        } => {
            let model = parse_policy(&read_input(&model)?)?;
            let opts = SafetyOptions {
                all_potential,
                allow_divergent_creators: allow_divergent,
                jobs,
            };
            let start = Instant::now();
            let report = check_safety(&model, &opts)?;
            let elapsed = start.elapsed();
            print_json(&SafetyOut {
                verdict: if report.verdict.safe { "safe" } else { "unsafe" },
                witness: report
                    .verdict
                    .witness
                    .filter(|_| witness)
                    .map(witness_out),
                stats: StatsOut {
                    tuples_checked: report.stats.tuples_checked,
                    mis_enumerated: report.stats.mis_enumerated,
                    elapsed_ms: timing.then_some(elapsed.as_millis() as u64),
                },
            });
            Ok(())
        }
        Cmd::SolveDacc { instance, timing } => {
            let inst = parse_dacc(&read_input(&instance)?)?;
            let start = Instant::now();
            let verdict = dacc::solve_dacc(&inst);
            let elapsed = start.elapsed();
            print_json(&DaccOut {
                verdict: if verdict.reachable {
                    "reachable"
                } else {
                    "unreachable"
                },
                witness_path: verdict.witness_path,
                witness_edge_set: verdict
                    .witness_edge_set
                    .map(|s| s.into_iter().collect()),
                stats: StatsOut {
                    tuples_checked: 1,
                    mis_enumerated: verdict.mis_examined,
                    elapsed_ms: timing.then_some(elapsed.as_millis() as u64),
                },
            });
            Ok(())
        }
        Cmd::Reduce3Col { graph } => {
            let g = parse_graph(&read_input(&graph)?)?;
            print!("{}", serialize_dacc(&reduce_3col_to_dacc(&g)));
            Ok(())
        }
        Cmd::ReduceDacc { instance } => {
            let inst = parse_dacc(&read_input(&instance)?)?;
            print!("{}", serialize_policy(&reduce_dacc_to_cosp(&inst)));
            Ok(())
        }
        Cmd::Gen { what } => {
            match what {
                GenCmd::Triangles { k } => {
                    print!("{}", serialize_constraint_graph(&gen_disjoint_triangles(k)));
                }
                GenCmd::Mutex { users, groups } => {
                    if groups.iter().any(|&k| k < 2) {
                        return Err(CliError::Input(
                            "group sizes must be at least 2".to_string(),
                        ));
                    }
                    print!("{}", serialize_policy(&gen_mutex_groups_model(users, &groups)));
                }
            }
            Ok(())
        }
        Cmd::Bench { what } => {
            let BenchCmd::Mis { k, timing } = what;
            let graph = match k {
                Some(k) => gen_disjoint_triangles(k),
                None => parse_constraint_graph(&read_input("-")?)?,
            };
            let n = graph.vertices().len();
            let start = Instant::now();
            let mis_enumerated = dacc::enumerate_mis(&graph).count() as u64;
            let enum_elapsed = start.elapsed();
            // The brute-force comparison trips its size guard on large
            // inputs; report the enumeration alone in that case.
            let start = Instant::now();
            let brute = brute_force_mis(&graph).ok();
            let brute_elapsed = start.elapsed();
            print_json(&BenchOut {
                verdict: "ok",
                mis_enumerated,
                naive_subsets: 1u64
                    .checked_shl(n as u32)
                    .unwrap_or(u64::MAX),
                brute_force_sets: brute.map(|s| s.len() as u64),
                enumeration_ms: timing.then_some(enum_elapsed.as_millis() as u64),
                brute_force_ms: timing
                    .then_some(brute_elapsed.as_millis() as u64),
            });
            Ok(())
        }
    }
}

fn witness_out(w: Witness) -> WitnessOut {
    WitnessOut {
        user: w.user.to_string(),
        resource: w.resource.to_string(),
        right: w.right.to_string(),
        sequence: w
            .sequence
            .into_iter()
            .map(|(cmd, arg)| StepOut {
                command: cmd.name,
                target: match arg {
                    OpTarget::Vertex(id, kind) => TargetDoc::Vertex {
                        name: id.to_string(),
                        kind: kind.into(),
                    },
                    OpTarget::Edge(e) => TargetDoc::Edge((&e).into()),
                },
            })
            .collect(),
    }
}
