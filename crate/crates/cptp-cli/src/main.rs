//! Command line front end: parses problem and program files, drives the
//! construction and verification pipeline, and writes deterministic
//! reports.
//!
//! Exit codes: 0 success (for `verify`: every check passed), 1 failed
//! checks or I/O trouble, 2 parse errors, 3 precondition violations,
//! 4 infeasible or unbounded instances, 5 desk-scale resource limits.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cptp_core::builder::{
    build_homogeneous_cptp, build_inhomogeneous_cptp, build_lifting_data_with_order,
    dual_homogeneous, dual_inhomogeneous, lifting_data_from_program, solve_lifted_finite,
};
use cptp_core::error::Error;
use cptp_core::formats;
use cptp_core::oracle::copositive_check;
use cptp_core::pipeline::{self, run_verify, VerifyOptions};
use cptp_core::pop::{PopInstance, PopKind, SearchBox};
use cptp_core::rat::{parse_rat, Rat};

#[derive(Parser)]
#[command(
    name = "cptp",
    about = "Completely positive tensor reformulations of polynomial programs \
             with linear inequality constraints, with desk-scale verification",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct OutputArg {
    /// Write the result here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    /// Simplex-lattice refinement depth.
    #[arg(long, default_value_t = 4)]
    depth: usize,
    /// Oracle tolerance.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Write the coefficient tensor of a problem's objective.
    Tensorize {
        /// Problem JSON file.
        input: PathBuf,
        /// Tensor order; defaults to the objective degree.
        #[arg(long)]
        order: Option<usize>,
        #[command(flatten)]
        output: OutputArg,
    },
    /// Build the equivalent completely positive tensor program.
    Reformulate {
        /// Problem JSON file (polyhedral constraints).
        input: PathBuf,
        /// Scaling vector, comma separated rationals (default all zeros).
        #[arg(long)]
        alpha: Option<String>,
        /// Number of duplicated coupling rows.
        #[arg(long, default_value_t = 1)]
        t: usize,
        /// Override the declared kind: homogeneous | inhomogeneous.
        #[arg(long)]
        kind: Option<String>,
        /// Tensor order; defaults to the objective degree.
        #[arg(long)]
        order: Option<usize>,
        #[command(flatten)]
        output: OutputArg,
    },
    /// Derive the copositive dual of an exported program.
    Dual {
        /// Program export file.
        input: PathBuf,
        #[command(flatten)]
        output: OutputArg,
    },
    /// Run every applicable check and write a JSON report.
    Verify {
        /// Problem JSON file.
        input: PathBuf,
        /// Scaling vector, comma separated rationals (default all zeros).
        #[arg(long)]
        alpha: Option<String>,
        #[arg(long, default_value_t = 1)]
        t: usize,
        #[command(flatten)]
        oracle: OracleArgs,
        /// Random feasible samples for atom checks.
        #[arg(long, default_value_t = 50)]
        samples: usize,
        /// Search box `lo,hi;lo,hi;...`, one pair per variable.
        #[arg(long = "box", value_name = "BOX")]
        search_box: Option<String>,
        /// Grid steps per axis; defaults by dimension.
        #[arg(long)]
        resolution: Option<usize>,
        /// Tensor order; defaults to the objective degree.
        #[arg(long)]
        order: Option<usize>,
        #[command(flatten)]
        output: OutputArg,
    },
    /// Solve the lifted program of a finite-set instance exactly.
    SolveFinite {
        /// Problem JSON file (finite point list).
        input: PathBuf,
        #[command(flatten)]
        output: OutputArg,
    },
    /// Probe a tensor for copositivity over the standard simplex.
    CopositiveCheck {
        /// Tensor text file.
        input: PathBuf,
        #[command(flatten)]
        oracle: OracleArgs,
        #[command(flatten)]
        output: OutputArg,
    },
}

fn main() -> ExitCode {
    configure_threads();
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(error) => {
            eprintln!("error: {error}");
            ExitCode::from(exit_code_for(&error))
        }
    }
}

/// `CPTP_THREADS` caps oracle parallelism.
fn configure_threads() {
    if let Ok(raw) = std::env::var("CPTP_THREADS") {
        if let Ok(threads) = raw.parse::<usize>() {
            if threads > 0 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build_global();
            }
        }
    }
}

fn exit_code_for(error: &Error) -> u8 {
    match error {
        Error::Parse { .. } => 2,
        Error::InvalidArgument(_) => 3,
        Error::Infeasible(_) | Error::Unbounded { .. } => 4,
        Error::ResourceLimit(_) => 5,
    }
}

fn read_input(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| Error::Parse {
        line: 0,
        column: 0,
        message: format!("cannot read {}: {e}", path.display()),
    })
}

fn write_output(output: &OutputArg, content: &str) -> Result<(), Error> {
    match &output.out {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| Error::InvalidArgument(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn parse_alpha(raw: &Option<String>, nvars: usize) -> Result<Vec<Rat>, Error> {
    match raw {
        None => Ok(vec![Rat::from_integer(0.into()); nvars]),
        Some(text) => {
            let alpha = text
                .split(',')
                .map(parse_rat)
                .collect::<Result<Vec<_>, _>>()?;
            if alpha.len() != nvars {
                return Err(Error::InvalidArgument(format!(
                    "alpha has {} entries, the problem has {nvars} variables",
                    alpha.len()
                )));
            }
            Ok(alpha)
        }
    }
}

fn parse_search_box(raw: &Option<String>, nvars: usize) -> Result<Option<SearchBox>, Error> {
    let Some(text) = raw else {
        return Ok(None);
    };
    let mut lo = Vec::new();
    let mut hi = Vec::new();
    for (axis, pair) in text.split(';').enumerate() {
        let Some((low, high)) = pair.split_once(',') else {
            return Err(Error::InvalidArgument(format!(
                "box axis {axis}: expected `lo,hi`, got {pair:?}"
            )));
        };
        lo.push(parse_rat(low)?);
        hi.push(parse_rat(high)?);
    }
    if lo.len() != nvars {
        return Err(Error::InvalidArgument(format!(
            "box has {} axes, the problem has {nvars} variables",
            lo.len()
        )));
    }
    Ok(Some(SearchBox::new(lo, hi)?))
}

fn parse_kind(raw: &str) -> Result<PopKind, Error> {
    match raw {
        "homogeneous" => Ok(PopKind::Homogeneous),
        "inhomogeneous" => Ok(PopKind::Inhomogeneous),
        other => Err(Error::InvalidArgument(format!(
            "kind must be homogeneous or inhomogeneous, got {other:?}"
        ))),
    }
}

fn load_problem(path: &Path) -> Result<PopInstance, Error> {
    formats::parse_problem(&read_input(path)?)
}

fn dispatch(command: Command) -> Result<ExitCode, Error> {
    match command {
        Command::Tensorize {
            input,
            order,
            output,
        } => {
            let problem = load_problem(&input)?;
            let order = order.unwrap_or_else(|| problem.default_order());
            let tensor = problem.objective().coefficient_tensor(order)?;
            write_output(&output, &formats::serialize_tensor(&tensor))?;
            Ok(ExitCode::SUCCESS)
        }

        Command::Reformulate {
            input,
            alpha,
            t,
            kind,
            order,
            output,
        } => {
            let mut problem = load_problem(&input)?;
            if let Some(kind) = kind {
                let kind = parse_kind(&kind)?;
                problem = PopInstance::new(
                    problem.objective().clone(),
                    problem.feasible().clone(),
                    kind,
                )?;
            }
            let alpha = parse_alpha(&alpha, problem.nvars())?;
            let order = order.unwrap_or_else(|| problem.default_order());
            let data = build_lifting_data_with_order(&problem, &alpha, t, order)?;
            let program = match problem.kind() {
                PopKind::Homogeneous => build_homogeneous_cptp(&problem, &data)?,
                PopKind::Inhomogeneous => build_inhomogeneous_cptp(&problem, &data)?,
            };
            let meta = formats::ProgramMeta {
                alpha,
                coupling_count: t,
            };
            write_output(&output, &formats::serialize_program(&program, &meta))?;
            Ok(ExitCode::SUCCESS)
        }

        Command::Dual { input, output } => {
            let (program, meta) = formats::parse_program(&read_input(&input)?)?;
            let data = lifting_data_from_program(&program, &meta.alpha, meta.coupling_count)?;
            let dual = match program.kind {
                PopKind::Homogeneous => dual_homogeneous(&program, &data)?,
                PopKind::Inhomogeneous => dual_inhomogeneous(&program, &data)?,
            };
            write_output(&output, &formats::serialize_dual(&dual))?;
            Ok(ExitCode::SUCCESS)
        }

        Command::Verify {
            input,
            alpha,
            t,
            oracle,
            samples,
            search_box,
            resolution,
            order,
            output,
        } => {
            let problem = load_problem(&input)?;
            let options = VerifyOptions {
                alpha: Some(parse_alpha(&alpha, problem.nvars())?),
                coupling_count: t,
                order,
                depth: oracle.depth,
                tol: oracle.tol,
                samples,
                resolution,
                search_box: parse_search_box(&search_box, problem.nvars())?,
            };
            match run_verify(&problem, &options) {
                Ok(report) => {
                    write_output(&output, &report.to_pretty_json())?;
                    if report.passed {
                        Ok(ExitCode::SUCCESS)
                    } else {
                        Ok(ExitCode::FAILURE)
                    }
                }
                Err(error @ (Error::Infeasible(_) | Error::Unbounded { .. })) => {
                    let status = match &error {
                        Error::Infeasible(_) => "infeasible",
                        _ => "unbounded",
                    };
                    let report = serde_json::json!({
                        "status": status,
                        "passed": false,
                        "error": error.to_string(),
                    });
                    let text = serde_json::to_string_pretty(&report).expect("serializable") + "\n";
                    write_output(&output, &text)?;
                    Err(error)
                }
                Err(error) => Err(error),
            }
        }

        Command::SolveFinite { input, output } => {
            let problem = load_problem(&input)?;
            let solution = solve_lifted_finite(&problem)?;
            let mut value = pipeline::lifted_solution_to_json(&solution);
            value["status"] = serde_json::json!("ok");
            let text = serde_json::to_string_pretty(&value).expect("serializable") + "\n";
            write_output(&output, &text)?;
            Ok(ExitCode::SUCCESS)
        }

        Command::CopositiveCheck {
            input,
            oracle,
            output,
        } => {
            let tensor = formats::parse_tensor(&read_input(&input)?)?;
            let verdict = copositive_check(&tensor, oracle.depth, oracle.tol)?;
            let value = formats::verdict_to_json(&verdict);
            let text = serde_json::to_string_pretty(&value).expect("serializable") + "\n";
            write_output(&output, &text)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}
