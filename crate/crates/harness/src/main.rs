use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use dixmier_core::averaging::IterateConfig;
use dixmier_core::duality::Budget;
use dixmier_core::FdAlgebra;
use dixmier_harness::candidates::{self, LinearMapJson};
use dixmier_harness::commands::{self, Outcome};
use dixmier_harness::output::{csv_string, write_csv, write_json, write_text};
use dixmier_harness::{generate, Instance, InstanceSpec, Kind};

/// Dixmier averaging experiments on finite-dimensional C*-algebras.
///
/// Exit status: 0 verified pass, 2 mathematical failure, 1 usage or input error.
#[derive(Parser)]
#[command(name = "dixmier", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded instance.
    Gen(InstanceArgs),
    /// Certify that the span of an instance is blockwise traceless and average it to zero.
    ZeroAverage {
        #[command(flatten)]
        instance: InstanceArgs,
        /// Add the unit to the subspace.
        #[arg(long)]
        include_unit: bool,
        #[arg(long, default_value_t = 1e-8)]
        eps: f64,
    },
    /// Successive averaging toward the center-valued trace; writes a residual CSV.
    Iterate {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long, default_value_t = 1e-3)]
        eps: f64,
        /// Maximum number of averaging steps.
        #[arg(long, default_value_t = 200)]
        budget: usize,
        /// Random initial unitaries per step.
        #[arg(long, default_value_t = 3)]
        restarts: usize,
    },
    /// Compare the mixing infimum with the trace and state bounds on a batch.
    VerifyTheorem {
        #[command(flatten)]
        instance: InstanceArgs,
        /// Batch size; instance i uses seed + i.
        #[arg(long, default_value_t = 1)]
        count: usize,
        /// Optimizer sweeps.
        #[arg(long, default_value_t = 300)]
        budget: usize,
        #[arg(long, default_value_t = 5)]
        restarts: usize,
        /// Largest acceptable gap.
        #[arg(long, default_value_t = 5e-2)]
        tol: f64,
        /// Concurrent batch items.
        #[arg(long, default_value_t = 4)]
        jobs: usize,
    },
    /// Check a candidate map A -> Z(A) against the conditions forcing the center-valued trace.
    VerifyH {
        /// Built-in candidate: trace, identity, first-block-trace, flip, perturbed.
        #[arg(long, conflicts_with = "input")]
        candidate: Option<String>,
        /// JSON file {"blocks":[...],"matrix":[[[re,im],...],...]}.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_value = "2,2")]
        blocks: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct InstanceArgs {
    /// Read the instance from a JSON file instead of generating it.
    #[arg(long, conflicts_with_all = ["seed", "blocks", "n", "m", "kind"])]
    input: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Block sizes, e.g. 2,3.
    #[arg(long, value_delimiter = ',', default_value = "2,3")]
    blocks: Vec<usize>,
    /// Tuple length.
    #[arg(long, default_value_t = 1)]
    n: usize,
    /// Number of tuples.
    #[arg(long, default_value_t = 1)]
    m: usize,
    #[arg(long, value_enum, default_value_t = Kind::Traceless)]
    kind: Kind,
    /// Output directory; JSON goes to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl InstanceArgs {
    fn spec(&self) -> InstanceSpec {
        InstanceSpec {
            seed: self.seed,
            block_dims: self.blocks.clone(),
            n: self.n,
            m: self.m,
            kind: self.kind,
        }
    }

    fn load(&self) -> Result<Instance> {
        match &self.input {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                Ok(Instance::from_json(&text)?)
            }
            None => Ok(generate(&self.spec())?),
        }
    }
}

/// Writes to stdout; a closed pipe (e.g. `| head`) is not an error.
fn print_stdout(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn emit_json<T: serde::Serialize>(out: Option<&Path>, name: &str, value: &T) -> Result<()> {
    match out {
        Some(dir) => write_json(&dir.join(name), value),
        None => print_stdout(&(dixmier_core::json::to_string(value)? + "\n")),
    }
}

fn run(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Gen(args) => {
            let instance = args.load()?;
            let text = instance.to_json()?;
            match &args.out {
                Some(dir) => write_text(&dir.join("instance.json"), &(text + "\n"))?,
                None => print_stdout(&(text + "\n"))?,
            }
            Ok(Outcome::Pass)
        }
        Command::ZeroAverage {
            instance,
            include_unit,
            eps,
        } => {
            let inst = instance.load()?;
            let report = commands::zero_average(&inst, include_unit, eps)?;
            emit_json(instance.out.as_deref(), "zero_average.json", &report)?;
            if let Some(reason) = &report.obstruction {
                eprintln!("{reason}");
            }
            if let Some(r) = report.residual {
                eprintln!("residual {r:.3e}");
            }
            Ok(Outcome::from_pass(report.passes))
        }
        Command::Iterate {
            instance,
            eps,
            budget,
            restarts,
        } => {
            let inst = instance.load()?;
            let config = IterateConfig {
                max_steps: budget,
                eps,
                starts: restarts,
                seed: inst.spec.seed,
                ..IterateConfig::default()
            };
            let report = commands::iterate(&inst, &config);
            let rows = commands::residual_rows(&report);
            match instance.out.as_deref() {
                Some(dir) => {
                    write_json(&dir.join("iterate.json"), &report)?;
                    write_csv(
                        &dir.join("residuals.csv"),
                        &["tuple", "step", "residual"],
                        &rows,
                    )?;
                }
                None => print_stdout(&csv_string(&rows)?)?,
            }
            for item in &report.items {
                eprintln!(
                    "tuple {}: {} steps, residual {:.3e}{}",
                    item.tuple,
                    item.steps,
                    item.final_residual,
                    if item.eps_met {
                        ""
                    } else {
                        " (budget exhausted)"
                    }
                );
            }
            Ok(Outcome::from_pass(report.invariants_ok))
        }
        Command::VerifyTheorem {
            instance,
            count,
            budget,
            restarts,
            tol,
            jobs,
        } => {
            let budget = Budget {
                sweeps: budget,
                restarts,
                ..Budget::default()
            };
            let items = match &instance.input {
                Some(_) => commands::verify_instances(vec![instance.load()?], &budget, tol, jobs)?,
                None => {
                    if count == 0 {
                        bail!("--count must be positive");
                    }
                    commands::verify_batch(&instance.spec(), count, &budget, tol, jobs)?
                }
            };
            let rows: Vec<_> = items.iter().map(|it| it.summary()).collect();
            match instance.out.as_deref() {
                Some(dir) => {
                    for item in &items {
                        write_text(
                            &dir.join(format!("instance_{}.json", item.id)),
                            &(item.instance.to_json()? + "\n"),
                        )?;
                        write_json(
                            &dir.join(format!("report_{}.json", item.id)),
                            &item.report_json(),
                        )?;
                    }
                    write_csv(&dir.join("summary.csv"), &commands::SUMMARY_HEADER, &rows)?;
                }
                None => print_stdout(&csv_string(&rows)?)?,
            }
            for item in items.iter().filter(|it| !it.passes()) {
                if !item.report.weak_duality_ok {
                    eprintln!("instance {}: weak duality violated", item.id);
                } else {
                    eprintln!(
                        "instance {}: optimizer under-converged, gap {:.3e}",
                        item.id, item.report.gap
                    );
                }
            }
            Ok(Outcome::from_pass(items.iter().all(|it| it.passes())))
        }
        Command::VerifyH {
            candidate,
            input,
            blocks,
            seed,
            out,
        } => {
            let (name, h) = match (candidate, input) {
                (_, Some(path)) => {
                    let text = std::fs::read_to_string(&path)
                        .with_context(|| format!("reading {}", path.display()))?;
                    let repr: LinearMapJson = dixmier_core::json::from_str(&text)?;
                    (path.display().to_string(), repr.to_map()?)
                }
                (name, None) => {
                    let name = name.unwrap_or_else(|| "trace".into());
                    let algebra = FdAlgebra::new(blocks)?;
                    let h = candidates::named(&algebra, &name, seed).with_context(|| {
                        format!(
                            "unknown candidate {name:?}; expected one of {}",
                            candidates::NAMES.join(", ")
                        )
                    })?;
                    (name, h)
                }
            };
            let (outcome, report) = commands::verify_h(&name, &h, seed)?;
            emit_json(out.as_deref(), "h_report.json", &report)?;
            if !report.failed.is_empty() {
                eprintln!("failed: {}", report.failed.join("; "));
            }
            Ok(outcome)
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
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
