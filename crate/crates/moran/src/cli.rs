use std::fs::File;
use std::io::{self, BufWriter, Write};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use moran_core::analysis::sweep_n2;
use moran_core::dynamics::transition_kernel;
use moran_core::exact::{fixation_probabilities_with, SolverMethod, SolverOptions};
use moran_core::montecarlo::DEFAULT_MAX_STEPS;
use moran_core::{SimulationMode, TrajectoryConfig};
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::init::parse_init;
use crate::manifest::RunManifest;
use crate::model_file::load_model;
use crate::parallel::{estimate_parallel, THREADS_ENV};
use crate::report::{write_kernel_csv, write_sweep_csv, ExactOutput, SimulateOutput, SweepOutput, VerifyOutput};
use crate::verify::{builtin_suite, model_suite};

#[derive(Debug, Parser)]
#[command(
    name = "moran",
    version,
    about = "Microscopic spatial Moran process: exact fixation, simulation, checks"
)]
pub struct Cli {
    /// Pretty-print JSON with N spaces (default 2 when given without a value).
    #[arg(long, global = true, value_name = "N", num_args = 0..=1, default_missing_value = "2")]
    pub json_indent: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact fixation probabilities for every configuration.
    Exact(ExactArgs),
    /// Monte Carlo estimate of the fixation probability.
    Simulate(SimulateArgs),
    /// Two-vertex F(m, a | c, r) on a grid, as CSV.
    Sweep(SweepArgs),
    /// Builtin theorem suite, or a descriptive report on --model.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Model file, or @galanis, @complete:N, @n2:W1,W2.
    #[arg(long)]
    pub model: String,
    /// Override the fitness r.
    #[arg(long)]
    pub r: Option<f64>,
    /// Override the policy: stationary, uniform or a comma list.
    #[arg(long)]
    pub mu: Option<String>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SolverArg {
    Auto,
    Dense,
    Iterative,
}

#[derive(Debug, Args)]
pub struct ExactArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// mask:K, K, level:J:uniform or atoms:[(MASK,W),...].
    #[arg(long)]
    pub init: Option<String>,
    #[arg(long, value_enum, default_value = "auto")]
    pub solver: SolverArg,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Event,
    Faithful,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub init: String,
    #[arg(long)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "event")]
    pub mode: ModeArg,
    #[arg(long, default_value_t = DEFAULT_MAX_STEPS)]
    pub max_steps: u64,
    /// Worker threads; the result does not depend on it.
    #[arg(long, env = THREADS_ENV)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub c: f64,
    #[arg(long)]
    pub r: f64,
    #[arg(long)]
    pub grid: usize,
    /// CSV destination; standard output when absent.
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Describe this model instead of running the builtin suite.
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long, requires = "model")]
    pub r: Option<f64>,
    #[arg(long, requires = "model")]
    pub mu: Option<String>,
    /// Seed of the random families in the builtin suite.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also write the transition kernel of --model as CSV.
    #[arg(long, requires = "model")]
    pub dump_kernel: Option<String>,
}

/// Runs the tool on `args` (without the program name), writing results to
/// `out`. Returns the process exit code.
pub fn run(args: &[String], out: &mut dyn Write) -> u8 {
    let cli = match Cli::try_parse_from(std::iter::once("moran".to_string()).chain(args.iter().cloned())) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = write!(out, "{}", e.render());
            return 0;
        }
        Err(e) => {
            let err = CliError::Usage(e.render().to_string().trim_end().to_string());
            let _ = emit(out, &err.to_json(), None);
            return err.exit_code();
        }
    };
    let indent = cli.json_indent;
    match dispatch(cli, args, out) {
        Ok(code) => code,
        Err(err) => {
            let _ = emit(out, &err.to_json(), indent);
            err.exit_code()
        }
    }
}

fn emit<T: Serialize>(out: &mut dyn Write, value: &T, indent: Option<usize>) -> io::Result<()> {
    match indent {
        Some(n) => {
            let pad = vec![b' '; n];
            let mut ser =
                serde_json::Serializer::with_formatter(&mut *out, serde_json::ser::PrettyFormatter::with_indent(&pad));
            value.serialize(&mut ser).map_err(io::Error::from)?;
        }
        None => serde_json::to_writer(&mut *out, value).map_err(io::Error::from)?,
    }
    writeln!(out)
}

fn emit_checked<T: Serialize>(out: &mut dyn Write, value: &T, indent: Option<usize>) -> CliResult<()> {
    emit(out, value, indent).map_err(|e| CliError::Output {
        path: "<stdout>".into(),
        source: e,
    })
}

fn create(path: &str) -> CliResult<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| CliError::Output {
        path: path.to_string(),
        source: e,
    })
}

fn dispatch(cli: Cli, args: &[String], out: &mut dyn Write) -> CliResult<u8> {
    let indent = cli.json_indent;
    match cli.command {
        Command::Exact(a) => {
            let model = load_model(&a.model.model, a.model.r, a.model.mu.as_deref())?;
            let alpha = a.init.as_deref().map(|s| parse_init(s, model.n())).transpose()?;
            let opts = SolverOptions {
                method: match a.solver {
                    SolverArg::Auto => SolverMethod::Auto,
                    SolverArg::Dense => SolverMethod::Dense,
                    SolverArg::Iterative => SolverMethod::Iterative,
                },
                ..SolverOptions::default()
            };
            let report = fixation_probabilities_with(&model, &opts)?;
            let manifest = RunManifest::new("exact", args, None);
            emit_checked(
                out,
                &ExactOutput::new(manifest, &model, &report, alpha.as_ref())?,
                indent,
            )?;
        }
        Command::Simulate(a) => {
            let model = load_model(&a.model.model, a.model.r, a.model.mu.as_deref())?;
            let alpha = parse_init(&a.init, model.n())?;
            let mode = match a.mode {
                ModeArg::Event => SimulationMode::EventDriven,
                ModeArg::Faithful => SimulationMode::Faithful,
            };
            let cfg = TrajectoryConfig::new(a.seed)
                .with_mode(mode)
                .with_max_steps(a.max_steps);
            let res = estimate_parallel(&model, &alpha, a.trials, &cfg, a.threads)?;
            let manifest = RunManifest::new("simulate", args, Some(a.seed));
            emit_checked(
                out,
                &SimulateOutput::new(manifest, &model, mode, a.max_steps, &res),
                indent,
            )?;
        }
        Command::Sweep(a) => {
            let grid = sweep_n2(a.c, a.r, a.grid)?;
            let undefined = grid.cells().filter(|c| c.2.is_nan()).count();
            match &a.out {
                Some(path) => {
                    let mut f = create(path)?;
                    write_sweep_csv(&mut f, &grid)
                        .and_then(|_| f.flush())
                        .map_err(|e| CliError::Output {
                            path: path.clone(),
                            source: e,
                        })?;
                    let summary = SweepOutput {
                        manifest: RunManifest::new("sweep", args, None),
                        c: a.c,
                        r: a.r,
                        grid: a.grid,
                        rows: a.grid * a.grid,
                        undefined,
                        out: path.clone(),
                    };
                    emit_checked(out, &summary, indent)?;
                }
                None => write_sweep_csv(out, &grid).map_err(|e| CliError::Output {
                    path: "<stdout>".into(),
                    source: e,
                })?,
            }
        }
        Command::Verify(a) => {
            let (suite, checks) = match &a.model {
                Some(source) => {
                    let model = load_model(source, a.r, a.mu.as_deref())?;
                    if let Some(path) = &a.dump_kernel {
                        let kernel = transition_kernel(&model)?;
                        let mut f = create(path)?;
                        write_kernel_csv(&mut f, &kernel)
                            .and_then(|_| f.flush())
                            .map_err(|e| CliError::Output {
                                path: path.clone(),
                                source: e,
                            })?;
                    }
                    ("model", model_suite(&model)?)
                }
                None => ("builtin", builtin_suite(a.seed)?),
            };
            let all_pass = checks.values().all(|c| c.pass);
            let seed = a.model.is_none().then_some(a.seed);
            let report = VerifyOutput {
                manifest: RunManifest::new("verify", args, seed),
                suite,
                all_pass,
                checks,
            };
            emit_checked(out, &report, indent)?;
            // user models are described, never failed
            if suite == "builtin" && !all_pass {
                return Ok(1);
            }
        }
    }
    Ok(0)
}
