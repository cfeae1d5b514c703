use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kmo::config::{Algorithm, CoordinatorMode, OneOrMany, OutlierSpec, RunConfig, ThetaGrid};
use kmo::io::{load_centers, load_csv, write_rows, CsvOptions};
use kmo::oracle::{run_oracle, OracleRun, Strategy};
use kmo::{emit_results, run_experiment, CliError, Format, RunReport};
use kmo_core::planted::{gen_planted, PlantedParams};
use kmo_core::{Dataset, RngStream};

#[derive(Parser)]
#[command(name = "kmo", version, about = "k-means with outliers: seeding, local search, fast and distributed solvers")]
struct Cli {
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// CSV file of points, one per row.
    #[arg(long)]
    input: PathBuf,
    /// Zero-based column holding a label to drop.
    #[arg(long)]
    label_column: Option<usize>,
    #[arg(long, default_value_t = 10)]
    k: usize,
    /// Outlier count, or a fraction of n such as 0.1.
    #[arg(long, default_value = "0.1")]
    z: OutlierSpec,
    #[arg(long, default_value_t = 0.2)]
    eps: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Trimmed Lloyd iterations after the solver; 0 keeps the solver's own outliers.
    #[arg(long, default_value_t = 0)]
    refine_iters: usize,
    /// Print centers in the report.
    #[arg(long)]
    centers: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Clone)]
struct Output {
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum SeedMethod {
    Penalized,
    Metropolized,
    Kmeanspp,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Simple,
    Refined,
    KmeansPar,
}

impl From<ModeArg> for CoordinatorMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Simple => CoordinatorMode::GuhaSimple,
            ModeArg::Refined => CoordinatorMode::GuhaRefined,
            ModeArg::KmeansPar => CoordinatorMode::KmeansPar,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Penalized k-means++ seeding, choosing the penalty from a grid.
    Seed {
        #[command(flatten)]
        common: Common,
        /// "paper", "ladder", or comma-separated values.
        #[arg(long, alias = "theta", default_value = "paper")]
        theta_grid: ThetaGrid,
        #[arg(long, value_enum, default_value = "penalized")]
        method: SeedMethod,
        /// Chain length for the metropolized method.
        #[arg(long, default_value_t = 100)]
        mh_steps: usize,
    },
    /// Local search with outliers over the penalty ladder.
    LocalSearch {
        #[command(flatten)]
        common: Common,
    },
    /// The fast subsampled pipeline.
    Fast {
        #[command(flatten)]
        common: Common,
        /// Trimming constant A.
        #[arg(long, default_value_t = 2.0)]
        a: f64,
    },
    /// Simulated coordinator-model pipeline.
    Distributed {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 10)]
        machines: usize,
        #[arg(long, value_enum, default_value = "simple")]
        mode: ModeArg,
    },
    /// Budgeted strategies on a hard instance in the distance-query model.
    Hardness {
        #[arg(long, default_value_t = 20000)]
        n: usize,
        #[arg(long, default_value_t = 20)]
        k: usize,
        #[arg(long, default_value_t = 2000)]
        z: usize,
        #[arg(long, default_value_t = 0)]
        budget: u64,
        #[arg(long, value_enum, default_value = "uniform")]
        strategy: Strategy,
        /// Scoring discards at most this many multiples of z.
        #[arg(long, default_value_t = 2.0)]
        outlier_multiplier: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Number of consecutive seeds to run.
        #[arg(long, default_value_t = 1)]
        trials: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Runs a TOML experiment configuration over a dataset.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        label_column: Option<usize>,
        #[command(flatten)]
        output: Output,
    },
    /// Scores a center file: k-means cost after discarding the z farthest points.
    Score {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        label_column: Option<usize>,
        /// CSV of centers, one per row.
        #[arg(long)]
        centers: PathBuf,
        #[arg(long, default_value = "0")]
        z: OutlierSpec,
        #[command(flatten)]
        output: Output,
    },
    /// Writes a planted instance as CSV and prints its optimum to standard error.
    Planted {
        #[arg(long, default_value_t = 2000)]
        n: usize,
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[arg(long, default_value_t = 50)]
        z: usize,
        #[arg(long, default_value_t = 5)]
        dim: usize,
        #[arg(long, default_value_t = 10.0)]
        separation: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Also write the ground-truth centers here.
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load(path: &Path, label_column: Option<usize>) -> Result<Dataset, CliError> {
    let opts = CsvOptions {
        label_column,
        ..CsvOptions::default()
    };
    Ok(load_csv(path, &opts)?)
}

fn sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>, CliError> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    })
}

fn emit(reports: &[RunReport], output: &Output) -> Result<(), CliError> {
    emit_results(reports, output.format, sink(&output.out)?)
}

fn single(common: &Common, algorithm: Algorithm, tweak: impl FnOnce(&mut RunConfig)) -> Result<(), CliError> {
    let data = load(&common.input, common.label_column)?;
    let mut cfg = RunConfig {
        algorithm,
        k: OneOrMany::One(common.k),
        z: common.z,
        eps: common.eps,
        seeds: OneOrMany::One(common.seed),
        refine_iters: common.refine_iters,
        emit_centers: common.centers,
        ..RunConfig::default()
    };
    tweak(&mut cfg);
    let reports = run_experiment(&cfg, &data)?;
    emit(&reports, &common.output)?;
    match reports.iter().find_map(|r| r.error.clone()) {
        Some(e) => Err(CliError::Run(e)),
        None => Ok(()),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Seed {
            common,
            theta_grid,
            method,
            mh_steps,
        } => {
            let algorithm = match method {
                SeedMethod::Penalized => Algorithm::Penalized,
                SeedMethod::Metropolized => Algorithm::Metropolized,
                SeedMethod::Kmeanspp => Algorithm::KmeansPP,
            };
            single(&common, algorithm, |c| {
                c.theta_grid = theta_grid;
                c.mh_steps = mh_steps;
            })
        }
        Command::LocalSearch { common } => single(&common, Algorithm::LsOutliers, |_| {}),
        Command::Fast { common, a } => single(&common, Algorithm::Fast, |c| c.a = a),
        Command::Distributed { common, machines, mode } => single(&common, Algorithm::Coordinator, |c| {
            c.machines = machines;
            c.mode = mode.into();
        }),
        Command::Hardness {
            n,
            k,
            z,
            budget,
            strategy,
            outlier_multiplier,
            seed,
            trials,
            output,
        } => {
            if z == 0 || k as u64 + z as u64 >= n as u64 {
                return Err(CliError::Infeasible {
                    needed: (k + z) as u64,
                    n: n as u64,
                });
            }
            let reports = (seed..seed + trials.max(1))
                .map(|s| {
                    run_oracle(&OracleRun {
                        n,
                        k,
                        z,
                        budget,
                        outlier_multiplier,
                        strategy,
                        seed: s,
                    })
                })
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| CliError::Config(e.to_string()))?;
            emit(&reports, &output)
        }
        Command::Experiment {
            config,
            input,
            label_column,
            output,
        } => {
            let text = std::fs::read_to_string(&config)
                .map_err(|e| CliError::Config(format!("{}: {e}", config.display())))?;
            let cfg = RunConfig::from_toml(&text)?;
            let data = load(&input, label_column)?;
            let reports = run_experiment(&cfg, &data)?;
            emit(&reports, &output)
        }
        Command::Score {
            input,
            label_column,
            centers,
            z,
            output,
        } => {
            let data = load(&input, label_column)?;
            let c = load_centers(&centers)?;
            let z = z.resolve(data.len())?;
            if z >= data.total_weight() {
                return Err(CliError::Infeasible {
                    needed: z,
                    n: data.total_weight(),
                });
            }
            let costs = kmo_core::cost::point_costs(&data, &c);
            let phi = kmo_core::cost::phi_minus_z(&data, &c, z)?;
            let report = RunReport {
                algorithm: "score".into(),
                n: data.len(),
                dim: data.dim(),
                k: c.len(),
                z,
                eps: 0.0,
                seed: 0,
                theta: None,
                cost_phi_inliers: phi,
                cost_tau: kmo_core::cost::tau_from_costs(&costs, data.weights(), kmo_core::PenaltyThreshold::infinite()),
                num_outliers: z,
                runtime_ms: 0,
                distance_evals: (data.len() * c.len()) as u64,
                queries_used: None,
                budget: None,
                relaxed_constants: None,
                theta_feasible: true,
                qualified: true,
                error: None,
                centers: None,
            };
            emit(&[report], &output)
        }
        Command::Planted {
            n,
            k,
            z,
            dim,
            separation,
            seed,
            truth,
            out,
        } => {
            let mut p = PlantedParams::new(n, k, z, dim);
            p.separation = separation;
            if k + z >= n {
                return Err(CliError::Infeasible {
                    needed: (k + z) as u64,
                    n: n as u64,
                });
            }
            let inst = gen_planted(&p, &mut RngStream::new(seed).rng()).map_err(|e| CliError::Config(e.to_string()))?;
            write_rows(sink(&out)?, inst.dataset.rows().map(<[f64]>::to_vec))?;
            if let Some(t) = truth {
                write_rows(File::create(t)?, inst.centers.iter().map(<[f64]>::to_vec))?;
            }
            eprintln!("opt = {}", inst.opt);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
