use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use cmh_core::models::GeneratingHyper;
use cmh_harness::config::HarnessConfig;
use cmh_harness::error::{HarnessError, Result};
use cmh_harness::experiment::{run_all, run_reference, with_workers, BuiltModel};
use cmh_harness::{bounds, dataset, report, trace};

#[derive(Parser)]
#[command(
    name = "cmh",
    version,
    about = "Gibbs vs conditional Metropolis-Hastings experiment harness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run configured GS/CMH comparisons and write report.csv.
    RunExperiment {
        #[arg(long)]
        config: PathBuf,
        /// Master seed, overriding the config file.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        workers: Option<usize>,
        /// Directory for report.csv; the report is always echoed to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Only run the experiments with these ids.
        #[arg(long = "experiment")]
        only: Vec<String>,
    },
    /// Print ergodicity thresholds as a key-value table.
    Bounds {
        #[arg(long, value_enum)]
        model: BoundsModel,
        #[arg(long)]
        gamma: f64,
        #[arg(long = "K", default_value_t = 3)]
        k: usize,
        #[arg(long, default_value_t = 10)]
        m: usize,
        #[arg(long, default_value_t = 30.0)]
        a1: f64,
        #[arg(long, default_value_t = 30.0)]
        a2: f64,
    },
    /// Write the configured trace windows to trace.csv.
    Trace {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Only emit the traces with these ids.
        #[arg(long = "trace")]
        only: Vec<String>,
    },
    /// Simulate a random effects dataset into dataset.csv and dataset.meta.
    SimulateData {
        #[arg(long = "K")]
        k: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        m0: f64,
        #[arg(long, default_value_t = 1.0)]
        s0: f64,
        /// Gamma shape of both generating precisions.
        #[arg(long, default_value_t = 2.0)]
        a: f64,
        /// Gamma rate of both generating precisions.
        #[arg(long, default_value_t = 2.0)]
        b: f64,
    },
    /// Print the reference estimate of an experiment's functional from a long GS run.
    Reference {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        experiment: String,
        #[arg(long)]
        length: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum BoundsModel {
    NormalNormal,
    RandomEffects,
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|source| HarnessError::Write {
        path: path.to_owned(),
        source,
    })
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| HarnessError::Write {
        path: dir.to_owned(),
        source,
    })
}

fn select<'a, T>(items: &'a [T], only: &[String], id: impl Fn(&T) -> &str, what: &str) -> Result<Vec<&'a T>> {
    if let Some(missing) = only.iter().find(|o| !items.iter().any(|i| id(i) == o.as_str())) {
        return Err(HarnessError::Config(format!("no {what} with id {missing:?}")));
    }
    Ok(items
        .iter()
        .filter(|i| only.is_empty() || only.iter().any(|o| o == id(i)))
        .collect())
}

fn emit(out: Option<&Path>, file: &str, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = out {
        ensure_dir(dir)?;
        write_file(&dir.join(file), bytes)?;
    }
    std::io::stdout()
        .write_all(bytes)
        .map_err(|source| HarnessError::Write {
            path: PathBuf::from("<stdout>"),
            source,
        })
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::RunExperiment {
            config,
            seed,
            workers,
            out,
            only,
        } => {
            let cfg = HarnessConfig::load(&config)?;
            let experiments: Vec<_> = select(&cfg.experiments, &only, |e| &e.id, "experiment")?
                .into_iter()
                .cloned()
                .collect();
            let outcomes = run_all(&experiments, seed.unwrap_or(cfg.seed), workers.or(cfg.workers))?;
            let mut buf = Vec::new();
            report::write_report(&mut buf, &outcomes)?;
            emit(out.as_deref(), report::REPORT_FILE, &buf)
        }
        Command::Bounds {
            model,
            gamma,
            k,
            m,
            a1,
            a2,
        } => {
            let table = match model {
                BoundsModel::NormalNormal => bounds::normal_normal_bounds(gamma)?,
                BoundsModel::RandomEffects => bounds::random_effects_bounds(k, m, a1, a2, gamma)?,
            };
            print!("{}", bounds::render(&table));
            Ok(())
        }
        Command::Trace {
            config,
            seed,
            out,
            only,
        } => {
            let cfg = HarnessConfig::load(&config)?;
            let traces = select(&cfg.traces, &only, |t| &t.id, "trace")?;
            if traces.is_empty() {
                return Err(HarnessError::Config(format!(
                    "{} defines no [[trace]] entries",
                    config.display()
                )));
            }
            let seed = seed.unwrap_or(cfg.seed);
            let mut rows = Vec::new();
            for t in traces {
                rows.extend(trace::emit_trace(t, seed)?);
            }
            let mut buf = Vec::new();
            report::write_trace(&mut buf, &rows)?;
            emit(out.as_deref(), report::TRACE_FILE, &buf)
        }
        Command::SimulateData {
            k,
            m,
            seed,
            out,
            m0,
            s0,
            a,
            b,
        } => {
            let hyper = GeneratingHyper { m0, s0, a, b };
            let (sim, meta) = dataset::simulate(k, m, &hyper, seed)?;
            ensure_dir(&out)?;
            dataset::write_dataset(&out.join(dataset::DATASET_FILE), &sim.dataset)?;
            dataset::write_meta(&out.join(dataset::META_FILE), &meta)?;
            println!(
                "wrote {} observations to {}",
                k * m,
                out.join(dataset::DATASET_FILE).display()
            );
            Ok(())
        }
        Command::Reference {
            config,
            experiment,
            length,
            seed,
        } => {
            let cfg = HarnessConfig::load(&config)?;
            let exp = select(
                &cfg.experiments,
                std::slice::from_ref(&experiment),
                |e| &e.id,
                "experiment",
            )?[0];
            let seed = seed.or(exp.seed).unwrap_or(cfg.seed);
            let built = BuiltModel::from_config(&exp.model)?;
            let beta = with_workers(cfg.workers, || {
                run_reference(built.target(), exp.functional(), length, seed)
            })?;
            println!("beta_star = {beta}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("CMH_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
