use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use fdwpcn::harness::{convergence_trace, run_experiment, ExperimentSpec};
use fdwpcn::scenario::{realize, SystemConfig};
use fdwpcn::schemes::SchemeRegistry;

#[derive(Parser)]
#[command(name = "fdwpcn", version, about = "IRS-aided full-duplex WPCN throughput experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a sweep described by an experiment file.
    Run {
        spec: PathBuf,
        /// Overrides `output` from the experiment table.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Write the objective trace of one solve.
    Trace {
        #[arg(long)]
        scheme: String,
        #[arg(long)]
        seed: u64,
        /// Scenario file; defaults are used without one.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Defaults to stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Inspect channel realizations.
    Channels {
        /// Write every link coefficient as CSV.
        #[arg(long)]
        dump: bool,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Defaults to the configuration's `rng_seed`.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// List the registered schemes.
    Schemes,
}

fn load_config(path: Option<&PathBuf>) -> Result<SystemConfig> {
    match path {
        Some(p) => SystemConfig::load(p).with_context(|| format!("loading {}", p.display())),
        None => Ok(SystemConfig::default()),
    }
}

fn sink(path: Option<&PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(cli: Cli) -> Result<bool> {
    let registry = SchemeRegistry::with_builtin();
    match cli.command {
        Command::Run { spec, output } => {
            let exp = ExperimentSpec::load(&spec).with_context(|| format!("loading {}", spec.display()))?;
            let out = output
                .or_else(|| exp.experiment.output.clone())
                .unwrap_or_else(|| PathBuf::from("results.csv"));
            let table = run_experiment(&exp, &registry)?;
            let written = table.write_outputs(&exp, &out)?;
            for a in &table.aggregates {
                println!("{:<14} {}={:<8} mean {:.6} stderr {:.6} (n={})", a.scheme, table.axis, a.value, a.mean, a.stderr, a.n);
            }
            for r in table.rows.iter().filter(|r| r.error.is_some()) {
                eprintln!("error: {} {}={} seed {}: {}", r.scheme, table.axis, r.value, r.seed, r.error.as_deref().unwrap_or(""));
            }
            for p in &written {
                eprintln!("wrote {}", p.display());
            }
            Ok(!table.has_errors())
        }
        Command::Trace { scheme, seed, config, output } => {
            let cfg = load_config(config.as_ref())?;
            let mut w = sink(output.as_ref())?;
            let res = convergence_trace(&cfg, &registry, &scheme, seed, &mut w)?;
            w.flush()?;
            eprintln!("{scheme}: objective {:.6} after {} sweeps", res.objective, res.iterations);
            Ok(true)
        }
        Command::Channels { dump, config, seed, output } => {
            if !dump {
                bail!("nothing to do; pass --dump");
            }
            let cfg = load_config(config.as_ref())?;
            let seed = seed.unwrap_or(cfg.seed());
            let (_, ch) = realize(&cfg, seed)?;
            let mut w = sink(output.as_ref())?;
            ch.write_csv(&mut w)?;
            w.flush()?;
            Ok(true)
        }
        Command::Schemes => {
            for s in registry.iter() {
                println!("{:<14} {}", s.name(), s.description());
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(err) if err.chain().any(|e| e.downcast_ref::<io::Error>().is_some_and(|e| e.kind() == io::ErrorKind::BrokenPipe)) => {
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
