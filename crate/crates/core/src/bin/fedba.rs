use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use fedba::fl::Execution;
use fedba::harness::{
    group_runs, load_datasets, parse_config, read_metrics, run_with_observer, summarize,
    write_metrics,
};

#[derive(Parser)]
#[command(name = "fedba", version, about = "Federated-learning simulator (FedBA / FedAvg)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write its per-round metrics CSV.
    Run {
        /// key=value config file.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Named hyperparameter preset applied before the config file.
        #[arg(long)]
        preset: Option<String>,
        #[arg(long)]
        algorithm: Option<String>,
        #[arg(long)]
        seed: Option<String>,
        #[arg(long)]
        rounds: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Extra overrides, e.g. `--set model=mlp`. Applied after the other flags.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        /// Train the clients of a round one after another.
        #[arg(long)]
        sequential: bool,
        /// Print one line per evaluated round.
        #[arg(long, short)]
        verbose: bool,
    },
    /// Summarize a metrics CSV.
    Summarize {
        #[arg(long = "in", value_name = "CSV")]
        input: PathBuf,
    },
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Run {
            config,
            preset,
            algorithm,
            seed,
            rounds,
            out,
            set,
            sequential,
            verbose,
        } => {
            let text = config
                .as_ref()
                .map(|p| fs::read_to_string(p).with_context(|| format!("reading {}", p.display())))
                .transpose()?;
            let mut overrides = Vec::new();
            let flags = [("algorithm", algorithm), ("seed", seed), ("rounds", rounds)];
            for (k, v) in flags {
                if let Some(v) = v {
                    overrides.push((k.to_string(), v));
                }
            }
            if let Some(out) = out {
                overrides.push(("out_path".to_string(), out.display().to_string()));
            }
            for kv in set {
                let (k, v) = kv
                    .split_once('=')
                    .with_context(|| format!("--set expects KEY=VALUE, got `{kv}`"))?;
                overrides.push((k.trim().to_string(), v.trim().to_string()));
            }
            let cfg = parse_config(preset.as_deref(), text.as_deref(), &overrides)?;
            let (train, test) = load_datasets(&cfg)
                .with_context(|| format!("loading {} from {}", cfg.dataset, cfg.data_dir.display()))?;
            let exec = if sequential {
                Execution::Sequential
            } else {
                Execution::Parallel
            };
            let records = run_with_observer(&cfg, &train, &test, exec, |r| {
                if verbose {
                    eprintln!(
                        "round {:>4}  acc {:.4}  loss {:.4}  w [{:.3e}, {:.3e}]",
                        r.round, r.test_accuracy, r.test_loss, r.min_weight, r.max_weight
                    );
                }
            })?;
            write_metrics(&records, &cfg.out_path)?;
            if records.is_empty() {
                println!("no rounds run; wrote header to {}", cfg.out_path.display());
            } else {
                print!("{}", summarize(&records)?);
                println!("metrics: {}", cfg.out_path.display());
            }
        }
        Command::Summarize { input } => {
            let records = read_metrics(&input)?;
            let groups = group_runs(&records);
            if groups.is_empty() {
                anyhow::bail!("{} holds no records", input.display());
            }
            for (i, g) in groups.iter().enumerate() {
                if i > 0 {
                    println!();
                }
                print!("{}", summarize(g)?);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
