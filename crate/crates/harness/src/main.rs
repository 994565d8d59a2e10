use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use iemo_harness::experiment::{run_one, summarize, StoredRun};
use iemo_harness::output::{self, load_config, load_plan, load_runs, render, write_runs, write_summary};
use iemo_harness::{run_experiment, run_sweep, Precision, SweepOptions, SweepParam};

/// Interactive decomposition-based EMO experiments.
#[derive(Parser)]
#[command(name = "iemo", version)]
struct Cli {
    /// Scalar type used by the optimizers.
    #[arg(long, global = true, default_value = "f64")]
    precision: Precision,
    /// Results directory [default: $IEMO_OUTPUT_DIR or ./results].
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration with the simulated decision maker.
    Run {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Interactive-vs-baseline replicates from a plan file.
    Experiment { plan: PathBuf },
    /// Vary one parameter of a base configuration.
    Sweep {
        #[arg(long)]
        param: SweepParam,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        #[arg(long)]
        config: PathBuf,
        /// Seeds 1..=N.
        #[arg(long, default_value_t = 21)]
        replicates: u64,
        /// Also run elicitation driven by the golden value function.
        #[arg(long)]
        utopia: bool,
        /// Also run the non-interactive baseline and test against it.
        #[arg(long)]
        baseline: bool,
    },
    /// Summarize stored runs.
    Report,
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn real_main() -> Result<ExitCode> {
    let cli = Cli::parse();
    let dir = cli.out.clone().unwrap_or_else(output::output_dir);
    match cli.command {
        Command::Run { config, seed } => {
            let mut cfg = load_config(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let result = run_one(&cfg, cli.precision)?;
            let run = StoredRun {
                label: config
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "run".into()),
                result,
            };
            write_runs(&dir, std::slice::from_ref(&run))?;
            println!(
                "{} {} m={} seed={} interactive={}: final error {:.6e} after {} evaluations, {} consultations",
                run.result.config.algorithm,
                run.result.config.problem.id,
                run.result.config.m(),
                run.result.seed,
                run.result.config.interactive,
                run.final_error(),
                run.result.evaluations,
                run.result.consultations,
            );
            println!("wrote {}", output::run_path(&dir, &run).display());
            if run.result.aborted {
                eprintln!("run aborted");
                return Ok(ExitCode::from(2));
            }
        }
        Command::Experiment { plan } => {
            let plan = load_plan(&plan)?;
            let (runs, summary) = run_experiment(&plan.bases()?, &plan.seeds(), cli.precision)?;
            write_runs(&dir, &runs)?;
            write_summary(&dir, &runs, &summary)?;
            print!("{}", render(&summary));
            if runs.iter().any(|r| r.result.aborted) {
                return Ok(ExitCode::from(2));
            }
        }
        Command::Sweep {
            param,
            values,
            config,
            replicates,
            utopia,
            baseline,
        } => {
            let base = load_config(&config)?;
            let seeds: Vec<u64> = (1..=replicates).collect();
            let (runs, summary) = run_sweep(
                param,
                &values,
                &base,
                SweepOptions { utopia, baseline },
                &seeds,
                cli.precision,
            )?;
            write_runs(&dir, &runs)?;
            write_summary(&dir, &runs, &summary)?;
            print!("{}", render(&summary));
        }
        Command::Report => {
            let runs = load_runs(&dir).with_context(|| format!("no stored runs in {}", dir.display()))?;
            let summary = summarize(&runs, &[]);
            write_summary(&dir, &runs, &summary)?;
            print!("{}", render(&summary));
        }
    }
    Ok(ExitCode::SUCCESS)
}
