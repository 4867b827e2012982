use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use eegboost::baselines::selectors::{self, LassoConfig, SelectorKind};
use eegboost::dataspace::{self, SplitSpec};
use eegboost::harness::{report, run_experiment, ExperimentConfig};
use eegboost::neuralgas::NgnParams;
use eegboost::swarmopt::{self, SwarmParams, TuneConfig};
use eegboost::{boostforest::BoostParams, Error, Result};

#[derive(Parser)]
#[command(
    name = "eegboost",
    version,
    about = "Feature selection and fuzzy boosted-tree experiments on tabular EEG data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the classifier x selector grid described by a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a seeded synthetic dataset as CSV.
    Synth {
        #[arg(long, default_value_t = 600)]
        n: usize,
        #[arg(long, default_value_t = 25)]
        d: usize,
        #[arg(long, default_value_t = 4)]
        k: usize,
        #[arg(long, default_value_t = 3.0)]
        separation: f64,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rank features of a standardized CSV and write the selection.
    Select {
        #[arg(long, value_parser = ["chi2", "pca", "lasso", "ngn"])]
        method: String,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Tune booster depth and learning rate on the training split.
    Tune {
        #[arg(long)]
        data: PathBuf,
        /// Output directory for the trace and tuned parameters.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        swarm_size: usize,
        #[arg(long, default_value_t = 100)]
        max_iters: usize,
    },
    /// Rebuild tables and figures of a results directory.
    Report {
        #[arg(long)]
        results: PathBuf,
    },
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let data = cfg.data.load(config.parent())?;
            let output = run_experiment(&cfg, &data)?;
            let dir = report::write_experiment(&out, &cfg, &output)?;
            print!("{}", output.table.to_text());
            println!("results written to {}", dir.display());
            let failures = output.table.total_failures();
            if failures > 0 {
                eprintln!("warning: {failures} run(s) failed, see failures.csv");
            }
        }
        Command::Synth {
            n,
            d,
            k,
            separation,
            seed,
            out,
        } => {
            let data = dataspace::synth(n, d, k, separation, seed)?;
            dataspace::write_csv(&data, &out)?;
            println!("wrote {} rows x {} features to {}", n, d, out.display());
        }
        Command::Select {
            method,
            k,
            data,
            out,
            seed,
        } => {
            let ds = dataspace::load_csv(&data)?;
            let ds = dataspace::fit_standardizer(ds.features())?.apply_dataset(&ds)?;
            let (x, y, classes) = (ds.features(), ds.labels(), ds.n_classes());
            let result = match SelectorKind::parse(&method) {
                Some(SelectorKind::Chi2) => selectors::chi2_select(x, y, classes, k)?,
                Some(SelectorKind::Pca) => selectors::pca_select(x, k)?,
                Some(SelectorKind::Lasso) => {
                    selectors::lasso_select(x, y, classes, k, &LassoConfig::default())?
                }
                Some(SelectorKind::Ngn) => selectors::ngn_select(
                    x,
                    k,
                    &NgnParams {
                        seed,
                        ..Default::default()
                    },
                )?,
                _ => return Err(Error::InvalidParameter(format!("unknown method {method}"))),
            };
            let mut buf = Vec::new();
            result
                .write_csv(ds.feature_names(), &mut buf)
                .map_err(|e| Error::io(&out, e))?;
            fs::write(&out, buf).map_err(|e| Error::io(&out, e))?;
            println!("wrote {} selection to {}", method, out.display());
        }
        Command::Tune {
            data,
            out,
            seed,
            swarm_size,
            max_iters,
        } => {
            let ds = dataspace::load_csv(&data)?;
            let (train, _) = dataspace::split(
                &ds,
                &SplitSpec {
                    seed,
                    ..Default::default()
                },
            )?;
            let train = dataspace::fit_standardizer(train.features())?.apply_dataset(&train)?;
            let config = TuneConfig {
                swarm: SwarmParams {
                    swarm_size,
                    max_iters,
                    seed,
                    ..Default::default()
                },
                ..Default::default()
            };
            let base = BoostParams::default();
            let outcome = swarmopt::tune_booster(&train, &base, &config)?;
            create_dir(&out)?;
            let mut buf = Vec::new();
            swarmopt::write_trace_csv(&outcome.trace, &mut buf).map_err(|e| Error::io(&out, e))?;
            let trace_path = out.join("pso_trace.csv");
            fs::write(&trace_path, buf).map_err(|e| Error::io(&trace_path, e))?;
            let params = toml::to_string(&outcome.apply(&base)).expect("params serialize");
            let params_path = out.join("tuned_params.toml");
            fs::write(&params_path, params).map_err(|e| Error::io(&params_path, e))?;
            report::render_figures(&out)?;
            println!(
                "max_depth = {}, learning_rate = {:.4}, best cost = {:.4}",
                outcome.max_depth, outcome.learning_rate, outcome.best_cost
            );
        }
        Command::Report { results } => {
            let table = report::report(&results)?;
            print!("{}", table.to_text());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
