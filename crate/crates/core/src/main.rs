use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::info;

use ganmc::eval::{self, ExperimentConfig, ModelKind};
use ganmc::gan::{load_checkpoint, save_checkpoint, GanModel};
use ganmc::market_data::{load_dividends, load_price_series, load_quotes, PriceSeries};
use ganmc::pricing::options::{ExerciseStyle, OptionContract, OptionSide};
use ganmc::{Error, Result};

#[derive(Parser)]
#[command(name = "ganmc", version, about = "GAN-based Monte Carlo pricing of options and futures")]
struct Cli {
    /// Experiment config file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the config seed
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a generator on the full price history and save a checkpoint
    Train,
    /// Write generated tracks most similar to the latest window as CSV
    Generate {
        #[arg(long)]
        count: usize,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Price an option as of the last price date
    PriceOption {
        #[arg(long)]
        side: OptionSide,
        #[arg(long, default_value = "european")]
        style: ExerciseStyle,
        #[arg(long)]
        strike: f64,
        /// Year fraction to expiry
        #[arg(long)]
        expiry: f64,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Price an equity futures contract as of the last price date
    PriceEquityFutures {
        /// Year fraction to delivery
        #[arg(long)]
        expiry: f64,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Price a commodity forward or futures contract as of the last price date
    PriceCommodity {
        /// Year fraction to delivery
        #[arg(long)]
        expiry: f64,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Price the test contracts with the configured model and write a report
    Evaluate {
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Evaluate a reference model (bs, mc, lr, lr-itm, lr-otm)
    Baseline {
        #[arg(long)]
        model: ModelKind,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::InvalidConfig("--config is required".into()))?;
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn output(cli: &Cli, cfg: &ExperimentConfig, default: &str) -> PathBuf {
    cli.out
        .clone()
        .or_else(|| cfg.output.clone())
        .unwrap_or_else(|| PathBuf::from(default))
}

fn prices(cfg: &ExperimentConfig) -> Result<PriceSeries<f64>> {
    load_price_series(&cfg.prices, &cfg.symbol).map_err(|e| e.in_stage("market_data"))
}

/// Loads `checkpoint` or trains on the full history.
fn generator(cfg: &ExperimentConfig, checkpoint: Option<&Path>, prices: &PriceSeries<f64>) -> Result<GanModel<f64>> {
    match checkpoint {
        Some(path) => {
            let model: GanModel<f64> = load_checkpoint(path)?;
            if model.window_len() != cfg.window_len {
                return Err(Error::DimensionMismatch {
                    context: "checkpoint window length",
                    expected: cfg.window_len,
                    found: model.window_len(),
                });
            }
            Ok(model)
        }
        None => eval::fit_generator(cfg, prices).map(|(m, _)| m),
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = load_config(&cli)?;
    match &cli.command {
        Command::Train => {
            let p = prices(&cfg)?;
            let (model, report) = eval::fit_generator(&cfg, &p)?;
            let out = output(&cli, &cfg, "model.gmc");
            save_checkpoint(&model, &out)?;
            println!(
                "stride={} epochs={} final_d_loss={} final_g_loss={} checkpoint={}",
                report.stride,
                report.epochs_run,
                report.discriminator_loss.last().copied().unwrap_or(f64::NAN),
                report.generator_loss.last().copied().unwrap_or(f64::NAN),
                out.display()
            );
        }
        Command::Generate { count, checkpoint } => {
            let p = prices(&cfg)?;
            let model = generator(&cfg, checkpoint.as_deref(), &p)?;
            let out = output(&cli, &cfg, "tracks.csv");
            let rows = eval::generate_tracks(&cfg, &model, &p, *count, &out)?;
            info!("wrote {rows} rows to {}", out.display());
        }
        Command::PriceOption {
            side,
            style,
            strike,
            expiry,
            checkpoint,
        } => {
            let p = prices(&cfg)?;
            let model = generator(&cfg, checkpoint.as_deref(), &p)?;
            let contract = OptionContract::new(*side, *style, *strike, *expiry, cfg.symbol.clone())?;
            let price = eval::price_option_now(&cfg, &model, &p, &contract)?;
            println!(
                "value={} lower={} upper={} n_samples={}",
                price.value, price.lower, price.upper, price.n_samples
            );
        }
        Command::PriceEquityFutures { expiry, checkpoint } => {
            let p = prices(&cfg)?;
            let path = cfg
                .dividends
                .clone()
                .ok_or_else(|| Error::InvalidConfig("equity futures need `dividends` in [data]".into()))?;
            let divs = load_dividends(&path, &cfg.symbol)
                .and_then(|d| d.aligned_to(&p))
                .map_err(|e| e.in_stage("market_data"))?;
            let model = generator(&cfg, checkpoint.as_deref(), &p)?;
            let price = eval::price_equity_futures_now(&cfg, &model, &p, &divs, *expiry)?;
            println!("value={price}");
        }
        Command::PriceCommodity { expiry, checkpoint } => {
            let p = prices(&cfg)?;
            let path = cfg
                .quotes
                .clone()
                .ok_or_else(|| Error::InvalidConfig("commodity pricing needs `quotes` in [data]".into()))?;
            let quotes = load_quotes(&path, &cfg.symbol).map_err(|e| e.in_stage("market_data"))?;
            let model = generator(&cfg, checkpoint.as_deref(), &p)?;
            let price = eval::price_commodity_now(&cfg, &model, &p, &quotes, *expiry)?;
            println!("value={price}");
        }
        Command::Evaluate { checkpoint } => {
            let model = match checkpoint {
                Some(path) => Some(load_checkpoint::<f64>(path)?),
                None => None,
            };
            let report = eval::run_pipeline_with(&cfg, model.as_ref())?;
            write_report(&cli, &cfg, &report)?;
        }
        Command::Baseline { model } => {
            if *model == ModelKind::GanMc {
                return Err(Error::InvalidConfig("use `evaluate` for gan-mc".into()));
            }
            cfg.model = *model;
            let report = eval::run_pipeline::<f64>(&cfg)?;
            write_report(&cli, &cfg, &report)?;
        }
    }
    Ok(())
}

fn write_report(cli: &Cli, cfg: &ExperimentConfig, report: &eval::EvalReport<f64>) -> Result<()> {
    let out = output(cli, cfg, "report.csv");
    report.write(&out).map_err(|e| e.in_stage("report"))?;
    println!("{} MAPE {}% over {} contracts -> {}", report.model, report.mape, report.rows.len(), out.display());
    Ok(())
}
