//! Trains on a simulated GBM history and prices ten calls against Black-Scholes.
//!
//! `cargo run --release --example synthetic_calls -- [seed] [extra config lines...]`

use ganmc::baselines::{bs_price, GbmParams, GbmSampler};
use ganmc::eval::{run_pipeline, write_option_quotes, ExperimentConfig, OptionQuote};
use ganmc::market_data::{weekdays_from, write_price_series, PriceSeries};
use ganmc::pricing::options::{ExerciseStyle, OptionContract, OptionSide};
use ganmc::sampler::TrackSampler;

fn main() -> ganmc::Result<()> {
    env_logger::init();
    let args: Vec<String> = std::env::args().skip(1).collect();
    let seed: u64 = args.first().and_then(|s| s.parse().ok()).unwrap_or(7);
    let extra = args.iter().skip(1).cloned().collect::<Vec<_>>().join("\n");
    let dir = tempfile::tempdir().unwrap();
    let (sigma, rate, tau) = (0.2, 0.05, 0.25);
    let gbm = GbmSampler::new(100.0, GbmParams::new(0.05, sigma)?, 1.0 / 252.0, 699)?;
    let mut path = vec![100.0];
    path.extend(gbm.sample(1, seed)?.remove(0).values);
    let dates = weekdays_from(chrono::NaiveDate::from_ymd_opt(2020, 1, 1).unwrap(), path.len());
    let series = PriceSeries::new("SYN", dates.iter().copied().zip(path.iter().copied()).collect())?;
    write_price_series(dir.path().join("prices.csv"), &series)?;
    let spot = series.last();
    let quotes: Vec<OptionQuote<f64>> = (0..10)
        .map(|i| {
            let m = 0.9 + 0.2 * i as f64 / 9.0;
            let strike = spot / m;
            let c = OptionContract::new(OptionSide::Call, ExerciseStyle::European, strike, tau, "SYN").unwrap();
            let price = bs_price(OptionSide::Call, spot, strike, rate, sigma, tau).unwrap();
            OptionQuote { date: *dates.last().unwrap(), contract: c, spot, price }
        })
        .collect();
    write_option_quotes(dir.path().join("options.csv"), &quotes)?;
    let text = format!(
        "[data]\nprices = prices.csv\ncontracts = options.csv\n[model]\nwindow_len = 64\nn_samples = 2048\nalpha = 0.8\nrate = {rate}\n{extra}\n[run]\nseed = {seed}\n"
    );
    let mut cfg = ExperimentConfig::parse(&text)?;
    cfg.resolve_paths(dir.path());
    let t0 = std::time::Instant::now();
    let report = run_pipeline::<f64>(&cfg)?;
    print!("{}", report.to_csv());
    println!("elapsed {:.1}s", t0.elapsed().as_secs_f64());
    Ok(())
}
