use std::path::Path;
use std::sync::Mutex;

use chrono::NaiveDate;

use ganmc::baselines::{bs_price, GbmParams, GbmSampler, Regime};
use ganmc::eval::{
    generate_tracks, load_dataset, price_with_source, run_pipeline, write_option_quotes, ExperimentConfig, GbmSource,
    OptionQuote, PricingContext, SamplerSource,
};
use ganmc::market_data::{weekdays_from, write_dividends, write_price_series, write_quotes, DividendSeries, PriceSeries, Quote, QuoteSeries};
use ganmc::pricing::options::{ExerciseStyle, OptionContract, OptionSide};
use ganmc::sampler::TrackSampler;
use ganmc::Result;

const DAYS: usize = 200;

fn dates() -> Vec<NaiveDate> {
    weekdays_from(NaiveDate::from_ymd_opt(2021, 3, 1).unwrap(), DAYS)
}

fn price(i: usize) -> f64 {
    100.0 + 6.0 * (i as f64 / 9.0).sin() + 0.04 * i as f64
}

/// Price history plus option, dividend and futures tables in `dir`.
fn write_fixture(dir: &Path) {
    let d = dates();
    let series = PriceSeries::new("FIX", d.iter().copied().zip((0..DAYS).map(price)).collect()).unwrap();
    write_price_series(dir.join("prices.csv"), &series).unwrap();

    let rows = [(150, OptionSide::Call, 100.0), (170, OptionSide::Put, 106.0), (199, OptionSide::Call, 112.0)];
    let options: Vec<OptionQuote<f64>> = rows
        .iter()
        .map(|&(i, side, strike)| OptionQuote {
            date: d[i],
            contract: OptionContract::new(side, ExerciseStyle::European, strike, 0.1, "FIX").unwrap(),
            spot: price(i),
            price: 3.0,
        })
        .collect();
    write_option_quotes(dir.join("options.csv"), &options).unwrap();

    let divs = DividendSeries::new("FIX", (0..DAYS).step_by(20).map(|i| (d[i], 0.5 + 0.001 * i as f64)).collect()).unwrap();
    write_dividends(dir.join("dividends.csv"), &divs).unwrap();

    let quotes: Vec<Quote<f64>> = (120..DAYS)
        .step_by(5)
        .map(|i| Quote {
            date: d[i],
            last: price(i) * 1.01,
            ttd_years: (10 + i % 20) as f64 / 252.0,
            spot: price(i),
        })
        .collect();
    write_quotes(dir.join("quotes.csv"), &QuoteSeries::new("FUT", quotes).unwrap()).unwrap();
}

fn config(dir: &Path, body: &str) -> ExperimentConfig {
    write_fixture(dir);
    let mut cfg = ExperimentConfig::parse(&format!("[data]\nprices = prices.csv\n{body}")).unwrap();
    cfg.resolve_paths(dir);
    cfg
}

const OPTIONS: &str = "contracts = options.csv\n[model]\nwindow_len = 32\nn_samples = 500\nrate = 0.01\n";

#[test]
fn bs_matches_direct_calls() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), &format!("{OPTIONS}model = bs\nvolatility = 0.25\n"));
    let report = run_pipeline::<f64>(&cfg).unwrap();
    assert_eq!(report.rows.len(), 3);
    let expected = [
        bs_price(OptionSide::Call, price(150), 100.0, 0.01, 0.25, 0.1).unwrap(),
        bs_price(OptionSide::Put, price(170), 106.0, 0.01, 0.25, 0.1).unwrap(),
        bs_price(OptionSide::Call, price(199), 112.0, 0.01, 0.25, 0.1).unwrap(),
    ];
    for (row, want) in report.rows.iter().zip(expected) {
        assert_eq!(row.predicted, want);
        assert_eq!(row.actual, 3.0);
    }
    let csv = report.to_csv();
    assert!(csv.starts_with("id,predicted,actual,ape_pct\n"));
    assert!(csv.trim_end().ends_with(&format!("# model=bs rows=3 mape_pct={}", report.mape)));
}

#[test]
fn missing_data_file_fails_in_market_data() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(dir.path(), &format!("{OPTIONS}model = bs\n"));
    cfg.prices = dir.path().join("absent.csv");
    let err = run_pipeline::<f64>(&cfg).unwrap_err();
    assert_eq!(err.stage(), Some("market_data"));
}

#[test]
fn mc_reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), &format!("{OPTIONS}model = mc\n[run]\nseed = 3\n"));
    let a = run_pipeline::<f64>(&cfg).unwrap();
    let b = run_pipeline::<f64>(&cfg).unwrap();
    assert_eq!(a.to_csv(), b.to_csv());
    a.write(dir.path().join("r1.csv")).unwrap();
    b.write(dir.path().join("r2.csv")).unwrap();
    assert_eq!(
        std::fs::read(dir.path().join("r1.csv")).unwrap(),
        std::fs::read(dir.path().join("r2.csv")).unwrap()
    );
    assert!(dir.path().join("r1.meta.txt").exists());
}

/// Fixed GBM tracks, remembering which contracts asked for a sampler.
struct Recording {
    seen: Mutex<Vec<(usize, usize, f64, usize)>>,
}

impl SamplerSource<f64> for Recording {
    fn sampler_for<'s>(&'s self, ctx: &PricingContext<'_, f64>) -> Result<Box<dyn TrackSampler<f64> + 's>> {
        self.seen
            .lock()
            .unwrap()
            .push((ctx.index, ctx.ordinal, ctx.spot, ctx.history.len()));
        Ok(Box::new(GbmSampler::new(ctx.spot, GbmParams::new(0.0, 0.2)?, 1.0 / 252.0, 32)?))
    }
}

#[test]
fn sampling_path_is_shared() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(dir.path(), &format!("{OPTIONS}model = mc\nvolatility = 0.2\nmc_drift = historical\n"));
    cfg.train_rows = 1;
    let data = load_dataset::<f64>(&cfg).unwrap();
    let rec = Recording { seen: Mutex::new(Vec::new()) };
    let recorded = price_with_source(&cfg, &data, &rec).unwrap();
    let mut seen = rec.seen.into_inner().unwrap();
    seen.sort_by_key(|s| s.0);
    assert_eq!(seen, vec![(1, 170, price(170), 171), (2, 199, price(199), 200)]);
    assert_eq!(recorded.iter().map(|p| p.0).collect::<Vec<_>>(), vec![1, 2]);

    let via_source = price_with_source(&cfg, &data, &GbmSource::from_config(&cfg)).unwrap();
    let report = run_pipeline::<f64>(&cfg).unwrap();
    let via_pipeline: Vec<(usize, f64)> = report.rows.iter().map(|r| (r.id, r.predicted)).collect();
    assert_eq!(via_source, via_pipeline);
}

#[test]
fn lr_regimes_score_their_subset() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(dir.path(), &format!("{OPTIONS}model = lr\n"));
    let d = dates();
    let options: Vec<OptionQuote<f64>> = (0..16)
        .map(|k| {
            let i = 100 + 6 * k;
            let side = if k % 2 == 0 { OptionSide::Call } else { OptionSide::Put };
            let strike = 96.0 + (k % 5) as f64 * 3.0;
            let tau = 0.05 + 0.02 * (k % 3) as f64;
            OptionQuote {
                date: d[i],
                contract: OptionContract::new(side, ExerciseStyle::European, strike, tau, "FIX").unwrap(),
                spot: price(i),
                price: bs_price(side, price(i), strike, 0.01, 0.2, tau).unwrap(),
            }
        })
        .collect();
    write_option_quotes(dir.path().join("options.csv"), &options).unwrap();
    cfg.train_rows = 10;

    let all = run_pipeline::<f64>(&cfg).unwrap();
    assert_eq!(all.rows.iter().map(|r| r.id).collect::<Vec<_>>(), (10..16).collect::<Vec<_>>());
    for (model, regime) in [("lr-itm", Regime::InTheMoney), ("lr-otm", Regime::OutOfTheMoney)] {
        cfg.model = model.parse().unwrap();
        let expected: Vec<usize> = (10..16)
            .filter(|&i| regime.contains(options[i].contract.side, options[i].spot / options[i].contract.strike))
            .collect();
        match run_pipeline::<f64>(&cfg) {
            Ok(report) => assert_eq!(report.rows.iter().map(|r| r.id).collect::<Vec<_>>(), expected),
            Err(e) => assert!(expected.is_empty() || e.stage() == Some("fitting"), "{model}: {e}"),
        }
    }
}

#[test]
fn futures_models_run() {
    let dir = tempfile::tempdir().unwrap();
    let body = "dividends = dividends.csv\nquotes = quotes.csv\n[instrument]\nkind = equity-futures\ntrain_rows = 10\n\
                [model]\nmodel = mc\nwindow_len = 32\nn_samples = 400\nrate = 0.02\n";
    let cfg = config(dir.path(), body);
    let eq = run_pipeline::<f64>(&cfg).unwrap();
    assert_eq!(eq.rows.len(), 6);
    assert!(eq.rows.iter().all(|r| r.predicted.is_finite() && r.predicted > 0.0));

    let mut co = cfg.clone();
    co.kind = "commodity".parse().unwrap();
    co.carry_window = 5;
    let report = run_pipeline::<f64>(&co).unwrap();
    assert_eq!(report.rows.len(), 6);
    assert!(report.rows.iter().all(|r| r.predicted.is_finite()));

    let mut lr = cfg.clone();
    lr.model = "lr".parse().unwrap();
    let report = run_pipeline::<f64>(&lr).unwrap();
    assert_eq!(report.rows.len(), 6);
    assert!(report.mape < 5.0, "{}", report.mape);
}

#[test]
fn generate_tracks_writes_selected_paths() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), &format!("{OPTIONS}model = mc\n"));
    let prices = ganmc::market_data::load_price_series::<f64>(&cfg.prices, &cfg.symbol).unwrap();
    let sampler = GbmSampler::new(prices.last(), GbmParams::new(0.0, 0.2).unwrap(), 1.0 / 252.0, 32).unwrap();
    let out = dir.path().join("tracks.csv");
    let rows = generate_tracks(&cfg, &sampler, &prices, 2, &out).unwrap();
    assert_eq!(rows, 64);
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 65);
    assert_eq!(lines[0], "track_id,day_offset,price");
    assert!(lines[1].starts_with("0,1,"));
    assert!(lines[64].starts_with("1,32,"));

    let again = dir.path().join("tracks2.csv");
    generate_tracks(&cfg, &sampler, &prices, 2, &again).unwrap();
    assert_eq!(std::fs::read(&out).unwrap(), std::fs::read(&again).unwrap());

    assert!(generate_tracks(&cfg, &sampler, &prices, 0, &out).is_err());
}
