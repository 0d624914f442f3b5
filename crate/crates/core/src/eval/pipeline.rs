//! End-to-end evaluation: load data, fit the chosen model, price every test
//! contract and score the predictions.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use chrono::NaiveDate;
use log::info;
use rayon::prelude::*;

use super::config::{ExperimentConfig, InstrumentKind, McDrift, ModelKind};
use super::data::{load_option_quotes, OptionQuote};
use super::metrics::{ape, mape};
use crate::baselines::{
    bs_price, estimate_gbm_values, fit_futures_pricer, fit_option_pricer, FuturesObservation, GbmParams, GbmSampler,
    OptionObservation,
};
use crate::error::{Error, Result};
use crate::gan::{train, GanModel, TrainReport};
use crate::market_data::{load_dividends, load_price_series, load_quotes, DividendSeries, MarketParams, PriceSeries, QuoteSeries};
use crate::pricing::futures::{estimate_carry, fit_dividends, predict_dividend, price_commodity, price_equity_futures};
use crate::pricing::options::{price_option, OptionContract, OptionPrice};
use crate::pricing::draw_selected;
use crate::sampler::{derive_seed, TrackSampler};
use crate::scalar::Scalar;
use crate::similarity::rank_and_select;
use crate::windowing::{check_covariance_rank, search_stride, DEFAULT_RANK_TOLERANCE};

const TRAINING_STREAM: u64 = 0;
const SAMPLING_STREAM: u64 = 1;

/// Contracts to price, in file order.
#[derive(Debug, Clone, PartialEq)]
pub enum Contracts<S> {
    Options(Vec<OptionQuote<S>>),
    /// Equity futures or commodity quotes; `last` is the observed price.
    Futures(QuoteSeries<S>),
}

impl<S: Scalar> Contracts<S> {
    pub fn len(&self) -> usize {
        match self {
            Contracts::Options(v) => v.len(),
            Contracts::Futures(q) => q.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn date(&self, i: usize) -> NaiveDate {
        match self {
            Contracts::Options(v) => v[i].date,
            Contracts::Futures(q) => q.quotes()[i].date,
        }
    }

    fn actual(&self, i: usize) -> S {
        match self {
            Contracts::Options(v) => v[i].price,
            Contracts::Futures(q) => q.quotes()[i].last,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<S> {
    pub prices: PriceSeries<S>,
    pub contracts: Contracts<S>,
    /// Dividends indexed by trading-day ordinal of `prices`.
    pub dividends: Option<DividendSeries<S>>,
}

impl<S: Scalar> Dataset<S> {
    /// Indices of the contracts that are priced and scored.
    pub fn test_rows(&self, train_rows: usize) -> std::ops::Range<usize> {
        train_rows.min(self.contracts.len())..self.contracts.len()
    }
}

/// Everything a sampler may condition on when pricing one contract.
#[derive(Debug, Clone)]
pub struct PricingContext<'a, S> {
    /// Row of the contract in its table.
    pub index: usize,
    pub date: NaiveDate,
    /// Trading-day ordinal of `date` in the price series.
    pub ordinal: usize,
    pub spot: S,
    /// Prices up to and including `date`.
    pub history: &'a [S],
    pub strike: Option<S>,
    /// Time to expiry or delivery, snapped to a whole number of time units.
    pub horizon: S,
    pub steps: usize,
}

/// Produces the track sampler used for one contract.
pub trait SamplerSource<S: Scalar>: Sync {
    fn sampler_for<'s>(&'s self, ctx: &PricingContext<'_, S>) -> Result<Box<dyn TrackSampler<S> + 's>>;
}

/// Every contract samples from the same trained generator.
pub struct GanSource<'m, S>(pub &'m GanModel<S>);

impl<S: Scalar> SamplerSource<S> for GanSource<'_, S> {
    fn sampler_for<'s>(&'s self, _ctx: &PricingContext<'_, S>) -> Result<Box<dyn TrackSampler<S> + 's>> {
        Ok(Box::new(self.0))
    }
}

/// GBM paths from the contract's spot with parameters from its price history.
#[derive(Debug, Clone, PartialEq)]
pub struct GbmSource<S> {
    pub volatility: Option<S>,
    pub drift: McDrift,
    pub rate: S,
    pub dt: S,
    pub window_len: usize,
}

impl<S: Scalar> GbmSource<S> {
    pub fn from_config(cfg: &ExperimentConfig) -> Self {
        Self {
            volatility: cfg.volatility.map(S::lit),
            drift: cfg.mc_drift,
            rate: S::lit(cfg.rate),
            dt: S::lit(cfg.dt),
            window_len: cfg.window_len,
        }
    }

    pub fn params_for(&self, ctx: &PricingContext<'_, S>) -> Result<GbmParams<S>> {
        let estimate = estimate_gbm_values(ctx.history, self.dt)?;
        let mu = match (self.drift, ctx.strike) {
            (McDrift::Strike, Some(strike)) => (strike / ctx.spot).ln() / ctx.horizon,
            (McDrift::RiskNeutral, _) => self.rate,
            _ => estimate.mu,
        };
        GbmParams::new(mu, self.volatility.unwrap_or(estimate.sigma))
    }
}

impl<S: Scalar> SamplerSource<S> for GbmSource<S> {
    fn sampler_for<'s>(&'s self, ctx: &PricingContext<'_, S>) -> Result<Box<dyn TrackSampler<S> + 's>> {
        let params = self.params_for(ctx)?;
        Ok(Box::new(GbmSampler::new(ctx.spot, params, self.dt, self.window_len)?))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow<S> {
    pub id: usize,
    pub predicted: S,
    pub actual: S,
    pub ape_pct: S,
}

#[derive(Debug, Clone)]
pub struct EvalReport<S> {
    pub model: ModelKind,
    pub rows: Vec<ReportRow<S>>,
    pub mape: S,
    pub runtime: Duration,
    pub config_echo: String,
    pub training: Option<TrainReport<S>>,
}

impl<S: Scalar> EvalReport<S> {
    /// Report rows followed by a `#`-prefixed summary line.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("id,predicted,actual,ape_pct\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{}",
                r.id,
                r.predicted.as_f64(),
                r.actual.as_f64(),
                r.ape_pct.as_f64()
            );
        }
        let _ = writeln!(
            s,
            "# model={} rows={} mape_pct={}",
            self.model,
            self.rows.len(),
            self.mape.as_f64()
        );
        s
    }

    /// Run metadata: versions, timing, training summary and the config echo.
    pub fn metadata(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "ganmc {}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(s, "scalar = {}", std::any::type_name::<S>());
        let _ = writeln!(s, "model = {}", self.model);
        let _ = writeln!(s, "rows = {}", self.rows.len());
        let _ = writeln!(s, "mape_pct = {}", self.mape.as_f64());
        let _ = writeln!(s, "wall_time_s = {:.3}", self.runtime.as_secs_f64());
        if let Some(t) = &self.training {
            let _ = writeln!(s, "stride = {}", t.stride);
            let _ = writeln!(s, "epochs_run = {}", t.epochs_run);
            let _ = writeln!(s, "collapsed = {}", t.collapsed);
        }
        let _ = writeln!(s, "\n# config\n{}", self.config_echo);
        s
    }

    /// Writes the CSV to `path` and the metadata next to it.
    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        write_text(path, &self.to_csv())?;
        write_text(&metadata_path(path), &self.metadata())
    }
}

/// `report.csv` → `report.meta.txt`.
pub fn metadata_path(path: &Path) -> PathBuf {
    path.with_extension("meta.txt")
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_dataset<S: Scalar>(cfg: &ExperimentConfig) -> Result<Dataset<S>> {
    let prices = load_price_series(&cfg.prices, &cfg.symbol)?;
    let contracts = match cfg.kind {
        InstrumentKind::Option => {
            let path = cfg
                .contracts
                .as_ref()
                .ok_or_else(|| Error::InvalidConfig("option experiments need `contracts` in [data]".into()))?;
            Contracts::Options(load_option_quotes(path, &cfg.symbol)?)
        }
        InstrumentKind::EquityFutures | InstrumentKind::Commodity => {
            let path = cfg
                .quotes
                .as_ref()
                .ok_or_else(|| Error::InvalidConfig(format!("{} experiments need `quotes` in [data]", cfg.kind)))?;
            Contracts::Futures(load_quotes(path, &cfg.symbol)?)
        }
    };
    let dividends = match &cfg.dividends {
        Some(path) => Some(load_dividends(path, &cfg.symbol)?.aligned_to(&prices)?),
        None => None,
    };
    Ok(Dataset {
        prices,
        contracts,
        dividends,
    })
}

/// Runs the configured experiment, training the generator when the model needs one.
pub fn run_pipeline<S: Scalar>(cfg: &ExperimentConfig) -> Result<EvalReport<S>> {
    run_pipeline_with(cfg, None)
}

/// Like [`run_pipeline`], but `gan-mc` uses `model` instead of training when given.
pub fn run_pipeline_with<S: Scalar>(cfg: &ExperimentConfig, model: Option<&GanModel<S>>) -> Result<EvalReport<S>> {
    let start = Instant::now();
    cfg.validate()?;
    let data: Dataset<S> = load_dataset(cfg).map_err(|e| e.in_stage("market_data"))?;
    let test = data.test_rows(cfg.train_rows);
    if test.is_empty() {
        return Err(Error::InvalidConfig(format!(
            "no test rows: {} contracts, train_rows = {}",
            data.contracts.len(),
            cfg.train_rows
        )));
    }
    let mut training = None;
    let predictions = match cfg.model {
        ModelKind::GanMc => {
            let trained;
            let model = match model {
                Some(m) => m,
                None => {
                    let history = training_history(&data, cfg.train_rows)?;
                    let (m, report) = fit_generator(cfg, &history)?;
                    training = Some(report);
                    trained = m;
                    &trained
                }
            };
            price_with_source(cfg, &data, &GanSource(model))?
        }
        ModelKind::Mc => price_with_source(cfg, &data, &GbmSource::from_config(cfg))?,
        ModelKind::Bs => price_black_scholes(cfg, &data)?,
        ModelKind::Lr | ModelKind::LrItm | ModelKind::LrOtm => price_linear(cfg, &data)?,
    };
    let mut report = score(cfg, &data, predictions).map_err(|e| e.in_stage("evaluation"))?;
    report.training = training;
    report.runtime = start.elapsed();
    info!(
        "{} on {} contracts: MAPE {:.4}% in {:.1}s",
        cfg.model,
        report.rows.len(),
        report.mape.as_f64(),
        report.runtime.as_secs_f64()
    );
    Ok(report)
}

/// Predictions paired with their contract rows.
pub type Predictions<S> = Vec<(usize, S)>;

fn score<S: Scalar>(cfg: &ExperimentConfig, data: &Dataset<S>, predictions: Predictions<S>) -> Result<EvalReport<S>> {
    let predicted: Vec<S> = predictions.iter().map(|p| p.1).collect();
    let actual: Vec<S> = predictions.iter().map(|p| data.contracts.actual(p.0)).collect();
    let m = mape(&predicted, &actual)?;
    let rows = predictions
        .iter()
        .zip(&actual)
        .map(|(&(id, predicted), &actual)| ReportRow {
            id,
            predicted,
            actual,
            ape_pct: ape(predicted, actual),
        })
        .collect();
    Ok(EvalReport {
        model: cfg.model,
        rows,
        mape: m,
        runtime: Duration::ZERO,
        config_echo: cfg.to_text(),
        training: None,
    })
}

/// Prices available when the first test contract is quoted.
pub fn training_history<S: Scalar>(data: &Dataset<S>, train_rows: usize) -> Result<PriceSeries<S>> {
    let first = data.test_rows(train_rows).start;
    if first >= data.contracts.len() {
        return Ok(data.prices.clone());
    }
    let ordinal = ordinal_of(&data.prices, data.contracts.date(first), first)?;
    data.prices.head(ordinal + 1)
}

/// Stride search followed by the full training run.
///
/// Each candidate stride is probed with `probe_epochs` of training; when that equals
/// `epochs` the probe model is kept. A collapsed final run is an error.
pub fn fit_generator<S: Scalar>(cfg: &ExperimentConfig, history: &PriceSeries<S>) -> Result<(GanModel<S>, TrainReport<S>)> {
    let seed = derive_seed(cfg.seed, TRAINING_STREAM);
    let t = cfg.window_len;
    let probe_cfg = cfg.gan.to_gan_config::<S>(t, cfg.gan.probe_epochs, seed);
    let mut last_probe = None;
    let (stride, ws) = search_stride(history, t, cfg.min_train_windows, |ws| {
        let (model, report) = train(ws, &probe_cfg)?;
        let collapsed = report.collapsed;
        last_probe = Some((model, report));
        Ok(collapsed)
    })
    .map_err(|e| e.in_stage("stride_search"))?;
    info!("stride {stride}: {} training windows", ws.len());
    check_covariance_rank(&ws, S::lit(DEFAULT_RANK_TOLERANCE)).map_err(|e| e.in_stage("stride_search"))?;

    let (model, report) = match last_probe {
        Some(probe) if cfg.gan.probe_epochs == cfg.gan.epochs => probe,
        _ => train(&ws, &cfg.gan.to_gan_config::<S>(t, cfg.gan.epochs, seed)).map_err(|e| e.in_stage("training"))?,
    };
    if report.collapsed {
        let reason = report.collapse_reason.map(|r| r.to_string()).unwrap_or_default();
        return Err(Error::Collapse(format!("after {} epochs at stride {stride}: {reason}", report.epochs_run)).in_stage("training"));
    }
    Ok((model, report))
}

fn ordinal_of<S: Scalar>(prices: &PriceSeries<S>, date: NaiveDate, index: usize) -> Result<usize> {
    prices.ordinal_of(date).ok_or_else(|| Error::InvalidObservation {
        index,
        message: format!("contract date {date} is not in the price series"),
    })
}

/// Whole number of time units nearest to `horizon`, and the horizon it represents.
pub fn snap_horizon<S: Scalar>(horizon: S, dt: S) -> Result<(S, usize)> {
    let steps = (horizon / dt).round();
    match steps.to_usize() {
        Some(k) if k >= 1 && horizon.is_finite() => {
            let snapped = S::from_usize_lossy(k) * dt;
            if (snapped - horizon).abs() > S::lit(1e-9) {
                log::debug!("horizon {horizon} snapped to {k} steps");
            }
            Ok((snapped, k))
        }
        _ => Err(Error::InvalidParameter {
            name: "time to expiry",
            value: horizon.as_f64(),
        }),
    }
}

fn context<'a, S: Scalar>(data: &'a Dataset<S>, index: usize, dt: S) -> Result<PricingContext<'a, S>> {
    let date = data.contracts.date(index);
    let ordinal = ordinal_of(&data.prices, date, index)?;
    let (spot, strike, horizon) = match &data.contracts {
        Contracts::Options(v) => (v[index].spot, Some(v[index].contract.strike), v[index].contract.expiry),
        Contracts::Futures(q) => {
            let quote = &q.quotes()[index];
            (quote.spot, None, quote.ttd_years)
        }
    };
    let (horizon, steps) = snap_horizon(horizon, dt)?;
    Ok(PricingContext {
        index,
        date,
        ordinal,
        spot,
        history: &data.prices.prices()[..=ordinal],
        strike,
        horizon,
        steps,
    })
}

fn market<S: Scalar>(cfg: &ExperimentConfig) -> Result<MarketParams<S>> {
    MarketParams::new(S::lit(cfg.rate), S::lit(cfg.dt))
}

/// Samples, filters and prices every test contract with tracks from `source`.
///
/// This is the shared path of `gan-mc` and `mc`; only the sampler differs.
pub fn price_with_source<S: Scalar>(
    cfg: &ExperimentConfig,
    data: &Dataset<S>,
    source: &dyn SamplerSource<S>,
) -> Result<Predictions<S>> {
    let market = market(cfg)?;
    let alpha = S::lit(cfg.alpha);
    let seed = derive_seed(cfg.seed, SAMPLING_STREAM);
    let t = cfg.window_len;
    if cfg.kind == InstrumentKind::EquityFutures && data.dividends.is_none() {
        return Err(Error::InvalidConfig("equity-futures pricing needs `dividends` in [data]".into()));
    }
    data.test_rows(cfg.train_rows)
        .into_par_iter()
        .map(|i| {
            let ctx = context(data, i, market.dt).map_err(|e| e.in_stage("pricing"))?;
            if ctx.history.len() < t {
                return Err(Error::InsufficientHistory {
                    needed: t,
                    available: ctx.history.len(),
                }
                .in_stage("sampling"));
            }
            let reference = &ctx.history[ctx.history.len() - t..];
            let sampler = source.sampler_for(&ctx).map_err(|e| e.in_stage("sampling"))?;
            let tracks = draw_selected(&*sampler, cfg.n_samples, seed, reference, alpha).map_err(|e| e.in_stage("sampling"))?;
            let price = match &data.contracts {
                Contracts::Options(v) => {
                    let c = OptionContract {
                        expiry: ctx.horizon,
                        ..v[i].contract.clone()
                    };
                    price_option(&c, &tracks, &market).map(|p| p.value)
                }
                Contracts::Futures(q) => match cfg.kind {
                    InstrumentKind::EquityFutures => {
                        let divs = data.dividends.as_ref().expect("checked above");
                        dividend_at(divs, ctx.ordinal, ctx.steps)
                            .and_then(|d| price_equity_futures(ctx.spot, &tracks, d, ctx.horizon, &market))
                    }
                    _ => {
                        let history = q.head(i).map_err(|_| Error::InsufficientHistory {
                            needed: cfg.carry_window + 1,
                            available: i,
                        });
                        history
                            .and_then(|h| estimate_carry(&h, market.rate, ctx.horizon, cfg.carry_window))
                            .and_then(|carry| price_commodity(&tracks, &carry, ctx.horizon, &market))
                    }
                },
            };
            price.map(|p| (i, p)).map_err(|e| e.in_stage("pricing"))
        })
        .collect()
}

/// Dividend predicted `steps` ahead of `ordinal` from the dividends known by then.
fn dividend_at<S: Scalar>(divs: &DividendSeries<S>, ordinal: usize, steps: usize) -> Result<S> {
    let known: Vec<(usize, S)> = divs.points().filter(|&(t, _)| t <= ordinal).collect();
    if known.is_empty() {
        return Err(Error::InsufficientHistory { needed: 1, available: 0 });
    }
    let fit = fit_dividends(&DividendSeries::from_ordinals(divs.symbol(), known)?)?;
    Ok(predict_dividend(&fit, S::from_usize_lossy(ordinal + steps)))
}

fn price_black_scholes<S: Scalar>(cfg: &ExperimentConfig, data: &Dataset<S>) -> Result<Predictions<S>> {
    let Contracts::Options(options) = &data.contracts else {
        return Err(Error::InvalidConfig("the bs model prices options only".into()));
    };
    let dt = S::lit(cfg.dt);
    data.test_rows(cfg.train_rows)
        .map(|i| {
            let q = &options[i];
            let sigma = match cfg.volatility {
                Some(v) => S::lit(v),
                None => {
                    let ctx = context(data, i, dt)?;
                    estimate_gbm_values(ctx.history, dt)?.sigma
                }
            };
            let c = &q.contract;
            bs_price(c.side, q.spot, c.strike, S::lit(cfg.rate), sigma, c.expiry).map(|p| (i, p))
        })
        .collect::<Result<_>>()
        .map_err(|e| e.in_stage("pricing"))
}

fn price_linear<S: Scalar>(cfg: &ExperimentConfig, data: &Dataset<S>) -> Result<Predictions<S>> {
    let regime = cfg.model.regime().expect("linear model");
    let test = data.test_rows(cfg.train_rows);
    match &data.contracts {
        Contracts::Options(options) => {
            let obs = |q: &OptionQuote<S>| OptionObservation {
                side: q.contract.side,
                spot: q.spot,
                strike: q.contract.strike,
                tau: q.contract.expiry,
                price: q.price,
            };
            let train: Vec<_> = options[..test.start].iter().map(obs).collect();
            let pricer = fit_option_pricer(&train, regime).map_err(|e| e.in_stage("fitting"))?;
            let rows: Vec<usize> = test
                .filter(|&i| regime.contains(options[i].contract.side, options[i].spot / options[i].contract.strike))
                .collect();
            if rows.is_empty() {
                return Err(Error::EmptyRegime(regime.name()).in_stage("pricing"));
            }
            rows.into_iter()
                .map(|i| {
                    let q = &options[i];
                    pricer
                        .predict_option(q.contract.side, q.spot, q.contract.strike, q.contract.expiry)
                        .map(|p| (i, p))
                })
                .collect::<Result<_>>()
                .map_err(|e| e.in_stage("pricing"))
        }
        Contracts::Futures(quotes) => {
            if regime != crate::baselines::Regime::All {
                return Err(Error::InvalidConfig(format!("{} applies to options only", cfg.model)));
            }
            let obs = |q: &crate::market_data::Quote<S>| FuturesObservation {
                spot: q.spot,
                tau: q.ttd_years,
                price: q.last,
            };
            let train: Vec<_> = quotes.quotes()[..test.start].iter().map(obs).collect();
            let pricer = fit_futures_pricer(&train).map_err(|e| e.in_stage("fitting"))?;
            test.map(|i| {
                let q = &quotes.quotes()[i];
                pricer.predict_futures(q.spot, q.ttd_years).map(|p| (i, p))
            })
            .collect::<Result<_>>()
            .map_err(|e| e.in_stage("pricing"))
        }
    }
}

/// Latest `window_len` prices of the whole series, the conditioning window for
/// pricing "now".
fn latest_reference<S: Scalar>(prices: &PriceSeries<S>, window_len: usize) -> Result<&[S]> {
    let p = prices.prices();
    if p.len() < window_len {
        return Err(Error::InsufficientHistory {
            needed: window_len,
            available: p.len(),
        });
    }
    Ok(&p[p.len() - window_len..])
}

/// Tracks selected against the latest window of `prices`.
pub fn selected_tracks<S: Scalar>(
    cfg: &ExperimentConfig,
    sampler: &dyn TrackSampler<S>,
    prices: &PriceSeries<S>,
) -> Result<Vec<crate::sampler::Track<S>>> {
    let reference = latest_reference(prices, cfg.window_len)?;
    draw_selected(
        sampler,
        cfg.n_samples,
        derive_seed(cfg.seed, SAMPLING_STREAM),
        reference,
        S::lit(cfg.alpha),
    )
}

/// Prices `contract` as of the last date of `prices`.
pub fn price_option_now<S: Scalar>(
    cfg: &ExperimentConfig,
    sampler: &dyn TrackSampler<S>,
    prices: &PriceSeries<S>,
    contract: &OptionContract<S>,
) -> Result<OptionPrice<S>> {
    let market = market(cfg)?;
    let tracks = selected_tracks(cfg, sampler, prices)?;
    price_option(contract, &tracks, &market)
}

/// Equity futures price as of the last date of `prices`, predicting the dividend at delivery.
pub fn price_equity_futures_now<S: Scalar>(
    cfg: &ExperimentConfig,
    sampler: &dyn TrackSampler<S>,
    prices: &PriceSeries<S>,
    dividends: &DividendSeries<S>,
    delivery: S,
) -> Result<S> {
    let market = market(cfg)?;
    let (delivery, steps) = snap_horizon(delivery, market.dt)?;
    let last = prices.len() - 1;
    let d = dividend_at(dividends, last, steps)?;
    let tracks = selected_tracks(cfg, sampler, prices)?;
    price_equity_futures(prices.last(), &tracks, d, delivery, &market)
}

/// Commodity forward price as of the last date of `prices` with carry from the latest quotes.
pub fn price_commodity_now<S: Scalar>(
    cfg: &ExperimentConfig,
    sampler: &dyn TrackSampler<S>,
    prices: &PriceSeries<S>,
    quotes: &QuoteSeries<S>,
    delivery: S,
) -> Result<S> {
    let market = market(cfg)?;
    let (delivery, _) = snap_horizon(delivery, market.dt)?;
    let carry = estimate_carry(quotes, market.rate, delivery, cfg.carry_window)?;
    let tracks = selected_tracks(cfg, sampler, prices)?;
    price_commodity(&tracks, &carry, delivery, &market)
}

/// Writes the `count` generated tracks most similar to the latest window as
/// `track_id,day_offset,price` rows, most similar first.
pub fn generate_tracks<S: Scalar>(
    cfg: &ExperimentConfig,
    sampler: &dyn TrackSampler<S>,
    prices: &PriceSeries<S>,
    count: usize,
    out: impl AsRef<Path>,
) -> Result<usize> {
    if count == 0 {
        return Err(Error::InvalidParameter {
            name: "track count",
            value: 0.0,
        });
    }
    let reference = latest_reference(prices, cfg.window_len)?;
    let raw = sampler.sample(cfg.n_samples, derive_seed(cfg.seed, SAMPLING_STREAM))?;
    let ranking = rank_and_select(&raw, reference, S::lit(cfg.alpha))?;
    if count > ranking.selected.len() {
        return Err(Error::InvalidParameter {
            name: "track count",
            value: count as f64,
        });
    }
    let mut s = String::from("track_id,day_offset,price\n");
    for (id, &i) in ranking.selected.iter().rev().take(count).enumerate() {
        for (k, v) in raw[i].values.iter().enumerate() {
            let _ = writeln!(s, "{},{},{}", id, k + 1, v.as_f64());
        }
    }
    write_text(out.as_ref(), &s)?;
    Ok(count * cfg.window_len)
}
