//! Monte Carlo pricing of options, equity futures and commodity forwards where the
//! future price paths come from a GAN trained on windows of the price history.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`). The aliases at the
//! bottom of this file name the common concrete instantiations.
//!
//! A typical run:
//!
//! 1. load a [`PriceSeries`](market_data::PriceSeries),
//! 2. pick a stride and window the series ([`windowing::search_stride`]),
//! 3. train a generator ([`gan::train()`]),
//! 4. sample tracks and keep those most similar to the latest window
//!    ([`pricing::draw_selected`]),
//! 5. price off the kept tracks ([`pricing::options`], [`pricing::futures`]).
//!
//! [`eval::run_pipeline`] does all of this from an [`eval::ExperimentConfig`].

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod baselines;
pub mod error;
pub mod eval;
pub mod gan;
pub mod market_data;
pub mod pricing;
pub mod sampler;
pub mod scalar;
pub mod similarity;
pub mod windowing;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type PriceSeriesF64 = market_data::PriceSeries<f64>;
pub type PriceSeriesF32 = market_data::PriceSeries<f32>;
pub type DividendSeriesF64 = market_data::DividendSeries<f64>;
pub type QuoteSeriesF64 = market_data::QuoteSeries<f64>;
pub type MarketParamsF64 = market_data::MarketParams<f64>;
pub type WindowSetF64 = windowing::WindowSet<f64>;
pub type WindowSetF32 = windowing::WindowSet<f32>;
pub type MlpF64 = gan::MlpParams<f64>;
pub type MlpF32 = gan::MlpParams<f32>;
pub type GanModelF64 = gan::GanModel<f64>;
pub type GanModelF32 = gan::GanModel<f32>;
pub type GanConfigF64 = gan::GanConfig<f64>;
pub type GanConfigF32 = gan::GanConfig<f32>;
pub type TrackF64 = sampler::Track<f64>;
pub type TrackF32 = sampler::Track<f32>;
pub type OptionContractF64 = pricing::options::OptionContract<f64>;
pub type OptionPriceF64 = pricing::options::OptionPrice<f64>;
pub type GbmSamplerF64 = baselines::GbmSampler<f64>;
pub type EvalReportF64 = eval::EvalReport<f64>;
