//! Geometric Brownian motion baselines.
//!
//! Paths use the exact lognormal daily step
//! `s ← s · exp((μ − σ²/2)Δt + σ√Δt · ε)`, so `μ` is the arithmetic drift.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::market_data::{MarketParams, PriceSeries, QuoteSeries};
use crate::pricing::futures::{estimate_carry, price_commodity, price_equity_futures};
use crate::pricing::options::{price_option, OptionContract, OptionPrice};
use crate::pricing::payoff_index;
use crate::sampler::{derive_seed, Track, TrackSampler};
use crate::scalar::{mean, sample_variance, Scalar};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GbmParams<S> {
    /// Annual arithmetic drift.
    pub mu: S,
    /// Annual volatility.
    pub sigma: S,
}

impl<S: Scalar> GbmParams<S> {
    pub fn new(mu: S, sigma: S) -> Result<Self> {
        if !mu.is_finite() {
            return Err(Error::InvalidParameter {
                name: "drift",
                value: mu.as_f64(),
            });
        }
        if !(sigma.is_finite() && sigma >= S::zero()) {
            return Err(Error::InvalidParameter {
                name: "volatility",
                value: sigma.as_f64(),
            });
        }
        Ok(Self { mu, sigma })
    }
}

/// How the option baseline picks its drift.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DriftRule<S> {
    /// `μ = ln(X / s) / τ`, anchoring the expected terminal price at the strike.
    StrikeAnchored,
    /// `μ = r`.
    RiskNeutral,
    Fixed(S),
}

impl<S: Scalar> DriftRule<S> {
    pub fn resolve(self, spot: S, strike: S, tau: S, rate: S) -> S {
        match self {
            DriftRule::StrikeAnchored => (strike / spot).ln() / tau,
            DriftRule::RiskNeutral => rate,
            DriftRule::Fixed(mu) => mu,
        }
    }
}

/// Draws GBM tracks of `len` daily steps from `spot`.
///
/// Track `i` uses its own ChaCha8 stream seeded with `derive_seed(seed, i)`, so the
/// output does not depend on the thread count.
#[derive(Debug, Clone, PartialEq)]
pub struct GbmSampler<S> {
    pub spot: S,
    pub params: GbmParams<S>,
    pub dt: S,
    pub len: usize,
}

impl<S: Scalar> GbmSampler<S> {
    pub fn new(spot: S, params: GbmParams<S>, dt: S, len: usize) -> Result<Self> {
        if !(spot.is_finite() && spot > S::zero()) {
            return Err(Error::InvalidParameter {
                name: "spot",
                value: spot.as_f64(),
            });
        }
        if !(dt.is_finite() && dt > S::zero()) {
            return Err(Error::InvalidParameter { name: "dt", value: dt.as_f64() });
        }
        if len == 0 {
            return Err(Error::InvalidParameter {
                name: "track length",
                value: 0.0,
            });
        }
        Ok(Self { spot, params, dt, len })
    }

    fn path(&self, seed: u64) -> Track<S> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sigma = self.params.sigma;
        let drift = (self.params.mu - sigma * sigma / S::lit(2.0)) * self.dt;
        let vol = sigma * self.dt.sqrt();
        let mut s = self.spot;
        let values = (0..self.len)
            .map(|_| {
                s *= (drift + vol * S::standard_normal(&mut rng)).exp();
                s
            })
            .collect();
        Track::new(values)
    }
}

impl<S: Scalar> TrackSampler<S> for GbmSampler<S> {
    fn track_len(&self) -> usize {
        self.len
    }

    fn sample(&self, count: usize, seed: u64) -> Result<Vec<Track<S>>> {
        if count == 0 {
            return Err(Error::InvalidParameter {
                name: "sample count",
                value: 0.0,
            });
        }
        Ok((0..count as u64)
            .into_par_iter()
            .map(|i| self.path(derive_seed(seed, i)))
            .collect())
    }
}

/// Monte Carlo option price on `n_paths` GBM paths with the drift picked by `drift`.
#[allow(clippy::too_many_arguments)]
pub fn gbm_mc_option<S: Scalar>(
    contract: &OptionContract<S>,
    spot: S,
    sigma: S,
    drift: DriftRule<S>,
    market: &MarketParams<S>,
    n_paths: usize,
    seed: u64,
) -> Result<OptionPrice<S>> {
    let steps = payoff_index(contract.expiry, market.dt, usize::MAX)?;
    let mu = drift.resolve(spot, contract.strike, contract.expiry, market.rate);
    let sampler = GbmSampler::new(spot, GbmParams::new(mu, sigma)?, market.dt, steps)?;
    let tracks = sampler.sample(n_paths, seed)?;
    price_option(contract, &tracks, market)
}

/// Drift and volatility from a price history.
///
/// `μ̂` is the mean of `(s_{t+1} − s_t) / (s_t Δt)` and `σ̂` the sample standard
/// deviation of `ln(s_{t+1}/s_t)` divided by `√Δt`.
pub fn estimate_gbm<S: Scalar>(series: &PriceSeries<S>, dt: S) -> Result<GbmParams<S>> {
    estimate_gbm_values(series.prices(), dt)
}

/// [`estimate_gbm`] over raw prices in time order.
pub fn estimate_gbm_values<S: Scalar>(p: &[S], dt: S) -> Result<GbmParams<S>> {
    if p.len() < 3 {
        return Err(Error::SeriesTooShort { needed: 3, len: p.len() });
    }
    let mu = mean(p.windows(2).map(|w| (w[1] - w[0]) / (w[0] * dt))).expect("at least two returns");
    let logs: Vec<S> = p.windows(2).map(|w| (w[1] / w[0]).ln()).collect();
    let sigma = sample_variance(&logs).expect("at least two returns").max(S::zero()).sqrt() / dt.sqrt();
    GbmParams::new(mu, sigma)
}

/// Equity futures price with GBM terminals in place of generated tracks.
#[allow(clippy::too_many_arguments)]
pub fn gbm_mc_equity_futures<S: Scalar>(
    spot: S,
    dividend: S,
    delivery: S,
    params: GbmParams<S>,
    market: &MarketParams<S>,
    n_paths: usize,
    seed: u64,
) -> Result<S> {
    let steps = payoff_index(delivery, market.dt, usize::MAX)?;
    let tracks = GbmSampler::new(spot, params, market.dt, steps)?.sample(n_paths, seed)?;
    price_equity_futures(spot, &tracks, dividend, delivery, market)
}

/// Commodity forward price: GBM terminal mean plus the empirical carry grown at `r`.
#[allow(clippy::too_many_arguments)]
pub fn gbm_mc_commodity<S: Scalar>(
    spot: S,
    quotes: &QuoteSeries<S>,
    carry_window: usize,
    delivery: S,
    params: GbmParams<S>,
    market: &MarketParams<S>,
    n_paths: usize,
    seed: u64,
) -> Result<S> {
    let carry = estimate_carry(quotes, market.rate, delivery, carry_window)?;
    let steps = payoff_index(delivery, market.dt, usize::MAX)?;
    let tracks = GbmSampler::new(spot, params, market.dt, steps)?.sample(n_paths, seed)?;
    price_commodity(&tracks, &carry, delivery, market)
}
