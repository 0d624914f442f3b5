//! European and American option prices from generated tracks.
//!
//! With `k = T₀/Δt` and the selected tracks `I`, the European call is
//! `(1 + rΔt)^(-k) · mean_{i∈I} max(s̃ᵢ(k) − X, 0)` and the put uses `max(X − s̃ᵢ(k), 0)`.
//! American prices are the midpoint between that discounted value and the
//! undiscounted mean payoff.

use std::fmt;
use std::str::FromStr;

use super::{payoff_index, terminal_values, window_of};
use crate::error::{Error, Result};
use crate::market_data::MarketParams;
use crate::sampler::Track;
use crate::scalar::{mean, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OptionSide {
    Call,
    Put,
}

impl OptionSide {
    pub fn payoff<S: Scalar>(self, spot: S, strike: S) -> S {
        match self {
            OptionSide::Call => (spot - strike).max(S::zero()),
            OptionSide::Put => (strike - spot).max(S::zero()),
        }
    }
}

impl fmt::Display for OptionSide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OptionSide::Call => "call",
            OptionSide::Put => "put",
        })
    }
}

impl FromStr for OptionSide {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "call" | "c" => Ok(OptionSide::Call),
            "put" | "p" => Ok(OptionSide::Put),
            _ => Err(Error::InvalidConfig(format!("unknown option side `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExerciseStyle {
    European,
    American,
}

impl fmt::Display for ExerciseStyle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExerciseStyle::European => "european",
            ExerciseStyle::American => "american",
        })
    }
}

impl FromStr for ExerciseStyle {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "european" | "eu" => Ok(ExerciseStyle::European),
            "american" | "am" => Ok(ExerciseStyle::American),
            _ => Err(Error::InvalidConfig(format!("unknown exercise style `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptionContract<S> {
    pub side: OptionSide,
    pub style: ExerciseStyle,
    pub strike: S,
    /// Year fraction until expiry.
    pub expiry: S,
    pub underlying: String,
}

impl<S: Scalar> OptionContract<S> {
    pub fn new(side: OptionSide, style: ExerciseStyle, strike: S, expiry: S, underlying: impl Into<String>) -> Result<Self> {
        positive("strike", strike)?;
        positive("time to expiry", expiry)?;
        Ok(Self {
            side,
            style,
            strike,
            expiry,
            underlying: underlying.into(),
        })
    }
}

/// Option value with its bounds (equal for European exercise).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptionPrice<S> {
    pub value: S,
    pub lower: S,
    pub upper: S,
    pub n_samples: usize,
}

/// Discount factor `(1 + rΔt)^(-steps)`.
pub fn discount_factor<S: Scalar>(market: &MarketParams<S>, steps: usize) -> S {
    (S::one() + market.rate * market.dt).powi(-(steps as i32))
}

pub fn price_european_call<S: Scalar>(tracks: &[Track<S>], strike: S, expiry: S, market: &MarketParams<S>) -> Result<OptionPrice<S>> {
    price_european(OptionSide::Call, tracks, strike, expiry, market)
}

pub fn price_european_put<S: Scalar>(tracks: &[Track<S>], strike: S, expiry: S, market: &MarketParams<S>) -> Result<OptionPrice<S>> {
    price_european(OptionSide::Put, tracks, strike, expiry, market)
}

pub fn price_european<S: Scalar>(
    side: OptionSide,
    tracks: &[Track<S>],
    strike: S,
    expiry: S,
    market: &MarketParams<S>,
) -> Result<OptionPrice<S>> {
    let (mean_payoff, steps) = mean_payoff(side, tracks, strike, expiry, market)?;
    let value = discount_factor(market, steps) * mean_payoff;
    Ok(OptionPrice {
        value,
        lower: value,
        upper: value,
        n_samples: tracks.len(),
    })
}

/// American bounds: discounted mean payoff below, undiscounted mean payoff above;
/// the value is their midpoint.
pub fn price_american<S: Scalar>(
    side: OptionSide,
    tracks: &[Track<S>],
    strike: S,
    expiry: S,
    market: &MarketParams<S>,
) -> Result<OptionPrice<S>> {
    let (mean_payoff, steps) = mean_payoff(side, tracks, strike, expiry, market)?;
    let discounted = discount_factor(market, steps) * mean_payoff;
    let (lower, upper) = if discounted <= mean_payoff {
        (discounted, mean_payoff)
    } else {
        (mean_payoff, discounted)
    };
    Ok(OptionPrice {
        value: (lower + upper) / S::lit(2.0),
        lower,
        upper,
        n_samples: tracks.len(),
    })
}

pub fn price_option<S: Scalar>(contract: &OptionContract<S>, tracks: &[Track<S>], market: &MarketParams<S>) -> Result<OptionPrice<S>> {
    match contract.style {
        ExerciseStyle::European => price_european(contract.side, tracks, contract.strike, contract.expiry, market),
        ExerciseStyle::American => price_american(contract.side, tracks, contract.strike, contract.expiry, market),
    }
}

fn mean_payoff<S: Scalar>(
    side: OptionSide,
    tracks: &[Track<S>],
    strike: S,
    expiry: S,
    market: &MarketParams<S>,
) -> Result<(S, usize)> {
    positive("strike", strike)?;
    let steps = payoff_index(expiry, market.dt, window_of(tracks)?)?;
    let terminals = terminal_values(tracks, steps)?;
    let m = mean(terminals.into_iter().map(|s| side.payoff(s, strike))).ok_or(Error::NoSamples)?;
    Ok((m, steps))
}

fn positive<S: Scalar>(name: &'static str, v: S) -> Result<()> {
    if v.is_finite() && v > S::zero() {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, value: v.as_f64() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DT: f64 = 1.0 / 252.0;

    fn flat(values: &[f64], len: usize) -> Vec<Track<f64>> {
        values.iter().map(|&v| Track::new(vec![v; len])).collect()
    }

    fn market(rate: f64) -> MarketParams<f64> {
        MarketParams::new(rate, DT).unwrap()
    }

    #[test]
    fn call_at_zero_rate_is_mean_payoff() {
        let p = price_european_call(&flat(&[101.0], 10), 100.0, 5.0 * DT, &market(0.0)).unwrap();
        assert_eq!(p.value, 1.0);
        assert_eq!((p.lower, p.upper), (1.0, 1.0));
        assert_eq!(p.n_samples, 1);
    }

    #[test]
    fn out_of_the_money_call_is_zero() {
        let p = price_european_call(&flat(&[90.0, 99.0, 100.0], 10), 100.0, 3.0 * DT, &market(0.05)).unwrap();
        assert_eq!(p.value, 0.0);
    }

    #[test]
    fn call_discounting_matches_direct_evaluation() {
        let tracks = flat(&[95.0, 110.0], 130);
        let p = price_european_call(&tracks, 100.0, 126.0 / 252.0, &market(0.05)).unwrap();
        let expected = 5.0 * (1.0 + 0.05 / 252.0f64).powi(-126);
        assert!((p.value - expected).abs() < 1e-12);
    }

    #[test]
    fn put_values() {
        let m = market(0.0);
        assert_eq!(price_european_put(&flat(&[98.0], 4), 100.0, DT, &m).unwrap().value, 2.0);
        assert_eq!(price_european_put(&flat(&[101.0, 150.0], 4), 100.0, DT, &m).unwrap().value, 0.0);
        assert_eq!(price_european_put(&flat(&[97.0, 120.0, 100.0], 4), 100.0, DT, &m).unwrap().value, 1.0);
    }

    #[test]
    fn payoff_uses_the_expiry_step() {
        // value at step 2 is index 1
        let tracks = vec![Track::new(vec![50.0, 120.0, 80.0])];
        let p = price_european_call(&tracks, 100.0, 2.0 * DT, &market(0.0)).unwrap();
        assert_eq!(p.value, 20.0);
    }

    #[test]
    fn american_bounds_collapse_at_zero_rate() {
        let p = price_american(OptionSide::Call, &flat(&[110.0, 90.0], 10), 100.0, 5.0 * DT, &market(0.0)).unwrap();
        assert_eq!((p.lower, p.value, p.upper), (5.0, 5.0, 5.0));
    }

    #[test]
    fn american_midpoint() {
        let tracks = flat(&[120.0, 100.0], 130);
        let p = price_american(OptionSide::Call, &tracks, 100.0, 0.5, &market(0.05)).unwrap();
        let m = 10.0;
        let expected = m * (1.0 + (1.0 + 0.05 / 252.0f64).powi(-126)) / 2.0;
        assert!((p.value - expected).abs() < 1e-12);
        assert!(p.lower < p.value && p.value < p.upper);
        assert_eq!(p.upper, m);
    }

    #[test]
    fn american_zero_payoff() {
        let p = price_american(OptionSide::Put, &flat(&[120.0], 10), 100.0, 5.0 * DT, &market(0.05)).unwrap();
        assert_eq!((p.lower, p.value, p.upper), (0.0, 0.0, 0.0));
    }

    #[test]
    fn horizon_errors() {
        let tracks = flat(&[100.0], 10);
        assert!(matches!(
            price_european_call(&tracks, 100.0, 11.0 * DT, &market(0.0)),
            Err(Error::HorizonExceedsWindow { .. })
        ));
        assert!(matches!(
            price_european_call(&tracks, 100.0, 2.5 * DT, &market(0.0)),
            Err(Error::NonIntegralHorizon { .. })
        ));
        assert!(matches!(
            price_european_call(&[], 100.0, DT, &market(0.0)),
            Err(Error::NoSamples)
        ));
    }

    #[test]
    fn contract_dispatch_and_parsing() {
        let c = OptionContract::new("put".parse().unwrap(), "american".parse().unwrap(), 100.0, 5.0 * DT, "X").unwrap();
        let p = price_option(&c, &flat(&[90.0], 10), &market(0.0)).unwrap();
        assert_eq!(p.value, 10.0);
        assert!(OptionContract::new(OptionSide::Call, ExerciseStyle::European, 0.0, 1.0, "X").is_err());
        assert!("straddle".parse::<OptionSide>().is_err());
    }
}
