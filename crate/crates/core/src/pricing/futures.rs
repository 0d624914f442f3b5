//! Equity futures via a dividend-yield carry and commodity forwards/futures via an
//! empirical cost of carry.

use super::{payoff_index, terminal_values, window_of};
use crate::error::{Error, Result};
use crate::market_data::{DividendSeries, MarketParams, QuoteSeries};
use crate::sampler::Track;
use crate::scalar::{mean, Scalar};

/// Least-squares line `D(t) = slope · t + intercept` through the dividend history.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DividendFit<S> {
    pub slope: S,
    pub intercept: S,
    pub n_points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquityFuturesContract<S> {
    pub underlying: String,
    /// Year fraction until delivery.
    pub delivery: S,
    pub dividends: DividendSeries<S>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommodityForwardContract<S> {
    pub underlying: String,
    pub delivery: S,
    pub quotes: QuoteSeries<S>,
    /// Carry is averaged over the latest `carry_window + 1` quotes.
    pub carry_window: usize,
}

impl<S: Scalar> CommodityForwardContract<S> {
    pub fn new(underlying: impl Into<String>, delivery: S, quotes: QuoteSeries<S>, carry_window: usize) -> Result<Self> {
        if !(delivery.is_finite() && delivery > S::zero()) {
            return Err(Error::InvalidParameter {
                name: "time to delivery",
                value: delivery.as_f64(),
            });
        }
        if quotes.len() < carry_window + 1 {
            return Err(Error::InsufficientHistory {
                needed: carry_window + 1,
                available: quotes.len(),
            });
        }
        Ok(Self {
            underlying: underlying.into(),
            delivery,
            quotes,
            carry_window,
        })
    }
}

/// Estimated average cost of carry until delivery. May be negative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CarryEstimate<S> {
    pub value: S,
    /// Number of quotes averaged.
    pub window: usize,
}

/// Ordinary least squares of dividend per share on trading-day ordinal.
///
/// With a single point, or all ordinals equal, the slope is 0 and the intercept the mean.
pub fn fit_dividends<S: Scalar>(ds: &DividendSeries<S>) -> Result<DividendFit<S>> {
    fit_line(ds.points().map(|(t, d)| (S::from_usize_lossy(t), d)))
}

pub(crate) fn fit_line<S: Scalar>(points: impl Iterator<Item = (S, S)>) -> Result<DividendFit<S>> {
    let points: Vec<(S, S)> = points.collect();
    if points.is_empty() {
        return Err(Error::EmptyInput);
    }
    let n = points.len();
    let t_bar = mean(points.iter().map(|p| p.0)).unwrap();
    let d_bar = mean(points.iter().map(|p| p.1)).unwrap();
    let sxx: S = points.iter().map(|&(t, _)| (t - t_bar) * (t - t_bar)).sum();
    if sxx == S::zero() {
        return Ok(DividendFit {
            slope: S::zero(),
            intercept: d_bar,
            n_points: n,
        });
    }
    let sxy: S = points.iter().map(|&(t, d)| (t - t_bar) * (d - d_bar)).sum();
    let slope = sxy / sxx;
    Ok(DividendFit {
        slope,
        intercept: d_bar - slope * t_bar,
        n_points: n,
    })
}

/// Fitted dividend per share at ordinal `t`, floored at zero.
pub fn predict_dividend<S: Scalar>(fit: &DividendFit<S>, t: S) -> S {
    (fit.slope * t + fit.intercept).max(S::zero())
}

/// `spot · exp((r − mean_i(dividend / s̃ᵢ(k))) · T₀)` with `k = T₀/Δt`.
pub fn price_equity_futures<S: Scalar>(
    spot: S,
    tracks: &[Track<S>],
    dividend: S,
    delivery: S,
    market: &MarketParams<S>,
) -> Result<S> {
    if !(spot.is_finite() && spot > S::zero()) {
        return Err(Error::InvalidParameter {
            name: "spot",
            value: spot.as_f64(),
        });
    }
    let steps = payoff_index(delivery, market.dt, window_of(tracks)?)?;
    let terminals = terminal_values(tracks, steps)?;
    if let Some((i, &v)) = terminals.iter().enumerate().find(|(_, v)| !(**v > S::zero())) {
        return Err(Error::NonPositivePrice {
            track: i,
            value: v.as_f64(),
        });
    }
    let yield_ = mean(terminals.iter().map(|&s| dividend / s)).ok_or(Error::NoSamples)?;
    Ok(spot * ((market.rate - yield_) * delivery).exp())
}

/// Equity futures price with the dividend predicted at `last_ordinal + k` from the fit.
pub fn price_equity_futures_with_fit<S: Scalar>(
    spot: S,
    tracks: &[Track<S>],
    fit: &DividendFit<S>,
    last_ordinal: usize,
    delivery: S,
    market: &MarketParams<S>,
) -> Result<S> {
    let steps = payoff_index(delivery, market.dt, window_of(tracks)?)?;
    let dividend = predict_dividend(fit, S::from_usize_lossy(last_ordinal + steps));
    price_equity_futures(spot, tracks, dividend, delivery, market)
}

/// Mean of `F / e^{rT₀} − spot` over the latest `carry_window + 1` quotes.
pub fn estimate_carry<S: Scalar>(
    quotes: &QuoteSeries<S>,
    rate: S,
    delivery: S,
    carry_window: usize,
) -> Result<CarryEstimate<S>> {
    let needed = carry_window + 1;
    if quotes.len() < needed {
        return Err(Error::InsufficientHistory {
            needed,
            available: quotes.len(),
        });
    }
    let growth = (rate * delivery).exp();
    let recent = &quotes.quotes()[quotes.len() - needed..];
    let value = mean(recent.iter().map(|q| q.last / growth - q.spot)).expect("non-empty window");
    Ok(CarryEstimate { value, window: needed })
}

/// `mean_i s̃ᵢ(k) + carry · e^{rT₀}`.
pub fn price_commodity<S: Scalar>(
    tracks: &[Track<S>],
    carry: &CarryEstimate<S>,
    delivery: S,
    market: &MarketParams<S>,
) -> Result<S> {
    let steps = payoff_index(delivery, market.dt, window_of(tracks)?)?;
    let terminals = terminal_values(tracks, steps)?;
    let m = mean(terminals).ok_or(Error::NoSamples)?;
    Ok(m + carry.value * (market.rate * delivery).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market_data::Quote;
    use chrono::NaiveDate;

    const DT: f64 = 1.0 / 252.0;

    fn flat(values: &[f64], len: usize) -> Vec<Track<f64>> {
        values.iter().map(|&v| Track::new(vec![v; len])).collect()
    }

    fn quotes(rows: &[(f64, f64)]) -> QuoteSeries<f64> {
        let start = NaiveDate::from_ymd_opt(2022, 1, 3).unwrap();
        let dates = crate::market_data::weekdays_from(start, rows.len());
        QuoteSeries::new(
            "FWD",
            rows.iter()
                .zip(dates)
                .map(|(&(last, spot), date)| Quote {
                    date,
                    last,
                    ttd_years: 0.25,
                    spot,
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn exact_linear_dividends() {
        let ds = DividendSeries::from_ordinals("X", (1..=10).map(|t| (t, 2.0 * t as f64 + 3.0)).collect()).unwrap();
        let fit = fit_dividends(&ds).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-12);
        assert!((fit.intercept - 3.0).abs() < 1e-12);
        assert_eq!(fit.n_points, 10);
    }

    #[test]
    fn constant_and_single_point_dividends() {
        let ds = DividendSeries::from_ordinals("X", (0..7).map(|t| (t, 5.0)).collect()).unwrap();
        assert_eq!(fit_dividends(&ds).unwrap(), DividendFit { slope: 0.0, intercept: 5.0, n_points: 7 });
        let one = DividendSeries::from_ordinals("X", vec![(4, 1.5)]).unwrap();
        assert_eq!(fit_dividends(&one).unwrap(), DividendFit { slope: 0.0, intercept: 1.5, n_points: 1 });
    }

    #[test]
    fn prediction_is_clamped() {
        let up = DividendFit { slope: 2.0, intercept: 3.0, n_points: 2 };
        assert_eq!(predict_dividend(&up, 5.0), 13.0);
        let down = DividendFit { slope: -1.0, intercept: 2.0, n_points: 2 };
        assert_eq!(predict_dividend(&down, 10.0), 0.0);
        let zero = DividendFit { slope: 0.0, intercept: 0.0, n_points: 1 };
        assert_eq!(predict_dividend(&zero, 100.0), 0.0);
    }

    #[test]
    fn equity_futures_values() {
        let m = MarketParams::new(0.05, DT).unwrap();
        let tracks = flat(&[100.0, 200.0], 130);
        let no_div = price_equity_futures(100.0, &tracks, 0.0, 0.5, &m).unwrap();
        assert!((no_div - 100.0 * (0.025f64).exp()).abs() < 1e-12);

        // dividend yield equal to r on every track
        let at_rate = price_equity_futures(100.0, &flat(&[40.0], 130), 2.0, 0.5, &m).unwrap();
        assert!((at_rate - 100.0).abs() < 1e-12);

        let p = price_equity_futures(100.0, &tracks, 2.0, 0.5, &m).unwrap();
        let expected = 100.0 * ((0.05 - (2.0 / 100.0 + 2.0 / 200.0) / 2.0) * 0.5f64).exp();
        assert!((p - expected).abs() < 1e-12);
        assert!((p - 100.0 * 0.0175f64.exp()).abs() < 1e-12);
    }

    #[test]
    fn equity_futures_rejects_non_positive_terminal() {
        let m = MarketParams::new(0.05, DT).unwrap();
        let tracks = vec![Track::new(vec![1.0, 0.0])];
        assert!(matches!(
            price_equity_futures(100.0, &tracks, 1.0, 2.0 * DT, &m),
            Err(Error::NonPositivePrice { .. })
        ));
    }

    #[test]
    fn fit_based_prediction_uses_delivery_ordinal() {
        let m = MarketParams::new(0.0, DT).unwrap();
        let fit = DividendFit { slope: 0.01, intercept: 1.0, n_points: 10 };
        let tracks = flat(&[50.0], 10);
        let p = price_equity_futures_with_fit(100.0, &tracks, &fit, 99, 5.0 * DT, &m).unwrap();
        let d = 0.01 * 104.0 + 1.0;
        assert!((p - 100.0 * (-(d / 50.0) * 5.0 * DT).exp()).abs() < 1e-12);
    }

    #[test]
    fn carry_values() {
        let q = quotes(&[(100.0, 100.0), (101.0, 101.0), (99.0, 99.0)]);
        assert_eq!(estimate_carry(&q, 0.0, 0.25, 2).unwrap().value, 0.0);

        let q = quotes(&[(105.0, 100.0), (111.0, 106.0), (90.0, 85.0)]);
        let c = estimate_carry(&q, 0.0, 0.25, 2).unwrap();
        assert_eq!((c.value, c.window), (5.0, 3));

        let q = quotes(&[(102.0, 100.0)]);
        let c = estimate_carry(&q, 0.05, 0.25, 0).unwrap();
        assert!((c.value - (102.0 * (-0.0125f64).exp() - 100.0)).abs() < 1e-12);
    }

    #[test]
    fn carry_uses_latest_rows_only() {
        let q = quotes(&[(500.0, 100.0), (105.0, 100.0), (107.0, 100.0)]);
        assert_eq!(estimate_carry(&q, 0.0, 0.25, 1).unwrap().value, 6.0);
        assert!(matches!(
            estimate_carry(&q, 0.0, 0.25, 3),
            Err(Error::InsufficientHistory { needed: 4, available: 3 })
        ));
    }

    #[test]
    fn commodity_values() {
        let zero_rate = MarketParams::new(0.0, DT).unwrap();
        let none = CarryEstimate { value: 0.0, window: 1 };
        assert_eq!(price_commodity(&flat(&[50.0, 50.0], 70), &none, 63.0 * DT, &zero_rate).unwrap(), 50.0);
        let five = CarryEstimate { value: 5.0, window: 1 };
        assert_eq!(price_commodity(&flat(&[40.0, 60.0], 70), &five, 63.0 * DT, &zero_rate).unwrap(), 55.0);
        let m = MarketParams::new(0.05, DT).unwrap();
        let three = CarryEstimate { value: 3.0, window: 1 };
        let p = price_commodity(&flat(&[80.0], 70), &three, 0.25, &m).unwrap();
        assert!((p - (80.0 + 3.0 * 0.0125f64.exp())).abs() < 1e-12);
    }
}
