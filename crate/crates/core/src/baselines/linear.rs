//! Ordinary least-squares pricers.
//!
//! Options regress the observed price on `(s/X, 1, τ)`, futures on `(s, τ, 1)`.
//! Option pricers can be restricted to in-the-money or out-of-the-money rows.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::pricing::options::OptionSide;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    All,
    InTheMoney,
    OutOfTheMoney,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::All => "all",
            Regime::InTheMoney => "itm",
            Regime::OutOfTheMoney => "otm",
        }
    }

    /// Whether an option with moneyness `s/X` on `side` belongs to this regime.
    pub fn contains<S: Scalar>(self, side: OptionSide, moneyness: S) -> bool {
        let itm = match side {
            OptionSide::Call => moneyness > S::one(),
            OptionSide::Put => moneyness < S::one(),
        };
        match self {
            Regime::All => true,
            Regime::InTheMoney => itm,
            Regime::OutOfTheMoney => !itm,
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "all" => Ok(Regime::All),
            "itm" => Ok(Regime::InTheMoney),
            "otm" => Ok(Regime::OutOfTheMoney),
            _ => Err(Error::InvalidConfig(format!("unknown regime `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptionObservation<S> {
    pub side: OptionSide,
    pub spot: S,
    pub strike: S,
    pub tau: S,
    pub price: S,
}

impl<S: Scalar> OptionObservation<S> {
    pub fn moneyness(&self) -> S {
        self.spot / self.strike
    }

    pub fn features(&self) -> [S; 3] {
        [self.moneyness(), S::one(), self.tau]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FuturesObservation<S> {
    pub spot: S,
    pub tau: S,
    pub price: S,
}

impl<S: Scalar> FuturesObservation<S> {
    pub fn features(&self) -> [S; 3] {
        [self.spot, self.tau, S::one()]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PricerKind {
    Option,
    Futures,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearPricer<S> {
    pub kind: PricerKind,
    pub regime: Regime,
    /// Coefficients in feature order.
    pub coefficients: Vec<S>,
    pub n_rows: usize,
}

impl<S: Scalar> LinearPricer<S> {
    /// Predicted option price; the option must fall in the fitted regime.
    pub fn predict_option(&self, side: OptionSide, spot: S, strike: S, tau: S) -> Result<S> {
        if self.kind != PricerKind::Option {
            return Err(Error::InvalidConfig("futures pricer used for an option".into()));
        }
        if !self.regime.contains(side, spot / strike) {
            return Err(Error::RegimeMismatch(self.regime.name()));
        }
        Ok(self.apply(&[spot / strike, S::one(), tau]))
    }

    pub fn predict_futures(&self, spot: S, tau: S) -> Result<S> {
        if self.kind != PricerKind::Futures {
            return Err(Error::InvalidConfig("option pricer used for futures".into()));
        }
        Ok(self.apply(&[spot, tau, S::one()]))
    }

    fn apply(&self, x: &[S]) -> S {
        self.coefficients.iter().zip(x).map(|(&b, &v)| b * v).sum()
    }
}

pub fn fit_option_pricer<S: Scalar>(rows: &[OptionObservation<S>], regime: Regime) -> Result<LinearPricer<S>> {
    let kept: Vec<&OptionObservation<S>> = rows.iter().filter(|o| regime.contains(o.side, o.moneyness())).collect();
    if kept.is_empty() {
        return Err(Error::EmptyRegime(regime.name()));
    }
    let x: Vec<Vec<S>> = kept.iter().map(|o| o.features().to_vec()).collect();
    let y: Vec<S> = kept.iter().map(|o| o.price).collect();
    Ok(LinearPricer {
        kind: PricerKind::Option,
        regime,
        coefficients: fit_ols(&x, &y)?,
        n_rows: kept.len(),
    })
}

pub fn fit_futures_pricer<S: Scalar>(rows: &[FuturesObservation<S>]) -> Result<LinearPricer<S>> {
    if rows.is_empty() {
        return Err(Error::EmptyInput);
    }
    let x: Vec<Vec<S>> = rows.iter().map(|o| o.features().to_vec()).collect();
    let y: Vec<S> = rows.iter().map(|o| o.price).collect();
    Ok(LinearPricer {
        kind: PricerKind::Futures,
        regime: Regime::All,
        coefficients: fit_ols(&x, &y)?,
        n_rows: rows.len(),
    })
}

/// Least-squares coefficients `β` minimising `‖Xβ − y‖²`.
///
/// Solves the normal equations on unit-norm columns with partially pivoted Gaussian
/// elimination. Fails with `RankDeficient` when a pivot falls below `1e-10` of the
/// largest diagonal entry.
pub fn fit_ols<S: Scalar>(x: &[Vec<S>], y: &[S]) -> Result<Vec<S>> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch { left: x.len(), right: y.len() });
    }
    let p = x.first().map(Vec::len).ok_or(Error::EmptyInput)?;
    if p == 0 {
        return Err(Error::EmptyInput);
    }
    if let Some(row) = x.iter().find(|r| r.len() != p) {
        return Err(Error::DimensionMismatch {
            context: "regression features",
            expected: p,
            found: row.len(),
        });
    }
    if x.len() < p {
        return Err(Error::RankDeficient);
    }
    let norms: Vec<S> = (0..p).map(|j| x.iter().map(|r| r[j] * r[j]).sum::<S>().sqrt()).collect();
    if norms.iter().any(|&n| !(n > S::zero() && n.is_finite())) {
        return Err(Error::RankDeficient);
    }
    // augmented normal equations [XᵀX | Xᵀy] on scaled columns
    let mut a = vec![vec![S::zero(); p + 1]; p];
    for (row, &target) in x.iter().zip(y) {
        for i in 0..p {
            let xi = row[i] / norms[i];
            for j in 0..p {
                a[i][j] += xi * row[j] / norms[j];
            }
            a[i][p] += xi * target;
        }
    }
    let tol = S::lit(1e-10) * (0..p).map(|i| a[i][i]).fold(S::zero(), S::max);
    for col in 0..p {
        let pivot = (col..p)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
            .unwrap();
        if !(a[pivot][col].abs() > tol) {
            return Err(Error::RankDeficient);
        }
        a.swap(col, pivot);
        for r in col + 1..p {
            let f = a[r][col] / a[col][col];
            for c in col..=p {
                let v = a[col][c];
                a[r][c] -= f * v;
            }
        }
    }
    let mut beta = vec![S::zero(); p];
    for i in (0..p).rev() {
        let tail: S = (i + 1..p).map(|j| a[i][j] * beta[j]).sum();
        beta[i] = (a[i][p] - tail) / a[i][i];
    }
    Ok(beta.into_iter().zip(norms).map(|(b, n)| b / n).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn obs(side: OptionSide, spot: f64, strike: f64, tau: f64) -> OptionObservation<f64> {
        let m = spot / strike;
        OptionObservation {
            side,
            spot,
            strike,
            tau,
            price: 3.0 * m - 1.5 + 4.0 * tau,
        }
    }

    fn grid() -> Vec<OptionObservation<f64>> {
        let mut rows = Vec::new();
        for (i, spot) in [80.0, 95.0, 100.0, 104.0, 120.0].into_iter().enumerate() {
            for tau in [0.1, 0.25, 0.5] {
                let side = if i % 2 == 0 { OptionSide::Call } else { OptionSide::Put };
                rows.push(obs(side, spot, 100.0, tau));
            }
        }
        rows
    }

    #[test]
    fn recovers_exact_affine_map() {
        let p = fit_option_pricer(&grid(), Regime::All).unwrap();
        for (b, e) in p.coefficients.iter().zip([3.0, -1.5, 4.0]) {
            assert!((b - e).abs() < 1e-9);
        }
        let v = p.predict_option(OptionSide::Call, 110.0, 100.0, 0.3).unwrap();
        assert!((v - (3.0 * 1.1 - 1.5 + 1.2)).abs() < 1e-9);
    }

    #[test]
    fn regime_filter_counts() {
        let rows = grid();
        let itm = rows.iter().filter(|o| match o.side {
            OptionSide::Call => o.spot / o.strike > 1.0,
            OptionSide::Put => o.spot / o.strike < 1.0,
        });
        let n_itm = itm.count();
        let p = fit_option_pricer(&rows, Regime::InTheMoney).unwrap();
        assert_eq!(p.n_rows, n_itm);
        let q = fit_option_pricer(&rows, Regime::OutOfTheMoney).unwrap();
        assert_eq!(q.n_rows, rows.len() - n_itm);
    }

    #[test]
    fn regime_mismatch_on_predict() {
        let p = fit_option_pricer(&grid(), Regime::InTheMoney).unwrap();
        assert!(p.predict_option(OptionSide::Call, 120.0, 100.0, 0.1).is_ok());
        assert!(matches!(
            p.predict_option(OptionSide::Call, 90.0, 100.0, 0.1),
            Err(Error::RegimeMismatch("itm"))
        ));
    }

    #[test]
    fn too_few_rows_is_rank_deficient() {
        let rows = &grid()[..2];
        assert!(matches!(fit_option_pricer(rows, Regime::All), Err(Error::RankDeficient)));
        // three rows with identical moneyness: collinear with the intercept
        let same: Vec<_> = [0.1, 0.2, 0.3].iter().map(|&t| obs(OptionSide::Call, 100.0, 100.0, t)).collect();
        assert!(matches!(fit_option_pricer(&same, Regime::All), Err(Error::RankDeficient)));
    }

    #[test]
    fn empty_regime() {
        let calls_otm: Vec<_> = (0..5).map(|i| obs(OptionSide::Call, 80.0 + i as f64, 100.0, 0.1 * (i + 1) as f64)).collect();
        assert!(matches!(fit_option_pricer(&calls_otm, Regime::InTheMoney), Err(Error::EmptyRegime("itm"))));
    }

    #[test]
    fn futures_fit() {
        let rows: Vec<_> = (0..12)
            .map(|i| {
                let spot = 3000.0 + 17.0 * i as f64 + (i * i) as f64;
                let tau = 0.05 + 0.02 * (i % 5) as f64;
                FuturesObservation { spot, tau, price: 1.01 * spot + 40.0 * tau + 2.0 }
            })
            .collect();
        let p = fit_futures_pricer(&rows).unwrap();
        assert!((p.coefficients[0] - 1.01).abs() < 1e-8);
        assert!((p.coefficients[1] - 40.0).abs() < 1e-5);
        assert!((p.coefficients[2] - 2.0).abs() < 1e-4);
        assert!((p.predict_futures(3100.0, 0.1).unwrap() - (3131.0 + 4.0 + 2.0)).abs() < 1e-6);
        assert!(p.predict_option(OptionSide::Call, 1.0, 1.0, 1.0).is_err());
    }
}
