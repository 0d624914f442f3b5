use crate::error::{Error, Result};
use crate::pricing::options::OptionSide;
use crate::scalar::Scalar;

/// Standard normal CDF through `erfc`; absolute error below 1e-15 in f64.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Closed-form Black-Scholes value of a European option.
pub fn bs_price<S: Scalar>(side: OptionSide, spot: S, strike: S, rate: S, sigma: S, tau: S) -> Result<S> {
    for (name, v) in [("spot", spot), ("strike", strike), ("volatility", sigma), ("time to expiry", tau)] {
        if !(v.is_finite() && v > S::zero()) {
            return Err(Error::InvalidParameter { name, value: v.as_f64() });
        }
    }
    if !rate.is_finite() {
        return Err(Error::InvalidParameter {
            name: "rate",
            value: rate.as_f64(),
        });
    }
    let (s, x, r, sig, t) = (spot.as_f64(), strike.as_f64(), rate.as_f64(), sigma.as_f64(), tau.as_f64());
    let vol = sig * t.sqrt();
    let d1 = ((s / x).ln() + (r + 0.5 * sig * sig) * t) / vol;
    let d2 = d1 - vol;
    let df = (-r * t).exp();
    let v = match side {
        OptionSide::Call => s * normal_cdf(d1) - x * df * normal_cdf(d2),
        OptionSide::Put => x * df * normal_cdf(-d2) - s * normal_cdf(-d1),
    };
    Ok(S::lit(v.max(0.0)))
}
