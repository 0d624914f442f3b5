//! Reference pricers: Black-Scholes, GBM Monte Carlo and linear regression.

pub mod black_scholes;
pub mod gbm;
pub mod linear;

pub use black_scholes::{bs_price, normal_cdf};
pub use gbm::{
    estimate_gbm, estimate_gbm_values, gbm_mc_commodity, gbm_mc_equity_futures, gbm_mc_option, DriftRule, GbmParams, GbmSampler,
};
pub use linear::{
    fit_futures_pricer, fit_ols, fit_option_pricer, FuturesObservation, LinearPricer, OptionObservation, PricerKind,
    Regime,
};
