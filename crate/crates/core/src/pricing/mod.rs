//! Monte Carlo pricers over selected future-price tracks.

pub mod futures;
pub mod options;

use crate::error::{Error, Result};
use crate::sampler::{Track, TrackSampler};
use crate::scalar::{sample_variance, Scalar};
use crate::similarity::rank_and_select;

/// Largest distance from an integer at which `horizon / dt` still counts as whole.
pub const HORIZON_TOLERANCE: f64 = 1e-9;

/// Number of time units until `horizon` (a year fraction), required to be a whole
/// number in `1..=window_len`.
pub fn payoff_index<S: Scalar>(horizon: S, dt: S, window_len: usize) -> Result<usize> {
    if !(horizon.is_finite() && horizon > S::zero()) {
        return Err(Error::InvalidParameter {
            name: "time to expiry",
            value: horizon.as_f64(),
        });
    }
    let steps = horizon / dt;
    let rounded = steps.round();
    let tol = S::lit(HORIZON_TOLERANCE).max(S::lit(4.0) * S::epsilon() * steps);
    if (steps - rounded).abs() > tol {
        return Err(Error::NonIntegralHorizon { steps: steps.as_f64() });
    }
    let k = rounded.to_usize().unwrap_or(usize::MAX);
    if k < 1 {
        return Err(Error::InvalidParameter {
            name: "time to expiry",
            value: horizon.as_f64(),
        });
    }
    if k > window_len {
        return Err(Error::HorizonExceedsWindow {
            index: k,
            window: window_len,
        });
    }
    Ok(k)
}

/// Values `steps` time units ahead on every track; fails if any track is too short.
pub fn terminal_values<S: Scalar>(tracks: &[Track<S>], steps: usize) -> Result<Vec<S>> {
    if tracks.is_empty() {
        return Err(Error::NoSamples);
    }
    tracks
        .iter()
        .map(|t| {
            if t.len() < steps {
                Err(Error::HorizonExceedsWindow {
                    index: steps,
                    window: t.len(),
                })
            } else {
                Ok(t.at_step(steps))
            }
        })
        .collect()
}

/// Shortest track length, the usable horizon.
pub(crate) fn window_of<S: Scalar>(tracks: &[Track<S>]) -> Result<usize> {
    tracks.iter().map(Track::len).min().ok_or(Error::NoSamples)
}

/// Draws `count` tracks and keeps those most similar to `reference`.
pub fn draw_selected<S: Scalar>(
    sampler: &dyn TrackSampler<S>,
    count: usize,
    seed: u64,
    reference: &[S],
    alpha: S,
) -> Result<Vec<Track<S>>> {
    let tracks = sampler.sample(count, seed)?;
    let ranking = rank_and_select(&tracks, reference, alpha)?;
    Ok(ranking.select(&tracks))
}

/// Repetition variance of a seeded estimator at several sample sizes.
///
/// For each `n` in `sample_sizes`, calls `price_once(n, seed)` for `repetitions`
/// distinct seeds derived from `base_seed` and reports the sample variance of the
/// results.
pub fn empirical_variance<S, F>(
    repetitions: usize,
    sample_sizes: &[usize],
    base_seed: u64,
    mut price_once: F,
) -> Result<Vec<(usize, S)>>
where
    S: Scalar,
    F: FnMut(usize, u64) -> Result<S>,
{
    if repetitions < 2 {
        return Err(Error::InvalidParameter {
            name: "repetitions",
            value: repetitions as f64,
        });
    }
    sample_sizes
        .iter()
        .map(|&n| {
            let prices = (0..repetitions as u64)
                .map(|rep| price_once(n, crate::sampler::derive_seed(base_seed, rep)))
                .collect::<Result<Vec<S>>>()?;
            Ok((n, sample_variance(&prices).expect("at least two repetitions")))
        })
        .collect()
}
