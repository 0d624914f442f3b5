//! Track similarity and selection of the generated tracks closest to the recent market.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::sampler::Track;
use crate::scalar::Scalar;

/// Mean elementwise similarity `1 - |x - y| / (|x| + |y|)`, in `[0, 1]` for
/// non-negative inputs. A pair of zeros counts as identical.
pub fn tsim<S: Scalar>(x: &[S], y: &[S]) -> Result<S> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.is_empty() {
        return Err(Error::EmptyInput);
    }
    let total: S = x
        .iter()
        .zip(y)
        .map(|(&a, &b)| {
            let denom = a.abs() + b.abs();
            if denom == S::zero() {
                S::one()
            } else {
                S::one() - (a - b).abs() / denom
            }
        })
        .sum();
    Ok(total / S::from_usize_lossy(x.len()))
}

/// Similarity scores of generated tracks and the retained index set.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityRanking<S> {
    /// Score of each track, in original order.
    pub scores: Vec<S>,
    /// Track indices (0-based) sorted by ascending score, ties by ascending index.
    pub order: Vec<usize>,
    /// Tail of `order` from 1-based position `ceil(alpha * N)` onward.
    pub selected: Vec<usize>,
}

impl<S: Scalar> SimilarityRanking<S> {
    /// Clones the selected tracks, in ranking order.
    pub fn select(&self, tracks: &[Track<S>]) -> Vec<Track<S>> {
        self.selected.iter().map(|&i| tracks[i].clone()).collect()
    }
}

/// `ceil(alpha * n)` evaluated exactly on the rational `alpha`.
///
/// `alpha` is read as the shortest decimal that round-trips to the same value of its
/// type (so `0.8` is `4/5`, not its binary approximation). Values needing more than
/// 18 decimal places fall back to the exact binary value.
pub fn ceil_fraction<S: Scalar>(alpha: S, n: usize) -> usize {
    debug_assert!(alpha > S::zero() && alpha < S::one());
    if n == 0 {
        return 0;
    }
    let (num, den) = match decimal_fraction(&format!("{alpha}")) {
        Some(frac) => frac,
        None => return ceil_binary(alpha.as_f64(), n),
    };
    (num * n as u128).div_ceil(den) as usize
}

/// `(numerator, 10^digits)` of a decimal `0.ddd…`.
fn decimal_fraction(text: &str) -> Option<(u128, u128)> {
    let digits = text.strip_prefix("0.")?;
    if digits.is_empty() || digits.len() > 18 || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    Some((digits.parse().ok()?, 10u128.pow(digits.len() as u32)))
}

fn ceil_binary(alpha: f64, n: usize) -> usize {
    // alpha = mantissa * 2^exp exactly
    let bits = alpha.to_bits();
    let raw_exp = ((bits >> 52) & 0x7ff) as i32;
    let (mantissa, exp) = if raw_exp == 0 {
        (bits & ((1u64 << 52) - 1), -1074)
    } else {
        ((bits & ((1u64 << 52) - 1)) | (1u64 << 52), raw_exp - 1075)
    };
    let shift = (-exp) as u32;
    if shift >= 127 {
        // mantissa * n < 2^117 < 2^shift, and alpha * n > 0
        return 1;
    }
    (mantissa as u128 * n as u128).div_ceil(1u128 << shift) as usize
}

/// Number of tracks kept: `N - ceil(alpha N) + 1`.
pub fn retained_count<S: Scalar>(alpha: S, n: usize) -> usize {
    n - ceil_fraction(alpha, n) + 1
}

/// Scores every track against `reference`, sorts ascending (stable by index) and keeps
/// the tracks at 1-based sorted positions `ceil(alpha N)..=N`, the most similar ones.
pub fn rank_and_select<S: Scalar>(tracks: &[Track<S>], reference: &[S], alpha: S) -> Result<SimilarityRanking<S>> {
    if !(alpha > S::zero() && alpha < S::one()) {
        return Err(Error::InvalidAlpha(alpha.as_f64()));
    }
    if tracks.is_empty() {
        return Err(Error::EmptyInput);
    }
    let scores = tracks
        .iter()
        .map(|t| tsim(&t.values, reference))
        .collect::<Result<Vec<S>>>()?;
    let mut order: Vec<usize> = (0..tracks.len()).collect();
    order.sort_by(|&a, &b| {
        scores[a]
            .partial_cmp(&scores[b])
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    });
    let first = ceil_fraction(alpha, tracks.len());
    let selected = order[first - 1..].to_vec();
    Ok(SimilarityRanking {
        scores,
        order,
        selected,
    })
}
