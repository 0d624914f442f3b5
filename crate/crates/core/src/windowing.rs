//! Sliding-window training sets and the stride search.

use log::{debug, warn};

use crate::error::{Error, Result, StrideAttempt};
use crate::market_data::PriceSeries;
use crate::scalar::Scalar;

/// Default relative singular-value threshold for [`covariance_rank`].
pub const DEFAULT_RANK_TOLERANCE: f64 = 1e-8;

/// Fixed-length windows cut from one price series at a constant stride.
///
/// Window `k` (0-based) is the source slice starting at 0-based index `k * stride`,
/// i.e. 1-based index `1 + k * stride`. The number of windows is
/// `floor((n - window_len) / stride) + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSet<S> {
    windows: Vec<Vec<S>>,
    stride: usize,
    window_len: usize,
    source_len: usize,
    min_size: usize,
}

impl<S: Scalar> WindowSet<S> {
    /// Wraps explicit windows, for callers that build training sets themselves.
    pub fn from_windows(windows: Vec<Vec<S>>) -> Result<Self> {
        let window_len = windows.first().map(Vec::len).ok_or(Error::EmptyInput)?;
        if let Some(bad) = windows.iter().find(|w| w.len() != window_len) {
            return Err(Error::DimensionMismatch {
                context: "window set",
                expected: window_len,
                found: bad.len(),
            });
        }
        Ok(Self {
            source_len: window_len + windows.len() - 1,
            windows,
            stride: 1,
            window_len,
            min_size: 0,
        })
    }

    pub fn windows(&self) -> &[Vec<S>] {
        &self.windows
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    pub fn window_len(&self) -> usize {
        self.window_len
    }

    pub fn source_len(&self) -> usize {
        self.source_len
    }

    /// Minimum-size threshold `N₁` recorded by the stride search (0 if unset).
    pub fn min_size(&self) -> usize {
        self.min_size
    }

    pub fn len(&self) -> usize {
        self.windows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.windows.is_empty()
    }

    /// Largest value across all windows.
    pub fn max_value(&self) -> S {
        self.windows
            .iter()
            .flatten()
            .copied()
            .fold(S::neg_infinity(), S::max)
    }
}

/// Number of windows of length `window_len` at `stride` over `n` points.
pub fn window_count(n: usize, window_len: usize, stride: usize) -> usize {
    if stride == 0 || window_len == 0 || window_len > n {
        0
    } else {
        (n - window_len) / stride + 1
    }
}

/// Cuts `series` into windows of length `window_len` starting every `stride` points.
pub fn partition<S: Scalar>(series: &PriceSeries<S>, stride: usize, window_len: usize) -> Result<WindowSet<S>> {
    partition_values(series.prices(), stride, window_len)
}

/// [`partition`] over a raw price slice.
pub fn partition_values<S: Scalar>(values: &[S], stride: usize, window_len: usize) -> Result<WindowSet<S>> {
    if stride < 1 {
        return Err(Error::InvalidStride);
    }
    if window_len < 1 {
        return Err(Error::InvalidParameter {
            name: "window length",
            value: 0.0,
        });
    }
    let n = values.len();
    if window_len > n {
        return Err(Error::SeriesTooShort {
            needed: window_len,
            len: n,
        });
    }
    let windows = (0..window_count(n, window_len, stride))
        .map(|k| values[k * stride..k * stride + window_len].to_vec())
        .collect();
    Ok(WindowSet {
        windows,
        stride,
        window_len,
        source_len: n,
        min_size: 0,
    })
}

/// Numerical rank of the sample covariance of the windows: the number of singular
/// values above `tol` times the largest one.
pub fn covariance_rank<S: Scalar>(ws: &WindowSet<S>, tol: S) -> Result<usize> {
    let count = ws.len();
    if count < 2 {
        return Err(Error::TooFewWindows {
            needed: 2,
            found: count,
        });
    }
    let dim = ws.window_len();
    let cov = sample_covariance(ws.windows(), dim);
    // symmetric PSD: singular values are the absolute eigenvalues
    let singular: Vec<S> = symmetric_eigenvalues(cov, dim).into_iter().map(S::abs).collect();
    let largest = singular.iter().copied().fold(S::zero(), S::max);
    if largest <= S::zero() {
        return Ok(0);
    }
    Ok(singular.iter().filter(|&&s| s > tol * largest).count())
}

/// Logs a warning when the covariance rank of the training windows is below a quarter
/// of the window length. Returns the rank.
pub fn check_covariance_rank<S: Scalar>(ws: &WindowSet<S>, tol: S) -> Result<usize> {
    let rank = covariance_rank(ws, tol)?;
    if rank * 4 < ws.window_len() {
        warn!(
            "covariance rank {rank} of {} windows is below a quarter of the window length {}",
            ws.len(),
            ws.window_len()
        );
    }
    Ok(rank)
}

/// Finds the smallest stride in `1..=window_len` whose window set holds at least
/// `min_size` windows and on which `probe` reports no collapse.
///
/// `probe` returns `true` when training collapsed on the given set. It is not
/// called for strides whose set is already below `min_size`; since the set size
/// never grows with the stride, the search stops at the first such stride.
pub fn search_stride<S, F>(
    series: &PriceSeries<S>,
    window_len: usize,
    min_size: usize,
    mut probe: F,
) -> Result<(usize, WindowSet<S>)>
where
    S: Scalar,
    F: FnMut(&WindowSet<S>) -> Result<bool>,
{
    if min_size < 1 {
        return Err(Error::InvalidParameter {
            name: "minimum training-set size",
            value: 0.0,
        });
    }
    if window_len > series.len() {
        return Err(Error::SeriesTooShort {
            needed: window_len,
            len: series.len(),
        });
    }
    let mut attempts = Vec::new();
    for stride in 1..=window_len {
        let mut ws = partition(series, stride, window_len)?;
        ws.min_size = min_size;
        if ws.len() < min_size {
            attempts.push(StrideAttempt {
                stride,
                windows: ws.len(),
                collapsed: None,
            });
            break;
        }
        let collapsed = probe(&ws)?;
        debug!("stride {stride}: {} windows, collapsed={collapsed}", ws.len());
        attempts.push(StrideAttempt {
            stride,
            windows: ws.len(),
            collapsed: Some(collapsed),
        });
        if !collapsed {
            return Ok((stride, ws));
        }
    }
    Err(Error::NoViableStride {
        window_len,
        attempts,
    })
}

fn sample_covariance<S: Scalar>(windows: &[Vec<S>], dim: usize) -> Vec<S> {
    let count = S::from_usize_lossy(windows.len());
    let mut means = vec![S::zero(); dim];
    for w in windows {
        for (m, &v) in means.iter_mut().zip(w) {
            *m += v;
        }
    }
    for m in &mut means {
        *m /= count;
    }
    let mut cov = vec![S::zero(); dim * dim];
    for w in windows {
        for i in 0..dim {
            let di = w[i] - means[i];
            for j in i..dim {
                cov[i * dim + j] += di * (w[j] - means[j]);
            }
        }
    }
    let denom = count - S::one();
    for i in 0..dim {
        for j in i..dim {
            let v = cov[i * dim + j] / denom;
            cov[i * dim + j] = v;
            cov[j * dim + i] = v;
        }
    }
    cov
}

/// Eigenvalues of a symmetric `dim × dim` row-major matrix by cyclic Jacobi rotations.
pub(crate) fn symmetric_eigenvalues<S: Scalar>(mut a: Vec<S>, dim: usize) -> Vec<S> {
    let two = S::lit(2.0);
    let frobenius: S = a.iter().map(|&v| v * v).sum::<S>().sqrt();
    if frobenius == S::zero() {
        return vec![S::zero(); dim];
    }
    let threshold = S::epsilon() * frobenius;
    for _sweep in 0..100 {
        let off: S = (0..dim)
            .flat_map(|i| (0..dim).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * dim + j] * a[i * dim + j])
            .sum::<S>()
            .sqrt();
        if off <= threshold {
            break;
        }
        for p in 0..dim {
            for q in p + 1..dim {
                let apq = a[p * dim + q];
                if apq.abs() <= S::min_positive_value() {
                    continue;
                }
                let theta = (a[q * dim + q] - a[p * dim + p]) / (two * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + S::one()).sqrt());
                let c = S::one() / (t * t + S::one()).sqrt();
                let s = t * c;
                for k in 0..dim {
                    let akp = a[k * dim + p];
                    let akq = a[k * dim + q];
                    a[k * dim + p] = c * akp - s * akq;
                    a[k * dim + q] = s * akp + c * akq;
                }
                for k in 0..dim {
                    let apk = a[p * dim + k];
                    let aqk = a[q * dim + k];
                    a[p * dim + k] = c * apk - s * aqk;
                    a[q * dim + k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..dim).map(|i| a[i * dim + i]).collect()
}
