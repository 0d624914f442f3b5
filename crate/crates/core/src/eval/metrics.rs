use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Absolute percentage error `100 · |predicted − actual| / |actual|`.
pub fn ape<S: Scalar>(predicted: S, actual: S) -> S {
    S::lit(100.0) * ((predicted - actual) / actual).abs()
}

/// Mean absolute percentage error in percent.
pub fn mape<S: Scalar>(predicted: &[S], actual: &[S]) -> Result<S> {
    if predicted.len() != actual.len() {
        return Err(Error::LengthMismatch {
            left: predicted.len(),
            right: actual.len(),
        });
    }
    if actual.is_empty() {
        return Err(Error::EmptyInput);
    }
    if let Some(index) = actual.iter().position(|&a| a == S::zero()) {
        return Err(Error::ZeroActual { index });
    }
    let total: S = predicted.iter().zip(actual).map(|(&p, &a)| ape(p, a)).sum();
    Ok(total / S::from_usize_lossy(actual.len()))
}
