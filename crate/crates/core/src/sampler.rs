//! Generated future-price tracks and the samplers that produce them.

use crate::error::Result;
use crate::scalar::Scalar;

/// One simulated future path `(s̃_{n+1}, …, s̃_{n+T})`.
#[derive(Debug, Clone, PartialEq)]
pub struct Track<S> {
    pub values: Vec<S>,
}

impl<S: Scalar> Track<S> {
    pub fn new(values: Vec<S>) -> Self {
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Value `steps` time units ahead (`steps >= 1`).
    pub fn at_step(&self, steps: usize) -> S {
        self.values[steps - 1]
    }
}

impl<S> AsRef<[S]> for Track<S> {
    fn as_ref(&self) -> &[S] {
        &self.values
    }
}

/// Anything that draws future-price tracks from a seed.
///
/// Implementations must be deterministic in `(count, seed)`.
pub trait TrackSampler<S: Scalar> {
    /// Length of every produced track.
    fn track_len(&self) -> usize;

    fn sample(&self, count: usize, seed: u64) -> Result<Vec<Track<S>>>;
}

impl<S: Scalar, T: TrackSampler<S> + ?Sized> TrackSampler<S> for &T {
    fn track_len(&self) -> usize {
        (**self).track_len()
    }

    fn sample(&self, count: usize, seed: u64) -> Result<Vec<Track<S>>> {
        (**self).sample(count, seed)
    }
}

impl<S: Scalar, T: TrackSampler<S> + ?Sized> TrackSampler<S> for Box<T> {
    fn track_len(&self) -> usize {
        (**self).track_len()
    }

    fn sample(&self, count: usize, seed: u64) -> Result<Vec<Track<S>>> {
        (**self).sample(count, seed)
    }
}

/// Sampler that emits the same track every time.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantSampler<S> {
    pub track: Track<S>,
}

impl<S: Scalar> TrackSampler<S> for ConstantSampler<S> {
    fn track_len(&self) -> usize {
        self.track.len()
    }

    fn sample(&self, count: usize, _seed: u64) -> Result<Vec<Track<S>>> {
        if count == 0 {
            return Err(crate::Error::InvalidParameter {
                name: "sample count",
                value: 0.0,
            });
        }
        Ok(vec![self.track.clone(); count])
    }
}

/// Derives the seed of repetition `index` from a base seed (SplitMix64 finalizer).
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
