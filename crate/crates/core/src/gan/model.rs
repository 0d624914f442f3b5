use ndarray::{Array2, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::mlp::{Activation, MlpParams};
use crate::error::{Error, Result};
use crate::sampler::{Track, TrackSampler};
use crate::scalar::Scalar;

/// Generated values are floored at this fraction of the scale.
pub const POSITIVE_FLOOR_FRACTION: f64 = 1e-6;

const SAMPLE_CHUNK: usize = 1024;

/// Trained generator/discriminator pair plus the price normalization constant.
#[derive(Debug, Clone, PartialEq)]
pub struct GanModel<S> {
    generator: MlpParams<S>,
    discriminator: MlpParams<S>,
    scale: S,
}

impl<S: Scalar> GanModel<S> {
    pub fn new(generator: MlpParams<S>, discriminator: MlpParams<S>, scale: S) -> Result<Self> {
        if !(scale.is_finite() && scale > S::zero()) {
            return Err(Error::InvalidParameter {
                name: "scale",
                value: scale.as_f64(),
            });
        }
        if discriminator.input_dim() != generator.output_dim() {
            return Err(Error::DimensionMismatch {
                context: "discriminator input",
                expected: generator.output_dim(),
                found: discriminator.input_dim(),
            });
        }
        if discriminator.output_dim() != 1 || discriminator.output_activation() != Activation::Sigmoid {
            return Err(Error::InvalidConfig(
                "discriminator must end in a single sigmoid unit".into(),
            ));
        }
        Ok(Self {
            generator,
            discriminator,
            scale,
        })
    }

    pub fn generator(&self) -> &MlpParams<S> {
        &self.generator
    }

    pub fn discriminator(&self) -> &MlpParams<S> {
        &self.discriminator
    }

    pub(crate) fn parts_mut(&mut self) -> (&mut MlpParams<S>, &mut MlpParams<S>) {
        (&mut self.generator, &mut self.discriminator)
    }

    pub fn scale(&self) -> S {
        self.scale
    }

    pub fn noise_dim(&self) -> usize {
        self.generator.input_dim()
    }

    pub fn window_len(&self) -> usize {
        self.generator.output_dim()
    }

    /// Smallest value a sampled track may contain.
    pub fn positive_floor(&self) -> S {
        S::lit(POSITIVE_FLOOR_FRACTION) * self.scale
    }

    /// Discriminator probability that each (unscaled) window is real.
    pub fn discriminate(&self, windows: &[Vec<S>]) -> Result<Vec<S>> {
        let t = self.window_len();
        let mut batch = Array2::zeros((windows.len(), t));
        for (mut row, w) in batch.axis_iter_mut(Axis(0)).zip(windows) {
            if w.len() != t {
                return Err(Error::DimensionMismatch {
                    context: "window",
                    expected: t,
                    found: w.len(),
                });
            }
            row.iter_mut().zip(w).for_each(|(r, &v)| *r = v / self.scale);
        }
        Ok(self.discriminator.forward_batch(batch.view())?.into_raw_vec_and_offset().0)
    }

    /// Draws `count` tracks `scale · G(Z)` with `Z` i.i.d. standard normal.
    ///
    /// Noise is drawn row by row from a ChaCha8 stream seeded with `seed`. Values below
    /// [`Self::positive_floor`] are raised to it.
    pub fn sample(&self, count: usize, seed: u64) -> Result<Vec<Track<S>>> {
        if count < 1 {
            return Err(Error::InvalidParameter {
                name: "sample count",
                value: 0.0,
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise_dim = self.noise_dim();
        let floor = self.positive_floor();
        let mut tracks = Vec::with_capacity(count);
        let mut remaining = count;
        while remaining > 0 {
            let rows = remaining.min(SAMPLE_CHUNK);
            let z = Array2::from_shape_simple_fn((rows, noise_dim), || S::standard_normal(&mut rng));
            let out = self.generator.forward_batch(z.view())?;
            for row in out.axis_iter(Axis(0)) {
                let values = row
                    .iter()
                    .map(|&v| {
                        let p = v * self.scale;
                        if p.is_nan() || p < floor {
                            floor
                        } else {
                            p
                        }
                    })
                    .collect();
                tracks.push(Track::new(values));
            }
            remaining -= rows;
        }
        Ok(tracks)
    }
}

impl<S: Scalar> TrackSampler<S> for GanModel<S> {
    fn track_len(&self) -> usize {
        self.window_len()
    }

    fn sample(&self, count: usize, seed: u64) -> Result<Vec<Track<S>>> {
        GanModel::sample(self, count, seed)
    }
}
