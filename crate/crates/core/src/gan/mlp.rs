//! Fully connected networks with explicit backpropagation.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Activation {
    Relu,
    Sigmoid,
    Tanh,
    Identity,
}

impl Activation {
    pub const ALL: [Activation; 4] = [
        Activation::Relu,
        Activation::Sigmoid,
        Activation::Tanh,
        Activation::Identity,
    ];

    /// Checkpoint tag.
    pub fn tag(self) -> u8 {
        match self {
            Activation::Relu => 0,
            Activation::Sigmoid => 1,
            Activation::Tanh => 2,
            Activation::Identity => 3,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.tag() == tag)
    }

    #[inline]
    pub fn apply<S: Scalar>(self, z: S) -> S {
        match self {
            Activation::Relu => z.max(S::zero()),
            Activation::Sigmoid => sigmoid(z),
            Activation::Tanh => z.tanh(),
            Activation::Identity => z,
        }
    }

    /// Derivative with respect to the pre-activation `z`, given the output `y = f(z)`.
    #[inline]
    fn derivative<S: Scalar>(self, z: S, y: S) -> S {
        match self {
            Activation::Relu => {
                if z > S::zero() {
                    S::one()
                } else {
                    S::zero()
                }
            }
            Activation::Sigmoid => y * (S::one() - y),
            Activation::Tanh => S::one() - y * y,
            Activation::Identity => S::one(),
        }
    }
}

#[inline]
pub(crate) fn sigmoid<S: Scalar>(z: S) -> S {
    if z >= S::zero() {
        S::one() / (S::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (S::one() + e)
    }
}

/// `log(1 + e^z)` without overflow.
#[inline]
pub(crate) fn softplus<S: Scalar>(z: S) -> S {
    z.max(S::zero()) + (-z.abs()).exp().ln_1p()
}

/// One affine layer followed by an activation. `weights` is `out × in`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense<S> {
    pub weights: Array2<S>,
    pub bias: Array1<S>,
    pub activation: Activation,
}

impl<S: Scalar> Dense<S> {
    pub fn input_dim(&self) -> usize {
        self.weights.ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.weights.nrows()
    }
}

/// Parameters of a fully connected network.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams<S> {
    layers: Vec<Dense<S>>,
}

/// Per-layer gradients (or any parameter-shaped buffer).
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients<S> {
    pub weights: Vec<Array2<S>>,
    pub biases: Vec<Array1<S>>,
}

impl<S: Scalar> Gradients<S> {
    pub fn zeros_like(net: &MlpParams<S>) -> Self {
        Self {
            weights: net.layers.iter().map(|l| Array2::zeros(l.weights.raw_dim())).collect(),
            biases: net.layers.iter().map(|l| Array1::zeros(l.bias.raw_dim())).collect(),
        }
    }

    /// All entries, layer by layer: weights row-major, then biases.
    pub fn flatten(&self) -> Vec<S> {
        self.weights
            .iter()
            .zip(&self.biases)
            .flat_map(|(w, b)| w.iter().chain(b.iter()).copied())
            .collect()
    }
}

/// Intermediate values of a batched forward pass, needed by the backward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache<S> {
    /// Layer inputs followed by the network output (`layers + 1` entries).
    activations: Vec<Array2<S>>,
    preactivations: Vec<Array2<S>>,
}

impl<S: Scalar> ForwardCache<S> {
    pub fn output(&self) -> &Array2<S> {
        self.activations.last().expect("non-empty cache")
    }

    /// Pre-activation of the last layer (logits for a sigmoid head).
    pub fn logits(&self) -> &Array2<S> {
        self.preactivations.last().expect("non-empty cache")
    }

    pub fn input(&self) -> &Array2<S> {
        &self.activations[0]
    }
}

impl<S: Scalar> MlpParams<S> {
    pub fn new(layers: Vec<Dense<S>>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidConfig("network needs at least one layer".into()));
        }
        for (i, l) in layers.iter().enumerate() {
            if l.bias.len() != l.output_dim() {
                return Err(Error::DimensionMismatch {
                    context: "layer bias",
                    expected: l.output_dim(),
                    found: l.bias.len(),
                });
            }
            if i > 0 && l.input_dim() != layers[i - 1].output_dim() {
                return Err(Error::DimensionMismatch {
                    context: "layer chain",
                    expected: layers[i - 1].output_dim(),
                    found: l.input_dim(),
                });
            }
        }
        Ok(Self { layers })
    }

    /// Glorot-uniform weights and zero biases. `dims` lists every layer width from input
    /// to output; `activations` has one entry per layer.
    pub fn init<R: Rng + ?Sized>(dims: &[usize], activations: &[Activation], rng: &mut R) -> Result<Self> {
        if dims.len() < 2 || activations.len() != dims.len() - 1 {
            return Err(Error::InvalidConfig(format!(
                "{} layer widths need {} activations, got {}",
                dims.len(),
                dims.len().saturating_sub(1),
                activations.len()
            )));
        }
        if dims.contains(&0) {
            return Err(Error::InvalidConfig("layer widths must be positive".into()));
        }
        let layers = dims
            .windows(2)
            .zip(activations)
            .map(|(io, &activation)| {
                let (fan_in, fan_out) = (io[0], io[1]);
                let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
                let weights = Array2::from_shape_fn((fan_out, fan_in), |_| S::lit(rng.random_range(-limit..limit)));
                Dense {
                    weights,
                    bias: Array1::zeros(fan_out),
                    activation,
                }
            })
            .collect();
        Self::new(layers)
    }

    pub fn layers(&self) -> &[Dense<S>] {
        &self.layers
    }

    pub(crate) fn layers_mut(&mut self) -> &mut [Dense<S>] {
        &mut self.layers
    }

    /// Widths from input to output.
    pub fn layer_dims(&self) -> Vec<usize> {
        std::iter::once(self.input_dim())
            .chain(self.layers.iter().map(Dense::output_dim))
            .collect()
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].input_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().expect("non-empty").output_dim()
    }

    pub fn output_activation(&self) -> Activation {
        self.layers.last().expect("non-empty").activation
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    pub fn forward(&self, x: &[S]) -> Result<Vec<S>> {
        let batch = ArrayView2::from_shape((1, x.len()), x).expect("contiguous row");
        Ok(self.forward_batch(batch)?.into_raw_vec_and_offset().0)
    }

    /// Forward pass over a batch with one sample per row.
    pub fn forward_batch(&self, x: ArrayView2<S>) -> Result<Array2<S>> {
        self.check_input(x.ncols())?;
        let mut a = x.to_owned();
        for l in &self.layers {
            let mut z = a.dot(&l.weights.t());
            z += &l.bias;
            z.mapv_inplace(|v| l.activation.apply(v));
            a = z;
        }
        Ok(a)
    }

    /// Forward pass keeping every intermediate value for [`Self::backward_batch`].
    pub fn forward_cached(&self, x: Array2<S>) -> Result<ForwardCache<S>> {
        self.check_input(x.ncols())?;
        let mut activations = Vec::with_capacity(self.layers.len() + 1);
        let mut preactivations = Vec::with_capacity(self.layers.len());
        activations.push(x);
        for l in &self.layers {
            let mut z = activations.last().unwrap().dot(&l.weights.t());
            z += &l.bias;
            let a = z.mapv(|v| l.activation.apply(v));
            preactivations.push(z);
            activations.push(a);
        }
        Ok(ForwardCache {
            activations,
            preactivations,
        })
    }

    /// Parameter gradients of `upstream · f(x)` for a single input.
    pub fn backward(&self, x: &[S], upstream: &[S]) -> Result<Gradients<S>> {
        if upstream.len() != self.output_dim() {
            return Err(Error::DimensionMismatch {
                context: "upstream gradient",
                expected: self.output_dim(),
                found: upstream.len(),
            });
        }
        let input = Array2::from_shape_vec((1, x.len()), x.to_vec()).expect("row shape");
        let cache = self.forward_cached(input)?;
        let up = ArrayView2::from_shape((1, upstream.len()), upstream).expect("row shape");
        Ok(self.backward_batch(&cache, up)?.0)
    }

    /// Backpropagates `upstream = dL/d(output)` (one row per sample). Returns parameter
    /// gradients summed over the batch and the gradient with respect to the input batch.
    pub fn backward_batch(&self, cache: &ForwardCache<S>, upstream: ArrayView2<S>) -> Result<(Gradients<S>, Array2<S>)> {
        let out = cache.output();
        if upstream.dim() != out.dim() {
            return Err(Error::DimensionMismatch {
                context: "upstream gradient",
                expected: out.len(),
                found: upstream.len(),
            });
        }
        let last = self.layers.len() - 1;
        let act = self.layers[last].activation;
        let mut delta = upstream.to_owned();
        ndarray::Zip::from(&mut delta)
            .and(&cache.preactivations[last])
            .and(out)
            .for_each(|d, &z, &y| *d *= act.derivative(z, y));
        self.backward_from_logits(cache, delta)
    }

    /// Backpropagates a gradient given with respect to the last layer's pre-activation.
    pub fn backward_from_logits(&self, cache: &ForwardCache<S>, mut delta: Array2<S>) -> Result<(Gradients<S>, Array2<S>)> {
        let last = self.layers.len() - 1;
        if delta.dim() != cache.preactivations[last].dim() {
            return Err(Error::DimensionMismatch {
                context: "logit gradient",
                expected: cache.preactivations[last].len(),
                found: delta.len(),
            });
        }
        let mut grads = Gradients::zeros_like(self);
        for i in (0..self.layers.len()).rev() {
            let layer = &self.layers[i];
            grads.weights[i] = delta.t().dot(&cache.activations[i]);
            grads.biases[i] = delta.sum_axis(Axis(0));
            let mut prev = delta.dot(&layer.weights);
            if i > 0 {
                let act = self.layers[i - 1].activation;
                ndarray::Zip::from(&mut prev)
                    .and(&cache.preactivations[i - 1])
                    .and(&cache.activations[i])
                    .for_each(|d, &z, &y| *d *= act.derivative(z, y));
            }
            delta = prev;
        }
        Ok((grads, delta))
    }

    /// Every parameter, layer by layer: weights row-major, then biases.
    pub fn flatten(&self) -> Vec<S> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(l.bias.iter()).copied())
            .collect()
    }

    /// Overwrites parameters from the layout produced by [`Self::flatten`].
    pub fn set_flat(&mut self, values: &[S]) -> Result<()> {
        if values.len() != self.parameter_count() {
            return Err(Error::DimensionMismatch {
                context: "flat parameters",
                expected: self.parameter_count(),
                found: values.len(),
            });
        }
        let mut it = values.iter().copied();
        for l in &mut self.layers {
            l.weights.iter_mut().chain(l.bias.iter_mut()).for_each(|p| *p = it.next().unwrap());
        }
        Ok(())
    }

    fn check_input(&self, found: usize) -> Result<()> {
        if found != self.input_dim() {
            return Err(Error::DimensionMismatch {
                context: "network input",
                expected: self.input_dim(),
                found,
            });
        }
        Ok(())
    }
}
