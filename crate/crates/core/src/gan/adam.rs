use ndarray::Zip;

use super::mlp::{Gradients, MlpParams};
use crate::scalar::Scalar;

/// Adam optimizer state for one network.
#[derive(Debug, Clone)]
pub struct Adam<S> {
    lr: S,
    beta1: S,
    beta2: S,
    eps: S,
    step: i32,
    first: Gradients<S>,
    second: Gradients<S>,
}

impl<S: Scalar> Adam<S> {
    pub fn new(net: &MlpParams<S>, lr: S, beta1: S, beta2: S, eps: S) -> Self {
        Self {
            lr,
            beta1,
            beta2,
            eps,
            step: 0,
            first: Gradients::zeros_like(net),
            second: Gradients::zeros_like(net),
        }
    }

    /// Applies one descent step along `grads`.
    pub fn step(&mut self, net: &mut MlpParams<S>, grads: &Gradients<S>) {
        self.step += 1;
        let one = S::one();
        let (b1, b2, eps) = (self.beta1, self.beta2, self.eps);
        let lr_t = self.lr * (one - b2.powi(self.step)).sqrt() / (one - b1.powi(self.step));
        for (i, layer) in net.layers_mut().iter_mut().enumerate() {
            Zip::from(&mut layer.weights)
                .and(&mut self.first.weights[i])
                .and(&mut self.second.weights[i])
                .and(&grads.weights[i])
                .for_each(|p, m, v, &g| {
                    *m = b1 * *m + (one - b1) * g;
                    *v = b2 * *v + (one - b2) * g * g;
                    *p -= lr_t * *m / (v.sqrt() + eps);
                });
            Zip::from(&mut layer.bias)
                .and(&mut self.first.biases[i])
                .and(&mut self.second.biases[i])
                .and(&grads.biases[i])
                .for_each(|p, m, v, &g| {
                    *m = b1 * *m + (one - b1) * g;
                    *v = b2 * *v + (one - b2) * g * g;
                    *p -= lr_t * *m / (v.sqrt() + eps);
                });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gan::mlp::{Activation, Dense};
    use ndarray::{array, Array1};

    #[test]
    fn first_step_moves_by_learning_rate() {
        // with bias correction the first update is lr * sign(g) (up to eps)
        let mut net = MlpParams::new(vec![Dense {
            weights: array![[1.0f64, -1.0]],
            bias: Array1::zeros(1),
            activation: Activation::Identity,
        }])
        .unwrap();
        let grads = Gradients {
            weights: vec![array![[0.3, -2.0]]],
            biases: vec![array![0.0]],
        };
        let mut opt = Adam::new(&net, 0.01, 0.9, 0.999, 1e-12);
        opt.step(&mut net, &grads);
        let w = &net.layers()[0].weights;
        assert!((w[[0, 0]] - 0.99).abs() < 1e-9);
        assert!((w[[0, 1]] + 0.99).abs() < 1e-9);
        assert_eq!(net.layers()[0].bias[0], 0.0);
    }

    #[test]
    fn minimizes_a_quadratic() {
        // f(w) = (w - 3)^2 on a single identity unit with input 1
        let mut net = MlpParams::new(vec![Dense {
            weights: array![[0.0f64]],
            bias: array![0.0],
            activation: Activation::Identity,
        }])
        .unwrap();
        let mut opt = Adam::new(&net, 0.05, 0.9, 0.999, 1e-8);
        for _ in 0..2000 {
            let out = net.forward(&[1.0]).unwrap()[0];
            let g = net.backward(&[1.0], &[2.0 * (out - 3.0)]).unwrap();
            opt.step(&mut net, &g);
        }
        assert!((net.forward(&[1.0]).unwrap()[0] - 3.0).abs() < 1e-3);
    }
}
