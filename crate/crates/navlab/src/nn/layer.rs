//! Dense layers with cached forward passes and exact backward passes.

use super::matrix::{axpy, dot, Matrix};
use rand::Rng;

/// Negative-half slope of the leaky rectifier.
pub const LEAKY_SLOPE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    LeakyRelu,
    Linear,
    Tanh,
    Sigmoid,
}

impl Activation {
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::LeakyRelu => {
                if z >= 0.0 {
                    z
                } else {
                    LEAKY_SLOPE * z
                }
            }
            Activation::Linear => z,
            Activation::Tanh => z.tanh(),
            Activation::Sigmoid => sigmoid(z),
        }
    }

    /// Derivative with respect to the pre-activation `z`.
    pub fn grad(self, z: f64) -> f64 {
        match self {
            Activation::LeakyRelu => {
                if z >= 0.0 {
                    1.0
                } else {
                    LEAKY_SLOPE
                }
            }
            Activation::Linear => 1.0,
            Activation::Tanh => {
                let t = z.tanh();
                1.0 - t * t
            }
            Activation::Sigmoid => {
                let s = sigmoid(z);
                s * (1.0 - s)
            }
        }
    }
}

pub fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Fully connected layer: `activation(W x + b)` with `W` stored `out x in`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    pub weights: Matrix,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

/// Cached intermediates of a batched forward pass.
pub struct DenseCache {
    /// Pre-activations, batch x out.
    pub pre: Matrix,
    /// Activated outputs, batch x out.
    pub out: Matrix,
}

impl DenseLayer {
    pub fn zeros(in_dim: usize, out_dim: usize, activation: Activation) -> Self {
        Self {
            weights: Matrix::zeros(out_dim, in_dim),
            bias: vec![0.0; out_dim],
            activation,
        }
    }

    /// He-style uniform init in +-scale*sqrt(6/fan_in), zero bias.
    pub fn init<R: Rng>(
        in_dim: usize,
        out_dim: usize,
        activation: Activation,
        scale: f64,
        rng: &mut R,
    ) -> Self {
        let bound = scale * (6.0 / in_dim as f64).sqrt();
        Self {
            weights: Matrix::from_fn(out_dim, in_dim, |_, _| rng.random_range(-bound..bound)),
            bias: vec![0.0; out_dim],
            activation,
        }
    }

    pub fn in_dim(&self) -> usize {
        self.weights.cols()
    }

    pub fn out_dim(&self) -> usize {
        self.weights.rows()
    }

    /// Single-sample forward pass.
    pub fn forward(&self, input: &[f64]) -> Vec<f64> {
        assert_eq!(input.len(), self.in_dim(), "dense input dimension mismatch");
        (0..self.out_dim())
            .map(|o| {
                self.activation
                    .apply(dot(self.weights.row(o), input) + self.bias[o])
            })
            .collect()
    }

    /// Batched forward pass; rows of `x` are samples.
    pub fn forward_batch(&self, x: &Matrix) -> DenseCache {
        assert_eq!(x.cols(), self.in_dim(), "dense input dimension mismatch");
        let batch = x.rows();
        let out_dim = self.out_dim();
        let mut pre = Matrix::zeros(batch, out_dim);
        for b in 0..batch {
            let xb = x.row(b);
            let row = pre.row_mut(b);
            for o in 0..out_dim {
                row[o] = dot(self.weights.row(o), xb) + self.bias[o];
            }
        }
        let mut out = pre.clone();
        for v in out.data_mut() {
            *v = self.activation.apply(*v);
        }
        DenseCache { pre, out }
    }

    /// Backward pass for a batch.
    ///
    /// `d_out` is the loss gradient at the activated output. Weight and
    /// bias gradients accumulate into `grads` (a same-shape layer used as
    /// a gradient buffer); returns the gradient at the input.
    pub fn backward_batch(
        &self,
        input: &Matrix,
        cache: &DenseCache,
        d_out: &Matrix,
        grads: &mut DenseLayer,
    ) -> Matrix {
        let batch = input.rows();
        let (in_dim, out_dim) = (self.in_dim(), self.out_dim());
        assert_eq!(d_out.rows(), batch);
        assert_eq!(d_out.cols(), out_dim);

        let mut d_input = Matrix::zeros(batch, in_dim);
        let mut d_pre_row = vec![0.0; out_dim];
        for b in 0..batch {
            let pre = cache.pre.row(b);
            let do_row = d_out.row(b);
            for o in 0..out_dim {
                d_pre_row[o] = do_row[o] * self.activation.grad(pre[o]);
            }
            let xb = input.row(b);
            let di = d_input.row_mut(b);
            for o in 0..out_dim {
                let g = d_pre_row[o];
                if g != 0.0 {
                    axpy(grads.weights.row_mut(o), g, xb);
                    axpy(di, g, self.weights.row(o));
                }
                grads.bias[o] += g;
            }
        }
        d_input
    }
}
