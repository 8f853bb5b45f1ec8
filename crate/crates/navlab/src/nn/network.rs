//! The actor and critic networks.
//!
//! Both share the same body: either two residual-concatenation blocks
//! (`Res`) or two plain 512-wide leaky-ReLU layers (`Mlp`, the vanilla
//! ablation). A residual-concatenation block expands the input to the
//! hidden width, projects back to the input width, adds the input,
//! applies a leaky ReLU and concatenates the result with the block
//! input, doubling the width: 16 -> 32 -> 64 across the two blocks.
//!
//! The actor head has two outputs squashed to (0,1) x (-1,1) by a
//! sigmoid and a tanh; a state-independent learnable log-std pair
//! completes a diagonal Gaussian policy. The critic head is a single
//! linear unit.
//!
//! ```
//! use navlab::nn::{Actor, ArchKind, TensorSet};
//! use rand_chacha::{rand_core::SeedableRng, ChaCha8Rng};
//!
//! let mut rng = ChaCha8Rng::seed_from_u64(0);
//! let mut actor = Actor::init(ArchKind::Res, 16, 64, &mut rng);
//! actor.zero();
//! // All-zero parameters: sigmoid(0) = 0.5 forward, tanh(0) = 0 turn.
//! assert_eq!(actor.forward(&[0.25; 16]), [0.5, 0.0]);
//! ```

use super::layer::{sigmoid, Activation, DenseCache, DenseLayer};
use super::matrix::Matrix;
use rand::Rng;

/// Default hidden width of every expansion layer.
pub const DEFAULT_HIDDEN: usize = 512;
/// Initial per-dimension policy standard deviation.
pub const INITIAL_STD: f64 = 0.3;
/// Head weights start at 1/100 of the He bound so initial actions sit
/// mid-range and initial values near zero.
pub const HEAD_INIT_SCALE: f64 = 0.01;

/// Expansion + projection + residual add + leaky ReLU, concatenated with
/// the block input. Output width is exactly twice the input width.
#[derive(Debug, Clone, PartialEq)]
pub struct ResConcatBlock {
    /// Expansion to the hidden width, leaky ReLU.
    pub fc1: DenseLayer,
    /// Projection back to the input width, linear.
    pub fc2: DenseLayer,
}

pub struct BlockCache {
    fc1: DenseCache,
    fc2: DenseCache,
    /// Pre-activation of the residual sum, batch x in_dim.
    res_pre: Matrix,
    /// Block output, batch x 2*in_dim.
    pub out: Matrix,
}

impl ResConcatBlock {
    pub fn init<R: Rng>(input_dim: usize, hidden: usize, rng: &mut R) -> Self {
        Self {
            fc1: DenseLayer::init(input_dim, hidden, Activation::LeakyRelu, 1.0, rng),
            fc2: DenseLayer::init(hidden, input_dim, Activation::Linear, 1.0, rng),
        }
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            fc1: DenseLayer::zeros(self.fc1.in_dim(), self.fc1.out_dim(), self.fc1.activation),
            fc2: DenseLayer::zeros(self.fc2.in_dim(), self.fc2.out_dim(), self.fc2.activation),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.fc1.in_dim()
    }

    pub fn output_dim(&self) -> usize {
        2 * self.input_dim()
    }

    /// Single-sample forward: `concat(leaky_relu(fc2(fc1(x)) + x), x)`.
    pub fn forward(&self, input: &[f64]) -> Vec<f64> {
        assert_eq!(input.len(), self.input_dim(), "block input dimension mismatch");
        let a = self.fc1.forward(input);
        let h = self.fc2.forward(&a);
        let mut out = Vec::with_capacity(2 * input.len());
        for (hi, xi) in h.iter().zip(input) {
            out.push(Activation::LeakyRelu.apply(hi + xi));
        }
        out.extend_from_slice(input);
        out
    }

    pub fn forward_batch(&self, x: &Matrix) -> BlockCache {
        let fc1 = self.fc1.forward_batch(x);
        let fc2 = self.fc2.forward_batch(&fc1.out);
        let mut res_pre = fc2.out.clone();
        for b in 0..x.rows() {
            let row = res_pre.row_mut(b);
            for (v, xi) in row.iter_mut().zip(x.row(b)) {
                *v += xi;
            }
        }
        let mut res = res_pre.clone();
        for v in res.data_mut() {
            *v = Activation::LeakyRelu.apply(*v);
        }
        let out = res.hconcat(x);
        BlockCache {
            fc1,
            fc2,
            res_pre,
            out,
        }
    }

    /// Backward through the block; returns the gradient at the block input.
    pub fn backward_batch(
        &self,
        x: &Matrix,
        cache: &BlockCache,
        d_out: &Matrix,
        grads: &mut ResConcatBlock,
    ) -> Matrix {
        let in_dim = self.input_dim();
        // Split the concat: residual half and skip half.
        let d_res = d_out.columns(0, in_dim);
        let d_skip = d_out.columns(in_dim, 2 * in_dim);
        // Through the post-residual leaky ReLU.
        let mut d_res_pre = d_res;
        for b in 0..x.rows() {
            let pre = cache.res_pre.row(b);
            for (g, z) in d_res_pre.row_mut(b).iter_mut().zip(pre) {
                *g *= Activation::LeakyRelu.grad(*z);
            }
        }
        // Projection and expansion layers.
        let d_a = self
            .fc2
            .backward_batch(&cache.fc1.out, &cache.fc2, &d_res_pre, &mut grads.fc2);
        let d_x_fc1 = self.fc1.backward_batch(x, &cache.fc1, &d_a, &mut grads.fc1);
        // Input gradient: fc1 path + residual path + skip path.
        let mut d_x = d_x_fc1;
        for b in 0..x.rows() {
            let row = d_x.row_mut(b);
            for i in 0..in_dim {
                row[i] += d_res_pre.get(b, i) + d_skip.get(b, i);
            }
        }
        d_x
    }
}

/// Network body shared by actors and critics.
#[derive(Debug, Clone, PartialEq)]
pub enum Body {
    Res {
        block1: ResConcatBlock,
        block2: ResConcatBlock,
    },
    Mlp {
        fc1: DenseLayer,
        fc2: DenseLayer,
    },
}

pub enum BodyCache {
    Res { b1: BlockCache, b2: BlockCache },
    Mlp { c1: DenseCache, c2: DenseCache },
}

/// Architecture selector for network constructors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArchKind {
    Res,
    Mlp,
}

impl Body {
    pub fn init<R: Rng>(kind: ArchKind, input_dim: usize, hidden: usize, rng: &mut R) -> Self {
        match kind {
            ArchKind::Res => {
                let block1 = ResConcatBlock::init(input_dim, hidden, rng);
                let block2 = ResConcatBlock::init(2 * input_dim, hidden, rng);
                Body::Res { block1, block2 }
            }
            ArchKind::Mlp => Body::Mlp {
                fc1: DenseLayer::init(input_dim, hidden, Activation::LeakyRelu, 1.0, rng),
                fc2: DenseLayer::init(hidden, hidden, Activation::LeakyRelu, 1.0, rng),
            },
        }
    }

    pub fn zeros_like(&self) -> Self {
        match self {
            Body::Res { block1, block2 } => Body::Res {
                block1: block1.zeros_like(),
                block2: block2.zeros_like(),
            },
            Body::Mlp { fc1, fc2 } => Body::Mlp {
                fc1: DenseLayer::zeros(fc1.in_dim(), fc1.out_dim(), fc1.activation),
                fc2: DenseLayer::zeros(fc2.in_dim(), fc2.out_dim(), fc2.activation),
            },
        }
    }

    pub fn kind(&self) -> ArchKind {
        match self {
            Body::Res { .. } => ArchKind::Res,
            Body::Mlp { .. } => ArchKind::Mlp,
        }
    }

    pub fn input_dim(&self) -> usize {
        match self {
            Body::Res { block1, .. } => block1.input_dim(),
            Body::Mlp { fc1, .. } => fc1.in_dim(),
        }
    }

    pub fn output_dim(&self) -> usize {
        match self {
            Body::Res { block2, .. } => block2.output_dim(),
            Body::Mlp { fc2, .. } => fc2.out_dim(),
        }
    }

    pub fn forward(&self, input: &[f64]) -> Vec<f64> {
        match self {
            Body::Res { block1, block2 } => block2.forward(&block1.forward(input)),
            Body::Mlp { fc1, fc2 } => fc2.forward(&fc1.forward(input)),
        }
    }

    pub fn forward_batch(&self, x: &Matrix) -> BodyCache {
        match self {
            Body::Res { block1, block2 } => {
                let b1 = block1.forward_batch(x);
                let b2 = block2.forward_batch(&b1.out);
                BodyCache::Res { b1, b2 }
            }
            Body::Mlp { fc1, fc2 } => {
                let c1 = fc1.forward_batch(x);
                let c2 = fc2.forward_batch(&c1.out);
                BodyCache::Mlp { c1, c2 }
            }
        }
    }

    pub fn cache_out<'a>(&self, cache: &'a BodyCache) -> &'a Matrix {
        match cache {
            BodyCache::Res { b2, .. } => &b2.out,
            BodyCache::Mlp { c2, .. } => &c2.out,
        }
    }

    pub fn backward_batch(
        &self,
        x: &Matrix,
        cache: &BodyCache,
        d_out: &Matrix,
        grads: &mut Body,
    ) -> Matrix {
        match (self, cache, grads) {
            (
                Body::Res { block1, block2 },
                BodyCache::Res { b1, b2 },
                Body::Res {
                    block1: g1,
                    block2: g2,
                },
            ) => {
                let d_mid = block2.backward_batch(&b1.out, b2, d_out, g2);
                block1.backward_batch(x, b1, &d_mid, g1)
            }
            (
                Body::Mlp { fc1, fc2 },
                BodyCache::Mlp { c1, c2 },
                Body::Mlp { fc1: g1, fc2: g2 },
            ) => {
                let d_mid = fc2.backward_batch(&c1.out, c2, d_out, g2);
                fc1.backward_batch(x, c1, &d_mid, g1)
            }
            _ => panic!("body/cache/grads variant mismatch"),
        }
    }
}

/// Number of action dimensions (linear, angular).
pub const ACTION_DIM: usize = 2;

/// Policy network: body, two-output linear head squashed to the action
/// box, and learnable log standard deviations.
#[derive(Debug, Clone, PartialEq)]
pub struct Actor {
    pub body: Body,
    pub head: DenseLayer,
    pub log_std: [f64; ACTION_DIM],
}

pub struct ActorCache {
    body: BodyCache,
    head: DenseCache,
    /// Squashed means, batch x 2.
    pub mean: Matrix,
}

impl Actor {
    pub fn init<R: Rng>(kind: ArchKind, input_dim: usize, hidden: usize, rng: &mut R) -> Self {
        let body = Body::init(kind, input_dim, hidden, rng);
        let head = DenseLayer::init(
            body.output_dim(),
            ACTION_DIM,
            Activation::Linear,
            HEAD_INIT_SCALE,
            rng,
        );
        Self {
            body,
            head,
            log_std: [INITIAL_STD.ln(); ACTION_DIM],
        }
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            body: self.body.zeros_like(),
            head: DenseLayer::zeros(self.head.in_dim(), self.head.out_dim(), self.head.activation),
            log_std: [0.0; ACTION_DIM],
        }
    }

    /// Squashed action mean for one observation: sigmoid on the linear
    /// channel, tanh on the angular channel.
    pub fn forward(&self, obs: &[f64]) -> [f64; ACTION_DIM] {
        let features = self.body.forward(obs);
        let z = self.head.forward(&features);
        [sigmoid(z[0]), z[1].tanh()]
    }

    pub fn forward_batch(&self, x: &Matrix) -> ActorCache {
        let body = self.body.forward_batch(x);
        let head = self.head.forward_batch(self.body.cache_out(&body));
        let mut mean = head.out.clone();
        for b in 0..mean.rows() {
            let row = mean.row_mut(b);
            row[0] = sigmoid(row[0]);
            row[1] = row[1].tanh();
        }
        ActorCache { body, head, mean }
    }

    /// Backward from gradients at the squashed means (batch x 2) and at
    /// the log-stds. Gradients accumulate into `grads`.
    pub fn backward_batch(
        &self,
        x: &Matrix,
        cache: &ActorCache,
        d_mean: &Matrix,
        d_log_std: [f64; ACTION_DIM],
        grads: &mut Actor,
    ) {
        let batch = x.rows();
        let mut d_head_out = Matrix::zeros(batch, ACTION_DIM);
        for b in 0..batch {
            let m = cache.mean.row(b);
            let g = d_mean.row(b);
            let row = d_head_out.row_mut(b);
            row[0] = g[0] * m[0] * (1.0 - m[0]);
            row[1] = g[1] * (1.0 - m[1] * m[1]);
        }
        let d_features = self.head.backward_batch(
            self.body.cache_out(&cache.body),
            &cache.head,
            &d_head_out,
            &mut grads.head,
        );
        self.body
            .backward_batch(x, &cache.body, &d_features, &mut grads.body);
        for (g, d) in grads.log_std.iter_mut().zip(d_log_std) {
            *g += d;
        }
    }
}

/// Value network: body plus a single linear output.
#[derive(Debug, Clone, PartialEq)]
pub struct Critic {
    pub body: Body,
    pub head: DenseLayer,
}

pub struct CriticCache {
    body: BodyCache,
    head: DenseCache,
    /// Values, length batch.
    pub values: Vec<f64>,
}

impl Critic {
    pub fn init<R: Rng>(kind: ArchKind, input_dim: usize, hidden: usize, rng: &mut R) -> Self {
        let body = Body::init(kind, input_dim, hidden, rng);
        let head = DenseLayer::init(
            body.output_dim(),
            1,
            Activation::Linear,
            HEAD_INIT_SCALE,
            rng,
        );
        Self { body, head }
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            body: self.body.zeros_like(),
            head: DenseLayer::zeros(self.head.in_dim(), self.head.out_dim(), self.head.activation),
        }
    }

    pub fn forward(&self, input: &[f64]) -> f64 {
        let features = self.body.forward(input);
        self.head.forward(&features)[0]
    }

    pub fn forward_batch(&self, x: &Matrix) -> CriticCache {
        let body = self.body.forward_batch(x);
        let head = self.head.forward_batch(self.body.cache_out(&body));
        let values = (0..x.rows()).map(|b| head.out.get(b, 0)).collect();
        CriticCache { body, head, values }
    }

    /// Backward from per-sample value gradients. Returns the gradient at
    /// the input (needed to chain policy gradients through a state-action
    /// critic).
    pub fn backward_batch(
        &self,
        x: &Matrix,
        cache: &CriticCache,
        d_values: &[f64],
        grads: &mut Critic,
    ) -> Matrix {
        let batch = x.rows();
        assert_eq!(d_values.len(), batch);
        let mut d_head_out = Matrix::zeros(batch, 1);
        for b in 0..batch {
            d_head_out.set(b, 0, d_values[b]);
        }
        let d_features = self.head.backward_batch(
            self.body.cache_out(&cache.body),
            &cache.head,
            &d_head_out,
            &mut grads.head,
        );
        self.body
            .backward_batch(x, &cache.body, &d_features, &mut grads.body)
    }
}

/// Log-density of a diagonal Gaussian at `action`.
pub fn gaussian_logprob(mean: &[f64], log_std: &[f64], action: &[f64]) -> f64 {
    const HALF_LN_TWO_PI: f64 = 0.918_938_533_204_672_8;
    let mut lp = 0.0;
    for ((&m, &ls), &a) in mean.iter().zip(log_std).zip(action) {
        let inv_std = (-ls).exp();
        let z = (a - m) * inv_std;
        lp += -0.5 * z * z - ls - HALF_LN_TWO_PI;
    }
    lp
}

/// A named view of every parameter tensor, in a fixed traversal order.
///
/// Powers the optimizer, soft updates, checkpoints and parameter counts.
pub trait TensorSet {
    fn tensors(&self) -> Vec<(String, Vec<usize>, &[f64])>;
    fn tensors_mut(&mut self) -> Vec<(String, Vec<usize>, &mut [f64])>;

    fn param_count(&self) -> usize {
        self.tensors().iter().map(|(_, _, d)| d.len()).sum()
    }

    fn all_finite(&self) -> bool {
        self.tensors()
            .iter()
            .all(|(_, _, d)| d.iter().all(|v| v.is_finite()))
    }

    fn zero(&mut self) {
        for (_, _, d) in self.tensors_mut() {
            d.fill(0.0);
        }
    }
}

fn dense_tensors<'a>(
    prefix: &str,
    layer: &'a DenseLayer,
) -> Vec<(String, Vec<usize>, &'a [f64])> {
    vec![
        (
            format!("{prefix}.w"),
            vec![layer.weights.rows(), layer.weights.cols()],
            layer.weights.data(),
        ),
        (format!("{prefix}.b"), vec![layer.bias.len()], &layer.bias[..]),
    ]
}

fn dense_tensors_mut<'a>(
    prefix: &str,
    layer: &'a mut DenseLayer,
) -> Vec<(String, Vec<usize>, &'a mut [f64])> {
    let dims_w = vec![layer.weights.rows(), layer.weights.cols()];
    let dims_b = vec![layer.bias.len()];
    vec![
        (format!("{prefix}.w"), dims_w, layer.weights.data_mut()),
        (format!("{prefix}.b"), dims_b, &mut layer.bias[..]),
    ]
}

fn body_tensors(body: &Body) -> Vec<(String, Vec<usize>, &[f64])> {
    match body {
        Body::Res { block1, block2 } => {
            let mut v = dense_tensors("body.b1.fc1", &block1.fc1);
            v.extend(dense_tensors("body.b1.fc2", &block1.fc2));
            v.extend(dense_tensors("body.b2.fc1", &block2.fc1));
            v.extend(dense_tensors("body.b2.fc2", &block2.fc2));
            v
        }
        Body::Mlp { fc1, fc2 } => {
            let mut v = dense_tensors("body.fc1", fc1);
            v.extend(dense_tensors("body.fc2", fc2));
            v
        }
    }
}

fn body_tensors_mut(body: &mut Body) -> Vec<(String, Vec<usize>, &mut [f64])> {
    match body {
        Body::Res { block1, block2 } => {
            let mut v = dense_tensors_mut("body.b1.fc1", &mut block1.fc1);
            v.extend(dense_tensors_mut("body.b1.fc2", &mut block1.fc2));
            v.extend(dense_tensors_mut("body.b2.fc1", &mut block2.fc1));
            v.extend(dense_tensors_mut("body.b2.fc2", &mut block2.fc2));
            v
        }
        Body::Mlp { fc1, fc2 } => {
            let mut v = dense_tensors_mut("body.fc1", fc1);
            v.extend(dense_tensors_mut("body.fc2", fc2));
            v
        }
    }
}

impl TensorSet for Actor {
    fn tensors(&self) -> Vec<(String, Vec<usize>, &[f64])> {
        let mut v = body_tensors(&self.body);
        v.extend(dense_tensors("head", &self.head));
        v.push(("log_std".into(), vec![ACTION_DIM], &self.log_std[..]));
        v
    }

    fn tensors_mut(&mut self) -> Vec<(String, Vec<usize>, &mut [f64])> {
        let mut v = body_tensors_mut(&mut self.body);
        v.extend(dense_tensors_mut("head", &mut self.head));
        v.push(("log_std".into(), vec![ACTION_DIM], &mut self.log_std[..]));
        v
    }
}

impl TensorSet for Critic {
    fn tensors(&self) -> Vec<(String, Vec<usize>, &[f64])> {
        let mut v = body_tensors(&self.body);
        v.extend(dense_tensors("head", &self.head));
        v
    }

    fn tensors_mut(&mut self) -> Vec<(String, Vec<usize>, &mut [f64])> {
        let mut v = body_tensors_mut(&mut self.body);
        v.extend(dense_tensors_mut("head", &mut self.head));
        v
    }
}
