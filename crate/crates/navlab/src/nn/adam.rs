//! Bias-corrected Adam over any [`TensorSet`].

use super::network::TensorSet;

pub const DEFAULT_BETA1: f64 = 0.9;
pub const DEFAULT_BETA2: f64 = 0.999;
pub const DEFAULT_EPSILON: f64 = 1e-8;

/// Optimizer state: first/second moment buffers mirroring the parameter
/// tensors, plus the step counter (kept as f64 so the state is itself a
/// [`TensorSet`] for checkpointing).
pub struct AdamState {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    t: Vec<f64>,
    dims: Vec<Vec<usize>>,
}

impl AdamState {
    pub fn new(lr: f64, params: &impl TensorSet) -> Self {
        let tensors = params.tensors();
        Self {
            lr,
            beta1: DEFAULT_BETA1,
            beta2: DEFAULT_BETA2,
            epsilon: DEFAULT_EPSILON,
            m: tensors.iter().map(|(_, _, d)| vec![0.0; d.len()]).collect(),
            v: tensors.iter().map(|(_, _, d)| vec![0.0; d.len()]).collect(),
            t: vec![0.0],
            dims: tensors.iter().map(|(_, dims, _)| dims.clone()).collect(),
        }
    }

    pub fn step_count(&self) -> u64 {
        self.t[0] as u64
    }

    /// One bias-corrected update of `params` from `grads`.
    pub fn step(&mut self, params: &mut impl TensorSet, grads: &impl TensorSet) {
        self.t[0] += 1.0;
        let t = self.t[0];
        let bc1 = 1.0 - self.beta1.powf(t);
        let bc2 = 1.0 - self.beta2.powf(t);
        let params = params.tensors_mut();
        let grads = grads.tensors();
        assert_eq!(params.len(), grads.len(), "param/grad tensor count mismatch");
        for (k, ((_, _, p), (_, _, g))) in params.into_iter().zip(grads).enumerate() {
            assert_eq!(p.len(), g.len(), "param/grad shape mismatch");
            let m = &mut self.m[k];
            let v = &mut self.v[k];
            for i in 0..p.len() {
                m[i] = self.beta1 * m[i] + (1.0 - self.beta1) * g[i];
                v[i] = self.beta2 * v[i] + (1.0 - self.beta2) * g[i] * g[i];
                let m_hat = m[i] / bc1;
                let v_hat = v[i] / bc2;
                p[i] -= self.lr * m_hat / (v_hat.sqrt() + self.epsilon);
            }
        }
    }
}

impl TensorSet for AdamState {
    fn tensors(&self) -> Vec<(String, Vec<usize>, &[f64])> {
        let mut out = Vec::with_capacity(2 * self.m.len() + 1);
        for (k, (m, dims)) in self.m.iter().zip(&self.dims).enumerate() {
            out.push((format!("m{k}"), dims.clone(), &m[..]));
        }
        for (k, (v, dims)) in self.v.iter().zip(&self.dims).enumerate() {
            out.push((format!("v{k}"), dims.clone(), &v[..]));
        }
        out.push(("t".into(), vec![1], &self.t[..]));
        out
    }

    fn tensors_mut(&mut self) -> Vec<(String, Vec<usize>, &mut [f64])> {
        let dims = self.dims.clone();
        let mut out = Vec::with_capacity(2 * self.m.len() + 1);
        for (k, (m, dims)) in self.m.iter_mut().zip(&dims).enumerate() {
            out.push((format!("m{k}"), dims.clone(), &mut m[..]));
        }
        for (k, (v, dims)) in self.v.iter_mut().zip(&dims).enumerate() {
            out.push((format!("v{k}"), dims.clone(), &mut v[..]));
        }
        out.push(("t".into(), vec![1], &mut self.t[..]));
        out
    }
}
