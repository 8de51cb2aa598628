//! Parameter storage, Adam, and the layers the policy and value networks are built from.

use std::sync::atomic::{AtomicU64, Ordering};

use rand::Rng;

use super::autodiff::{Matrix, Tape, Var};

static NEXT_STORE: AtomicU64 = AtomicU64::new(1);

/// Owns the trainable matrices of one network.
#[derive(Debug)]
pub struct ParamStore {
    tag: u64,
    values: Vec<Matrix>,
}

fn fresh_tag() -> u64 {
    NEXT_STORE.fetch_add(1, Ordering::Relaxed)
}

impl Clone for ParamStore {
    fn clone(&self) -> Self {
        Self {
            tag: fresh_tag(),
            values: self.values.clone(),
        }
    }
}

impl PartialEq for ParamStore {
    fn eq(&self, other: &Self) -> bool {
        self.values == other.values
    }
}

impl Default for ParamStore {
    fn default() -> Self {
        Self::new()
    }
}

impl ParamStore {
    pub fn new() -> Self {
        Self {
            tag: fresh_tag(),
            values: Vec::new(),
        }
    }

    pub fn tag(&self) -> u64 {
        self.tag
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Total number of scalar parameters.
    pub fn scalar_count(&self) -> usize {
        self.values.iter().map(|m| m.data.len()).sum()
    }

    pub fn value(&self, id: usize) -> &Matrix {
        &self.values[id]
    }

    pub fn values(&self) -> &[Matrix] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Matrix] {
        &mut self.values
    }

    pub fn add(&mut self, value: Matrix) -> usize {
        self.values.push(value);
        self.values.len() - 1
    }

    /// Uniform ±√(6 / (fan_in + fan_out)) initialization.
    pub fn add_glorot<R: Rng + ?Sized>(&mut self, rows: usize, cols: usize, rng: &mut R) -> usize {
        let limit = (6.0 / (rows + cols) as f64).sqrt();
        let data = (0..rows * cols).map(|_| rng.random_range(-limit..limit)).collect();
        self.add(Matrix::from_vec(rows, cols, data))
    }

    pub fn zero_grads(&self) -> Vec<Matrix> {
        self.values.iter().map(|m| Matrix::zeros(m.rows, m.cols)).collect()
    }

    /// `self ← τ·source + (1 − τ)·self`.
    pub fn soft_update(&mut self, source: &ParamStore, tau: f64) {
        for (dst, src) in self.values.iter_mut().zip(&source.values) {
            for (d, s) in dst.data.iter_mut().zip(&src.data) {
                *d = tau * s + (1.0 - tau) * *d;
            }
        }
    }

    pub fn load<'p>(&'p self, tape: &mut Tape<'p>, id: usize) -> Var {
        tape.param(self.tag, id, &self.values[id])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    step: u64,
    m: Vec<Matrix>,
    v: Vec<Matrix>,
}

impl Adam {
    pub fn new(store: &ParamStore, lr: f64) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            step: 0,
            m: store.zero_grads(),
            v: store.zero_grads(),
        }
    }

    pub fn steps(&self) -> u64 {
        self.step
    }

    pub fn apply(&mut self, store: &mut ParamStore, grads: &[Matrix]) {
        self.step += 1;
        let c1 = 1.0 - self.beta1.powi(self.step as i32);
        let c2 = 1.0 - self.beta2.powi(self.step as i32);
        for (k, g) in grads.iter().enumerate() {
            let (m, v) = (&mut self.m[k], &mut self.v[k]);
            let p = &mut store.values[k];
            for i in 0..g.data.len() {
                let gi = g.data[i];
                m.data[i] = self.beta1 * m.data[i] + (1.0 - self.beta1) * gi;
                v.data[i] = self.beta2 * v.data[i] + (1.0 - self.beta2) * gi * gi;
                let mh = m.data[i] / c1;
                let vh = v.data[i] / c2;
                p.data[i] -= self.lr * mh / (vh.sqrt() + self.eps);
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Linear {
    weight: usize,
    bias: usize,
}

impl Linear {
    pub fn new<R: Rng + ?Sized>(store: &mut ParamStore, inputs: usize, outputs: usize, rng: &mut R) -> Self {
        Self {
            weight: store.add_glorot(inputs, outputs, rng),
            bias: store.add(Matrix::zeros(1, outputs)),
        }
    }

    pub fn forward<'p>(&self, tape: &mut Tape<'p>, store: &'p ParamStore, x: Var) -> Var {
        let w = store.load(tape, self.weight);
        let b = store.load(tape, self.bias);
        let y = tape.matmul(x, w);
        tape.add_row(y, b)
    }
}

/// Linear layers with ReLU between them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mlp {
    layers: Vec<Linear>,
}

impl Mlp {
    pub fn new<R: Rng + ?Sized>(store: &mut ParamStore, widths: &[usize], rng: &mut R) -> Self {
        Self {
            layers: widths.windows(2).map(|w| Linear::new(store, w[0], w[1], rng)).collect(),
        }
    }

    pub fn forward<'p>(&self, tape: &mut Tape<'p>, store: &'p ParamStore, mut x: Var) -> Var {
        for (i, layer) in self.layers.iter().enumerate() {
            x = layer.forward(tape, store, x);
            if i + 1 < self.layers.len() {
                x = tape.relu(x);
            }
        }
        x
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayerNorm {
    gain: usize,
    bias: usize,
}

impl LayerNorm {
    pub fn new(store: &mut ParamStore, width: usize) -> Self {
        Self {
            gain: store.add(Matrix::from_vec(1, width, vec![1.0; width])),
            bias: store.add(Matrix::zeros(1, width)),
        }
    }

    pub fn forward<'p>(&self, tape: &mut Tape<'p>, store: &'p ParamStore, x: Var) -> Var {
        let g = store.load(tape, self.gain);
        let b = store.load(tape, self.bias);
        tape.layer_norm(x, g, b)
    }
}

/// Multi-head scaled dot-product attention with an additive score bias.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Attention {
    query: Linear,
    key: Linear,
    value: Linear,
    output: Linear,
    heads: usize,
    width: usize,
}

impl Attention {
    pub fn new<R: Rng + ?Sized>(store: &mut ParamStore, width: usize, heads: usize, rng: &mut R) -> Self {
        assert!(heads > 0 && width % heads == 0, "width must split evenly across heads");
        Self {
            query: Linear::new(store, width, width, rng),
            key: Linear::new(store, width, width, rng),
            value: Linear::new(store, width, width, rng),
            output: Linear::new(store, width, width, rng),
            heads,
            width,
        }
    }

    /// Rows of `queries` attend over rows of `memory`; `bias` has one entry per (query, memory) pair.
    pub fn forward<'p>(&self, tape: &mut Tape<'p>, store: &'p ParamStore, queries: Var, memory: Var, bias: Option<&Matrix>) -> Var {
        let q = self.query.forward(tape, store, queries);
        let k = self.key.forward(tape, store, memory);
        let v = self.value.forward(tape, store, memory);
        let dh = self.width / self.heads;
        let scale = 1.0 / (dh as f64).sqrt();
        let mut outs = Vec::with_capacity(self.heads);
        for h in 0..self.heads {
            let qh = tape.slice_cols(q, h * dh, dh);
            let kh = tape.slice_cols(k, h * dh, dh);
            let vh = tape.slice_cols(v, h * dh, dh);
            let s = tape.matmul_t(qh, kh);
            let mut s = tape.scale(s, scale);
            if let Some(b) = bias {
                s = tape.add_const(s, b);
            }
            let p = tape.softmax_rows(s);
            outs.push(tape.matmul(p, vh));
        }
        let joined = if outs.len() == 1 { outs[0] } else { tape.concat_cols(&outs) };
        self.output.forward(tape, store, joined)
    }
}
