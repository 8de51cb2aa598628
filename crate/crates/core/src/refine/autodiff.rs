//! Reverse-mode automatic differentiation over small dense row-major matrices.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length");
        Self { rows, cols, data }
    }

    pub fn row_vector(data: Vec<f64>) -> Self {
        Self::from_vec(1, data.len(), data)
    }

    pub fn scalar(v: f64) -> Self {
        Self::from_vec(1, 1, vec![v])
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    fn same_shape(&self, other: &Matrix) -> bool {
        self.rows == other.rows && self.cols == other.cols
    }

    fn map(&self, f: impl Fn(f64) -> f64) -> Matrix {
        Matrix::from_vec(self.rows, self.cols, self.data.iter().map(|x| f(*x)).collect())
    }

    fn zip(&self, other: &Matrix, f: impl Fn(f64, f64) -> f64) -> Matrix {
        debug_assert!(self.same_shape(other));
        Matrix::from_vec(
            self.rows,
            self.cols,
            self.data.iter().zip(&other.data).map(|(a, b)| f(*a, *b)).collect(),
        )
    }

    fn add_assign(&mut self, other: &Matrix) {
        debug_assert!(self.same_shape(other));
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    /// `self · other`.
    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matmul shape");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let o = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == 0.0 {
                    continue;
                }
                let b = &other.data[k * other.cols..(k + 1) * other.cols];
                for (o, b) in o.iter_mut().zip(b) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// `self · otherᵀ`.
    pub fn matmul_t(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.cols, "matmul_t shape");
        let mut out = Matrix::zeros(self.rows, other.rows);
        for i in 0..self.rows {
            let a = self.row(i);
            for j in 0..other.rows {
                out.data[i * other.rows + j] = a.iter().zip(other.row(j)).map(|(x, y)| x * y).sum();
            }
        }
        out
    }

    /// `selfᵀ · other`.
    pub fn t_matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.rows, other.rows, "t_matmul shape");
        let mut out = Matrix::zeros(self.cols, other.cols);
        for k in 0..self.rows {
            let a = self.row(k);
            let b = other.row(k);
            for (i, ai) in a.iter().enumerate() {
                if *ai == 0.0 {
                    continue;
                }
                let o = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (o, bj) in o.iter_mut().zip(b) {
                    *o += ai * bj;
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(usize);

#[derive(Debug, Clone)]
enum Op {
    Input,
    Param { store: u64, id: usize },
    MatMul(Var, Var),
    MatMulT(Var, Var),
    AddRow(Var, Var),
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    Min(Var, Var),
    Scale(Var, f64),
    AddConst(Var),
    Relu(Var),
    Tanh(Var),
    Exp(Var),
    Softplus(Var),
    Square(Var),
    SoftmaxRows(Var),
    LayerNorm { x: Var, gain: Var, bias: Var, xhat: Matrix, inv_std: Vec<f64> },
    SliceCols(Var, usize),
    ConcatCols(Vec<Var>),
    Rows(Var, Vec<usize>),
    ConcatRows(Vec<Var>),
    Sum(Var),
}

enum Value<'p> {
    Owned(Matrix),
    Shared(&'p Matrix),
}

struct Node<'p> {
    value: Value<'p>,
    op: Op,
}

/// Records operations for one forward pass and replays them backwards.
///
/// Parameters and constant inputs are borrowed for the tape's lifetime rather than copied.
#[derive(Default)]
pub struct Tape<'p> {
    nodes: Vec<Node<'p>>,
}

const LN_EPS: f64 = 1e-5;

fn softplus(x: f64) -> f64 {
    if x > 30.0 {
        x
    } else if x < -30.0 {
        x.exp()
    } else {
        x.exp().ln_1p()
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

impl<'p> Tape<'p> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, value: Matrix, op: Op) -> Var {
        self.nodes.push(Node {
            value: Value::Owned(value),
            op,
        });
        Var(self.nodes.len() - 1)
    }

    fn push_shared(&mut self, value: &'p Matrix, op: Op) -> Var {
        self.nodes.push(Node {
            value: Value::Shared(value),
            op,
        });
        Var(self.nodes.len() - 1)
    }

    pub fn value(&self, v: Var) -> &Matrix {
        match &self.nodes[v.0].value {
            Value::Owned(m) => m,
            Value::Shared(m) => m,
        }
    }

    pub fn scalar(&self, v: Var) -> f64 {
        let m = self.value(v);
        debug_assert_eq!(m.data.len(), 1);
        m.data[0]
    }

    pub fn input(&mut self, value: Matrix) -> Var {
        self.push(value, Op::Input)
    }

    /// Constant input borrowed for the tape's lifetime.
    pub fn constant(&mut self, value: &'p Matrix) -> Var {
        self.push_shared(value, Op::Input)
    }

    pub fn param(&mut self, store: u64, id: usize, value: &'p Matrix) -> Var {
        self.push_shared(value, Op::Param { store, id })
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Var {
        let v = self.value(a).matmul(self.value(b));
        self.push(v, Op::MatMul(a, b))
    }

    /// `a · bᵀ`.
    pub fn matmul_t(&mut self, a: Var, b: Var) -> Var {
        let v = self.value(a).matmul_t(self.value(b));
        self.push(v, Op::MatMulT(a, b))
    }

    /// Adds row vector `b` to every row of `a`.
    pub fn add_row(&mut self, a: Var, b: Var) -> Var {
        let (am, bm) = (self.value(a), self.value(b));
        assert!(bm.rows == 1 && bm.cols == am.cols, "add_row shape");
        let mut v = am.clone();
        for r in 0..v.rows {
            for (x, y) in v.data[r * v.cols..(r + 1) * v.cols].iter_mut().zip(&bm.data) {
                *x += y;
            }
        }
        self.push(v, Op::AddRow(a, b))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Var {
        let v = self.value(a).zip(self.value(b), |x, y| x + y);
        self.push(v, Op::Add(a, b))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Var {
        let v = self.value(a).zip(self.value(b), |x, y| x - y);
        self.push(v, Op::Sub(a, b))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Var {
        let v = self.value(a).zip(self.value(b), |x, y| x * y);
        self.push(v, Op::Mul(a, b))
    }

    /// Elementwise minimum; ties send the gradient to `a`.
    pub fn min(&mut self, a: Var, b: Var) -> Var {
        let v = self.value(a).zip(self.value(b), f64::min);
        self.push(v, Op::Min(a, b))
    }

    pub fn scale(&mut self, a: Var, k: f64) -> Var {
        let v = self.value(a).map(|x| x * k);
        self.push(v, Op::Scale(a, k))
    }

    /// Adds a constant matrix of the same shape.
    pub fn add_const(&mut self, a: Var, c: &Matrix) -> Var {
        let v = self.value(a).zip(c, |x, y| x + y);
        self.push(v, Op::AddConst(a))
    }

    pub fn add_scalar(&mut self, a: Var, c: f64) -> Var {
        let v = self.value(a).map(|x| x + c);
        self.push(v, Op::AddConst(a))
    }

    pub fn relu(&mut self, a: Var) -> Var {
        let v = self.value(a).map(|x| x.max(0.0));
        self.push(v, Op::Relu(a))
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        let v = self.value(a).map(f64::tanh);
        self.push(v, Op::Tanh(a))
    }

    pub fn exp(&mut self, a: Var) -> Var {
        let v = self.value(a).map(f64::exp);
        self.push(v, Op::Exp(a))
    }

    pub fn softplus(&mut self, a: Var) -> Var {
        let v = self.value(a).map(softplus);
        self.push(v, Op::Softplus(a))
    }

    pub fn square(&mut self, a: Var) -> Var {
        let v = self.value(a).map(|x| x * x);
        self.push(v, Op::Square(a))
    }

    pub fn softmax_rows(&mut self, a: Var) -> Var {
        let mut v = self.value(a).clone();
        for r in 0..v.rows {
            let row = &mut v.data[r * v.cols..(r + 1) * v.cols];
            let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mut sum = 0.0;
            for x in row.iter_mut() {
                *x = (*x - max).exp();
                sum += *x;
            }
            for x in row.iter_mut() {
                *x /= sum;
            }
        }
        self.push(v, Op::SoftmaxRows(a))
    }

    /// Row-wise layer normalization with learned `gain` and `bias` row vectors.
    pub fn layer_norm(&mut self, x: Var, gain: Var, bias: Var) -> Var {
        let xm = self.value(x);
        let (g, b) = (self.value(gain), self.value(bias));
        let (rows, cols) = (xm.rows, xm.cols);
        let mut xhat = Matrix::zeros(rows, cols);
        let mut out = Matrix::zeros(rows, cols);
        let mut inv_std = Vec::with_capacity(rows);
        for r in 0..rows {
            let row = xm.row(r);
            let mean = row.iter().sum::<f64>() / cols as f64;
            let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / cols as f64;
            let is = 1.0 / (var + LN_EPS).sqrt();
            inv_std.push(is);
            for c in 0..cols {
                let h = (row[c] - mean) * is;
                xhat.data[r * cols + c] = h;
                out.data[r * cols + c] = h * g.data[c] + b.data[c];
            }
        }
        self.push(
            out,
            Op::LayerNorm {
                x,
                gain,
                bias,
                xhat,
                inv_std,
            },
        )
    }

    pub fn slice_cols(&mut self, a: Var, start: usize, len: usize) -> Var {
        let m = self.value(a);
        assert!(start + len <= m.cols, "slice_cols range");
        let mut v = Matrix::zeros(m.rows, len);
        for r in 0..m.rows {
            v.data[r * len..(r + 1) * len].copy_from_slice(&m.row(r)[start..start + len]);
        }
        self.push(v, Op::SliceCols(a, start))
    }

    pub fn concat_cols(&mut self, parts: &[Var]) -> Var {
        let rows = self.value(parts[0]).rows;
        let cols: usize = parts.iter().map(|p| self.value(*p).cols).sum();
        let mut v = Matrix::zeros(rows, cols);
        let mut offset = 0;
        for p in parts {
            let m = self.value(*p);
            assert_eq!(m.rows, rows, "concat_cols rows");
            for r in 0..rows {
                v.data[r * cols + offset..r * cols + offset + m.cols].copy_from_slice(m.row(r));
            }
            offset += m.cols;
        }
        self.push(v, Op::ConcatCols(parts.to_vec()))
    }

    /// Gathers the listed rows (repeats allowed).
    pub fn rows(&mut self, a: Var, index: &[usize]) -> Var {
        let m = self.value(a);
        let mut data = Vec::with_capacity(index.len() * m.cols);
        for &r in index {
            data.extend_from_slice(m.row(r));
        }
        let v = Matrix::from_vec(index.len(), m.cols, data);
        self.push(v, Op::Rows(a, index.to_vec()))
    }

    pub fn concat_rows(&mut self, parts: &[Var]) -> Var {
        let cols = self.value(parts[0]).cols;
        let mut data = Vec::new();
        let mut rows = 0;
        for p in parts {
            let m = self.value(*p);
            assert_eq!(m.cols, cols, "concat_rows cols");
            data.extend_from_slice(&m.data);
            rows += m.rows;
        }
        self.push(Matrix::from_vec(rows, cols, data), Op::ConcatRows(parts.to_vec()))
    }

    pub fn sum(&mut self, a: Var) -> Var {
        let v = Matrix::scalar(self.value(a).data.iter().sum());
        self.push(v, Op::Sum(a))
    }

    pub fn mean(&mut self, a: Var) -> Var {
        let n = self.value(a).data.len() as f64;
        let s = self.sum(a);
        self.scale(s, 1.0 / n)
    }

    /// Gradients of scalar `loss` with respect to every recorded node.
    pub fn backward(&self, loss: Var) -> Gradients {
        let mut grads: Vec<Option<Matrix>> = vec![None; self.nodes.len()];
        grads[loss.0] = Some(Matrix::from_vec(1, 1, vec![1.0]));
        let accumulate = |grads: &mut Vec<Option<Matrix>>, v: Var, g: Matrix| match &mut grads[v.0] {
            Some(existing) => existing.add_assign(&g),
            slot @ None => *slot = Some(g),
        };
        for i in (0..=loss.0).rev() {
            let Some(g) = grads[i].take() else {
                continue;
            };
            let node = &self.nodes[i];
            match &node.op {
                Op::Input | Op::Param { .. } => {}
                Op::MatMul(a, b) => {
                    let ga = g.matmul_t(self.value(*b));
                    let gb = self.value(*a).t_matmul(&g);
                    accumulate(&mut grads, *a, ga);
                    accumulate(&mut grads, *b, gb);
                }
                Op::MatMulT(a, b) => {
                    let ga = g.matmul(self.value(*b));
                    let gb = g.t_matmul(self.value(*a));
                    accumulate(&mut grads, *a, ga);
                    accumulate(&mut grads, *b, gb);
                }
                Op::AddRow(a, b) => {
                    let mut gb = Matrix::zeros(1, g.cols);
                    for r in 0..g.rows {
                        for (x, y) in gb.data.iter_mut().zip(g.row(r)) {
                            *x += y;
                        }
                    }
                    accumulate(&mut grads, *b, gb);
                    accumulate(&mut grads, *a, g.clone());
                }
                Op::Add(a, b) => {
                    accumulate(&mut grads, *b, g.clone());
                    accumulate(&mut grads, *a, g.clone());
                }
                Op::Sub(a, b) => {
                    accumulate(&mut grads, *b, g.map(|x| -x));
                    accumulate(&mut grads, *a, g.clone());
                }
                Op::Mul(a, b) => {
                    let ga = g.zip(self.value(*b), |x, y| x * y);
                    let gb = g.zip(self.value(*a), |x, y| x * y);
                    accumulate(&mut grads, *a, ga);
                    accumulate(&mut grads, *b, gb);
                }
                Op::Min(a, b) => {
                    let (av, bv) = (self.value(*a), self.value(*b));
                    let mut ga = Matrix::zeros(g.rows, g.cols);
                    let mut gb = Matrix::zeros(g.rows, g.cols);
                    for k in 0..g.data.len() {
                        if av.data[k] <= bv.data[k] {
                            ga.data[k] = g.data[k];
                        } else {
                            gb.data[k] = g.data[k];
                        }
                    }
                    accumulate(&mut grads, *a, ga);
                    accumulate(&mut grads, *b, gb);
                }
                Op::Scale(a, k) => accumulate(&mut grads, *a, g.map(|x| x * k)),
                Op::AddConst(a) => accumulate(&mut grads, *a, g.clone()),
                Op::Relu(a) => {
                    let ga = g.zip(self.value(*a), |x, y| if y > 0.0 { x } else { 0.0 });
                    accumulate(&mut grads, *a, ga);
                }
                Op::Tanh(a) => {
                    let ga = g.zip(self.value(Var(i)), |x, y| x * (1.0 - y * y));
                    accumulate(&mut grads, *a, ga);
                }
                Op::Exp(a) => accumulate(&mut grads, *a, g.zip(self.value(Var(i)), |x, y| x * y)),
                Op::Softplus(a) => {
                    let ga = g.zip(self.value(*a), |x, y| x * sigmoid(y));
                    accumulate(&mut grads, *a, ga);
                }
                Op::Square(a) => {
                    let ga = g.zip(self.value(*a), |x, y| 2.0 * x * y);
                    accumulate(&mut grads, *a, ga);
                }
                Op::SoftmaxRows(a) => {
                    let y = self.value(Var(i));
                    let mut ga = Matrix::zeros(g.rows, g.cols);
                    for r in 0..g.rows {
                        let (gr, yr) = (g.row(r), y.row(r));
                        let dot: f64 = gr.iter().zip(yr).map(|(a, b)| a * b).sum();
                        for c in 0..g.cols {
                            ga.data[r * g.cols + c] = yr[c] * (gr[c] - dot);
                        }
                    }
                    accumulate(&mut grads, *a, ga);
                }
                Op::LayerNorm {
                    x,
                    gain,
                    bias,
                    xhat,
                    inv_std,
                } => {
                    let gv = self.value(*gain);
                    let (rows, cols) = (g.rows, g.cols);
                    let mut gx = Matrix::zeros(rows, cols);
                    let mut gg = Matrix::zeros(1, cols);
                    let mut gbias = Matrix::zeros(1, cols);
                    for r in 0..rows {
                        let (gr, hr) = (g.row(r), xhat.row(r));
                        let mut mean_d = 0.0;
                        let mut mean_dh = 0.0;
                        for c in 0..cols {
                            let d = gr[c] * gv.data[c];
                            mean_d += d;
                            mean_dh += d * hr[c];
                            gg.data[c] += gr[c] * hr[c];
                            gbias.data[c] += gr[c];
                        }
                        mean_d /= cols as f64;
                        mean_dh /= cols as f64;
                        for c in 0..cols {
                            let d = gr[c] * gv.data[c];
                            gx.data[r * cols + c] = inv_std[r] * (d - mean_d - hr[c] * mean_dh);
                        }
                    }
                    accumulate(&mut grads, *x, gx);
                    accumulate(&mut grads, *gain, gg);
                    accumulate(&mut grads, *bias, gbias);
                }
                Op::SliceCols(a, start) => {
                    let am = self.value(*a);
                    let mut ga = Matrix::zeros(am.rows, am.cols);
                    for r in 0..g.rows {
                        ga.data[r * am.cols + start..r * am.cols + start + g.cols].copy_from_slice(g.row(r));
                    }
                    accumulate(&mut grads, *a, ga);
                }
                Op::ConcatCols(parts) => {
                    let mut offset = 0;
                    for p in parts {
                        let cols = self.value(*p).cols;
                        let mut gp = Matrix::zeros(g.rows, cols);
                        for r in 0..g.rows {
                            gp.data[r * cols..(r + 1) * cols]
                                .copy_from_slice(&g.row(r)[offset..offset + cols]);
                        }
                        offset += cols;
                        accumulate(&mut grads, *p, gp);
                    }
                }
                Op::Rows(a, index) => {
                    let am = self.value(*a);
                    let mut ga = Matrix::zeros(am.rows, am.cols);
                    for (k, &r) in index.iter().enumerate() {
                        for (x, y) in ga.data[r * am.cols..(r + 1) * am.cols].iter_mut().zip(g.row(k)) {
                            *x += y;
                        }
                    }
                    accumulate(&mut grads, *a, ga);
                }
                Op::ConcatRows(parts) => {
                    let mut offset = 0;
                    for p in parts {
                        let m = self.value(*p);
                        let len = m.data.len();
                        let gp = Matrix::from_vec(m.rows, m.cols, g.data[offset..offset + len].to_vec());
                        offset += len;
                        accumulate(&mut grads, *p, gp);
                    }
                }
                Op::Sum(a) => {
                    let am = self.value(*a);
                    accumulate(&mut grads, *a, Matrix::from_vec(am.rows, am.cols, vec![g.data[0]; am.data.len()]));
                }
            }
            grads[i] = Some(g);
        }
        Gradients {
            grads,
            params: self
                .nodes
                .iter()
                .enumerate()
                .filter_map(|(i, n)| match n.op {
                    Op::Param { store, id } => Some((i, store, id)),
                    _ => None,
                })
                .collect(),
        }
    }
}

/// Result of [`Tape::backward`].
pub struct Gradients {
    grads: Vec<Option<Matrix>>,
    params: Vec<(usize, u64, usize)>,
}

impl Gradients {
    pub fn of(&self, v: Var) -> Option<&Matrix> {
        self.grads[v.0].as_ref()
    }

    /// Adds the gradients of every parameter leaf of `store` into `out` (indexed by parameter id).
    pub fn accumulate_params(&self, store: u64, out: &mut [Matrix]) {
        for &(node, s, id) in &self.params {
            if s == store {
                if let Some(g) = &self.grads[node] {
                    out[id].add_assign(g);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
        Matrix::from_vec(rows, cols, (0..rows * cols).map(|_| rng.random_range(-1.0..1.0)).collect())
    }

    /// Checks d(loss)/d(input) for every element of every input against central differences.
    fn check(inputs: Vec<Matrix>, f: impl Fn(&mut Tape, &[Var]) -> Var) {
        let mut tape = Tape::new();
        let vars: Vec<Var> = inputs.iter().map(|m| tape.input(m.clone())).collect();
        let loss = f(&mut tape, &vars);
        let grads = tape.backward(loss);
        let eval = |inputs: &[Matrix]| {
            let mut t = Tape::new();
            let vs: Vec<Var> = inputs.iter().map(|m| t.input(m.clone())).collect();
            let l = f(&mut t, &vs);
            t.scalar(l)
        };
        let h = 1e-6;
        for (k, m) in inputs.iter().enumerate() {
            let analytic = grads.of(vars[k]).cloned().unwrap_or_else(|| Matrix::zeros(m.rows, m.cols));
            for e in 0..m.data.len() {
                let mut plus = inputs.clone();
                plus[k].data[e] += h;
                let mut minus = inputs.clone();
                minus[k].data[e] -= h;
                let numeric = (eval(&plus) - eval(&minus)) / (2.0 * h);
                let a = analytic.data[e];
                assert!(
                    (a - numeric).abs() <= 1e-6 * (1.0 + numeric.abs()),
                    "input {k} element {e}: analytic {a} numeric {numeric}"
                );
            }
        }
    }

    #[test]
    fn matrix_products_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random(&mut rng, 3, 4);
        let b = random(&mut rng, 5, 4);
        let bt = Matrix::from_vec(4, 5, (0..20).map(|i| b.get(i % 5, i / 5)).collect());
        assert_eq!(a.matmul_t(&b).data.len(), 15);
        for (x, y) in a.matmul_t(&b).data.iter().zip(&a.matmul(&bt).data) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn gradients_of_linear_algebra_ops() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        check(vec![random(&mut rng, 3, 4), random(&mut rng, 4, 2)], |t, v| {
            let m = t.matmul(v[0], v[1]);
            let s = t.square(m);
            t.sum(s)
        });
        check(vec![random(&mut rng, 3, 4), random(&mut rng, 5, 4)], |t, v| {
            let m = t.matmul_t(v[0], v[1]);
            let s = t.tanh(m);
            t.sum(s)
        });
        check(vec![random(&mut rng, 3, 4), random(&mut rng, 1, 4)], |t, v| {
            let m = t.add_row(v[0], v[1]);
            let s = t.square(m);
            t.mean(s)
        });
    }

    #[test]
    fn gradients_of_elementwise_ops() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        check(vec![random(&mut rng, 2, 3), random(&mut rng, 2, 3)], |t, v| {
            let a = t.mul(v[0], v[1]);
            let b = t.sub(a, v[1]);
            let c = t.add(b, v[0]);
            let d = t.exp(c);
            let e = t.softplus(d);
            let f = t.scale(e, -0.7);
            let g = t.add_scalar(f, 3.0);
            let h = t.relu(g);
            let m = t.min(h, v[0]);
            t.sum(m)
        });
    }

    #[test]
    fn gradients_of_softmax_and_layer_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let bias = random(&mut rng, 3, 5);
        check(vec![random(&mut rng, 3, 5), random(&mut rng, 3, 5)], move |t, v| {
            let a = t.add_const(v[0], &bias);
            let s = t.softmax_rows(a);
            let w = t.mul(s, v[1]);
            t.sum(w)
        });
        check(
            vec![random(&mut rng, 4, 6), random(&mut rng, 1, 6), random(&mut rng, 1, 6), random(&mut rng, 4, 6)],
            |t, v| {
                let n = t.layer_norm(v[0], v[1], v[2]);
                let w = t.mul(n, v[3]);
                t.sum(w)
            },
        );
    }

    #[test]
    fn gradients_of_shape_ops() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        check(vec![random(&mut rng, 3, 6), random(&mut rng, 3, 2), random(&mut rng, 2, 5)], |t, v| {
            let a = t.slice_cols(v[0], 2, 3);
            let b = t.concat_cols(&[a, v[1]]);
            let c = t.rows(b, &[2, 0, 2]);
            let d = t.concat_rows(&[c, v[2], v[2]]);
            let e = t.slice_cols(d, 3, 2);
            let f = t.square(e);
            let g = t.concat_cols(&[f, d]);
            let h = t.tanh(g);
            t.sum(h)
        });
    }
}
