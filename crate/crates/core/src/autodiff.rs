//! Minimal reverse-mode automatic differentiation over dense matrices.
//!
//! A [`Tape`] records every operation as it is evaluated; [`Tape::backward`]
//! sweeps the record in reverse and accumulates adjoints. Non-smooth
//! primitives (ReLU, max, L1) use the subgradient 0 at their kinks, and the
//! tape can optionally fingerprint which side of each kink every entry fell
//! on so that finite-difference probes can detect when they straddle one.

use crate::graph::{num_pairs, pair_list};
use crate::matrix::Matrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

enum Op {
    Leaf,
    MatMul(Var, Var),
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    MulConst(Var, Matrix),
    AddBias(Var, Var),
    Scale(Var, f64),
    AddScalar(Var),
    Relu(Var),
    Abs(Var),
    Sigmoid(Var),
    Tanh(Var),
    Exp(Var),
    Maximum(Var, Var),
    Transpose(Var),
    ConcatCols(Vec<Var>),
    GatherRows(Var, Vec<usize>),
    ScatterAddRows(Var, Vec<usize>),
    Sum(Var),
    RowSum(Var),
    MulColBroadcast(Var, Var),
    LogNormalizeRows(Var),
    LogNormalizeCols(Var),
    PairwiseL1(Var, Var),
    PairwiseReluDiff(Var, Var),
    PairAlignment(Var),
}

struct Node {
    value: Matrix,
    op: Op,
}

#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
    track_kinks: bool,
    kink_hash: u64,
}

#[inline]
fn kink_state(x: f64) -> u64 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        2
    } else {
        3
    }
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    /// A tape that fingerprints kink sides; see [`Tape::kink_signature`].
    pub fn with_kink_tracking() -> Self {
        Tape {
            track_kinks: true,
            ..Self::default()
        }
    }

    /// Hash of the side of every kink visited so far. Two evaluations with
    /// equal signatures took the same smooth branch everywhere.
    pub fn kink_signature(&self) -> u64 {
        self.kink_hash
    }

    #[inline]
    fn note_kinks(&mut self, xs: impl Iterator<Item = f64>) {
        if self.track_kinks {
            let mut h = self.kink_hash;
            for x in xs {
                h = (h.rotate_left(7) ^ kink_state(x)).wrapping_mul(0x9E37_79B9_7F4A_7C15);
            }
            self.kink_hash = h;
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, value: Matrix, op: Op) -> Var {
        self.nodes.push(Node { value, op });
        Var(self.nodes.len() - 1)
    }

    pub fn value(&self, v: Var) -> &Matrix {
        &self.nodes[v.0].value
    }

    pub fn scalar(&self, v: Var) -> f64 {
        let m = self.value(v);
        assert_eq!(m.shape(), (1, 1), "not a scalar");
        m[(0, 0)]
    }

    pub fn leaf(&mut self, value: Matrix) -> Var {
        self.push(value, Op::Leaf)
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Var {
        let v = self.value(a).matmul(self.value(b));
        self.push(v, Op::MatMul(a, b))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Var {
        let v = self.value(a).zip_map(self.value(b), |x, y| x + y);
        self.push(v, Op::Add(a, b))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Var {
        let v = self.value(a).zip_map(self.value(b), |x, y| x - y);
        self.push(v, Op::Sub(a, b))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Var {
        let v = self.value(a).zip_map(self.value(b), |x, y| x * y);
        self.push(v, Op::Mul(a, b))
    }

    /// Elementwise product with a constant (e.g. a gate mask).
    pub fn mul_const(&mut self, a: Var, c: Matrix) -> Var {
        let v = self.value(a).zip_map(&c, |x, y| x * y);
        self.push(v, Op::MulConst(a, c))
    }

    /// Adds a `1 x cols` bias row to every row of `a`.
    pub fn add_bias(&mut self, a: Var, bias: Var) -> Var {
        let b = self.value(bias);
        assert_eq!(b.rows(), 1, "bias must be a single row");
        assert_eq!(b.cols(), self.value(a).cols(), "bias width mismatch");
        let mut v = self.value(a).clone();
        let b = b.row(0).to_vec();
        for i in 0..v.rows() {
            for (x, bj) in v.row_mut(i).iter_mut().zip(&b) {
                *x += bj;
            }
        }
        self.push(v, Op::AddBias(a, bias))
    }

    pub fn scale(&mut self, a: Var, s: f64) -> Var {
        let v = self.value(a).map(|x| x * s);
        self.push(v, Op::Scale(a, s))
    }

    pub fn add_scalar(&mut self, a: Var, s: f64) -> Var {
        let v = self.value(a).map(|x| x + s);
        self.push(v, Op::AddScalar(a))
    }

    pub fn relu(&mut self, a: Var) -> Var {
        let v = self.value(a).map(|x| x.max(0.0));
        if self.track_kinks {
            let xs = self.value(a).data().to_vec();
            self.note_kinks(xs.into_iter());
        }
        self.push(v, Op::Relu(a))
    }

    pub fn abs(&mut self, a: Var) -> Var {
        let v = self.value(a).map(f64::abs);
        if self.track_kinks {
            let xs = self.value(a).data().to_vec();
            self.note_kinks(xs.into_iter());
        }
        self.push(v, Op::Abs(a))
    }

    pub fn sigmoid(&mut self, a: Var) -> Var {
        let v = self.value(a).map(|x| 1.0 / (1.0 + (-x).exp()));
        self.push(v, Op::Sigmoid(a))
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        let v = self.value(a).map(f64::tanh);
        self.push(v, Op::Tanh(a))
    }

    pub fn exp(&mut self, a: Var) -> Var {
        let v = self.value(a).map(f64::exp);
        self.push(v, Op::Exp(a))
    }

    pub fn maximum(&mut self, a: Var, b: Var) -> Var {
        let v = self.value(a).zip_map(self.value(b), f64::max);
        if self.track_kinks {
            let d = self
                .value(a)
                .zip_map(self.value(b), |x, y| x - y)
                .into_vec();
            self.note_kinks(d.into_iter());
        }
        self.push(v, Op::Maximum(a, b))
    }

    pub fn transpose(&mut self, a: Var) -> Var {
        let v = self.value(a).transpose();
        self.push(v, Op::Transpose(a))
    }

    pub fn concat_cols(&mut self, parts: &[Var]) -> Var {
        let rows = self.value(parts[0]).rows();
        let cols: usize = parts.iter().map(|&p| self.value(p).cols()).sum();
        let mut v = Matrix::zeros(rows, cols);
        let mut offset = 0;
        for &p in parts {
            let m = &self.nodes[p.0].value;
            assert_eq!(m.rows(), rows, "concat row mismatch");
            for i in 0..rows {
                v.row_mut(i)[offset..offset + m.cols()].copy_from_slice(m.row(i));
            }
            offset += m.cols();
        }
        self.push(v, Op::ConcatCols(parts.to_vec()))
    }

    pub fn gather_rows(&mut self, a: Var, idx: &[usize]) -> Var {
        let m = self.value(a);
        let mut v = Matrix::zeros(idx.len(), m.cols());
        for (r, &i) in idx.iter().enumerate() {
            v.row_mut(r).copy_from_slice(m.row(i));
        }
        self.push(v, Op::GatherRows(a, idx.to_vec()))
    }

    /// `out[idx[r], :] += a[r, :]` into an `n`-row zero matrix.
    pub fn scatter_add_rows(&mut self, a: Var, idx: &[usize], n: usize) -> Var {
        let m = self.value(a);
        assert_eq!(m.rows(), idx.len(), "scatter index length mismatch");
        let mut v = Matrix::zeros(n, m.cols());
        for (r, &i) in idx.iter().enumerate() {
            for (o, &x) in v.row_mut(i).iter_mut().zip(m.row(r)) {
                *o += x;
            }
        }
        self.push(v, Op::ScatterAddRows(a, idx.to_vec()))
    }

    pub fn sum(&mut self, a: Var) -> Var {
        let s = self.value(a).sum();
        self.push(Matrix::filled(1, 1, s), Op::Sum(a))
    }

    /// Row sums as an `n x 1` column.
    pub fn row_sum(&mut self, a: Var) -> Var {
        let m = self.value(a);
        let v = Matrix::from_vec(m.rows(), 1, m.row_sums());
        self.push(v, Op::RowSum(a))
    }

    /// Scales row `i` of `a` by `w[i, 0]`.
    pub fn mul_col_broadcast(&mut self, a: Var, w: Var) -> Var {
        let (m, wm) = (self.value(a), self.value(w));
        assert_eq!(wm.shape(), (m.rows(), 1), "row weights must be a column");
        let v = Matrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)] * wm[(i, 0)]);
        self.push(v, Op::MulColBroadcast(a, w))
    }

    /// `x - logsumexp(x)` along each row, i.e. log of a row-stochastic matrix.
    pub fn log_normalize_rows(&mut self, a: Var) -> Var {
        let m = self.value(a);
        let mut v = m.clone();
        for i in 0..v.rows() {
            let row = v.row_mut(i);
            let lse = log_sum_exp(row);
            row.iter_mut().for_each(|x| *x -= lse);
        }
        self.push(v, Op::LogNormalizeRows(a))
    }

    /// `x - logsumexp(x)` along each column.
    pub fn log_normalize_cols(&mut self, a: Var) -> Var {
        let m = self.value(a);
        let mut v = m.clone();
        for j in 0..v.cols() {
            let col: Vec<f64> = (0..v.rows()).map(|i| v[(i, j)]).collect();
            let lse = log_sum_exp(&col);
            for i in 0..v.rows() {
                v[(i, j)] -= lse;
            }
        }
        self.push(v, Op::LogNormalizeCols(a))
    }

    /// `out[i, j] = sum_k |a[i, k] - b[j, k]|`.
    pub fn pairwise_l1(&mut self, a: Var, b: Var) -> Var {
        let (am, bm) = (self.value(a), self.value(b));
        assert_eq!(am.cols(), bm.cols(), "pairwise_l1 width mismatch");
        let v = Matrix::from_fn(am.rows(), bm.rows(), |i, j| {
            am.row(i)
                .iter()
                .zip(bm.row(j))
                .map(|(x, y)| (x - y).abs())
                .sum()
        });
        if self.track_kinks {
            let mut diffs = Vec::with_capacity(am.rows() * bm.rows() * am.cols());
            for i in 0..am.rows() {
                for j in 0..bm.rows() {
                    diffs.extend(am.row(i).iter().zip(bm.row(j)).map(|(x, y)| x - y));
                }
            }
            self.note_kinks(diffs.into_iter());
        }
        self.push(v, Op::PairwiseL1(a, b))
    }

    /// `out[i, j] = sum_k relu(a[i, k] - b[j, k])`.
    pub fn pairwise_relu_diff(&mut self, a: Var, b: Var) -> Var {
        let (am, bm) = (self.value(a), self.value(b));
        assert_eq!(am.cols(), bm.cols(), "pairwise_relu_diff width mismatch");
        let v = Matrix::from_fn(am.rows(), bm.rows(), |i, j| {
            am.row(i)
                .iter()
                .zip(bm.row(j))
                .map(|(x, y)| (x - y).max(0.0))
                .sum()
        });
        if self.track_kinks {
            let mut diffs = Vec::with_capacity(am.rows() * bm.rows() * am.cols());
            for i in 0..am.rows() {
                for j in 0..bm.rows() {
                    diffs.extend(am.row(i).iter().zip(bm.row(j)).map(|(x, y)| x - y));
                }
            }
            self.note_kinks(diffs.into_iter());
        }
        self.push(v, Op::PairwiseReluDiff(a, b))
    }

    /// Node-pair alignment `S` derived from a node alignment `P`.
    pub fn pair_alignment(&mut self, p: Var) -> Var {
        let v = pair_alignment_matrix(self.value(p));
        self.push(v, Op::PairAlignment(p))
    }

    /// Reverse sweep from the scalar `output`.
    pub fn backward(&self, output: Var) -> Gradients {
        assert_eq!(
            self.value(output).shape(),
            (1, 1),
            "backward needs a scalar output"
        );
        let mut grads: Vec<Option<Matrix>> = vec![None; output.0 + 1];
        grads[output.0] = Some(Matrix::filled(1, 1, 1.0));

        fn acc(grads: &mut [Option<Matrix>], v: Var, g: Matrix) {
            match &mut grads[v.0] {
                Some(existing) => existing.add_assign(&g),
                slot @ None => *slot = Some(g),
            }
        }

        for idx in (0..=output.0).rev() {
            let Some(g) = grads[idx].take() else { continue };
            let node = &self.nodes[idx];
            let out = &node.value;
            match &node.op {
                Op::Leaf => {
                    grads[idx] = Some(g);
                    continue;
                }
                Op::MatMul(a, b) => {
                    let ga = g.matmul(&self.value(*b).transpose());
                    let gb = self.value(*a).transpose().matmul(&g);
                    acc(&mut grads, *a, ga);
                    acc(&mut grads, *b, gb);
                }
                Op::Add(a, b) => {
                    acc(&mut grads, *a, g.clone());
                    acc(&mut grads, *b, g);
                }
                Op::Sub(a, b) => {
                    acc(&mut grads, *b, g.map(|x| -x));
                    acc(&mut grads, *a, g);
                }
                Op::Mul(a, b) => {
                    let ga = g.zip_map(self.value(*b), |x, y| x * y);
                    let gb = g.zip_map(self.value(*a), |x, y| x * y);
                    acc(&mut grads, *a, ga);
                    acc(&mut grads, *b, gb);
                }
                Op::MulConst(a, c) => acc(&mut grads, *a, g.zip_map(c, |x, y| x * y)),
                Op::AddBias(a, bias) => {
                    let gb = Matrix::from_vec(1, g.cols(), g.col_sums());
                    acc(&mut grads, *bias, gb);
                    acc(&mut grads, *a, g);
                }
                Op::Scale(a, s) => acc(&mut grads, *a, g.map(|x| x * s)),
                Op::AddScalar(a) => acc(&mut grads, *a, g),
                Op::Relu(a) => {
                    let ga = g.zip_map(self.value(*a), |x, y| if y > 0.0 { x } else { 0.0 });
                    acc(&mut grads, *a, ga);
                }
                Op::Abs(a) => {
                    let ga = g.zip_map(self.value(*a), |x, y| {
                        if y > 0.0 {
                            x
                        } else if y < 0.0 {
                            -x
                        } else {
                            0.0
                        }
                    });
                    acc(&mut grads, *a, ga);
                }
                Op::Sigmoid(a) => acc(&mut grads, *a, g.zip_map(out, |x, s| x * s * (1.0 - s))),
                Op::Tanh(a) => acc(&mut grads, *a, g.zip_map(out, |x, t| x * (1.0 - t * t))),
                Op::Exp(a) => acc(&mut grads, *a, g.zip_map(out, |x, e| x * e)),
                Op::Maximum(a, b) => {
                    let (av, bv) = (self.value(*a), self.value(*b));
                    let mut ga = Matrix::zeros(g.rows(), g.cols());
                    let mut gb = Matrix::zeros(g.rows(), g.cols());
                    for k in 0..g.len() {
                        let (x, y) = (av.data()[k], bv.data()[k]);
                        if x > y {
                            ga.data_mut()[k] = g.data()[k];
                        } else if y > x {
                            gb.data_mut()[k] = g.data()[k];
                        }
                    }
                    acc(&mut grads, *a, ga);
                    acc(&mut grads, *b, gb);
                }
                Op::Transpose(a) => acc(&mut grads, *a, g.transpose()),
                Op::ConcatCols(parts) => {
                    let mut offset = 0;
                    for &p in parts {
                        let w = self.value(p).cols();
                        let gp = Matrix::from_fn(g.rows(), w, |i, j| g[(i, offset + j)]);
                        acc(&mut grads, p, gp);
                        offset += w;
                    }
                }
                Op::GatherRows(a, idx) => {
                    let src = self.value(*a);
                    let mut ga = Matrix::zeros(src.rows(), src.cols());
                    for (r, &i) in idx.iter().enumerate() {
                        for (o, &x) in ga.row_mut(i).iter_mut().zip(g.row(r)) {
                            *o += x;
                        }
                    }
                    acc(&mut grads, *a, ga);
                }
                Op::ScatterAddRows(a, idx) => {
                    let mut ga = Matrix::zeros(idx.len(), g.cols());
                    for (r, &i) in idx.iter().enumerate() {
                        ga.row_mut(r).copy_from_slice(g.row(i));
                    }
                    acc(&mut grads, *a, ga);
                }
                Op::Sum(a) => {
                    let (r, c) = self.value(*a).shape();
                    acc(&mut grads, *a, Matrix::filled(r, c, g[(0, 0)]));
                }
                Op::RowSum(a) => {
                    let (r, c) = self.value(*a).shape();
                    acc(&mut grads, *a, Matrix::from_fn(r, c, |i, _| g[(i, 0)]));
                }
                Op::MulColBroadcast(a, w) => {
                    let (av, wv) = (self.value(*a), self.value(*w));
                    let ga = Matrix::from_fn(av.rows(), av.cols(), |i, j| g[(i, j)] * wv[(i, 0)]);
                    let gw = Matrix::from_fn(av.rows(), 1, |i, _| {
                        g.row(i).iter().zip(av.row(i)).map(|(x, y)| x * y).sum()
                    });
                    acc(&mut grads, *a, ga);
                    acc(&mut grads, *w, gw);
                }
                Op::LogNormalizeRows(a) => {
                    let mut ga = g.clone();
                    for i in 0..ga.rows() {
                        let gs: f64 = g.row(i).iter().sum();
                        for (j, x) in ga.row_mut(i).iter_mut().enumerate() {
                            *x -= out[(i, j)].exp() * gs;
                        }
                    }
                    acc(&mut grads, *a, ga);
                }
                Op::LogNormalizeCols(a) => {
                    let mut ga = g.clone();
                    let gs = g.col_sums();
                    for i in 0..ga.rows() {
                        for (j, x) in ga.row_mut(i).iter_mut().enumerate() {
                            *x -= out[(i, j)].exp() * gs[j];
                        }
                    }
                    acc(&mut grads, *a, ga);
                }
                Op::PairwiseL1(a, b) | Op::PairwiseReluDiff(a, b) => {
                    let is_l1 = matches!(node.op, Op::PairwiseL1(..));
                    let (am, bm) = (self.value(*a), self.value(*b));
                    let mut ga = Matrix::zeros(am.rows(), am.cols());
                    let mut gb = Matrix::zeros(bm.rows(), bm.cols());
                    for i in 0..am.rows() {
                        for j in 0..bm.rows() {
                            let gij = g[(i, j)];
                            if gij == 0.0 {
                                continue;
                            }
                            for k in 0..am.cols() {
                                let d = am[(i, k)] - bm[(j, k)];
                                let s = if d > 0.0 {
                                    1.0
                                } else if d < 0.0 && is_l1 {
                                    -1.0
                                } else {
                                    0.0
                                };
                                if s != 0.0 {
                                    ga[(i, k)] += gij * s;
                                    gb[(j, k)] -= gij * s;
                                }
                            }
                        }
                    }
                    acc(&mut grads, *a, ga);
                    acc(&mut grads, *b, gb);
                }
                Op::PairAlignment(p) => {
                    let pm = self.value(*p);
                    let n = pm.rows();
                    let pairs = pair_list(n);
                    let mut gp = Matrix::zeros(n, n);
                    for (e, &(u, v)) in pairs.iter().enumerate() {
                        for (f, &(s, t)) in pairs.iter().enumerate() {
                            let gef = g[(e, f)];
                            if gef == 0.0 {
                                continue;
                            }
                            gp[(u, s)] += gef * pm[(v, t)];
                            gp[(v, t)] += gef * pm[(u, s)];
                            gp[(u, t)] += gef * pm[(v, s)];
                            gp[(v, s)] += gef * pm[(u, t)];
                        }
                    }
                    acc(&mut grads, *p, gp);
                }
            }
        }
        Gradients { grads }
    }
}

/// Adjoints produced by [`Tape::backward`].
pub struct Gradients {
    grads: Vec<Option<Matrix>>,
}

impl Gradients {
    /// Gradient of a leaf; `None` when the output does not depend on it.
    pub fn get(&self, v: Var) -> Option<&Matrix> {
        self.grads.get(v.0).and_then(Option::as_ref)
    }

    /// Gradient of a leaf, zeros when unused.
    pub fn get_or_zeros(&self, v: Var, shape: (usize, usize)) -> Matrix {
        self.get(v)
            .cloned()
            .unwrap_or_else(|| Matrix::zeros(shape.0, shape.1))
    }
}

pub(crate) fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// `S[(u,v),(u',v')] = P[u,u']P[v,v'] + P[u,v']P[v,u']` with pair rows and
/// columns in canonical pair order.
pub fn pair_alignment_matrix(p: &Matrix) -> Matrix {
    let n = p.rows();
    let pairs = pair_list(n);
    let m = num_pairs(n);
    let mut s = Matrix::zeros(m, m);
    for (e, &(u, v)) in pairs.iter().enumerate() {
        let row = s.row_mut(e);
        for (f, &(a, b)) in pairs.iter().enumerate() {
            row[f] = p[(u, a)] * p[(v, b)] + p[(u, b)] * p[(v, a)];
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn numeric_grad(f: impl Fn(&Matrix) -> f64, x: &Matrix) -> Matrix {
        let h = 1e-6;
        Matrix::from_fn(x.rows(), x.cols(), |i, j| {
            let mut xp = x.clone();
            xp[(i, j)] += h;
            let mut xm = x.clone();
            xm[(i, j)] -= h;
            (f(&xp) - f(&xm)) / (2.0 * h)
        })
    }

    fn check(build: impl Fn(&mut Tape, Var) -> Var, x: Matrix) {
        let mut t = Tape::new();
        let xv = t.leaf(x.clone());
        let y = build(&mut t, xv);
        let g = t.backward(y).get_or_zeros(xv, x.shape());
        let num = numeric_grad(
            |m| {
                let mut t = Tape::new();
                let v = t.leaf(m.clone());
                let y = build(&mut t, v);
                t.scalar(y)
            },
            &x,
        );
        assert!(
            g.max_abs_diff(&num) < 1e-6,
            "analytic {g:?} numeric {num:?}"
        );
    }

    fn sample(r: usize, c: usize) -> Matrix {
        Matrix::from_fn(r, c, |i, j| {
            ((i * 7 + j * 3) as f64 * 0.37).sin() + 0.1 * j as f64
        })
    }

    #[test]
    fn elementwise_ops() {
        check(
            |t, x| {
                let y = t.sigmoid(x);
                t.sum(y)
            },
            sample(3, 2),
        );
        check(
            |t, x| {
                let y = t.tanh(x);
                let z = t.mul(y, x);
                t.sum(z)
            },
            sample(3, 2),
        );
        check(
            |t, x| {
                let y = t.exp(x);
                let z = t.scale(y, 0.5);
                t.sum(z)
            },
            sample(2, 2),
        );
        check(
            |t, x| {
                let y = t.abs(x);
                t.sum(y)
            },
            sample(3, 3).map(|v| v - 0.05),
        );
        check(
            |t, x| {
                let y = t.relu(x);
                t.sum(y)
            },
            sample(3, 3).map(|v| v + 0.05),
        );
    }

    #[test]
    fn structural_ops() {
        check(
            |t, x| {
                let xt = t.transpose(x);
                let m = t.matmul(x, xt);
                let c = t.concat_cols(&[m, x]);
                let g = t.gather_rows(c, &[2, 0, 2]);
                let s = t.scatter_add_rows(g, &[1, 1, 0], 2);
                let r = t.row_sum(s);
                let w = t.mul_col_broadcast(s, r);
                t.sum(w)
            },
            sample(3, 2),
        );
    }

    #[test]
    fn normalisations() {
        check(
            |t, x| {
                let a = t.log_normalize_rows(x);
                let b = t.log_normalize_cols(a);
                let e = t.exp(b);
                let w = t.leaf(sample(3, 3));
                let p = t.mul(e, w);
                t.sum(p)
            },
            sample(3, 3),
        );
    }

    #[test]
    fn pairwise_kernels() {
        let other = sample(4, 3).map(|x| x * 0.3 + 0.05);
        check(
            move |t, x| {
                let b = t.leaf(other.clone());
                let m = t.pairwise_l1(x, b);
                let n = t.pairwise_relu_diff(b, x);
                let nt = t.transpose(n);
                let s = t.add(m, nt);
                t.sum(s)
            },
            sample(4, 3),
        );
    }

    #[test]
    fn pair_alignment_gradient() {
        check(
            |t, x| {
                let s = t.pair_alignment(x);
                let w = t.leaf(sample(6, 6));
                let p = t.mul(s, w);
                t.sum(p)
            },
            sample(4, 4),
        );
    }

    #[test]
    fn bias_and_maximum() {
        check(
            |t, x| {
                let b = t.leaf(Matrix::from_rows(&[vec![0.3, -0.2]]));
                let y = t.add_bias(x, b);
                let z = t.leaf(sample(3, 2).map(|v| v * 0.5 + 0.11));
                let m = t.maximum(y, z);
                let q = t.add_scalar(m, 2.0);
                let q = t.mul_const(q, Matrix::filled(3, 2, 1.5));
                t.sum(q)
            },
            sample(3, 2),
        );
    }

    #[test]
    fn kink_signature_changes_across_kink() {
        let eval = |x: f64| {
            let mut t = Tape::with_kink_tracking();
            let v = t.leaf(Matrix::filled(1, 1, x));
            let r = t.relu(v);
            t.sum(r);
            t.kink_signature()
        };
        assert_eq!(eval(0.5), eval(0.7));
        assert_ne!(eval(0.5), eval(-0.5));
    }
}
