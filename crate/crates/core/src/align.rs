//! Soft node alignments from Sinkhorn normalisation, the derived node-pair
//! alignment, and rounding to hard permutations.

use rand::Rng;

use crate::assignment::max_weight_assignment_lex;
use crate::autodiff::{log_sum_exp, pair_alignment_matrix, Tape, Var};
use crate::encoder::Mlp;
use crate::error::{GedError, Result};
use crate::exact::HardPermutation;
use crate::matrix::Matrix;

/// Temperature and iteration count of the Sinkhorn normalisation.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SinkhornConfig {
    pub tau: f64,
    pub iters: usize,
}

impl Default for SinkhornConfig {
    fn default() -> Self {
        SinkhornConfig {
            tau: 0.01,
            iters: 20,
        }
    }
}

/// A (near) doubly-stochastic node alignment.
#[derive(Clone, Debug, PartialEq)]
pub struct SoftAlignment {
    pub p: Matrix,
    pub tau: f64,
    pub iters: usize,
}

impl SoftAlignment {
    /// Largest deviation of any row or column sum from 1.
    pub fn marginal_error(&self) -> f64 {
        marginal_error(&self.p)
    }
}

pub fn marginal_error(p: &Matrix) -> f64 {
    p.row_sums()
        .into_iter()
        .chain(p.col_sums())
        .map(|s| (s - 1.0).abs())
        .fold(0.0, f64::max)
}

fn check_sinkhorn_args(c: &Matrix, tau: f64, iters: usize) -> Result<()> {
    if !c.is_finite() {
        return Err(GedError::NonFinite("sinkhorn cost matrix".into()));
    }
    if tau.is_nan() || tau <= 0.0 || iters == 0 {
        return Err(GedError::Shape(format!(
            "sinkhorn needs tau > 0 and iters >= 1, got {tau}, {iters}"
        )));
    }
    if c.rows() != c.cols() {
        return Err(GedError::Shape(format!(
            "sinkhorn cost is {}x{}",
            c.rows(),
            c.cols()
        )));
    }
    Ok(())
}

/// `T` rounds of row then column normalisation of `exp(-C / tau)`, carried
/// out on logarithms.
pub fn sinkhorn(c: &Matrix, tau: f64, iters: usize) -> Result<SoftAlignment> {
    check_sinkhorn_args(c, tau, iters)?;
    let mut log_p = c.map(|x| -x / tau);
    sinkhorn_log_in_place(&mut log_p, iters);
    Ok(SoftAlignment {
        p: log_p.map(f64::exp),
        tau,
        iters,
    })
}

/// As [`sinkhorn`], with Gumbel noise of the given scale added to the
/// log-kernel before normalising.
pub fn sinkhorn_with_gumbel<R: Rng + ?Sized>(
    c: &Matrix,
    tau: f64,
    iters: usize,
    noise_scale: f64,
    rng: &mut R,
) -> Result<SoftAlignment> {
    check_sinkhorn_args(c, tau, iters)?;
    let mut log_p = c.map(|x| -x / tau);
    for x in log_p.data_mut() {
        let u: f64 = rng.gen_range(f64::EPSILON..1.0);
        *x += noise_scale * -(-u.ln()).ln() / tau;
    }
    sinkhorn_log_in_place(&mut log_p, iters);
    Ok(SoftAlignment {
        p: log_p.map(f64::exp),
        tau,
        iters,
    })
}

fn sinkhorn_log_in_place(log_p: &mut Matrix, iters: usize) {
    let n = log_p.rows();
    for _ in 0..iters {
        for i in 0..n {
            let row = log_p.row_mut(i);
            let lse = log_sum_exp(row);
            row.iter_mut().for_each(|x| *x -= lse);
        }
        for j in 0..n {
            let col: Vec<f64> = (0..n).map(|i| log_p[(i, j)]).collect();
            let lse = log_sum_exp(&col);
            for i in 0..n {
                log_p[(i, j)] -= lse;
            }
        }
    }
}

/// Direct (non-logarithmic) Sinkhorn; underflows for small `tau`.
pub fn sinkhorn_exp_space(c: &Matrix, tau: f64, iters: usize) -> Result<Matrix> {
    check_sinkhorn_args(c, tau, iters)?;
    let mut p = c.map(|x| (-x / tau).exp());
    let n = p.rows();
    for _ in 0..iters {
        for i in 0..n {
            let s: f64 = p.row(i).iter().sum();
            p.row_mut(i).iter_mut().for_each(|x| *x /= s);
        }
        let cs = p.col_sums();
        for i in 0..n {
            for (x, s) in p.row_mut(i).iter_mut().zip(&cs) {
                *x /= s;
            }
        }
    }
    Ok(p)
}

/// Differentiable Sinkhorn on a tape: returns `P` for cost `C`.
pub fn sinkhorn_on_tape(tape: &mut Tape, cost: Var, config: SinkhornConfig) -> Var {
    let mut log_p = tape.scale(cost, -1.0 / config.tau);
    for _ in 0..config.iters {
        log_p = tape.log_normalize_rows(log_p);
        log_p = tape.log_normalize_cols(log_p);
    }
    tape.exp(log_p)
}

/// `C[u, u'] = |c(x[u]) - c(x'[u'])|_1` on a tape.
pub fn node_cost_on_tape(tape: &mut Tape, x: Var, x_prime: Var, net: &Mlp<Var>) -> Var {
    let z = net.forward(tape, x);
    let z_prime = net.forward(tape, x_prime);
    tape.pairwise_l1(z, z_prime)
}

/// Node alignment cost matrix from two embedding matrices.
pub fn build_node_cost(x: &Matrix, x_prime: &Matrix, net: &Mlp<Matrix>) -> Result<Matrix> {
    if x.cols() != net.input_dim() || x_prime.cols() != net.input_dim() {
        return Err(GedError::Shape(format!(
            "embeddings have widths {} and {}, cost network expects {}",
            x.cols(),
            x_prime.cols(),
            net.input_dim()
        )));
    }
    if !x.is_finite() || !x_prime.is_finite() {
        return Err(GedError::NonFinite("node embeddings".into()));
    }
    let mut tape = Tape::new();
    let net_vars = net.to_tape(&mut tape);
    let xv = tape.leaf(x.clone());
    let xpv = tape.leaf(x_prime.clone());
    let c = node_cost_on_tape(&mut tape, xv, xpv, &net_vars);
    Ok(tape.value(c).clone())
}

/// Node-pair alignment derived from a node alignment.
#[derive(Clone, Debug, PartialEq)]
pub struct PairAlignment {
    pub s: Matrix,
}

impl PairAlignment {
    /// Whether every row and column holds exactly one 1 and zeros elsewhere.
    pub fn is_hard_permutation(&self) -> bool {
        let s = &self.s;
        let binary = s.data().iter().all(|&x| x == 0.0 || x == 1.0);
        binary
            && s.row_sums()
                .iter()
                .chain(s.col_sums().iter())
                .all(|&x| x == 1.0)
    }
}

pub fn derive_pair_alignment(p: &Matrix) -> Result<PairAlignment> {
    if p.rows() != p.cols() {
        return Err(GedError::Shape(format!(
            "node alignment is {}x{}",
            p.rows(),
            p.cols()
        )));
    }
    Ok(PairAlignment {
        s: pair_alignment_matrix(p),
    })
}

/// Maximum-weight hard permutation; ties go to the lexicographically
/// smallest.
pub fn hungarian_round(m: &Matrix) -> Result<HardPermutation> {
    if m.rows() != m.cols() {
        return Err(GedError::Shape(format!(
            "matrix is {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    if !m.is_finite() {
        return Err(GedError::NonFinite("rounding input".into()));
    }
    HardPermutation::new(max_weight_assignment_lex(m))
}
