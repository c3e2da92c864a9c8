//! Exact general-cost graph edit distance as a quadratic assignment over
//! hard node permutations.
//!
//! With `P[u, perm[u]] = 1` the cost of a permutation is
//!
//! ```text
//! b_del/2 |[A - P A' P^T]_+|_1 + b_add/2 |[P A' P^T - A]_+|_1
//!   + a_del |[eta - P eta']_+|_1 + a_add |[P eta' - eta]_+|_1
//!   + a_sub sum_{u,u'} AND(eta[u], eta'[u']) |L[u,:] - L'[u',:]|_1 P[u,u']
//! ```
//!
//! The substitution term uses one-hot label rows, so a mismatched real-to-real
//! match costs `2 * a_sub`.

use serde::{Deserialize, Serialize};

use crate::assignment::min_cost_assignment;
use crate::error::{GedError, Result};
use crate::graph::{and_gate, CostConfig, PaddedPair};
use crate::matrix::Matrix;

/// A bijection of `0..n`, `perm[u]` being the target node matched to source
/// node `u`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HardPermutation(Vec<usize>);

impl HardPermutation {
    pub fn new(perm: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; perm.len()];
        for &p in &perm {
            if p >= perm.len() || seen[p] {
                return Err(GedError::Shape(format!("{perm:?} is not a permutation")));
            }
            seen[p] = true;
        }
        Ok(HardPermutation(perm))
    }

    pub fn identity(n: usize) -> Self {
        HardPermutation((0..n).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    #[inline]
    pub fn apply(&self, u: usize) -> usize {
        self.0[u]
    }

    /// The permutation whose matrix is the transpose of this one's.
    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.0.len()];
        for (u, &t) in self.0.iter().enumerate() {
            inv[t] = u;
        }
        HardPermutation(inv)
    }

    pub fn to_matrix(&self) -> Matrix {
        let n = self.0.len();
        let mut p = Matrix::zeros(n, n);
        for (u, &t) in self.0.iter().enumerate() {
            p[(u, t)] = 1.0;
        }
        p
    }

    /// Reads a hard permutation off a 0/1 matrix.
    pub fn from_matrix(p: &Matrix) -> Result<Self> {
        if p.rows() != p.cols() {
            return Err(GedError::Shape(format!(
                "permutation matrix is {}x{}",
                p.rows(),
                p.cols()
            )));
        }
        let perm = (0..p.rows())
            .map(|u| {
                let ones: Vec<usize> = (0..p.cols()).filter(|&t| p[(u, t)] == 1.0).collect();
                match ones.as_slice() {
                    [t] if p.row(u).iter().all(|&x| x == 0.0 || x == 1.0) => Ok(*t),
                    _ => Err(GedError::Shape(format!("row {u} is not a unit vector"))),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(perm)
    }

    /// All permutations of `0..n` in lexicographic order.
    pub fn all(n: usize) -> Vec<HardPermutation> {
        let mut out = Vec::new();
        let mut cur: Vec<usize> = (0..n).collect();
        loop {
            out.push(HardPermutation(cur.clone()));
            // next_permutation
            let Some(i) = (1..n).rev().find(|&i| cur[i - 1] < cur[i]) else {
                break;
            };
            let j = (i..n).rev().find(|&j| cur[j] > cur[i - 1]).unwrap();
            cur.swap(i - 1, j);
            cur[i..].reverse();
        }
        out
    }
}

fn check_alignment_shape(pair: &PaddedPair, p: &Matrix) -> Result<()> {
    if p.shape() != (pair.n(), pair.n()) {
        return Err(GedError::Shape(format!(
            "alignment is {}x{}, pair is padded to {}",
            p.rows(),
            p.cols(),
            pair.n()
        )));
    }
    Ok(())
}

fn mat_vec(p: &Matrix, x: &[f64]) -> Vec<f64> {
    (0..p.rows())
        .map(|i| p.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
        .collect()
}

fn relu(x: f64) -> f64 {
    x.max(0.0)
}

/// Substitution term for an arbitrary (hard or soft) alignment.
fn substitution_term(pair: &PaddedPair, p: &Matrix) -> f64 {
    let k = pair.label_count();
    let l = pair.label_matrix(false, k);
    let lp = pair.label_matrix(true, k);
    let mut total = 0.0;
    for u in 0..pair.n() {
        for t in 0..pair.n() {
            let gate = and_gate(pair.eta[u], pair.eta_prime[t]);
            if gate == 0.0 || p[(u, t)] == 0.0 {
                continue;
            }
            let dist: f64 = l
                .row(u)
                .iter()
                .zip(lp.row(t))
                .map(|(a, b)| (a - b).abs())
                .sum();
            total += gate * dist * p[(u, t)];
        }
    }
    total
}

/// The QAP objective for a hard or doubly-stochastic alignment matrix.
pub fn qap_cost(pair: &PaddedPair, p: &Matrix, costs: &CostConfig) -> Result<f64> {
    check_alignment_shape(pair, p)?;
    let aligned = p.matmul(&pair.a_prime).matmul(&p.transpose());
    let mut del_e = 0.0;
    let mut add_e = 0.0;
    for (&a, &b) in pair.a.data().iter().zip(aligned.data()) {
        del_e += relu(a - b);
        add_e += relu(b - a);
    }
    let p_eta = mat_vec(p, &pair.eta_prime);
    let mut del_n = 0.0;
    let mut add_n = 0.0;
    for (&a, &b) in pair.eta.iter().zip(&p_eta) {
        del_n += relu(a - b);
        add_n += relu(b - a);
    }
    let mut total = costs.edge_del / 2.0 * del_e
        + costs.edge_add / 2.0 * add_e
        + costs.node_del * del_n
        + costs.node_add * add_n;
    if costs.has_substitution() {
        total += costs.node_sub * substitution_term(pair, p);
    }
    Ok(total)
}

/// `qap_cost` of a hard permutation.
pub fn qap_cost_perm(pair: &PaddedPair, perm: &HardPermutation, costs: &CostConfig) -> Result<f64> {
    qap_cost(pair, &perm.to_matrix(), costs)
}

/// The max-form rewrite of the QAP objective, using `[c - d]_+ = max(c, d) - d`.
/// Agrees with [`qap_cost`] on hard permutations.
///
/// The node indicator norm is a plain vector norm (no double counting), so
/// its coefficient is `a_add + a_del`, not half of it as for the symmetric
/// adjacency norm.
pub fn qap_cost_max_form(pair: &PaddedPair, p: &Matrix, costs: &CostConfig) -> Result<f64> {
    check_alignment_shape(pair, p)?;
    let aligned = p.matmul(&pair.a_prime).matmul(&p.transpose());
    let edge_max: f64 = pair
        .a
        .data()
        .iter()
        .zip(aligned.data())
        .map(|(&a, &b)| a.max(b))
        .sum();
    let p_eta = mat_vec(p, &pair.eta_prime);
    let node_max: f64 = pair.eta.iter().zip(&p_eta).map(|(&a, &b)| a.max(b)).sum();
    let (e_src, e_tgt) = (
        pair.source().num_edges() as f64,
        pair.target().num_edges() as f64,
    );
    let (v_src, v_tgt) = (
        pair.source().num_nodes() as f64,
        pair.target().num_nodes() as f64,
    );
    let mut total = (costs.edge_add + costs.edge_del) / 2.0 * edge_max
        - costs.edge_del * e_tgt
        - costs.edge_add * e_src
        + (costs.node_add + costs.node_del) * node_max
        - costs.node_del * v_tgt
        - costs.node_add * v_src;
    if costs.has_substitution() {
        total += costs.node_sub * substitution_term(pair, p);
    }
    Ok(total)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactResult {
    pub value: f64,
    #[serde(rename = "perm")]
    pub argmin: HardPermutation,
    pub node_count_explored: u64,
}

/// Exhaustive solver over all `n!` permutations, optionally pruned with a
/// linear-assignment lower bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExactSolver {
    /// Largest `n` accepted for plain enumeration.
    pub max_nodes: usize,
    pub branch_and_bound: bool,
    /// Largest `n` accepted when branch-and-bound is enabled.
    pub bb_max_nodes: usize,
}

impl Default for ExactSolver {
    fn default() -> Self {
        ExactSolver {
            max_nodes: 8,
            branch_and_bound: false,
            bb_max_nodes: 12,
        }
    }
}

impl ExactSolver {
    pub fn branch_and_bound() -> Self {
        ExactSolver {
            branch_and_bound: true,
            ..Default::default()
        }
    }

    pub fn bound(&self) -> usize {
        if self.branch_and_bound {
            self.bb_max_nodes.max(self.max_nodes)
        } else {
            self.max_nodes
        }
    }

    pub fn check_size(&self, n: usize) -> Result<()> {
        if n > self.bound() {
            return Err(GedError::Capability {
                n,
                bound: self.bound(),
                bb_bound: self.bb_max_nodes,
            });
        }
        Ok(())
    }

    pub fn solve(&self, pair: &PaddedPair, costs: &CostConfig) -> Result<ExactResult> {
        costs.validate()?;
        let n = pair.n();
        self.check_size(n)?;
        let search = Search::new(pair, costs);
        let mut state = SearchState {
            perm: vec![usize::MAX; n],
            used: vec![false; n],
            best: f64::INFINITY,
            best_perm: Vec::new(),
            explored: 0,
        };
        search.descend(0, 0.0, &mut state, self.branch_and_bound);
        let argmin = HardPermutation(state.best_perm);
        let value = qap_cost_perm(pair, &argmin, costs)?;
        Ok(ExactResult {
            value,
            argmin,
            node_count_explored: state.explored,
        })
    }
}

/// Exact GED with the default solver (plain enumeration, `n <= 8`).
pub fn exact_ged(pair: &PaddedPair, costs: &CostConfig) -> Result<ExactResult> {
    ExactSolver::default().solve(pair, costs)
}

struct Search {
    n: usize,
    a: Vec<bool>,
    a_prime: Vec<bool>,
    /// node_cost[u * n + t]: node edit (and substitution) cost of matching u to t.
    node_cost: Vec<f64>,
    edge_del: f64,
    edge_add: f64,
}

struct SearchState {
    perm: Vec<usize>,
    used: Vec<bool>,
    best: f64,
    best_perm: Vec<usize>,
    explored: u64,
}

impl Search {
    fn new(pair: &PaddedPair, costs: &CostConfig) -> Self {
        let n = pair.n();
        let bits = |m: &Matrix| m.data().iter().map(|&x| x != 0.0).collect::<Vec<_>>();
        let labeled = costs.has_substitution();
        let (l, lp) = if labeled {
            let k = pair.label_count();
            (pair.label_matrix(false, k), pair.label_matrix(true, k))
        } else {
            (Matrix::zeros(0, 0), Matrix::zeros(0, 0))
        };
        let mut node_cost = vec![0.0; n * n];
        for u in 0..n {
            for t in 0..n {
                let (e, ep) = (pair.eta[u], pair.eta_prime[t]);
                let mut c = costs.node_del * relu(e - ep) + costs.node_add * relu(ep - e);
                if labeled && and_gate(e, ep) != 0.0 {
                    let dist: f64 = l
                        .row(u)
                        .iter()
                        .zip(lp.row(t))
                        .map(|(a, b)| (a - b).abs())
                        .sum();
                    c += costs.node_sub * dist;
                }
                node_cost[u * n + t] = c;
            }
        }
        Search {
            n,
            a: bits(&pair.a),
            a_prime: bits(&pair.a_prime),
            node_cost,
            edge_del: costs.edge_del,
            edge_add: costs.edge_add,
        }
    }

    #[inline]
    fn edge_cost(&self, u: usize, w: usize, t: usize, s: usize) -> f64 {
        match (self.a[u * self.n + w], self.a_prime[t * self.n + s]) {
            (true, false) => self.edge_del,
            (false, true) => self.edge_add,
            _ => 0.0,
        }
    }

    /// Cost added by fixing `depth -> t` given the assignment of `0..depth`.
    fn increment(&self, depth: usize, t: usize, perm: &[usize]) -> f64 {
        let mut c = self.node_cost[depth * self.n + t];
        for (w, &s) in perm[..depth].iter().enumerate() {
            c += self.edge_cost(depth, w, t, s);
        }
        c
    }

    /// Linear-assignment bound on completing `0..depth`: each remaining node's
    /// node cost plus its edge costs towards already-fixed nodes. Edge costs
    /// among the remaining nodes are nonnegative and dropped.
    fn lower_bound(&self, depth: usize, state: &SearchState) -> f64 {
        let rows: Vec<usize> = (depth..self.n).collect();
        let cols: Vec<usize> = (0..self.n).filter(|&t| !state.used[t]).collect();
        if rows.is_empty() {
            return 0.0;
        }
        let m = Matrix::from_fn(rows.len(), cols.len(), |i, j| {
            let (u, t) = (rows[i], cols[j]);
            let mut c = self.node_cost[u * self.n + t];
            for (w, &s) in state.perm[..depth].iter().enumerate() {
                c += self.edge_cost(u, w, t, s);
            }
            c
        });
        min_cost_assignment(&m).1
    }

    fn descend(&self, depth: usize, partial: f64, state: &mut SearchState, prune: bool) {
        state.explored += 1;
        let tol = if state.best.is_finite() {
            1e-9 * state.best.abs().max(1.0)
        } else {
            0.0
        };
        if depth == self.n {
            // Strict improvement only: earlier (lexicographically smaller)
            // permutations win ties.
            if partial < state.best - tol {
                state.best = partial;
                state.best_perm = state.perm.clone();
            }
            return;
        }
        if prune && depth > 0 && partial + self.lower_bound(depth, state) >= state.best - tol {
            return;
        }
        for t in 0..self.n {
            if state.used[t] {
                continue;
            }
            let next = partial + self.increment(depth, t, &state.perm);
            if prune && next >= state.best - tol {
                continue;
            }
            state.perm[depth] = t;
            state.used[t] = true;
            self.descend(depth + 1, next, state, prune);
            state.used[t] = false;
            state.perm[depth] = usize::MAX;
        }
    }
}

/// Checks that the transpose of the forward optimum is optimal for the
/// reversed pair.
pub fn verify_transpose_optimality(pair: &PaddedPair, costs: &CostConfig) -> Result<bool> {
    verify_transpose_optimality_with(&ExactSolver::default(), pair, costs)
}

pub fn verify_transpose_optimality_with(
    solver: &ExactSolver,
    pair: &PaddedPair,
    costs: &CostConfig,
) -> Result<bool> {
    let forward = solver.solve(pair, costs)?;
    let reversed = pair.reversed();
    let backward = solver.solve(&reversed, costs)?;
    let transposed = qap_cost_perm(&reversed, &forward.argmin.inverse(), costs)?;
    Ok((transposed - backward.value).abs() <= 1e-9 * backward.value.abs().max(1.0))
}

/// Edge-addition cost used for the subgraph-isomorphism limit.
pub const SUBGRAPH_EPSILON: f64 = 1e-6;

/// Matching problems recovered as limits of particular cost settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchingReport {
    /// GED under unit costs is zero.
    pub isomorphic: bool,
    /// With `b_add = eps`, `b_del = 1` and zero node costs, the optimal
    /// alignment deletes no source edge: the source embeds in the target.
    pub subgraph_isomorphic: bool,
    /// Edge count of a maximum common edge subgraph.
    pub mces_edges: usize,
}

pub fn matching_limits(pair: &PaddedPair) -> Result<MatchingReport> {
    matching_limits_with(&ExactSolver::default(), pair)
}

pub fn matching_limits_with(solver: &ExactSolver, pair: &PaddedPair) -> Result<MatchingReport> {
    let unit = CostConfig::uniform();
    let isomorphic = solver.solve(pair, &unit)?.value == 0.0;

    let sub_costs = CostConfig::new(0.0, 0.0, 1.0, SUBGRAPH_EPSILON)?;
    let sub = solver.solve(pair, &sub_costs)?;
    let deletions_only = CostConfig::new(0.0, 0.0, 1.0, 0.0)?;
    let subgraph_isomorphic = qap_cost_perm(pair, &sub.argmin, &deletions_only)? == 0.0;

    let edge_costs = CostConfig::new(0.0, 0.0, 1.0, 1.0)?;
    let mces = solver.solve(pair, &edge_costs)?;
    let p = mces.argmin.to_matrix();
    let aligned = p.matmul(&pair.a_prime).matmul(&p.transpose());
    let max_norm: f64 = pair
        .a
        .data()
        .iter()
        .zip(aligned.data())
        .map(|(&a, &b)| a.max(b))
        .sum();
    let total = (pair.source().num_edges() + pair.target().num_edges()) as f64;
    let mces_edges = (total - max_norm / 2.0).round() as usize;

    Ok(MatchingReport {
        isomorphic,
        subgraph_isomorphic,
        mces_edges,
    })
}
