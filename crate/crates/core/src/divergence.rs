//! Set-divergence surrogates for the terms of the quadratic assignment
//! objective, and the cost-weighted score built from them.
//!
//! Three surrogate families stand in for `|[A - P A' P^T]_+|` and friends:
//!
//! - [`SurrogateKind::AlignDiff`]: align first, then take the hinge,
//!   `|[E - S E']_+|_1`.
//! - [`SurrogateKind::DiffAlign`]: hinge of every row difference, weighted by
//!   the alignment, `sum_{e,e'} |[E[e] - E'[e']]_+|_1 S[e,e']`.
//! - [`SurrogateKind::XorDiffAlign`]: `DiffAlign` with each term gated by
//!   `XOR` of the edge (or node-validity) bits it pairs up, so that only
//!   edge/non-edge and real/padded matches carry cost.
//!
//! Deletion compares source against aligned target; addition reverses the
//! hinge. For doubly stochastic alignments `AlignDiff <= DiffAlign` by
//! convexity of the hinge, with equality on hard alignments.
//!
//! The MAX and MAX-OR alternates replace the hinge sum with the max-form
//! rewrite and subtract graph-size constants, so their output can be
//! negative; it is left unclamped.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::align::{node_cost_on_tape, sinkhorn_on_tape};
use crate::autodiff::{Tape, Var};
use crate::encoder::{mpnn_on_tape, pair_embed_on_tape, GraphInput, ModelParams, Weights};
use crate::error::{GedError, Result};
use crate::graph::{and_gate, or_gate, pair_bits, xor_gate, CostConfig, PaddedPair};
use crate::matrix::Matrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SurrogateKind {
    AlignDiff,
    DiffAlign,
    XorDiffAlign,
}

impl SurrogateKind {
    pub const ALL: [SurrogateKind; 3] = [
        SurrogateKind::AlignDiff,
        SurrogateKind::DiffAlign,
        SurrogateKind::XorDiffAlign,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SurrogateKind::AlignDiff => "align-diff",
            SurrogateKind::DiffAlign => "diff-align",
            SurrogateKind::XorDiffAlign => "xor-diff-align",
        }
    }
}

impl FromStr for SurrogateKind {
    type Err = GedError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "align-diff" => Ok(SurrogateKind::AlignDiff),
            "diff-align" => Ok(SurrogateKind::DiffAlign),
            "xor-diff-align" => Ok(SurrogateKind::XorDiffAlign),
            other => Err(GedError::Parse(format!("unknown surrogate kind `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Delete,
    Add,
}

/// Which scoring function to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SurrogateChoice {
    /// Cost-weighted sum of four (or five) surrogate terms.
    Sum {
        edge: SurrogateKind,
        node: SurrogateKind,
    },
    Max,
    MaxOr,
}

impl SurrogateChoice {
    pub fn sum(edge: SurrogateKind, node: SurrogateKind) -> Self {
        SurrogateChoice::Sum { edge, node }
    }

    /// The nine sum combinations followed by MAX and MAX-OR.
    pub fn all() -> Vec<SurrogateChoice> {
        let mut out: Vec<_> = SurrogateKind::ALL
            .iter()
            .flat_map(|&e| {
                SurrogateKind::ALL
                    .iter()
                    .map(move |&n| SurrogateChoice::sum(e, n))
            })
            .collect();
        out.push(SurrogateChoice::Max);
        out.push(SurrogateChoice::MaxOr);
        out
    }
}

impl Default for SurrogateChoice {
    fn default() -> Self {
        SurrogateChoice::sum(SurrogateKind::XorDiffAlign, SurrogateKind::XorDiffAlign)
    }
}

impl fmt::Display for SurrogateChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SurrogateChoice::Sum { edge, node } => {
                write!(f, "edge:{},node:{}", edge.name(), node.name())
            }
            SurrogateChoice::Max => write!(f, "max"),
            SurrogateChoice::MaxOr => write!(f, "max-or"),
        }
    }
}

impl FromStr for SurrogateChoice {
    type Err = GedError;

    /// `edge:<kind>,node:<kind>`, `max` or `max-or`.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "max" => return Ok(SurrogateChoice::Max),
            "max-or" => return Ok(SurrogateChoice::MaxOr),
            _ => {}
        }
        let mut edge = None;
        let mut node = None;
        for part in s.split(',') {
            match part.trim().split_once(':') {
                Some(("edge", k)) => edge = Some(k.parse()?),
                Some(("node", k)) => node = Some(k.parse()?),
                _ => return Err(GedError::Parse(format!("bad surrogate choice `{s}`"))),
            }
        }
        match (edge, node) {
            (Some(edge), Some(node)) => Ok(SurrogateChoice::Sum { edge, node }),
            _ => Err(GedError::Parse(format!(
                "surrogate choice `{s}` needs both edge: and node:"
            ))),
        }
    }
}

/// `gate[i, j] = xor(bits_a[i], bits_b[j])`.
pub fn xor_mask(bits_a: &[f64], bits_b: &[f64]) -> Matrix {
    Matrix::from_fn(bits_a.len(), bits_b.len(), |i, j| {
        xor_gate(bits_a[i], bits_b[j])
    })
}

pub fn or_mask(bits_a: &[f64], bits_b: &[f64]) -> Matrix {
    Matrix::from_fn(bits_a.len(), bits_b.len(), |i, j| {
        or_gate(bits_a[i], bits_b[j])
    })
}

/// One surrogate term on a tape. `align` maps rows of `a` to rows of `b`;
/// `bits` supplies the gate inputs for the XOR variant.
pub fn set_divergence_on_tape(
    tape: &mut Tape,
    a: Var,
    b: Var,
    align: Var,
    bits: (&[f64], &[f64]),
    kind: SurrogateKind,
    direction: Direction,
) -> Var {
    match kind {
        SurrogateKind::AlignDiff => {
            let aligned = tape.matmul(align, b);
            let diff = match direction {
                Direction::Delete => tape.sub(a, aligned),
                Direction::Add => tape.sub(aligned, a),
            };
            let hinge = tape.relu(diff);
            tape.sum(hinge)
        }
        SurrogateKind::DiffAlign | SurrogateKind::XorDiffAlign => {
            // hinge[e, e'] = |[a_e - b_e']_+|_1 (delete) or |[b_e' - a_e]_+|_1 (add)
            let hinge = match direction {
                Direction::Delete => tape.pairwise_relu_diff(a, b),
                Direction::Add => {
                    let h = tape.pairwise_relu_diff(b, a);
                    tape.transpose(h)
                }
            };
            let weighted = tape.mul(hinge, align);
            let weighted = if kind == SurrogateKind::XorDiffAlign {
                tape.mul_const(weighted, xor_mask(bits.0, bits.1))
            } else {
                weighted
            };
            tape.sum(weighted)
        }
    }
}

fn single_term(
    a: &Matrix,
    b: &Matrix,
    align: &Matrix,
    bits: (&[f64], &[f64]),
    kind: SurrogateKind,
    direction: Direction,
) -> Result<f64> {
    if a.shape() != b.shape() || align.shape() != (a.rows(), b.rows()) {
        return Err(GedError::Shape(format!(
            "embeddings {:?} / {:?} with alignment {:?}",
            a.shape(),
            b.shape(),
            align.shape()
        )));
    }
    if bits.0.len() != a.rows() || bits.1.len() != b.rows() {
        return Err(GedError::Shape(
            "gate bits do not match embedding rows".into(),
        ));
    }
    let mut tape = Tape::new();
    let (av, bv, sv) = (
        tape.leaf(a.clone()),
        tape.leaf(b.clone()),
        tape.leaf(align.clone()),
    );
    let out = set_divergence_on_tape(&mut tape, av, bv, sv, bits, kind, direction);
    Ok(tape.scalar(out))
}

/// Edge surrogate from pair embeddings `E`, `E'` and pair alignment `S`;
/// `a`, `a_prime` are the padded adjacency matrices.
pub fn edge_div(
    e: &Matrix,
    e_prime: &Matrix,
    s: &Matrix,
    a: &Matrix,
    a_prime: &Matrix,
    kind: SurrogateKind,
    direction: Direction,
) -> Result<f64> {
    let (bits, bits_prime) = (pair_bits(a), pair_bits(a_prime));
    single_term(e, e_prime, s, (&bits, &bits_prime), kind, direction)
}

/// Node surrogate from node embeddings `X`, `X'` and node alignment `P`.
pub fn node_div(
    x: &Matrix,
    x_prime: &Matrix,
    p: &Matrix,
    eta: &[f64],
    eta_prime: &[f64],
    kind: SurrogateKind,
    direction: Direction,
) -> Result<f64> {
    single_term(x, x_prime, p, (eta, eta_prime), kind, direction)
}

/// `W[u, u'] = AND(eta[u], eta'[u']) |L[u] - L'[u']|_1`; the substitution
/// term is `sum(W * P)`.
pub fn substitution_weights(
    l: &Matrix,
    l_prime: &Matrix,
    eta: &[f64],
    eta_prime: &[f64],
) -> Result<Matrix> {
    if l.cols() != l_prime.cols() {
        return Err(GedError::Shape(format!(
            "label alphabets differ: {} vs {} columns",
            l.cols(),
            l_prime.cols()
        )));
    }
    if l.rows() != eta.len() || l_prime.rows() != eta_prime.len() {
        return Err(GedError::Shape("label rows do not match indicators".into()));
    }
    Ok(Matrix::from_fn(l.rows(), l_prime.rows(), |u, t| {
        let dist: f64 = l
            .row(u)
            .iter()
            .zip(l_prime.row(t))
            .map(|(a, b)| (a - b).abs())
            .sum();
        and_gate(eta[u], eta_prime[t]) * dist
    }))
}

pub fn substitution_div(
    l: &Matrix,
    l_prime: &Matrix,
    p: &Matrix,
    eta: &[f64],
    eta_prime: &[f64],
) -> Result<f64> {
    let w = substitution_weights(l, l_prime, eta, eta_prime)?;
    if p.shape() != w.shape() {
        return Err(GedError::Shape(format!(
            "alignment {:?} vs labels {:?}",
            p.shape(),
            w.shape()
        )));
    }
    Ok(w.zip_map(p, |a, b| a * b).sum())
}

/// Everything a score needs once the networks have run.
#[derive(Clone, Copy, Debug)]
pub struct ScoreParts {
    pub x: Var,
    pub x_prime: Var,
    pub p: Var,
    pub e: Var,
    pub e_prime: Var,
    pub s: Var,
}

/// Structural constants of a padded pair used by the scores.
#[derive(Clone, Debug)]
pub struct PairStructure {
    pub edge_bits: Vec<f64>,
    pub edge_bits_prime: Vec<f64>,
    pub eta: Vec<f64>,
    pub eta_prime: Vec<f64>,
    pub num_edges: (usize, usize),
    pub num_nodes: (usize, usize),
    /// Substitution weights, present when node labels take part.
    pub substitution: Option<Matrix>,
}

impl PairStructure {
    pub fn new(pair: &PaddedPair, with_substitution: bool) -> Self {
        let substitution = with_substitution.then(|| {
            let k = pair.label_count();
            substitution_weights(
                &pair.label_matrix(false, k),
                &pair.label_matrix(true, k),
                &pair.eta,
                &pair.eta_prime,
            )
            .expect("label matrices share an alphabet")
        });
        PairStructure {
            edge_bits: pair_bits(&pair.a),
            edge_bits_prime: pair_bits(&pair.a_prime),
            eta: pair.eta.clone(),
            eta_prime: pair.eta_prime.clone(),
            num_edges: (pair.source().num_edges(), pair.target().num_edges()),
            num_nodes: (pair.source().num_nodes(), pair.target().num_nodes()),
            substitution,
        }
    }
}

/// `sum_i w_i * |max(a, align b)_i|_1` with `w_i = sum_j OR(bits)[i,j] align[i,j]`
/// when `or_bits` is given, plain `|max(a, align b)|_1` otherwise.
fn max_norm_on_tape(
    tape: &mut Tape,
    a: Var,
    b: Var,
    align: Var,
    or_bits: Option<(&[f64], &[f64])>,
) -> Var {
    let aligned = tape.matmul(align, b);
    let mx = tape.maximum(a, aligned);
    let norm = tape.abs(mx);
    match or_bits {
        None => tape.sum(norm),
        Some((ba, bb)) => {
            let gated = tape.mul_const(align, or_mask(ba, bb));
            let w = tape.row_sum(gated);
            let weighted = tape.mul_col_broadcast(norm, w);
            tape.sum(weighted)
        }
    }
}

/// Weighted sum of scalar tape terms.
fn weighted_sum(tape: &mut Tape, terms: &[(f64, Var)], constant: f64) -> Var {
    let mut acc: Option<Var> = None;
    for &(w, v) in terms {
        let t = tape.scale(v, w);
        acc = Some(match acc {
            Some(a) => tape.add(a, t),
            None => t,
        });
    }
    let acc = acc.unwrap_or_else(|| tape.leaf(Matrix::zeros(1, 1)));
    if constant != 0.0 {
        tape.add_scalar(acc, constant)
    } else {
        acc
    }
}

/// Score from precomputed embeddings and alignments.
pub fn score_on_tape(
    tape: &mut Tape,
    parts: &ScoreParts,
    structure: &PairStructure,
    costs: &CostConfig,
    choice: SurrogateChoice,
) -> Result<Var> {
    let edge_bits = (&structure.edge_bits[..], &structure.edge_bits_prime[..]);
    let node_bits = (&structure.eta[..], &structure.eta_prime[..]);
    match choice {
        SurrogateChoice::Sum { edge, node } => {
            use Direction::{Add, Delete};
            let e_del = set_divergence_on_tape(
                tape,
                parts.e,
                parts.e_prime,
                parts.s,
                edge_bits,
                edge,
                Delete,
            );
            let e_add =
                set_divergence_on_tape(tape, parts.e, parts.e_prime, parts.s, edge_bits, edge, Add);
            let n_del = set_divergence_on_tape(
                tape,
                parts.x,
                parts.x_prime,
                parts.p,
                node_bits,
                node,
                Delete,
            );
            let n_add =
                set_divergence_on_tape(tape, parts.x, parts.x_prime, parts.p, node_bits, node, Add);
            let mut terms = vec![
                (costs.edge_del, e_del),
                (costs.edge_add, e_add),
                (costs.node_del, n_del),
                (costs.node_add, n_add),
            ];
            if costs.has_substitution() {
                let w = structure.substitution.as_ref().ok_or_else(|| {
                    GedError::InvalidChoice(
                        "substitution cost set but the pair carries no label weights".into(),
                    )
                })?;
                let weighted = tape.mul_const(parts.p, w.clone());
                let sub = tape.sum(weighted);
                terms.push((costs.node_sub, sub));
            }
            Ok(weighted_sum(tape, &terms, 0.0))
        }
        SurrogateChoice::Max | SurrogateChoice::MaxOr => {
            if costs.has_substitution() {
                return Err(GedError::InvalidChoice(
                    "the MAX alternates have no substitution term".into(),
                ));
            }
            let gated = choice == SurrogateChoice::MaxOr;
            let edge_norm = max_norm_on_tape(
                tape,
                parts.e,
                parts.e_prime,
                parts.s,
                gated.then_some(edge_bits),
            );
            let node_norm = max_norm_on_tape(
                tape,
                parts.x,
                parts.x_prime,
                parts.p,
                gated.then_some(node_bits),
            );
            let (es, et) = (structure.num_edges.0 as f64, structure.num_edges.1 as f64);
            let (vs, vt) = (structure.num_nodes.0 as f64, structure.num_nodes.1 as f64);
            let constant = -costs.edge_del * et
                - costs.edge_add * es
                - costs.node_del * vt
                - costs.node_add * vs;
            let terms = [
                ((costs.edge_add + costs.edge_del) / 2.0, edge_norm),
                ((costs.node_add + costs.node_del) / 2.0, node_norm),
            ];
            Ok(weighted_sum(tape, &terms, constant))
        }
    }
}

/// Embeddings and alignments of a pair, as plain matrices.
#[derive(Clone, Debug)]
pub struct ScoreInputs {
    pub x: Matrix,
    pub x_prime: Matrix,
    pub p: Matrix,
    pub e: Matrix,
    pub e_prime: Matrix,
    pub s: Matrix,
}

/// Evaluates a score from given embeddings and alignments.
pub fn score_embeddings(
    inputs: &ScoreInputs,
    pair: &PaddedPair,
    costs: &CostConfig,
    choice: SurrogateChoice,
) -> Result<f64> {
    let n = pair.n();
    let m = crate::graph::num_pairs(n);
    if inputs.x.rows() != n
        || inputs.x_prime.shape() != inputs.x.shape()
        || inputs.p.shape() != (n, n)
        || inputs.e.rows() != m
        || inputs.e_prime.shape() != inputs.e.shape()
        || inputs.s.shape() != (m, m)
    {
        return Err(GedError::Shape(
            "score inputs do not match the padded pair".into(),
        ));
    }
    let structure = PairStructure::new(pair, costs.has_substitution());
    let mut tape = Tape::new();
    let parts = ScoreParts {
        x: tape.leaf(inputs.x.clone()),
        x_prime: tape.leaf(inputs.x_prime.clone()),
        p: tape.leaf(inputs.p.clone()),
        e: tape.leaf(inputs.e.clone()),
        e_prime: tape.leaf(inputs.e_prime.clone()),
        s: tape.leaf(inputs.s.clone()),
    };
    let out = score_on_tape(&mut tape, &parts, &structure, costs, choice)?;
    Ok(tape.scalar(out))
}

/// Encoder, alignment and score on one tape. Returns the score variable and
/// the intermediate parts.
pub fn forward_on_tape(
    tape: &mut Tape,
    params: &ModelParams,
    weights: &Weights<Var>,
    pair: &PaddedPair,
    costs: &CostConfig,
    choice: SurrogateChoice,
) -> Result<(Var, ScoreParts)> {
    let config = &params.config;
    if pair.n() != config.max_nodes {
        return Err(GedError::Shape(format!(
            "pair padded to {} but the model expects {}",
            pair.n(),
            config.max_nodes
        )));
    }
    if costs.has_substitution() && config.num_labels.is_none() {
        return Err(GedError::InvalidChoice(
            "substitution cost needs a labeled model".into(),
        ));
    }
    let source = GraphInput::from_pair(pair, false, config.num_labels);
    let target = GraphInput::from_pair(pair, true, config.num_labels);
    let x = mpnn_on_tape(tape, &source, weights, config);
    let x_prime = mpnn_on_tape(tape, &target, weights, config);
    let cost = node_cost_on_tape(tape, x, x_prime, &weights.cost);
    let p = sinkhorn_on_tape(tape, cost, config.sinkhorn);
    let s = tape.pair_alignment(p);
    let e = pair_embed_on_tape(tape, x, &source.adjacency, &weights.pair);
    let e_prime = pair_embed_on_tape(tape, x_prime, &target.adjacency, &weights.pair);
    let parts = ScoreParts {
        x,
        x_prime,
        p,
        e,
        e_prime,
        s,
    };
    let structure = PairStructure::new(pair, costs.has_substitution());
    let score = score_on_tape(tape, &parts, &structure, costs, choice)?;
    Ok((score, parts))
}

/// Predicted GED of a pair.
pub fn ged_score(
    pair: &PaddedPair,
    params: &ModelParams,
    costs: &CostConfig,
    choice: SurrogateChoice,
) -> Result<f64> {
    params.validate()?;
    let mut tape = Tape::new();
    let weights = params.to_tape(&mut tape);
    let (score, _) = forward_on_tape(&mut tape, params, &weights, pair, costs, choice)?;
    Ok(tape.scalar(score))
}

/// Predicted GED together with the soft node alignment it used.
pub fn ged_score_with_alignment(
    pair: &PaddedPair,
    params: &ModelParams,
    costs: &CostConfig,
    choice: SurrogateChoice,
) -> Result<(f64, Matrix)> {
    params.validate()?;
    let mut tape = Tape::new();
    let weights = params.to_tape(&mut tape);
    let (score, parts) = forward_on_tape(&mut tape, params, &weights, pair, costs, choice)?;
    Ok((tape.scalar(score), tape.value(parts.p).clone()))
}

/// Predicted GED and its gradient with respect to every weight tensor.
pub fn ged_score_and_gradient(
    pair: &PaddedPair,
    params: &ModelParams,
    costs: &CostConfig,
    choice: SurrogateChoice,
) -> Result<(f64, Weights<Matrix>)> {
    params.validate()?;
    let mut tape = Tape::new();
    let weights = params.to_tape(&mut tape);
    let (score, _) = forward_on_tape(&mut tape, params, &weights, pair, costs, choice)?;
    let grads = tape.backward(score);
    let tensors = weights
        .tensors()
        .into_iter()
        .zip(params.weights.tensors())
        .map(|(&v, m)| grads.get_or_zeros(v, m.shape()))
        .collect();
    Ok((
        tape.scalar(score),
        Weights::from_tensors(&params.weights, tensors)?,
    ))
}

/// Cost-guided distance between pooled graph-level embeddings.
pub fn graph_level_score(g: &[f64], g_prime: &[f64], costs: &CostConfig) -> Result<f64> {
    if g.len() != g_prime.len() {
        return Err(GedError::Shape(format!(
            "graph embeddings of width {} and {}",
            g.len(),
            g_prime.len()
        )));
    }
    let del: f64 = g.iter().zip(g_prime).map(|(a, b)| (a - b).max(0.0)).sum();
    let add: f64 = g.iter().zip(g_prime).map(|(a, b)| (b - a).max(0.0)).sum();
    Ok((costs.node_del + costs.edge_del) / 2.0 * del
        + (costs.node_add + costs.edge_add) / 2.0 * add)
}
