//! Edit scripts read off a node alignment, and their replay.
//!
//! Operands are source slots: `0..|V|` are the source nodes and
//! `|V|..N` the padding slots that an `AddNode` brings to life. Scripts list
//! node additions first, then edge edits in canonical pair order, then node
//! deletions, so every edge edit sees both endpoints alive.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::align::{derive_pair_alignment, hungarian_round};
use crate::error::{GedError, Result};
use crate::exact::HardPermutation;
use crate::graph::{pair_list, CostConfig, Graph, PaddedPair};
use crate::matrix::Matrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EditKind {
    AddNode,
    DelNode,
    AddEdge,
    DelEdge,
}

/// A single structural edit, serialised as `{"kind": ..., "operands": [...]}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "EditRecord", try_from = "EditRecord")]
pub enum EditOp {
    AddNode(usize),
    DelNode(usize),
    AddEdge(usize, usize),
    DelEdge(usize, usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EditRecord {
    pub kind: EditKind,
    pub operands: Vec<usize>,
}

impl From<EditOp> for EditRecord {
    fn from(op: EditOp) -> Self {
        let (kind, operands) = match op {
            EditOp::AddNode(u) => (EditKind::AddNode, vec![u]),
            EditOp::DelNode(u) => (EditKind::DelNode, vec![u]),
            EditOp::AddEdge(u, v) => (EditKind::AddEdge, vec![u, v]),
            EditOp::DelEdge(u, v) => (EditKind::DelEdge, vec![u, v]),
        };
        EditRecord { kind, operands }
    }
}

impl TryFrom<EditRecord> for EditOp {
    type Error = GedError;

    fn try_from(r: EditRecord) -> Result<Self> {
        match (r.kind, r.operands.as_slice()) {
            (EditKind::AddNode, &[u]) => Ok(EditOp::AddNode(u)),
            (EditKind::DelNode, &[u]) => Ok(EditOp::DelNode(u)),
            (EditKind::AddEdge, &[u, v]) => Ok(EditOp::AddEdge(u, v)),
            (EditKind::DelEdge, &[u, v]) => Ok(EditOp::DelEdge(u, v)),
            (kind, ops) => Err(GedError::Parse(format!(
                "{kind:?} with {} operands",
                ops.len()
            ))),
        }
    }
}

impl EditOp {
    pub fn kind(&self) -> EditKind {
        EditRecord::from(*self).kind
    }

    pub fn cost(&self, costs: &CostConfig) -> f64 {
        match self {
            EditOp::AddNode(_) => costs.node_add,
            EditOp::DelNode(_) => costs.node_del,
            EditOp::AddEdge(..) => costs.edge_add,
            EditOp::DelEdge(..) => costs.edge_del,
        }
    }
}

impl fmt::Display for EditOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EditOp::AddNode(u) => write!(f, "AddNode({u})"),
            EditOp::DelNode(u) => write!(f, "DelNode({u})"),
            EditOp::AddEdge(u, v) => write!(f, "AddEdge({u}, {v})"),
            EditOp::DelEdge(u, v) => write!(f, "DelEdge({u}, {v})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EditPath {
    pub ops: Vec<EditOp>,
    pub total_cost: f64,
}

impl EditPath {
    pub fn new(ops: Vec<EditOp>, costs: &CostConfig) -> Self {
        let total_cost = path_cost(&ops, costs);
        EditPath { ops, total_cost }
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }
}

pub fn path_cost(ops: &[EditOp], costs: &CostConfig) -> f64 {
    ops.iter().fold(0.0, |acc, op| acc + op.cost(costs))
}

/// Script for a hard node mapping `u -> perm[u]`.
pub fn edit_path_from_permutation(
    pair: &PaddedPair,
    perm: &HardPermutation,
    costs: &CostConfig,
) -> Result<EditPath> {
    let n = pair.n();
    if perm.len() != n {
        return Err(GedError::Shape(format!(
            "permutation of {} for a pair padded to {n}",
            perm.len()
        )));
    }
    let pair_map = |u: usize, v: usize| (perm.apply(u), perm.apply(v));
    Ok(EditPath::new(script(pair, perm, pair_map), costs))
}

fn script(
    pair: &PaddedPair,
    perm: &HardPermutation,
    pair_map: impl Fn(usize, usize) -> (usize, usize),
) -> Vec<EditOp> {
    let (ns, nt) = (pair.source().num_nodes(), pair.target().num_nodes());
    let mut ops: Vec<EditOp> = (ns..pair.n())
        .filter(|&u| perm.apply(u) < nt)
        .map(EditOp::AddNode)
        .collect();
    for (u, v) in pair_list(pair.n()) {
        let (x, y) = pair_map(u, v);
        match (pair.a[(u, v)] > 0.5, pair.a_prime[(x, y)] > 0.5) {
            (true, false) => ops.push(EditOp::DelEdge(u, v)),
            (false, true) => ops.push(EditOp::AddEdge(u, v)),
            _ => {}
        }
    }
    ops.extend(
        (0..ns)
            .filter(|&u| perm.apply(u) >= nt)
            .map(EditOp::DelNode),
    );
    ops
}

/// Rounds `p_soft` to the maximum-weight permutation and reads off the
/// script. The pair mapping is taken from the rounded node mapping, which is
/// what rounding the derived pair alignment independently yields whenever
/// the latter is consistent; see [`extract_edit_path_independent`].
pub fn extract_edit_path(
    pair: &PaddedPair,
    p_soft: &Matrix,
    costs: &CostConfig,
) -> Result<EditPath> {
    if p_soft.shape() != (pair.n(), pair.n()) {
        return Err(GedError::Shape(format!(
            "alignment {:?} for a pair padded to {}",
            p_soft.shape(),
            pair.n()
        )));
    }
    let perm = hungarian_round(p_soft)?;
    edit_path_from_permutation(pair, &perm, costs)
}

/// Rounds the node alignment and the derived pair alignment separately and
/// takes edge edits from the latter.
pub fn extract_edit_path_independent(
    pair: &PaddedPair,
    p_soft: &Matrix,
    costs: &CostConfig,
) -> Result<EditPath> {
    if p_soft.shape() != (pair.n(), pair.n()) {
        return Err(GedError::Shape(format!(
            "alignment {:?} for a pair padded to {}",
            p_soft.shape(),
            pair.n()
        )));
    }
    let perm = hungarian_round(p_soft)?;
    let s = derive_pair_alignment(p_soft)?.s;
    let pair_perm = hungarian_round(&s)?;
    let pairs = pair_list(pair.n());
    let index = |u: usize, v: usize| {
        pairs
            .iter()
            .position(|&e| e == (u, v))
            .expect("canonical pair")
    };
    let pair_map = |u: usize, v: usize| pairs[pair_perm.apply(index(u, v))];
    Ok(EditPath::new(script(pair, &perm, pair_map), costs))
}

/// Replays `ops` on `g`; surviving slots are renumbered in increasing order.
pub fn apply_edit_path(g: &Graph, ops: &[EditOp]) -> Result<Graph> {
    let mut alive: BTreeSet<usize> = (0..g.num_nodes()).collect();
    let mut edges: BTreeSet<(usize, usize)> = g.edges().collect();
    let fail = |step: usize, reason: String| Err(GedError::InvalidEditPath { step, reason });
    for (step, op) in ops.iter().enumerate() {
        match *op {
            EditOp::AddNode(u) => {
                if !alive.insert(u) {
                    return fail(step, format!("node {u} already exists"));
                }
            }
            EditOp::DelNode(u) => {
                if !alive.contains(&u) {
                    return fail(step, format!("node {u} does not exist"));
                }
                if edges.iter().any(|&(a, b)| a == u || b == u) {
                    return fail(step, format!("node {u} still has incident edges"));
                }
                alive.remove(&u);
            }
            EditOp::AddEdge(u, v) | EditOp::DelEdge(u, v) => {
                if u == v {
                    return fail(step, format!("self-loop ({u}, {v})"));
                }
                for w in [u, v] {
                    if !alive.contains(&w) {
                        return fail(step, format!("edge endpoint {w} does not exist"));
                    }
                }
                let e = (u.min(v), u.max(v));
                let add = matches!(op, EditOp::AddEdge(..));
                if add && !edges.insert(e) {
                    return fail(step, format!("edge {e:?} already exists"));
                }
                if !add && !edges.remove(&e) {
                    return fail(step, format!("edge {e:?} does not exist"));
                }
            }
        }
    }
    let slots: Vec<usize> = alive.into_iter().collect();
    let rank = |s: usize| slots.binary_search(&s).expect("alive slot");
    let mut out = Graph::new(
        slots.len(),
        edges.into_iter().map(|(u, v)| (rank(u), rank(v))),
    )?;
    if let Some(labels) = g.labels() {
        // Added nodes take label 0; labels play no part in the structural script.
        let relabeled = slots
            .iter()
            .map(|&s| labels.get(s).copied().unwrap_or(0))
            .collect();
        out = out.with_labels(relabeled)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::exact_ged;
    use crate::graph::is_isomorphic;

    #[test]
    fn identical_graphs_give_empty_path() {
        let g = Graph::cycle(4);
        let pair = PaddedPair::tight(&g, &g);
        let p = Matrix::from_fn(4, 4, |i, j| if i == j { 0.7 } else { 0.1 });
        let path = extract_edit_path(&pair, &p, &CostConfig::uniform()).unwrap();
        assert!(path.is_empty());
        assert_eq!(path.total_cost, 0.0);
    }

    #[test]
    fn triangle_to_path_one_deletion() {
        let c = CostConfig::new(3.0, 1.0, 2.0, 1.0).unwrap();
        let pair = PaddedPair::tight(&Graph::cycle(3), &Graph::path(3));
        let best = exact_ged(&pair, &c).unwrap();
        let path = edit_path_from_permutation(&pair, &best.argmin, &c).unwrap();
        assert_eq!(path.ops.len(), 1);
        assert_eq!(path.ops[0].kind(), EditKind::DelEdge);
        assert_eq!(path.total_cost, 2.0);
        let out = apply_edit_path(pair.source(), &path.ops).unwrap();
        assert!(is_isomorphic(&out, pair.target()));
    }

    #[test]
    fn edge_to_single_node() {
        let c = CostConfig::new(3.0, 1.0, 2.0, 1.0).unwrap();
        let pair = crate::graph::pad_pair(&Graph::path(2), &Graph::empty(1), 2).unwrap();
        let path = extract_edit_path(&pair, &Matrix::identity(2), &c).unwrap();
        assert_eq!(path.ops, vec![EditOp::DelEdge(0, 1), EditOp::DelNode(1)]);
        assert_eq!(path.total_cost, 5.0);
    }

    #[test]
    fn replay_rejects_invalid_scripts() {
        let g = Graph::path(3);
        let bad = [
            vec![EditOp::DelNode(1)],
            vec![EditOp::AddEdge(0, 1)],
            vec![EditOp::DelEdge(0, 2)],
            vec![EditOp::AddNode(2)],
            vec![EditOp::AddEdge(0, 5)],
        ];
        for ops in bad {
            assert!(
                matches!(
                    apply_edit_path(&g, &ops),
                    Err(GedError::InvalidEditPath { step: 0, .. })
                ),
                "{ops:?}"
            );
        }
        assert_eq!(apply_edit_path(&g, &[]).unwrap(), g);
    }

    #[test]
    fn serialised_form() {
        let json = serde_json::to_string(&EditOp::DelEdge(0, 2)).unwrap();
        assert_eq!(json, r#"{"kind":"DelEdge","operands":[0,2]}"#);
        assert_eq!(
            serde_json::from_str::<EditOp>(&json).unwrap(),
            EditOp::DelEdge(0, 2)
        );
        assert!(serde_json::from_str::<EditOp>(r#"{"kind":"AddNode","operands":[1,2]}"#).is_err());
    }
}
