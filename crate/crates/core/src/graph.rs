//! Graphs, padding to a common size, canonical node-pair indexing, edit
//! costs and the boolean gates used by the gated surrogates.

use std::collections::BTreeSet;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{GedError, Result};
use crate::matrix::Matrix;

/// Simple undirected graph with optional integer node labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    num_nodes: usize,
    edges: BTreeSet<(usize, usize)>,
    labels: Option<Vec<usize>>,
}

impl Graph {
    /// Builds a graph, normalising each edge to `(min, max)`. Duplicate
    /// listings of the same unordered pair collapse to one edge.
    pub fn new(num_nodes: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            if u == v {
                return Err(GedError::InvalidGraph(format!("self-loop on node {u}")));
            }
            if u >= num_nodes || v >= num_nodes {
                return Err(GedError::InvalidGraph(format!(
                    "edge ({u}, {v}) references a node outside 0..{num_nodes}"
                )));
            }
            set.insert((u.min(v), u.max(v)));
        }
        Ok(Graph {
            num_nodes,
            edges: set,
            labels: None,
        })
    }

    pub fn with_labels(mut self, labels: Vec<usize>) -> Result<Self> {
        if labels.len() != self.num_nodes {
            return Err(GedError::InvalidGraph(format!(
                "{} labels given for {} nodes",
                labels.len(),
                self.num_nodes
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn empty(num_nodes: usize) -> Self {
        Graph {
            num_nodes,
            edges: BTreeSet::new(),
            labels: None,
        }
    }

    pub fn path(n: usize) -> Self {
        Graph::new(n, (1..n).map(|v| (v - 1, v))).expect("path edges are valid")
    }

    pub fn cycle(n: usize) -> Self {
        assert!(n >= 3, "a cycle needs at least three nodes");
        Graph::new(n, (0..n).map(|v| (v, (v + 1) % n))).expect("cycle edges are valid")
    }

    pub fn complete(n: usize) -> Self {
        Graph::new(n, (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)))).expect("valid")
    }

    #[inline]
    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    #[inline]
    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges.contains(&(u.min(v), u.max(v)))
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    pub fn label(&self, u: usize) -> Option<usize> {
        self.labels.as_ref().map(|l| l[u])
    }

    pub fn degree(&self, u: usize) -> usize {
        self.edges
            .iter()
            .filter(|&&(a, b)| a == u || b == u)
            .count()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.num_nodes];
        for &(u, v) in &self.edges {
            deg[u] += 1;
            deg[v] += 1;
        }
        deg
    }

    /// Relabels nodes: node `u` becomes `sigma[u]`.
    pub fn permuted(&self, sigma: &[usize]) -> Graph {
        assert_eq!(sigma.len(), self.num_nodes);
        let edges = self.edges.iter().map(|&(u, v)| (sigma[u], sigma[v]));
        let mut g = Graph::new(self.num_nodes, edges).expect("permutation keeps edges valid");
        if let Some(labels) = &self.labels {
            let mut moved = vec![0; self.num_nodes];
            for (u, &l) in labels.iter().enumerate() {
                moved[sigma[u]] = l;
            }
            g.labels = Some(moved);
        }
        g
    }

    pub fn adjacency(&self, n: usize) -> Matrix {
        let mut a = Matrix::zeros(n, n);
        for &(u, v) in &self.edges {
            a[(u, v)] = 1.0;
            a[(v, u)] = 1.0;
        }
        a
    }
}

/// Backtracking isomorphism test. Labels are compared when both graphs
/// carry them; an unlabeled graph matches label-agnostically.
pub fn is_isomorphic(g: &Graph, h: &Graph) -> bool {
    if g.num_nodes != h.num_nodes || g.num_edges() != h.num_edges() {
        return false;
    }
    let check_labels = g.labels.is_some() && h.labels.is_some();
    let dg = g.degrees();
    let dh = h.degrees();
    let mut sg = dg.clone();
    let mut sh = dh.clone();
    sg.sort_unstable();
    sh.sort_unstable();
    if sg != sh {
        return false;
    }
    if check_labels {
        let mut lg = g.labels.clone().unwrap();
        let mut lh = h.labels.clone().unwrap();
        lg.sort_unstable();
        lh.sort_unstable();
        if lg != lh {
            return false;
        }
    }
    let n = g.num_nodes;
    let ag = g.adjacency(n);
    let ah = h.adjacency(n);
    // Visit high-degree nodes first: they constrain the search most.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&u| std::cmp::Reverse(dg[u]));

    struct Ctx<'a> {
        ag: &'a Matrix,
        ah: &'a Matrix,
        dg: &'a [usize],
        dh: &'a [usize],
        labels: Option<(&'a [usize], &'a [usize])>,
    }

    fn extend(
        depth: usize,
        order: &[usize],
        map: &mut [usize],
        used: &mut [bool],
        ctx: &Ctx,
    ) -> bool {
        let Ctx {
            ag,
            ah,
            dg,
            dh,
            labels,
        } = *ctx;
        if depth == order.len() {
            return true;
        }
        let u = order[depth];
        for cand in 0..used.len() {
            if used[cand] || dg[u] != dh[cand] {
                continue;
            }
            if let Some((lg, lh)) = labels {
                if lg[u] != lh[cand] {
                    continue;
                }
            }
            let consistent = order[..depth]
                .iter()
                .all(|&w| ag[(u, w)] == ah[(cand, map[w])]);
            if !consistent {
                continue;
            }
            map[u] = cand;
            used[cand] = true;
            if extend(depth + 1, order, map, used, ctx) {
                return true;
            }
            used[cand] = false;
        }
        false
    }

    let labels = if check_labels {
        Some((g.labels.as_deref().unwrap(), h.labels.as_deref().unwrap()))
    } else {
        None
    };
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];
    extend(
        0,
        &order,
        &mut map,
        &mut used,
        &Ctx {
            ag: &ag,
            ah: &ah,
            dg: &dg,
            dh: &dh,
            labels,
        },
    )
}

/// The five scalar edit costs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostConfig {
    pub node_del: f64,
    pub node_add: f64,
    pub edge_del: f64,
    pub edge_add: f64,
    #[serde(default)]
    pub node_sub: f64,
}

impl CostConfig {
    pub fn new(node_del: f64, node_add: f64, edge_del: f64, edge_add: f64) -> Result<Self> {
        Self::with_substitution(node_del, node_add, edge_del, edge_add, 0.0)
    }

    pub fn with_substitution(
        node_del: f64,
        node_add: f64,
        edge_del: f64,
        edge_add: f64,
        node_sub: f64,
    ) -> Result<Self> {
        let c = CostConfig {
            node_del,
            node_add,
            edge_del,
            edge_add,
            node_sub,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn uniform() -> Self {
        CostConfig {
            node_del: 1.0,
            node_add: 1.0,
            edge_del: 1.0,
            edge_add: 1.0,
            node_sub: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.node_del,
            self.node_add,
            self.edge_del,
            self.edge_add,
            self.node_sub,
        ];
        if all.iter().any(|c| !c.is_finite() || *c < 0.0) {
            return Err(GedError::InvalidCosts(format!(
                "costs must be finite and >= 0, got {self:?}"
            )));
        }
        if self.node_sub > self.node_del + self.node_add {
            return Err(GedError::InvalidCosts(format!(
                "node substitution {} exceeds node deletion + addition {}",
                self.node_sub,
                self.node_del + self.node_add
            )));
        }
        Ok(())
    }

    pub fn has_substitution(&self) -> bool {
        self.node_sub > 0.0
    }

    pub fn scaled(&self, lambda: f64) -> CostConfig {
        CostConfig {
            node_del: self.node_del * lambda,
            node_add: self.node_add * lambda,
            edge_del: self.edge_del * lambda,
            edge_add: self.edge_add * lambda,
            node_sub: self.node_sub * lambda,
        }
    }

    /// Parses `a_del,a_add,b_del,b_add[,a_sub]`.
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|e| GedError::Parse(format!("cost `{p}`: {e}")))
            })
            .collect::<Result<_>>()?;
        match parts.as_slice() {
            [a, b, c, d] => Self::new(*a, *b, *c, *d),
            [a, b, c, d, e] => Self::with_substitution(*a, *b, *c, *d, *e),
            _ => Err(GedError::Parse(format!(
                "expected 4 or 5 comma-separated costs, got `{s}`"
            ))),
        }
    }
}

/// Two graphs padded with isolated nodes to a common size `n`. Padded nodes
/// occupy indices `num_nodes..n` on each side.
#[derive(Clone, Debug)]
pub struct PaddedPair {
    n: usize,
    source: Graph,
    target: Graph,
    pub a: Matrix,
    pub a_prime: Matrix,
    pub eta: Vec<f64>,
    pub eta_prime: Vec<f64>,
}

pub fn pad_pair(source: &Graph, target: &Graph, n: usize) -> Result<PaddedPair> {
    let needed = source.num_nodes().max(target.num_nodes());
    if n < needed {
        return Err(GedError::PaddingTooSmall {
            requested: n,
            needed,
        });
    }
    let indicator = |g: &Graph| {
        (0..n)
            .map(|u| if u < g.num_nodes() { 1.0 } else { 0.0 })
            .collect()
    };
    Ok(PaddedPair {
        n,
        a: source.adjacency(n),
        a_prime: target.adjacency(n),
        eta: indicator(source),
        eta_prime: indicator(target),
        source: source.clone(),
        target: target.clone(),
    })
}

impl PaddedPair {
    /// Pads to the larger of the two graphs.
    pub fn tight(source: &Graph, target: &Graph) -> PaddedPair {
        pad_pair(source, target, source.num_nodes().max(target.num_nodes())).expect("tight padding")
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn source(&self) -> &Graph {
        &self.source
    }

    pub fn target(&self) -> &Graph {
        &self.target
    }

    /// Same pair with source and target swapped.
    pub fn reversed(&self) -> PaddedPair {
        PaddedPair {
            n: self.n,
            source: self.target.clone(),
            target: self.source.clone(),
            a: self.a_prime.clone(),
            a_prime: self.a.clone(),
            eta: self.eta_prime.clone(),
            eta_prime: self.eta.clone(),
        }
    }

    pub fn source_pad_set(&self) -> Vec<usize> {
        (self.source.num_nodes()..self.n).collect()
    }

    pub fn target_pad_set(&self) -> Vec<usize> {
        (self.target.num_nodes()..self.n).collect()
    }

    pub fn is_labeled(&self) -> bool {
        self.source.labels.is_some() && self.target.labels.is_some()
    }

    /// Size of the shared label alphabet (max label + 1 over both graphs).
    pub fn label_count(&self) -> usize {
        let max = |g: &Graph| {
            g.labels()
                .and_then(|l| l.iter().max().copied())
                .map_or(0, |m| m + 1)
        };
        max(&self.source).max(max(&self.target))
    }

    /// One-hot label rows of the source (`target = false`) or target graph;
    /// padded rows are zero. Unlabeled graphs use the single label 0.
    pub fn label_matrix(&self, target: bool, num_labels: usize) -> Matrix {
        let g = if target { &self.target } else { &self.source };
        let mut l = Matrix::zeros(self.n, num_labels.max(1));
        for u in 0..g.num_nodes() {
            l[(u, g.label(u).unwrap_or(0))] = 1.0;
        }
        l
    }
}

/// Number of unordered pairs over `n` nodes.
#[inline]
pub fn num_pairs(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Lexicographic rank of the unordered pair `{u, v}` among all pairs
/// `(a, b)`, `a < b < n`.
pub fn pair_index(u: usize, v: usize, n: usize) -> Result<usize> {
    if u == v {
        return Err(GedError::SelfPair(u));
    }
    let (a, b) = (u.min(v), u.max(v));
    if b >= n {
        return Err(GedError::NodeOutOfRange { index: b, n });
    }
    Ok(pair_index_unchecked(a, b, n))
}

#[inline]
pub(crate) fn pair_index_unchecked(a: usize, b: usize, n: usize) -> usize {
    debug_assert!(a < b && b < n);
    a * (2 * n - a - 1) / 2 + (b - a - 1)
}

/// All pairs `(u, v)`, `u < v`, in `pair_index` order.
pub fn pair_list(n: usize) -> Vec<(usize, usize)> {
    (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .collect()
}

/// Adjacency bits listed per node pair, in `pair_index` order.
pub fn pair_bits(a: &Matrix) -> Vec<f64> {
    pair_list(a.rows())
        .into_iter()
        .map(|(u, v)| a[(u, v)])
        .collect()
}

#[inline]
pub fn xor_gate(c1: f64, c2: f64) -> f64 {
    c1 + c2 - 2.0 * c1 * c2
}

#[inline]
pub fn or_gate(c1: f64, c2: f64) -> f64 {
    c1 + c2 - c1 * c2
}

#[inline]
pub fn and_gate(c1: f64, c2: f64) -> f64 {
    c1 * c2
}

/// One graph record of the line-delimited graph format.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphRecord {
    pub id: String,
    pub num_nodes: usize,
    pub edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<usize>>,
}

/// A graph together with its corpus id.
#[derive(Clone, Debug, PartialEq)]
pub struct NamedGraph {
    pub id: String,
    pub graph: Graph,
}

impl NamedGraph {
    pub fn new(id: impl Into<String>, graph: Graph) -> Self {
        NamedGraph {
            id: id.into(),
            graph,
        }
    }

    pub fn to_record(&self) -> GraphRecord {
        GraphRecord {
            id: self.id.clone(),
            num_nodes: self.graph.num_nodes(),
            edges: self.graph.edges().map(|(u, v)| [u, v]).collect(),
            labels: self.graph.labels.clone(),
        }
    }
}

impl TryFrom<GraphRecord> for NamedGraph {
    type Error = GedError;

    fn try_from(r: GraphRecord) -> Result<Self> {
        let mut g = Graph::new(r.num_nodes, r.edges.iter().map(|e| (e[0], e[1])))
            .map_err(|e| GedError::InvalidGraph(format!("record `{}`: {e}", r.id)))?;
        if let Some(labels) = r.labels {
            g = g.with_labels(labels)?;
        }
        Ok(NamedGraph { id: r.id, graph: g })
    }
}

/// Reads graph records, one JSON object per non-blank line.
pub fn read_graphs<R: BufRead>(reader: R) -> Result<Vec<NamedGraph>> {
    let mut out = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: GraphRecord = serde_json::from_str(&line)
            .map_err(|e| GedError::Parse(format!("graph record on line {}: {e}", lineno + 1)))?;
        out.push(NamedGraph::try_from(rec)?);
    }
    Ok(out)
}

pub fn write_graphs<W: Write>(mut writer: W, graphs: &[NamedGraph]) -> Result<()> {
    for g in graphs {
        serde_json::to_writer(&mut writer, &g.to_record())?;
        writeln!(writer)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn edge() -> Graph {
        Graph::new(2, [(0, 1)]).unwrap()
    }

    #[test]
    fn pad_edge_and_single_node() {
        let p = pad_pair(&edge(), &Graph::empty(1), 2).unwrap();
        assert_eq!(p.a, Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]));
        assert_eq!(p.a_prime, Matrix::zeros(2, 2));
        assert_eq!(p.eta, vec![1.0, 1.0]);
        assert_eq!(p.eta_prime, vec![1.0, 0.0]);
        assert_eq!(p.target_pad_set(), vec![1]);
    }

    #[test]
    fn pad_identical_triangles() {
        let t = Graph::complete(3);
        let p = pad_pair(&t, &t, 3).unwrap();
        assert_eq!(p.a, p.a_prime);
        assert_eq!(p.eta, vec![1.0; 3]);
        assert_eq!(p.eta_prime, vec![1.0; 3]);
    }

    #[test]
    fn pad_path_and_triangle_to_five() {
        let p = pad_pair(&Graph::path(3), &Graph::complete(3), 5).unwrap();
        assert_eq!(p.eta, vec![1.0, 1.0, 1.0, 0.0, 0.0]);
        assert_eq!(p.eta_prime, vec![1.0, 1.0, 1.0, 0.0, 0.0]);
        for u in 3..5 {
            assert!(p.a.row(u).iter().all(|&x| x == 0.0));
            assert!((0..5).all(|v| p.a[(v, u)] == 0.0));
            assert!(p.a_prime.row(u).iter().all(|&x| x == 0.0));
        }
        assert_eq!(p.a.sum(), 4.0);
        assert_eq!(p.a_prime.sum(), 6.0);
    }

    #[test]
    fn pad_rejects_small_n() {
        let err = pad_pair(&Graph::path(4), &Graph::empty(1), 3).unwrap_err();
        assert!(matches!(
            err,
            GedError::PaddingTooSmall {
                requested: 3,
                needed: 4
            }
        ));
    }

    #[test]
    fn pad_is_idempotent_in_content() {
        let g = Graph::cycle(4);
        let h = Graph::path(3);
        let p = pad_pair(&g, &h, 4).unwrap();
        let q = pad_pair(p.source(), p.target(), 4).unwrap();
        assert_eq!(p.a, q.a);
        assert_eq!(p.a_prime, q.a_prime);
        assert_eq!(p.eta_prime, q.eta_prime);
    }

    #[test]
    fn pair_index_examples() {
        assert_eq!(pair_index(0, 1, 3).unwrap(), 0);
        assert_eq!(pair_index(1, 2, 3).unwrap(), 2);
        assert_eq!(pair_index(2, 0, 4).unwrap(), 1);
        assert!(matches!(pair_index(2, 2, 4), Err(GedError::SelfPair(2))));
        assert!(pair_index(0, 4, 4).is_err());
    }

    #[test]
    fn pair_index_is_bijection() {
        for n in 2..9 {
            let pairs = pair_list(n);
            assert_eq!(pairs.len(), num_pairs(n));
            for (k, &(u, v)) in pairs.iter().enumerate() {
                assert_eq!(pair_index(u, v, n).unwrap(), k);
                assert_eq!(pair_index(v, u, n).unwrap(), k);
            }
        }
    }

    #[test]
    fn gates() {
        assert_eq!(xor_gate(1.0, 0.0), 1.0);
        assert_eq!(xor_gate(1.0, 1.0), 0.0);
        assert_eq!(xor_gate(0.0, 0.0), 0.0);
        assert_eq!(or_gate(0.0, 1.0), 1.0);
        assert_eq!(or_gate(0.0, 0.0), 0.0);
        assert_eq!(and_gate(1.0, 0.0), 0.0);
        assert_eq!(and_gate(1.0, 1.0), 1.0);
    }

    #[test]
    fn graph_validation() {
        assert!(Graph::new(3, [(1, 1)]).is_err());
        assert!(Graph::new(3, [(0, 3)]).is_err());
        let g = Graph::new(3, [(1, 0), (0, 1), (2, 1)]).unwrap();
        assert_eq!(g.num_edges(), 2);
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1), (1, 2)]);
        assert!(Graph::empty(2).with_labels(vec![0]).is_err());
    }

    #[test]
    fn costs_parse_and_validate() {
        let c = CostConfig::parse("3,1,2,1").unwrap();
        assert_eq!(
            (c.node_del, c.node_add, c.edge_del, c.edge_add, c.node_sub),
            (3.0, 1.0, 2.0, 1.0, 0.0)
        );
        assert_eq!(CostConfig::parse("1,1,1,1,2").unwrap().node_sub, 2.0);
        assert!(CostConfig::parse("1,1,1,1,3").is_err());
        assert!(CostConfig::parse("1,1,-1,1").is_err());
        assert!(CostConfig::parse("1,1,1").is_err());
    }

    #[test]
    fn isomorphism_basics() {
        let c = Graph::cycle(4);
        assert!(is_isomorphic(&c, &c.permuted(&[2, 0, 3, 1])));
        assert!(!is_isomorphic(&c, &Graph::path(4)));
        let star = Graph::new(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
        let tri_tail = Graph::new(4, [(0, 1), (1, 2), (2, 0)]).unwrap();
        assert!(!is_isomorphic(&star, &tri_tail));
        let a = Graph::path(2).with_labels(vec![0, 1]).unwrap();
        let b = Graph::path(2).with_labels(vec![1, 1]).unwrap();
        assert!(!is_isomorphic(&a, &b));
        assert!(is_isomorphic(&a, &a.permuted(&[1, 0])));
    }

    #[test]
    fn record_roundtrip() {
        let g = NamedGraph::new("g1", Graph::cycle(4).with_labels(vec![0, 1, 0, 2]).unwrap());
        let mut buf = Vec::new();
        write_graphs(&mut buf, std::slice::from_ref(&g)).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(
            r#"{"id":"g1","num_nodes":4,"edges":[[0,1],[0,3],[1,2],[2,3]],"labels":[0,1,0,2]}"#
        ));
        assert_eq!(read_graphs(&buf[..]).unwrap(), vec![g]);
    }
}
