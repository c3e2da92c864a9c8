//! Oracles and generators shared by the integration tests. Nothing here
//! calls into the solver under test.

#![allow(dead_code)]

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use ged_core::{CostConfig, Graph};
use rand::Rng;

pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

pub fn random_graph<R: Rng>(rng: &mut R, min_n: usize, max_n: usize) -> Graph {
    let n = rng.gen_range(min_n..=max_n);
    let p = rng.gen_range(0.2..0.8);
    let edges: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .filter(|_| rng.gen_bool(p))
        .collect();
    Graph::new(n, edges).unwrap()
}

/// Costs in `[0, 3]`: small integers when `integer`, otherwise uniform reals.
pub fn random_costs<R: Rng>(rng: &mut R, integer: bool) -> CostConfig {
    let mut draw = || {
        if integer {
            rng.gen_range(0..=3) as f64
        } else {
            rng.gen_range(0.0..3.0)
        }
    };
    CostConfig::new(draw(), draw(), draw(), draw()).unwrap()
}

/// Isomorphism by trying every bijection.
pub fn brute_isomorphic(g: &Graph, h: &Graph) -> bool {
    let n = g.num_nodes();
    if n != h.num_nodes() || g.num_edges() != h.num_edges() {
        return false;
    }
    permutations(n)
        .iter()
        .any(|p| g.edges().all(|(u, v)| h.has_edge(p[u], p[v])))
}

const W: usize = 8;

fn bit(u: usize, v: usize) -> u64 {
    let (a, b) = if u < v { (u, v) } else { (v, u) };
    1 << (a * W + b)
}

fn has(mask: u64, u: usize, v: usize) -> bool {
    mask & bit(u, v) != 0
}

fn canonical(n: usize, mask: u64, perms: &[Vec<usize>]) -> (usize, u64) {
    let mut best = u64::MAX;
    for p in perms {
        let mut m = 0;
        for u in 0..n {
            for v in u + 1..n {
                if has(mask, u, v) {
                    m |= bit(p[u], p[v]);
                }
            }
        }
        best = best.min(m);
    }
    (n, if n < 2 { 0 } else { best })
}

fn mask_of(g: &Graph) -> u64 {
    g.edges().fold(0, |m, (u, v)| m | bit(u, v))
}

/// Minimum total cost of a sequence of edits (add/delete an isolated node,
/// add/delete an edge) turning `g` into a graph isomorphic to `h`, by
/// uniform-cost search over isomorphism classes. Intermediate graphs have at
/// most `max(|V|, |V'|)` nodes.
pub fn edit_sequence_ged(g: &Graph, h: &Graph, costs: &CostConfig) -> f64 {
    let bound = g.num_nodes().max(h.num_nodes());
    assert!(bound <= 6, "oracle is meant for tiny graphs");
    let perms: Vec<Vec<Vec<usize>>> = (0..=bound).map(permutations).collect();
    let start = canonical(g.num_nodes(), mask_of(g), &perms[g.num_nodes()]);
    let goal = canonical(h.num_nodes(), mask_of(h), &perms[h.num_nodes()]);

    let mut dist: HashMap<(usize, u64), f64> = HashMap::new();
    let mut heap = BinaryHeap::new();
    dist.insert(start, 0.0);
    heap.push(Reverse((Ordered(0.0), start)));
    while let Some(Reverse((Ordered(d), state))) = heap.pop() {
        if state == goal {
            return d;
        }
        if d > dist[&state] {
            continue;
        }
        let (n, mask) = state;
        let mut next: Vec<((usize, u64), f64)> = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if has(mask, u, v) {
                    next.push(((n, mask & !bit(u, v)), costs.edge_del));
                } else {
                    next.push(((n, mask | bit(u, v)), costs.edge_add));
                }
            }
        }
        if n < bound {
            next.push(((n + 1, mask), costs.node_add));
        }
        for w in 0..n {
            if (0..n).any(|x| x != w && has(mask, w, x)) {
                continue;
            }
            let relabel = |x: usize| if x > w { x - 1 } else { x };
            let mut m = 0;
            for u in 0..n {
                for v in u + 1..n {
                    if has(mask, u, v) {
                        m |= bit(relabel(u), relabel(v));
                    }
                }
            }
            next.push(((n - 1, m), costs.node_del));
        }
        for ((nn, m), c) in next {
            let s = canonical(nn, m, &perms[nn]);
            let nd = d + c;
            if dist.get(&s).is_none_or(|&old| nd < old) {
                dist.insert(s, nd);
                heap.push(Reverse((Ordered(nd), s)));
            }
        }
    }
    unreachable!("every target is reachable")
}

#[derive(Clone, Copy, PartialEq)]
struct Ordered(f64);

impl Eq for Ordered {}

impl PartialOrd for Ordered {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ordered {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}
