//! Synthetic corpora, oracle-labelled pairs and graph-level splits.

use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{GedError, Result};
use crate::exact::ExactSolver;
use crate::graph::{is_isomorphic, pad_pair, CostConfig, Graph, NamedGraph, PaddedPair};

/// Erdős–Rényi `G(n, p)`.
pub fn erdos_renyi<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Graph::new(n, edges).expect("generated edges are in range")
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusConfig {
    pub size: usize,
    pub min_nodes: usize,
    pub max_nodes: usize,
    pub min_edge_prob: f64,
    pub max_edge_prob: f64,
    pub seed: u64,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig {
            size: 200,
            min_nodes: 5,
            max_nodes: 8,
            min_edge_prob: 0.3,
            max_edge_prob: 0.5,
            seed: 0,
        }
    }
}

/// Draws `size` pairwise non-isomorphic random graphs with ids `g0000`, ...
/// Gives up (returning fewer graphs) after `100 * size` draws.
pub fn generate_corpus(config: &CorpusConfig) -> Result<Vec<NamedGraph>> {
    if config.min_nodes == 0 || config.min_nodes > config.max_nodes {
        return Err(GedError::InvalidGraph(format!(
            "node range {}..={} is empty",
            config.min_nodes, config.max_nodes
        )));
    }
    let probs_ok = (0.0..=1.0).contains(&config.min_edge_prob)
        && (0.0..=1.0).contains(&config.max_edge_prob)
        && config.min_edge_prob <= config.max_edge_prob;
    if !probs_ok {
        return Err(GedError::InvalidGraph(format!(
            "edge probability range {}..={} is invalid",
            config.min_edge_prob, config.max_edge_prob
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut out: Vec<NamedGraph> = Vec::with_capacity(config.size);
    for _ in 0..config.size.saturating_mul(100) {
        if out.len() == config.size {
            break;
        }
        let n = rng.gen_range(config.min_nodes..=config.max_nodes);
        let p = rng.gen_range(config.min_edge_prob..=config.max_edge_prob);
        let g = erdos_renyi(n, p, &mut rng);
        if out.iter().all(|h| !is_isomorphic(&h.graph, &g)) {
            out.push(NamedGraph::new(format!("g{:04}", out.len()), g));
        }
    }
    Ok(out)
}

/// Keeps the first graph of every isomorphism class, in input order.
pub fn dedup_isomorphic(graphs: &[NamedGraph]) -> Vec<NamedGraph> {
    let mut out: Vec<NamedGraph> = Vec::new();
    for g in graphs {
        if out.iter().all(|h| !is_isomorphic(&h.graph, &g.graph)) {
            out.push(g.clone());
        }
    }
    out
}

/// Shuffles with `seed` and cuts into train / validation / test by the given
/// fractions; the test part takes the remainder.
pub fn split_corpus(
    graphs: &[NamedGraph],
    train_frac: f64,
    val_frac: f64,
    seed: u64,
) -> (Vec<NamedGraph>, Vec<NamedGraph>, Vec<NamedGraph>) {
    let mut shuffled = graphs.to_vec();
    shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n = shuffled.len();
    let n_train = ((n as f64) * train_frac).round() as usize;
    let n_val = (((n as f64) * val_frac).round() as usize).min(n - n_train.min(n));
    let test = shuffled.split_off((n_train + n_val).min(n));
    let val = shuffled.split_off(n_train.min(n));
    (shuffled, val, test)
}

/// A source/target pair with its exact GED under `costs`.
#[derive(Clone, Debug)]
pub struct LabeledPair {
    pub src_id: String,
    pub tgt_id: String,
    pub pair: PaddedPair,
    pub ged: f64,
    pub costs: CostConfig,
}

impl LabeledPair {
    pub fn to_record(&self) -> PairRecord {
        PairRecord {
            src_id: self.src_id.clone(),
            tgt_id: self.tgt_id.clone(),
            ged: self.ged,
            costs: self.costs,
        }
    }
}

/// One line of the pairs file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairRecord {
    pub src_id: String,
    pub tgt_id: String,
    pub ged: f64,
    pub costs: CostConfig,
}

/// Deduplicates the corpus up to isomorphism, then labels every pair
/// `(i, j)` with `i <= j` (self-pairs included) with the exact solver, after
/// padding to `n` nodes.
pub fn generate_pairs(
    corpus: &[NamedGraph],
    costs: &CostConfig,
    solver: &ExactSolver,
    n: usize,
) -> Result<Vec<LabeledPair>> {
    costs.validate()?;
    for g in corpus {
        let nodes = g.graph.num_nodes();
        if nodes > solver.bound() || nodes > n {
            return Err(GedError::OversizedGraph {
                id: g.id.clone(),
                n: nodes,
                bound: solver.bound().min(n),
            });
        }
    }
    solver.check_size(n)?;
    let graphs = dedup_isomorphic(corpus);
    let mut out = Vec::with_capacity(graphs.len() * (graphs.len() + 1) / 2);
    for (i, src) in graphs.iter().enumerate() {
        for tgt in &graphs[i..] {
            let pair = pad_pair(&src.graph, &tgt.graph, n)?;
            let ged = solver.solve(&pair, costs)?.value;
            out.push(LabeledPair {
                src_id: src.id.clone(),
                tgt_id: tgt.id.clone(),
                pair,
                ged,
                costs: *costs,
            });
        }
    }
    Ok(out)
}

pub fn write_pairs<W: Write>(mut writer: W, pairs: &[LabeledPair]) -> Result<()> {
    for p in pairs {
        serde_json::to_writer(&mut writer, &p.to_record())?;
        writeln!(writer)?;
    }
    Ok(())
}

pub fn read_pair_records<R: BufRead>(reader: R) -> Result<Vec<PairRecord>> {
    let mut out = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line)
                .map_err(|e| GedError::Parse(format!("pair record on line {}: {e}", lineno + 1)))?,
        );
    }
    Ok(out)
}

/// Resolves pair records against a corpus, padding to `n`.
pub fn resolve_pairs(
    records: &[PairRecord],
    corpus: &[NamedGraph],
    n: usize,
) -> Result<Vec<LabeledPair>> {
    let lookup = |id: &str| {
        corpus
            .iter()
            .find(|g| g.id == id)
            .ok_or_else(|| GedError::Parse(format!("pair references unknown graph `{id}`")))
    };
    records
        .iter()
        .map(|r| {
            let (s, t) = (lookup(&r.src_id)?, lookup(&r.tgt_id)?);
            Ok(LabeledPair {
                src_id: r.src_id.clone(),
                tgt_id: r.tgt_id.clone(),
                pair: pad_pair(&s.graph, &t.graph, n)?,
                ged: r.ged,
                costs: r.costs,
            })
        })
        .collect()
}
