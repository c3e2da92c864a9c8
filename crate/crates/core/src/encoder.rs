//! Message-passing node encoder and the decoupled node-pair network.
//!
//! Weight containers are generic over their storage so the same structure
//! holds stored matrices (`Matrix`) and their images on a tape (`Var`).
//! Layers act on row vectors: `y = x W + b`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::align::SinkhornConfig;
use crate::autodiff::{Tape, Var};
use crate::error::{GedError, Result};
use crate::graph::{pair_bits, pair_list, PaddedPair};
use crate::matrix::Matrix;

#[derive(Clone, Debug, PartialEq)]
pub struct Linear<T> {
    pub weight: T,
    pub bias: T,
}

impl Linear<Matrix> {
    fn init<R: Rng>(fan_in: usize, fan_out: usize, rng: &mut R) -> Self {
        let bound = 1.0 / (fan_in as f64).sqrt();
        Linear {
            weight: Matrix::uniform(fan_in, fan_out, bound, rng),
            bias: Matrix::uniform(1, fan_out, bound, rng),
        }
    }
}

impl<T> Linear<T> {
    fn map<U>(&self, f: &mut impl FnMut(&T) -> U) -> Linear<U> {
        Linear {
            weight: f(&self.weight),
            bias: f(&self.bias),
        }
    }

    fn visit<'a>(&'a self, prefix: &str, out: &mut Vec<(String, &'a T)>) {
        out.push((format!("{prefix}.weight"), &self.weight));
        out.push((format!("{prefix}.bias"), &self.bias));
    }
}

impl Linear<Var> {
    pub fn forward(&self, tape: &mut Tape, x: Var) -> Var {
        let y = tape.matmul(x, self.weight);
        tape.add_bias(y, self.bias)
    }
}

/// Linear, ReLU, Linear.
#[derive(Clone, Debug, PartialEq)]
pub struct Mlp<T> {
    pub hidden: Linear<T>,
    pub output: Linear<T>,
}

impl Mlp<Matrix> {
    pub fn init<R: Rng>(input: usize, hidden: usize, output: usize, rng: &mut R) -> Self {
        Mlp {
            hidden: Linear::init(input, hidden, rng),
            output: Linear::init(hidden, output, rng),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.hidden.weight.rows()
    }

    pub fn output_dim(&self) -> usize {
        self.output.weight.cols()
    }

    pub fn to_tape(&self, tape: &mut Tape) -> Mlp<Var> {
        self.map(&mut |m| tape.leaf(m.clone()))
    }
}

impl<T> Mlp<T> {
    fn map<U>(&self, f: &mut impl FnMut(&T) -> U) -> Mlp<U> {
        Mlp {
            hidden: self.hidden.map(f),
            output: self.output.map(f),
        }
    }

    fn visit<'a>(&'a self, prefix: &str, out: &mut Vec<(String, &'a T)>) {
        self.hidden.visit(&format!("{prefix}.hidden"), out);
        self.output.visit(&format!("{prefix}.output"), out);
    }
}

impl Mlp<Var> {
    pub fn forward(&self, tape: &mut Tape, x: Var) -> Var {
        let h = self.hidden.forward(tape, x);
        let h = tape.relu(h);
        self.output.forward(tape, h)
    }
}

/// Gated recurrent cell; input is the aggregated message, state is the node
/// embedding.
///
/// ```text
/// r  = sigmoid(m W_r + h U_r + b_r)
/// z  = sigmoid(m W_z + h U_z + b_z)
/// n  = tanh(m W_n + b_n + r * (h U_n + b_hn))
/// h' = (1 - z) * n + z * h
/// ```
#[derive(Clone, Debug, PartialEq)]
pub struct Gru<T> {
    pub reset: Linear<T>,
    pub reset_state: T,
    pub update: Linear<T>,
    pub update_state: T,
    pub candidate: Linear<T>,
    pub candidate_state: Linear<T>,
}

impl Gru<Matrix> {
    fn init<R: Rng>(input: usize, state: usize, rng: &mut R) -> Self {
        let bound = 1.0 / (state as f64).sqrt();
        let square = |rng: &mut R| Matrix::uniform(state, state, bound, rng);
        Gru {
            reset: Linear::init(input, state, rng),
            reset_state: square(rng),
            update: Linear::init(input, state, rng),
            update_state: square(rng),
            candidate: Linear::init(input, state, rng),
            candidate_state: Linear::init(state, state, rng),
        }
    }
}

impl<T> Gru<T> {
    fn map<U>(&self, f: &mut impl FnMut(&T) -> U) -> Gru<U> {
        Gru {
            reset: self.reset.map(f),
            reset_state: f(&self.reset_state),
            update: self.update.map(f),
            update_state: f(&self.update_state),
            candidate: self.candidate.map(f),
            candidate_state: self.candidate_state.map(f),
        }
    }

    fn visit<'a>(&'a self, prefix: &str, out: &mut Vec<(String, &'a T)>) {
        self.reset.visit(&format!("{prefix}.reset"), out);
        out.push((format!("{prefix}.reset_state"), &self.reset_state));
        self.update.visit(&format!("{prefix}.update"), out);
        out.push((format!("{prefix}.update_state"), &self.update_state));
        self.candidate.visit(&format!("{prefix}.candidate"), out);
        self.candidate_state
            .visit(&format!("{prefix}.candidate_state"), out);
    }
}

impl Gru<Var> {
    pub fn forward(&self, tape: &mut Tape, message: Var, state: Var) -> Var {
        let gate = |tape: &mut Tape, lin: &Linear<Var>, w_state: Var| {
            let a = lin.forward(tape, message);
            let b = tape.matmul(state, w_state);
            let s = tape.add(a, b);
            tape.sigmoid(s)
        };
        let r = gate(tape, &self.reset, self.reset_state);
        let z = gate(tape, &self.update, self.update_state);
        let cand_in = self.candidate.forward(tape, message);
        let cand_state = self.candidate_state.forward(tape, state);
        let gated = tape.mul(r, cand_state);
        let pre = tape.add(cand_in, gated);
        let n = tape.tanh(pre);
        // (1 - z) * n + z * h = n + z * (h - n)
        let diff = tape.sub(state, n);
        let zd = tape.mul(z, diff);
        tape.add(n, zd)
    }
}

/// Every trainable tensor of the model.
#[derive(Clone, Debug, PartialEq)]
pub struct Weights<T> {
    /// Projection of one-hot labels to the node width; labeled mode only.
    pub label_projection: Option<T>,
    pub message: Mlp<T>,
    pub update: Gru<T>,
    pub pair: Mlp<T>,
    pub cost: Mlp<T>,
}

impl<T> Weights<T> {
    pub fn map<U>(&self, mut f: impl FnMut(&T) -> U) -> Weights<U> {
        Weights {
            label_projection: self.label_projection.as_ref().map(&mut f),
            message: self.message.map(&mut f),
            update: self.update.map(&mut f),
            pair: self.pair.map(&mut f),
            cost: self.cost.map(&mut f),
        }
    }

    /// Named tensors in a fixed order.
    pub fn named(&self) -> Vec<(String, &T)> {
        let mut out = Vec::new();
        if let Some(p) = &self.label_projection {
            out.push(("label_projection".to_string(), p));
        }
        self.message.visit("message", &mut out);
        self.update.visit("update", &mut out);
        self.pair.visit("pair", &mut out);
        self.cost.visit("cost", &mut out);
        out
    }

    pub fn tensors(&self) -> Vec<&T> {
        self.named().into_iter().map(|(_, t)| t).collect()
    }
}

impl Weights<Matrix> {
    /// Rebuilds weights from tensors listed in [`Weights::named`] order.
    pub fn from_tensors(template: &Weights<Matrix>, tensors: Vec<Matrix>) -> Result<Self> {
        let shapes: Vec<(usize, usize)> = template.tensors().iter().map(|m| m.shape()).collect();
        if shapes.len() != tensors.len() {
            return Err(GedError::Shape(format!(
                "expected {} tensors, got {}",
                shapes.len(),
                tensors.len()
            )));
        }
        for (i, (s, t)) in shapes.iter().zip(&tensors).enumerate() {
            if *s != t.shape() {
                return Err(GedError::Shape(format!(
                    "tensor {i}: expected {s:?}, got {:?}",
                    t.shape()
                )));
            }
        }
        let mut it = tensors.into_iter();
        Ok(template.map(|_| it.next().expect("length checked")))
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|m| m.is_finite())
    }

    pub fn num_scalars(&self) -> usize {
        self.tensors().iter().map(|m| m.len()).sum()
    }
}

/// Architecture hyperparameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    /// Propagation layers `K`.
    pub layers: usize,
    /// Node embedding width `d`.
    pub node_dim: usize,
    /// Node-pair embedding width `D`.
    pub pair_dim: usize,
    /// Padded graph size; also the output width of the alignment cost network.
    pub max_nodes: usize,
    /// Label alphabet size when node labels are fed as one-hot features.
    pub num_labels: Option<usize>,
    pub sinkhorn: SinkhornConfig,
}

impl ModelConfig {
    pub fn new(max_nodes: usize) -> Self {
        ModelConfig {
            layers: 5,
            node_dim: 10,
            pair_dim: 20,
            max_nodes,
            num_labels: None,
            sinkhorn: SinkhornConfig::default(),
        }
    }

    pub fn labeled(mut self, num_labels: usize) -> Self {
        self.num_labels = Some(num_labels);
        self
    }
}

/// Model configuration together with its weights.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    pub config: ModelConfig,
    pub weights: Weights<Matrix>,
}

impl ModelParams {
    /// Weights uniform in `+-1/sqrt(fan_in)` from a seeded generator.
    pub fn init(config: ModelConfig, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = config.node_dim;
        let label_projection = config.num_labels.map(|k| {
            let bound = 1.0 / (k.max(1) as f64).sqrt();
            Matrix::uniform(k.max(1), d, bound, &mut rng)
        });
        let weights = Weights {
            label_projection,
            message: Mlp::init(2 * d, d, d, &mut rng),
            update: Gru::init(d, d, &mut rng),
            pair: Mlp::init(2 * d + 1, config.pair_dim, config.pair_dim, &mut rng),
            cost: Mlp::init(d, d, config.max_nodes, &mut rng),
        };
        ModelParams { config, weights }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.weights.is_finite() {
            return Err(GedError::NonFinite("model parameters".into()));
        }
        Ok(())
    }

    /// Places every weight on the tape as a leaf.
    pub fn to_tape(&self, tape: &mut Tape) -> Weights<Var> {
        self.weights.map(|m| tape.leaf(m.clone()))
    }
}

/// Structure of one side of a padded pair, as the encoder sees it.
#[derive(Clone, Debug)]
pub struct GraphInput {
    pub n: usize,
    pub adjacency: Matrix,
    pub indicator: Vec<f64>,
    /// One-hot label rows (zero for padded nodes), labeled mode only.
    pub labels: Option<Matrix>,
    /// Directed message edges `(receiver, sender)`; both orientations listed.
    pub directed_edges: Vec<(usize, usize)>,
}

impl GraphInput {
    pub fn from_pair(pair: &PaddedPair, target: bool, num_labels: Option<usize>) -> Self {
        let (adjacency, indicator, graph) = if target {
            (pair.a_prime.clone(), pair.eta_prime.clone(), pair.target())
        } else {
            (pair.a.clone(), pair.eta.clone(), pair.source())
        };
        let directed_edges = graph.edges().flat_map(|(u, v)| [(u, v), (v, u)]).collect();
        GraphInput {
            n: pair.n(),
            adjacency,
            indicator,
            labels: num_labels.map(|k| pair.label_matrix(target, k)),
            directed_edges,
        }
    }

    fn mask(&self, width: usize) -> Matrix {
        Matrix::from_fn(self.n, width, |i, _| self.indicator[i])
    }
}

/// `K` rounds of neighbour-sum messages and gated updates. Messages travel
/// only along edges; padded nodes start at zero and are zeroed after every
/// round.
pub fn mpnn_on_tape(
    tape: &mut Tape,
    graph: &GraphInput,
    weights: &Weights<Var>,
    config: &ModelConfig,
) -> Var {
    let d = config.node_dim;
    let mask = graph.mask(d);
    let mut x = match (&graph.labels, weights.label_projection) {
        (Some(l), Some(proj)) => {
            let lv = tape.leaf(l.clone());
            tape.matmul(lv, proj)
        }
        _ => tape.leaf(mask.clone()),
    };
    let receivers: Vec<usize> = graph.directed_edges.iter().map(|e| e.0).collect();
    let senders: Vec<usize> = graph.directed_edges.iter().map(|e| e.1).collect();
    for _ in 0..config.layers {
        let aggregated = if receivers.is_empty() {
            tape.leaf(Matrix::zeros(graph.n, d))
        } else {
            let xr = tape.gather_rows(x, &receivers);
            let xs = tape.gather_rows(x, &senders);
            let cat = tape.concat_cols(&[xr, xs]);
            let msg = weights.message.forward(tape, cat);
            tape.scatter_add_rows(msg, &receivers, graph.n)
        };
        let updated = weights.update.forward(tape, aggregated, x);
        x = tape.mul_const(updated, mask.clone());
    }
    x
}

/// `r(u,v) = mlp(x_u || x_v || A[u,v]) + mlp(x_v || x_u || A[v,u])` for every
/// node pair, rows in canonical pair order.
pub fn pair_embed_on_tape(tape: &mut Tape, x: Var, adjacency: &Matrix, pair_net: &Mlp<Var>) -> Var {
    let n = adjacency.rows();
    let pairs = pair_list(n);
    let us: Vec<usize> = pairs.iter().map(|p| p.0).collect();
    let vs: Vec<usize> = pairs.iter().map(|p| p.1).collect();
    let bits = tape.leaf(Matrix::from_vec(pairs.len(), 1, pair_bits(adjacency)));
    let xu = tape.gather_rows(x, &us);
    let xv = tape.gather_rows(x, &vs);
    let forward = tape.concat_cols(&[xu, xv, bits]);
    let backward = tape.concat_cols(&[xv, xu, bits]);
    let rf = pair_net.forward(tape, forward);
    let rb = pair_net.forward(tape, backward);
    tape.add(rf, rb)
}

/// Node embeddings of one padded graph.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeEmbeddings(pub Matrix);

/// Node-pair embeddings, rows in canonical pair order.
#[derive(Clone, Debug, PartialEq)]
pub struct PairEmbeddings(pub Matrix);

pub fn mpnn_forward(graph: &GraphInput, params: &ModelParams) -> Result<NodeEmbeddings> {
    params.validate()?;
    let mut tape = Tape::new();
    let w = params.to_tape(&mut tape);
    let x = mpnn_on_tape(&mut tape, graph, &w, &params.config);
    Ok(NodeEmbeddings(tape.value(x).clone()))
}

pub fn pair_embed(
    x: &NodeEmbeddings,
    adjacency: &Matrix,
    params: &ModelParams,
) -> Result<PairEmbeddings> {
    params.validate()?;
    if x.0.rows() != adjacency.rows() || x.0.cols() != params.config.node_dim {
        return Err(GedError::Shape(format!(
            "embeddings {:?} do not fit adjacency {:?}",
            x.0.shape(),
            adjacency.shape()
        )));
    }
    let mut tape = Tape::new();
    let net = params.weights.pair.to_tape(&mut tape);
    let xv = tape.leaf(x.0.clone());
    let e = pair_embed_on_tape(&mut tape, xv, adjacency, &net);
    Ok(PairEmbeddings(tape.value(e).clone()))
}
