//! `ged`: dataset generation, exact solving, training, evaluation,
//! prediction, edit-path extraction and gradient checking.

mod manifest;

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use ged_core::align::SinkhornConfig;
use ged_core::checkpoint;
use ged_core::dataset::{
    generate_corpus, generate_pairs, read_pair_records, resolve_pairs, split_corpus, write_pairs,
    CorpusConfig, LabeledPair, PairRecord,
};
use ged_core::divergence::{ged_score_with_alignment, SurrogateChoice};
use ged_core::edit_path::{apply_edit_path, edit_path_from_permutation, extract_edit_path, EditOp};
use ged_core::encoder::{ModelConfig, ModelParams};
use ged_core::exact::ExactSolver;
use ged_core::gradcheck::{check_seeded, GradcheckConfig};
use ged_core::graph::{is_isomorphic, pad_pair, read_graphs, write_graphs};
use ged_core::metrics::evaluate_predictions;
use ged_core::train::{predict, train_with_callback, TrainConfig};
use ged_core::{CostConfig, GedError, NamedGraph};

use manifest::Manifest;

#[derive(Parser)]
#[command(
    name = "ged",
    version,
    about = "Graph edit distance: exact oracle and learned surrogates"
)]
struct Cli {
    /// Worker threads for per-pair work (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate (or read) a corpus and label its pairs with the exact solver.
    GenData(GenDataArgs),
    /// Solve one pair exactly.
    Exact(ExactArgs),
    /// Train a model on labelled pairs.
    Train(TrainArgs),
    /// Report MSE and Kendall tau on labelled pairs.
    Eval(EvalArgs),
    /// Print per-pair predictions of a trained model.
    Predict(PredictArgs),
    /// Extract an edit script for one pair, or replay one.
    Editpath(EditpathArgs),
    /// Compare analytic and finite-difference parameter gradients.
    Gradcheck(GradcheckArgs),
}

fn parse_costs(s: &str) -> std::result::Result<CostConfig, String> {
    CostConfig::parse(s).map_err(|e| e.to_string())
}

fn parse_choice(s: &str) -> std::result::Result<SurrogateChoice, String> {
    s.parse().map_err(|e: GedError| e.to_string())
}

#[derive(Args, Clone, Copy, Serialize)]
struct ModelArgs {
    /// Padded graph size.
    #[arg(long = "N")]
    n: Option<usize>,
    /// Sinkhorn temperature.
    #[arg(long, default_value_t = 0.01)]
    tau: f64,
    /// Sinkhorn iterations.
    #[arg(long, default_value_t = 20)]
    sinkhorn_iters: usize,
}

impl ModelArgs {
    fn model_config(&self, default_n: usize) -> ModelConfig {
        let mut config = ModelConfig::new(self.n.unwrap_or(default_n));
        config.sinkhorn = SinkhornConfig {
            tau: self.tau,
            iters: self.sinkhorn_iters,
        };
        config
    }
}

#[derive(Args, Serialize)]
struct GenDataArgs {
    /// Edit costs `a_del,a_add,b_del,b_add[,a_sub]`.
    #[arg(long, value_parser = parse_costs)]
    costs: CostConfig,
    /// Read graphs from this file instead of generating them.
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long, default_value_t = 200)]
    size: usize,
    #[arg(long, default_value_t = 5)]
    min_nodes: usize,
    #[arg(long, default_value_t = 8)]
    max_nodes: usize,
    #[arg(long, default_value_t = 0.3)]
    min_p: f64,
    #[arg(long, default_value_t = 0.5)]
    max_p: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Padded size used for labelling (defaults to the largest graph).
    #[arg(long = "N")]
    n: Option<usize>,
    /// Split graphs 60/20/20 and pair within each part.
    #[arg(long)]
    split: bool,
    #[arg(long)]
    branch_and_bound: bool,
    #[arg(long, default_value = "ged-out")]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct PairArgs {
    /// Graph file, or graph id when `--corpus` is given.
    #[arg(long)]
    source: String,
    #[arg(long)]
    target: String,
    #[arg(long)]
    corpus: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct ExactArgs {
    #[command(flatten)]
    graphs: PairArgs,
    #[arg(long, value_parser = parse_costs)]
    costs: CostConfig,
    #[arg(long = "N")]
    n: Option<usize>,
    /// Also solve the reversed pair.
    #[arg(long)]
    both: bool,
    #[arg(long)]
    branch_and_bound: bool,
    #[arg(long, default_value = "ged-out")]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct TrainArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    val: Option<PathBuf>,
    #[arg(long, value_parser = parse_costs)]
    costs: CostConfig,
    #[arg(long, value_parser = parse_choice, default_value = "edge:xor-diff-align,node:xor-diff-align")]
    choice: SurrogateChoice,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 300)]
    epochs: usize,
    #[arg(long, default_value_t = 100)]
    patience: usize,
    #[arg(long, default_value_t = 64)]
    batch_size: usize,
    #[arg(long, default_value_t = 1e-3)]
    lr: f64,
    #[arg(long, default_value_t = 5e-4)]
    weight_decay: f64,
    /// Random subset of training pairs visited per epoch.
    #[arg(long)]
    pairs_per_epoch: Option<usize>,
    #[arg(long, default_value = "ged-out")]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct EvalArgs {
    #[arg(long)]
    pairs: PathBuf,
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Predictions file written by `predict`, used instead of a checkpoint.
    #[arg(long, conflicts_with = "checkpoint")]
    predictions: Option<PathBuf>,
    #[arg(long, value_parser = parse_costs)]
    costs: CostConfig,
    #[arg(long, value_parser = parse_choice, default_value = "edge:xor-diff-align,node:xor-diff-align")]
    choice: SurrogateChoice,
    #[arg(long, default_value = "ged-out")]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct PredictArgs {
    #[arg(long)]
    pairs: PathBuf,
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long, value_parser = parse_costs)]
    costs: CostConfig,
    #[arg(long, value_parser = parse_choice, default_value = "edge:xor-diff-align,node:xor-diff-align")]
    choice: SurrogateChoice,
    #[arg(long, default_value = "ged-out")]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct EditpathArgs {
    #[command(flatten)]
    graphs: PairArgs,
    #[arg(long, value_parser = parse_costs)]
    costs: CostConfig,
    #[arg(long = "N")]
    n: Option<usize>,
    /// Use the alignment of a trained model instead of the exact optimum.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    #[arg(long, value_parser = parse_choice, default_value = "edge:xor-diff-align,node:xor-diff-align")]
    choice: SurrogateChoice,
    /// Replay this script on the source instead of extracting one.
    #[arg(long)]
    replay: Option<PathBuf>,
    #[arg(long)]
    branch_and_bound: bool,
    #[arg(long, default_value = "ged-out")]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct GradcheckArgs {
    #[arg(long, value_parser = parse_costs)]
    costs: CostConfig,
    #[arg(long, value_parser = parse_choice, default_value = "edge:xor-diff-align,node:xor-diff-align")]
    choice: SurrogateChoice,
    /// Check all nine sum combinations plus MAX and MAX-OR.
    #[arg(long, conflicts_with = "choice")]
    all: bool,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    instances: u64,
    #[arg(long, default_value_t = 1e-5)]
    step: f64,
    #[arg(long, default_value = "ged-out")]
    out: PathBuf,
}

fn read_corpus(path: &Path) -> Result<Vec<NamedGraph>> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read_graphs(BufReader::new(file)).with_context(|| format!("reading {}", path.display()))
}

fn read_records(path: &Path) -> Result<Vec<PairRecord>> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read_pair_records(BufReader::new(file)).with_context(|| format!("reading {}", path.display()))
}

fn check_costs(records: &[PairRecord], costs: &CostConfig, path: &Path) -> Result<()> {
    if let Some(r) = records.iter().find(|r| r.costs != *costs) {
        bail!(GedError::InvalidCosts(format!(
            "{} labels pair ({}, {}) under {:?}, but --costs is {:?}",
            path.display(),
            r.src_id,
            r.tgt_id,
            r.costs,
            costs
        )));
    }
    Ok(())
}

fn resolve_graphs(args: &PairArgs, manifest: &mut Manifest) -> Result<(NamedGraph, NamedGraph)> {
    match &args.corpus {
        Some(path) => {
            manifest.input(path);
            let corpus = read_corpus(path)?;
            let find = |id: &str| {
                corpus
                    .iter()
                    .find(|g| g.id == id)
                    .cloned()
                    .ok_or_else(|| anyhow!("graph `{id}` is not in the corpus"))
            };
            Ok((find(&args.source)?, find(&args.target)?))
        }
        None => {
            let first = |p: &str| -> Result<NamedGraph> {
                let path = Path::new(p);
                read_corpus(path)?
                    .into_iter()
                    .next()
                    .ok_or_else(|| anyhow!("{} holds no graph", path.display()))
            };
            manifest.input(Path::new(&args.source));
            manifest.input(Path::new(&args.target));
            Ok((first(&args.source)?, first(&args.target)?))
        }
    }
}

fn jsonl<T: Serialize>(items: impl IntoIterator<Item = T>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    for item in items {
        serde_json::to_writer(&mut buf, &item)?;
        buf.push(b'\n');
    }
    Ok(buf)
}

fn solver(branch_and_bound: bool) -> ExactSolver {
    if branch_and_bound {
        ExactSolver::branch_and_bound()
    } else {
        ExactSolver::default()
    }
}

fn gen_data(args: GenDataArgs) -> Result<()> {
    let mut manifest = Manifest::start("gen-data", Some(args.seed));
    manifest.config(&args)?;
    let corpus = match &args.corpus {
        Some(path) => {
            manifest.input(path);
            read_corpus(path)?
        }
        None => generate_corpus(&CorpusConfig {
            size: args.size,
            min_nodes: args.min_nodes,
            max_nodes: args.max_nodes,
            min_edge_prob: args.min_p,
            max_edge_prob: args.max_p,
            seed: args.seed,
        })?,
    };
    let solver = solver(args.branch_and_bound);
    let largest = corpus
        .iter()
        .map(|g| g.graph.num_nodes())
        .max()
        .unwrap_or(1);
    let n = args.n.unwrap_or_else(|| largest.min(solver.bound()));
    let mut corpus_bytes = Vec::new();
    write_graphs(&mut corpus_bytes, &corpus)?;
    let mut label = |graphs: &[NamedGraph], file: &str| -> Result<usize> {
        let pairs = generate_pairs(graphs, &args.costs, &solver, n)?;
        let mut buf = Vec::new();
        write_pairs(&mut buf, &pairs)?;
        manifest.write_output(&args.out.join(file), &buf)?;
        Ok(pairs.len())
    };
    std::fs::create_dir_all(&args.out)?;
    let counts = if args.split {
        let (train, val, test) = split_corpus(&corpus, 0.6, 0.2, args.seed);
        vec![
            ("pairs_train.jsonl", label(&train, "pairs_train.jsonl")?),
            ("pairs_val.jsonl", label(&val, "pairs_val.jsonl")?),
            ("pairs_test.jsonl", label(&test, "pairs_test.jsonl")?),
        ]
    } else {
        vec![("pairs.jsonl", label(&corpus, "pairs.jsonl")?)]
    };
    manifest.write_output(&args.out.join("corpus.jsonl"), &corpus_bytes)?;
    println!("{} graphs (padded to {n})", corpus.len());
    for (file, count) in counts {
        println!("{file}: {count} labelled pairs");
    }
    manifest.finish(&args.out)
}

#[derive(Serialize)]
struct ExactLine<'a> {
    direction: &'a str,
    value: f64,
    perm: &'a [usize],
    explored: u64,
}

fn exact(args: ExactArgs) -> Result<()> {
    let mut manifest = Manifest::start("exact", None);
    manifest.config(&args)?;
    let (src, tgt) = resolve_graphs(&args.graphs, &mut manifest)?;
    let n = args
        .n
        .unwrap_or(src.graph.num_nodes().max(tgt.graph.num_nodes()));
    let pair = pad_pair(&src.graph, &tgt.graph, n)?;
    let solver = solver(args.branch_and_bound);
    let forward = solver.solve(&pair, &args.costs)?;
    let mut lines = vec![serde_json::to_value(ExactLine {
        direction: "forward",
        value: forward.value,
        perm: forward.argmin.as_slice(),
        explored: forward.node_count_explored,
    })?];
    if args.both {
        let reverse = solver.solve(&pair.reversed(), &args.costs)?;
        lines.push(serde_json::to_value(ExactLine {
            direction: "reverse",
            value: reverse.value,
            perm: reverse.argmin.as_slice(),
            explored: reverse.node_count_explored,
        })?);
    }
    for line in &lines {
        println!("{line}");
    }
    std::fs::create_dir_all(&args.out)?;
    manifest.write_output(&args.out.join("exact.jsonl"), &jsonl(&lines)?)?;
    manifest.finish(&args.out)
}

fn load_pairs(records: &[PairRecord], corpus: &Path, n: usize) -> Result<Vec<LabeledPair>> {
    Ok(resolve_pairs(records, &read_corpus(corpus)?, n)?)
}

fn train(args: TrainArgs) -> Result<()> {
    let mut manifest = Manifest::start("train", Some(args.seed));
    manifest.config(&args)?;
    let model = args.model.model_config(8);
    let train_records = read_records(&args.train)?;
    check_costs(&train_records, &args.costs, &args.train)?;
    manifest.input(&args.corpus);
    manifest.input(&args.train);
    let train_pairs = load_pairs(&train_records, &args.corpus, model.max_nodes)?;
    let val_pairs = match &args.val {
        Some(path) => {
            let records = read_records(path)?;
            check_costs(&records, &args.costs, path)?;
            manifest.input(path);
            load_pairs(&records, &args.corpus, model.max_nodes)?
        }
        None => Vec::new(),
    };
    let config = TrainConfig {
        learning_rate: args.lr,
        weight_decay: args.weight_decay,
        batch_size: args.batch_size,
        max_epochs: args.epochs,
        patience: args.patience,
        pairs_per_epoch: args.pairs_per_epoch,
        seed: args.seed,
    };
    let init = ModelParams::init(model, args.seed);
    let (params, history) =
        train_with_callback(&train_pairs, &val_pairs, init, &config, args.choice, |r| {
            eprintln!(
                "epoch {:>4}  train {:.6}  val {:.6}",
                r.epoch, r.train_loss, r.val_mse
            )
        })?;
    std::fs::create_dir_all(&args.out)?;
    let mut ckpt = Vec::new();
    checkpoint::write_checkpoint(&mut ckpt, &params)?;
    manifest.write_output(&args.out.join("checkpoint.bin"), &ckpt)?;
    manifest.write_output(
        &args.out.join("history.json"),
        &serde_json::to_vec_pretty(&history)?,
    )?;
    #[derive(Serialize)]
    struct Snapshot<'a> {
        model: &'a ModelConfig,
        train: &'a TrainConfig,
        choice: String,
        costs: &'a CostConfig,
    }
    let snapshot = Snapshot {
        model: &params.config,
        train: &config,
        choice: args.choice.to_string(),
        costs: &args.costs,
    };
    manifest.write_output(
        &args.out.join("config.json"),
        &serde_json::to_vec_pretty(&snapshot)?,
    )?;
    println!(
        "{}",
        serde_json::json!({
            "epochs": history.epochs.len(),
            "best_epoch": history.best_epoch,
            "best_val_mse": history.best_val_mse,
        })
    );
    manifest.finish(&args.out)
}

#[derive(Serialize, Deserialize)]
struct PredictionRecord {
    src_id: String,
    tgt_id: String,
    prediction: f64,
}

fn eval(args: EvalArgs) -> Result<()> {
    let mut manifest = Manifest::start("eval", None);
    manifest.config(&args)?;
    manifest.input(&args.pairs);
    let records = read_records(&args.pairs)?;
    check_costs(&records, &args.costs, &args.pairs)?;
    let truths: Vec<f64> = records.iter().map(|r| r.ged).collect();
    let preds: Vec<f64> = match (&args.predictions, &args.checkpoint) {
        (Some(path), _) => {
            manifest.input(path);
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            let preds: Vec<PredictionRecord> = text
                .lines()
                .filter(|l| !l.trim().is_empty())
                .map(serde_json::from_str)
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| GedError::Parse(format!("{}: {e}", path.display())))?;
            if preds.len() != records.len() {
                bail!(GedError::Shape(format!(
                    "{} predictions for {} pairs",
                    preds.len(),
                    records.len()
                )));
            }
            for (p, r) in preds.iter().zip(&records) {
                if p.src_id != r.src_id || p.tgt_id != r.tgt_id {
                    bail!(GedError::Parse(format!(
                        "prediction for ({}, {}) lines up with pair ({}, {})",
                        p.src_id, p.tgt_id, r.src_id, r.tgt_id
                    )));
                }
            }
            preds.into_iter().map(|p| p.prediction).collect()
        }
        (None, Some(ckpt)) => {
            let corpus = args
                .corpus
                .as_ref()
                .ok_or_else(|| anyhow!("--checkpoint needs --corpus"))?;
            manifest.input(ckpt);
            manifest.input(corpus);
            let params = checkpoint::load(ckpt)?;
            let pairs = load_pairs(&records, corpus, params.config.max_nodes)?;
            predict(&pairs, &params, args.choice)?
        }
        (None, None) => bail!("eval needs --checkpoint or --predictions"),
    };
    let metrics = evaluate_predictions(&preds, &truths)?;
    let json = serde_json::to_string(&metrics)?;
    println!("{json}");
    std::fs::create_dir_all(&args.out)?;
    manifest.write_output(&args.out.join("metrics.json"), json.as_bytes())?;
    manifest.finish(&args.out)
}

fn predict_cmd(args: PredictArgs) -> Result<()> {
    let mut manifest = Manifest::start("predict", None);
    manifest.config(&args)?;
    for p in [&args.pairs, &args.corpus, &args.checkpoint] {
        manifest.input(p);
    }
    let records = read_records(&args.pairs)?;
    check_costs(&records, &args.costs, &args.pairs)?;
    let params = checkpoint::load(&args.checkpoint)?;
    let pairs = load_pairs(&records, &args.corpus, params.config.max_nodes)?;
    let preds = predict(&pairs, &params, args.choice)?;
    let out: Vec<PredictionRecord> = records
        .iter()
        .zip(&preds)
        .map(|(r, &prediction)| PredictionRecord {
            src_id: r.src_id.clone(),
            tgt_id: r.tgt_id.clone(),
            prediction,
        })
        .collect();
    let bytes = jsonl(&out)?;
    print!("{}", String::from_utf8_lossy(&bytes));
    std::fs::create_dir_all(&args.out)?;
    manifest.write_output(&args.out.join("predictions.jsonl"), &bytes)?;
    manifest.finish(&args.out)
}

fn editpath(args: EditpathArgs) -> Result<bool> {
    let mut manifest = Manifest::start("editpath", None);
    manifest.config(&args)?;
    let (src, tgt) = resolve_graphs(&args.graphs, &mut manifest)?;
    std::fs::create_dir_all(&args.out)?;
    let (ops, cost) = match &args.replay {
        Some(path) => {
            manifest.input(path);
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            let ops: Vec<EditOp> = text
                .lines()
                .filter(|l| !l.trim().is_empty())
                .map(serde_json::from_str)
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| GedError::Parse(format!("{}: {e}", path.display())))?;
            let cost = ged_core::edit_path::path_cost(&ops, &args.costs);
            (ops, cost)
        }
        None => {
            let path = match &args.checkpoint {
                Some(ckpt) => {
                    manifest.input(ckpt);
                    let params = checkpoint::load(ckpt)?;
                    let pair = pad_pair(&src.graph, &tgt.graph, params.config.max_nodes)?;
                    let (_, p) =
                        ged_score_with_alignment(&pair, &params, &args.costs, args.choice)?;
                    extract_edit_path(&pair, &p, &args.costs)?
                }
                None => {
                    let n = args
                        .n
                        .unwrap_or(src.graph.num_nodes().max(tgt.graph.num_nodes()));
                    let pair = pad_pair(&src.graph, &tgt.graph, n)?;
                    let best = solver(args.branch_and_bound).solve(&pair, &args.costs)?;
                    edit_path_from_permutation(&pair, &best.argmin, &args.costs)?
                }
            };
            manifest.write_output(&args.out.join("script.jsonl"), &jsonl(&path.ops)?)?;
            (path.ops, path.total_cost)
        }
    };
    let replayed = apply_edit_path(&src.graph, &ops)?;
    let iso = is_isomorphic(&replayed, &tgt.graph);
    let verdict = if iso { "isomorphic" } else { "not isomorphic" };
    let summary = serde_json::json!({ "ops": ops.len(), "cost": cost, "verdict": verdict });
    for op in &ops {
        println!("{op}");
    }
    println!("{summary}");
    manifest.write_output(
        &args.out.join("editpath.json"),
        summary.to_string().as_bytes(),
    )?;
    manifest.finish(&args.out)?;
    Ok(iso)
}

fn gradcheck(args: GradcheckArgs) -> Result<bool> {
    let mut manifest = Manifest::start("gradcheck", Some(args.seed));
    manifest.config(&args)?;
    let model = args.model.model_config(5);
    let config = GradcheckConfig {
        step: args.step,
        ..Default::default()
    };
    let choices = if args.all {
        SurrogateChoice::all()
    } else {
        vec![args.choice]
    };
    let mut all_pass = true;
    let mut reports = Vec::new();
    for choice in choices {
        for i in 0..args.instances {
            let seed = args.seed.wrapping_add(i);
            let report = check_seeded(seed, model, &args.costs, choice, &config)?;
            println!(
                "{choice} seed {seed}: max relative error {:.3e} ({} checked, {} skipped at kinks) {}",
                report.max_rel_error,
                report.checked,
                report.skipped,
                if report.passed { "PASS" } else { "FAIL" }
            );
            all_pass &= report.passed;
            reports.push(
                serde_json::json!({ "choice": choice.to_string(), "seed": seed, "report": report }),
            );
        }
    }
    println!("{}", if all_pass { "PASS" } else { "FAIL" });
    std::fs::create_dir_all(&args.out)?;
    manifest.write_output(
        &args.out.join("gradcheck.json"),
        &serde_json::to_vec_pretty(&reports)?,
    )?;
    manifest.finish(&args.out)?;
    Ok(all_pass)
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.chain().find_map(|e| e.downcast_ref::<GedError>()) {
        Some(GedError::Capability { .. } | GedError::OversizedGraph { .. }) => 3,
        Some(GedError::Checkpoint(_)) => 4,
        Some(GedError::Parse(_) | GedError::Json(_) | GedError::InvalidGraph(_)) => 5,
        Some(GedError::NanLoss { .. }) => 6,
        _ => 1,
    }
}

fn run(cli: Cli) -> Result<bool> {
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()?;
    }
    match cli.command {
        Command::GenData(a) => gen_data(a).map(|_| true),
        Command::Exact(a) => exact(a).map(|_| true),
        Command::Train(a) => train(a).map(|_| true),
        Command::Eval(a) => eval(a).map(|_| true),
        Command::Predict(a) => predict_cmd(a).map(|_| true),
        Command::Editpath(a) => editpath(a),
        Command::Gradcheck(a) => gradcheck(a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            if matches!(
                e.chain().find_map(|e| e.downcast_ref::<GedError>()),
                Some(GedError::Capability { .. })
            ) {
                eprintln!("hint: pass --branch-and-bound to raise the size bound");
            }
            ExitCode::from(exit_code(&e))
        }
    }
}
