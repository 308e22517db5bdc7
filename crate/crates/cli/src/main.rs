use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use pbct::experiment::run_experiment;
use pbct::generator::{generate_tree, sample_leaf_distributions, simulate_sequence};
use pbct::inference::fbm_leaf_count;
use pbct::io::{
    corpus_digest, format_corpus, read_corpus, read_corpus_with_vocab, read_model, write_model,
    CorpusMode, Provenance,
};
use pbct::likelihood::{compute_counts, log_marginal_likelihood, predict_next};
use pbct::metrics::{marginal_log_loss_with_counts, tree_similarity};
use pbct::{
    build_fbm, fit_pbct, fit_vbm, AlphaSchedule, ExperimentConfig, FitConfig, Hyperparams,
    ModelFile, ModelSpec, PbctError, RngSeed, SequenceCorpus, Vocabulary,
};

#[derive(Parser)]
#[command(name = "pbct", version, about = "Parsimonious Bayesian context trees")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a random tree and simulate sequences from it.
    Simulate(SimulateArgs),
    /// Fit a model to a training corpus.
    Fit(FitArgs),
    /// Print the posterior predictive distribution after a history.
    Predict(PredictArgs),
    /// Marginal log-loss of a fitted model on a test corpus.
    Evaluate(EvaluateArgs),
    /// Per-depth structural similarity between two fitted models.
    Similarity(SimilarityArgs),
    /// Run the simulation-recovery experiment.
    Experiment(ExperimentArgs),
}

#[derive(Args, Clone)]
struct PriorArgs {
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Per-depth multiplier of alpha.
    #[arg(long, default_value_t = 1.0)]
    decay: f64,
    #[arg(long, default_value_t = 3)]
    max_depth: usize,
    /// Symmetric Dirichlet parameter.
    #[arg(long, default_value_t = 1.0)]
    eta: f64,
}

impl PriorArgs {
    fn hyper(&self, vocab_size: u32) -> pbct::Result<Hyperparams> {
        Hyperparams::new(
            vec![self.eta; vocab_size as usize],
            AlphaSchedule::geometric(self.alpha, self.decay),
            self.max_depth,
        )
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    vocab_size: u32,
    #[command(flatten)]
    prior: PriorArgs,
    #[arg(long, default_value_t = 0.0)]
    lambda: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Symbols per sequence.
    #[arg(long)]
    length: usize,
    #[arg(long, default_value_t = 1)]
    sequences: usize,
    /// Corpus output (integer ids); stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the generating tree, with counts from the simulated corpus.
    #[arg(long)]
    tree_out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Tokens,
    Integers,
}

#[derive(Args)]
struct CorpusArgs {
    #[arg(long, value_enum, default_value_t = Mode::Tokens)]
    mode: Mode,
    /// Vocabulary size, required in integers mode.
    #[arg(long)]
    vocab_size: Option<u32>,
}

impl CorpusArgs {
    fn read(&self, path: &Path) -> pbct::Result<SequenceCorpus> {
        let mode = match self.mode {
            Mode::Tokens => CorpusMode::Tokens,
            Mode::Integers => CorpusMode::Integers {
                vocab_size: self.vocab_size.ok_or_else(|| {
                    PbctError::InvalidParameter("--vocab-size is required in integers mode".into())
                })?,
            },
        };
        read_corpus(path, mode)
    }
}

#[derive(Args)]
struct FitArgs {
    #[arg(long)]
    train: PathBuf,
    #[command(flatten)]
    corpus: CorpusArgs,
    #[arg(long, default_value = "pbct")]
    model: ModelSpec,
    #[command(flatten)]
    prior: PriorArgs,
    /// Recorded in the model file.
    #[arg(long)]
    seed: Option<u64>,
    /// Nodes with fewer training contexts stay leaves.
    #[arg(long, default_value_t = 0)]
    min_context_count: usize,
    #[arg(long, default_value_t = 1_000_000)]
    max_leaves: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    /// History, oldest symbol first.
    history: Vec<String>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    test: PathBuf,
}

#[derive(Args)]
struct SimilarityArgs {
    /// Reference model; must have the larger maximum depth.
    #[arg(long)]
    model_a: PathBuf,
    #[arg(long)]
    model_b: PathBuf,
    /// Corpus whose contexts weight the nodes of the reference model.
    #[arg(long)]
    corpus: PathBuf,
    /// Single depth to report; all depths when omitted.
    #[arg(long)]
    depth: Option<usize>,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long, default_value_t = 10)]
    vocab_size: u32,
    #[command(flatten)]
    prior: PriorArgs,
    #[arg(long, default_value_t = 0.0)]
    lambda: f64,
    #[arg(long, default_value_t = 10_000)]
    n_train: usize,
    #[arg(long, default_value_t = 1_000)]
    n_test: usize,
    #[arg(long, default_value_t = 15)]
    replicates: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Comma-separated list of pbct, vbm, fbm:<order>.
    #[arg(
        long = "model",
        value_delimiter = ',',
        default_value = "pbct,vbm,fbm:1,fbm:2,fbm:3"
    )]
    models: Vec<ModelSpec>,
    #[arg(long, default_value_t = 1_000_000)]
    max_leaves: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn emit(out: Option<&Path>, text: &str) -> pbct::Result<()> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn simulate(args: SimulateArgs) -> pbct::Result<()> {
    let vocab = Vocabulary::new(args.vocab_size)?;
    let hyper = args.prior.hyper(args.vocab_size)?;
    let seed = RngSeed::new(args.seed);
    let tree = generate_tree(&vocab, &hyper, seed.derive(1))?;
    let dists = sample_leaf_distributions(&tree, &hyper, args.lambda, &mut seed.derive(2).rng())?;
    let mut rng = seed.derive(3).rng();
    let sequences = (0..args.sequences)
        .map(|_| simulate_sequence(&tree, &dists, args.length, &mut rng))
        .collect::<pbct::Result<Vec<_>>>()?;
    let corpus = SequenceCorpus::new(vocab, sequences)?;
    if let Some(path) = &args.tree_out {
        let counts = compute_counts(&tree, &corpus, hyper.max_depth)?;
        let provenance = Provenance {
            model: Some("simulated".into()),
            seed: Some(args.seed),
            fit_unix_time: None,
            corpus_digest: Some(corpus_digest(&corpus)),
        };
        write_model(path, &ModelFile::new(hyper, tree, counts, provenance)?)?;
    }
    emit(args.out.as_deref(), &format_corpus(&corpus))
}

fn fit(args: FitArgs) -> pbct::Result<()> {
    let corpus = args.corpus.read(&args.train)?;
    let v = corpus.vocab().size();
    let mut hyper = args.prior.hyper(v)?;
    let tree = match args.model {
        ModelSpec::Pbct | ModelSpec::Vbm => {
            let config = FitConfig {
                min_context_count: args.min_context_count,
                ..FitConfig::new(hyper.clone())
            };
            if args.model == ModelSpec::Pbct {
                fit_pbct(&corpus, &config)?
            } else {
                fit_vbm(&corpus, &config)?
            }
        }
        ModelSpec::Fbm(d) => {
            match fbm_leaf_count(v, d) {
                Some(l) if l <= args.max_leaves => {}
                _ => {
                    return Err(PbctError::InvalidParameter(format!(
                        "FBM-{d} over {v} symbols exceeds the leaf budget of {}",
                        args.max_leaves
                    )))
                }
            }
            hyper.max_depth = d;
            build_fbm(corpus.vocab(), d)?
        }
    };
    let counts = compute_counts(&tree, &corpus, hyper.max_depth)?;
    let log_ml = log_marginal_likelihood(&counts, &hyper.eta)?.total_log_ml;
    let provenance = Provenance {
        model: Some(args.model.to_string()),
        seed: args.seed,
        fit_unix_time: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .ok()
            .map(|d| d.as_secs()),
        corpus_digest: Some(corpus_digest(&corpus)),
    };
    let leaves = tree.leaf_count();
    write_model(&args.out, &ModelFile::new(hyper, tree, counts, provenance)?)?;
    eprintln!(
        "{}: {leaves} leaves, log marginal likelihood {log_ml:.5}",
        args.model
    );
    Ok(())
}

fn predict(args: PredictArgs) -> pbct::Result<()> {
    let model = read_model(&args.model)?;
    let vocab = &model.vocab;
    let history = args
        .history
        .iter()
        .map(|tok| {
            vocab.symbol_of(tok).ok_or_else(|| PbctError::UnknownToken {
                token: tok.clone(),
                line: 0,
            })
        })
        .rev()
        .collect::<pbct::Result<Vec<_>>>()?;
    let probs = predict_next(&model.tree, &model.train_counts, &model.hyper.eta, &history)?;
    let mut out = String::new();
    for (i, p) in probs.iter().enumerate() {
        out.push_str(&format!("{}\t{p:.5}\n", vocab.label(i as u32 + 1)));
    }
    emit(None, &out)
}

fn evaluate(args: EvaluateArgs) -> pbct::Result<()> {
    let model = read_model(&args.model)?;
    let test = read_corpus_with_vocab(&args.test, &model.vocab)?;
    let burn_in = model.burn_in();
    let loss = marginal_log_loss_with_counts(
        &model.tree,
        &model.train_counts,
        &test,
        &model.hyper.eta,
        burn_in,
    )?;
    let text = format!(
        "marginal_log_loss\t{loss:.5}\nscored\t{}\nleaves\t{}\n",
        test.scorable_positions(burn_in),
        model.tree.leaf_count()
    );
    emit(None, &text)
}

fn similarity(args: SimilarityArgs) -> pbct::Result<()> {
    let a = read_model(&args.model_a)?;
    let b = read_model(&args.model_b)?;
    let corpus = read_corpus_with_vocab(&args.corpus, &a.vocab)?;
    let depths: Vec<usize> = match args.depth {
        Some(d) => vec![d],
        None => (1..=a.tree.max_depth()).collect(),
    };
    let mut out = String::from("depth\tsimilarity\n");
    for d in depths {
        let s = tree_similarity(&a.tree, &b.tree, &corpus, d)?;
        out.push_str(&format!("{d}\t{s:.5}\n"));
    }
    emit(None, &out)
}

fn experiment(args: ExperimentArgs) -> pbct::Result<()> {
    let config = ExperimentConfig {
        vocab_size: args.vocab_size,
        alpha: args.prior.alpha,
        decay: args.prior.decay,
        max_depth: args.prior.max_depth,
        eta: args.prior.eta,
        lambda: args.lambda,
        n_train: args.n_train,
        n_test: args.n_test,
        replicates: args.replicates,
        seed: args.seed,
        models: args.models,
        max_leaves: args.max_leaves,
    };
    let report = run_experiment(&config)?;
    emit(args.out.as_deref(), &report.render())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Simulate(args) => simulate(args),
        Command::Fit(args) => fit(args),
        Command::Predict(args) => predict(args),
        Command::Evaluate(args) => evaluate(args),
        Command::Similarity(args) => similarity(args),
        Command::Experiment(args) => experiment(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_io() { 2 } else { 1 })
        }
    }
}
