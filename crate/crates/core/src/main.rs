//! Command-line interface: `train`, `predict` and `evaluate`.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use offlang::corpus::Task;
use offlang::pipeline::{
    cmd_evaluate, cmd_predict, cmd_train, FeatureKind, ModelKind, RunConfig,
};
use offlang::Result;

#[derive(Parser)]
#[command(
    name = "offlang",
    version,
    about = "Offensive-language classification for tweets: train, predict, evaluate"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a classifier and write a self-contained model file.
    Train(Box<TrainArgs>),
    /// Run a saved model over a TSV of tweets, writing an id,label CSV.
    Predict(PredictArgs),
    /// Score a prediction CSV against a gold CSV.
    Evaluate(EvaluateArgs),
}

#[derive(Args)]
struct TrainArgs {
    /// JSON file with a full or partial RunConfig; command-line flags win.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Classification task: A, B or C.
    #[arg(long)]
    task: Option<String>,
    /// Classifier: lr, nb, sgd, lstm, bilstm or cnn.
    #[arg(long)]
    model: Option<String>,
    /// Features: bow, tfidf or seq (defaults to bow for linear models, seq
    /// for neural ones).
    #[arg(long)]
    features: Option<String>,
    /// Random-draw balance the training classes before fitting.
    #[arg(long)]
    balance: bool,
    #[arg(long)]
    seed: Option<u64>,

    /// Training data (OLID-format TSV).
    #[arg(long)]
    train: Option<PathBuf>,
    /// Optional validation TSV; neural models otherwise carve a 90/10 split.
    #[arg(long)]
    val: Option<PathBuf>,
    /// Where to write the model file.
    #[arg(long)]
    out: Option<PathBuf>,

    // preprocessing: the adopted steps are on by default
    /// Keep @USER mentions.
    #[arg(long)]
    keep_mentions: bool,
    /// Keep URL placeholders.
    #[arg(long)]
    keep_urls: bool,
    /// Keep punctuation characters.
    #[arg(long)]
    keep_punctuation: bool,
    /// Keep symbol characters.
    #[arg(long)]
    keep_symbols: bool,
    /// Skip lowercasing.
    #[arg(long)]
    no_lowercase: bool,
    /// Skip abbreviation expansion.
    #[arg(long)]
    no_abbrev: bool,
    /// Remove emoji code points.
    #[arg(long)]
    remove_emoji: bool,
    /// Remove whole #hashtag tokens.
    #[arg(long)]
    remove_hashtags: bool,
    /// Remove digit characters.
    #[arg(long)]
    remove_numbers: bool,
    /// Remove stopword tokens.
    #[arg(long)]
    remove_stopwords: bool,
    /// Abbreviation lexicon file (key<TAB>replacement per line).
    #[arg(long)]
    lexicon: Option<PathBuf>,
    /// Stopword list file (one word per line).
    #[arg(long)]
    stopwords: Option<PathBuf>,

    /// Vocabulary size cap.
    #[arg(long)]
    vocab_size: Option<usize>,
    /// Sequence length (defaults to the longest training document).
    #[arg(long)]
    max_len: Option<usize>,
    /// Clamp bag-of-words counts to 0/1 presence.
    #[arg(long)]
    binary_counts: bool,
    /// TSV whose tweets join the vocabulary-fitting corpus (compatibility
    /// switch; leaks evaluation vocabulary into the feature space).
    #[arg(long)]
    vocab_union: Option<PathBuf>,

    #[arg(long)]
    learning_rate: Option<f64>,
    /// L2 regularization strength.
    #[arg(long)]
    l2: Option<f64>,
    /// Iteration cap for the linear fitters.
    #[arg(long)]
    max_epochs: Option<usize>,
    /// Convergence tolerance for the linear fitters.
    #[arg(long)]
    tol: Option<f64>,
    /// Naive Bayes smoothing constant.
    #[arg(long)]
    nb_alpha: Option<f64>,

    /// Neural epoch count (defaults per architecture and task).
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    /// sgd or adam.
    #[arg(long)]
    optimizer: Option<String>,
    #[arg(long)]
    dropout: Option<f64>,
    /// Early-stopping patience in epochs; 0 disables early stopping.
    #[arg(long)]
    patience: Option<usize>,
    #[arg(long)]
    emb_dim: Option<usize>,
    #[arg(long)]
    hidden: Option<usize>,
    #[arg(long)]
    n_filters: Option<usize>,
    #[arg(long)]
    window: Option<usize>,
    /// Training fraction of the internal neural validation split.
    #[arg(long)]
    val_ratio: Option<f64>,

    /// Write the per-epoch history CSV here (neural models).
    #[arg(long)]
    history_out: Option<PathBuf>,
    /// Write a `rank token frequency` vocabulary dump here.
    #[arg(long)]
    vocab_dump: Option<PathBuf>,
}

#[derive(Args)]
struct PredictArgs {
    /// Model file written by `train`.
    #[arg(long)]
    model: PathBuf,
    /// TSV with `id` and `tweet` columns.
    #[arg(long)]
    data: PathBuf,
    /// Output CSV path (`id,label` per line, no header).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Prediction CSV (`id,label`, no header).
    #[arg(long)]
    pred: PathBuf,
    /// Gold CSV (`id,label`, no header).
    #[arg(long)]
    gold: PathBuf,
    /// Also write the machine-readable report here.
    #[arg(long)]
    csv: Option<PathBuf>,
}

fn path_string(p: &std::path::Path) -> String {
    p.display().to_string()
}

fn build_config(args: &TrainArgs) -> Result<RunConfig> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| offlang::Error::io(path_string(path), e))?;
            serde_json::from_str::<RunConfig>(&text).map_err(|e| {
                offlang::Error::InvalidConfig(format!("bad config file {}: {e}", path.display()))
            })?
        }
        None => RunConfig::default(),
    };

    if let Some(task) = &args.task {
        cfg.task = Task::parse(task)?;
    } else if args.config.is_none() {
        return Err(offlang::Error::InvalidConfig("missing --task".into()));
    }
    if let Some(model) = &args.model {
        cfg.model = ModelKind::parse(model)?;
    } else if args.config.is_none() {
        return Err(offlang::Error::InvalidConfig("missing --model".into()));
    }
    if let Some(f) = &args.features {
        cfg.features = Some(FeatureKind::parse(f)?);
    }
    if args.balance {
        cfg.balance = true;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(p) = &args.train {
        cfg.train_path = path_string(p);
    }
    if let Some(p) = &args.val {
        cfg.val_path = Some(path_string(p));
    }
    if let Some(p) = &args.out {
        cfg.model_out = path_string(p);
    }

    if args.keep_mentions {
        cfg.clean.remove_user_mentions = false;
    }
    if args.keep_urls {
        cfg.clean.remove_url_tokens = false;
    }
    if args.keep_punctuation {
        cfg.clean.remove_punctuation = false;
    }
    if args.keep_symbols {
        cfg.clean.remove_symbols = false;
    }
    if args.no_lowercase {
        cfg.clean.lowercase = false;
    }
    if args.no_abbrev {
        cfg.clean.expand_abbreviations = false;
    }
    if args.remove_emoji {
        cfg.clean.remove_emoji = true;
    }
    if args.remove_hashtags {
        cfg.clean.remove_hashtags = true;
    }
    if args.remove_numbers {
        cfg.clean.remove_numbers = true;
    }
    if args.remove_stopwords {
        cfg.clean.remove_stopwords = true;
    }
    if let Some(p) = &args.lexicon {
        cfg.lexicon_path = Some(path_string(p));
    }
    if let Some(p) = &args.stopwords {
        cfg.stopwords_path = Some(path_string(p));
    }

    if let Some(v) = args.vocab_size {
        cfg.vocab_size = v;
    }
    if let Some(v) = args.max_len {
        cfg.max_len = Some(v);
    }
    if args.binary_counts {
        cfg.binary_counts = true;
    }
    if let Some(p) = &args.vocab_union {
        cfg.vocab_union = Some(path_string(p));
    }
    if let Some(v) = args.learning_rate {
        cfg.learning_rate = Some(v);
    }
    if let Some(v) = args.l2 {
        cfg.l2_lambda = Some(v);
    }
    if let Some(v) = args.max_epochs {
        cfg.max_epochs = v;
    }
    if let Some(v) = args.tol {
        cfg.tol = v;
    }
    if let Some(v) = args.nb_alpha {
        cfg.nb_alpha = v;
    }
    if let Some(v) = args.epochs {
        cfg.epochs = Some(v);
    }
    if let Some(v) = args.batch_size {
        cfg.batch_size = v;
    }
    if let Some(o) = &args.optimizer {
        cfg.optimizer = match o.as_str() {
            "sgd" => offlang::neural::OptimizerKind::Sgd,
            "adam" => offlang::neural::OptimizerKind::Adam,
            other => {
                return Err(offlang::Error::InvalidConfig(format!(
                    "unknown optimizer {other:?}"
                )))
            }
        };
    }
    if let Some(v) = args.dropout {
        cfg.dropout = v;
    }
    if let Some(v) = args.patience {
        cfg.patience = v;
    }
    if let Some(v) = args.emb_dim {
        cfg.emb_dim = Some(v);
    }
    if let Some(v) = args.hidden {
        cfg.hidden = v;
    }
    if let Some(v) = args.n_filters {
        cfg.n_filters = v;
    }
    if let Some(v) = args.window {
        cfg.window = v;
    }
    if let Some(v) = args.val_ratio {
        cfg.val_ratio = v;
    }
    if let Some(p) = &args.history_out {
        cfg.history_out = Some(path_string(p));
    }
    if let Some(p) = &args.vocab_dump {
        cfg.vocab_dump = Some(path_string(p));
    }
    Ok(cfg)
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Train(args) => {
            let cfg = build_config(&args)?;
            let outcome = cmd_train(&cfg)?;
            if let Some((split, report)) = &outcome.metrics {
                println!("{split} metrics:");
                print!("{}", report.render_table());
            }
            if let Some(history) = &outcome.history {
                println!(
                    "epochs run: {}, best epoch: {}",
                    history.val_loss.len(),
                    history.best_epoch
                );
            }
            println!("model written to {}", cfg.model_out);
        }
        Command::Predict(args) => {
            let n = cmd_predict(&args.model, &args.data, &args.out)?;
            println!("wrote {n} predictions to {}", args.out.display());
        }
        Command::Evaluate(args) => {
            let report = cmd_evaluate(&args.pred, &args.gold)?;
            print!("{}", report.render_table());
            if let Some(csv) = &args.csv {
                std::fs::write(csv, report.render_csv())
                    .map_err(|e| offlang::Error::io(path_string(csv), e))?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
