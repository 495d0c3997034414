//! End-to-end commands: `train`, `predict`, `evaluate`.
//!
//! [`cmd_train`] wires the full pipeline — load, task view, optional
//! random-draw balancing, cleaning and tokenization, feature fitting on the
//! training data only (unless a vocabulary-union file is given), model
//! fitting, persistence. [`cmd_predict`] runs a saved model over a TSV of
//! tweets and writes an `id,label` CSV. [`cmd_evaluate`] scores a prediction
//! CSV against a gold CSV.

pub mod model_file;

use std::collections::BTreeMap;
use std::path::Path;

use crate::corpus::{self, Task, TaskView};
use crate::error::{Error, Result};
use crate::eval::{self, MetricsReport};
use crate::features::{
    self, bow_vectorize, build_vocabulary, corpus_max_len, tfidf_fit, tfidf_transform,
    word2idx_encode, CountVector, EncodedSequence, TfidfModel, VocabMode, Vocabulary,
};
use crate::linear::{self, FitConfig, LinearKind, LinearModel, NaiveBayesModel, SparseVec};
use crate::neural::{
    neural_predict, train_model, Arch, NetDims, NeuralModel, OptimizerKind, TrainConfig,
    TrainHistory,
};
use crate::rng::Rng;
use crate::textprep::{clean, tokenize, AbbreviationLexicon, CleanConfig, StopwordList, TokenList};

pub use model_file::{FeatureSpec, ModelFile, ModelWeights, FORMAT_VERSION};

/// Which classifier to train.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Lr,
    Nb,
    Sgd,
    Lstm,
    Bilstm,
    Cnn,
}

impl ModelKind {
    pub fn is_neural(self) -> bool {
        matches!(self, ModelKind::Lstm | ModelKind::Bilstm | ModelKind::Cnn)
    }

    pub fn arch(self) -> Option<Arch> {
        match self {
            ModelKind::Lstm => Some(Arch::Lstm),
            ModelKind::Bilstm => Some(Arch::BiLstm),
            ModelKind::Cnn => Some(Arch::Cnn),
            _ => None,
        }
    }

    pub fn parse(s: &str) -> Result<ModelKind> {
        match s {
            "lr" => Ok(ModelKind::Lr),
            "nb" => Ok(ModelKind::Nb),
            "sgd" => Ok(ModelKind::Sgd),
            "lstm" => Ok(ModelKind::Lstm),
            "bilstm" => Ok(ModelKind::Bilstm),
            "cnn" => Ok(ModelKind::Cnn),
            other => Err(Error::InvalidArgument(format!("unknown model {other:?}"))),
        }
    }
}

/// Document representation fed to the classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    Bow,
    Tfidf,
    Seq,
}

impl FeatureKind {
    pub fn parse(s: &str) -> Result<FeatureKind> {
        match s {
            "bow" => Ok(FeatureKind::Bow),
            "tfidf" => Ok(FeatureKind::Tfidf),
            "seq" => Ok(FeatureKind::Seq),
            other => Err(Error::InvalidArgument(format!("unknown features {other:?}"))),
        }
    }
}

/// Full training configuration. Every field has a default; `features`,
/// learning rate, L2 strength, embedding size and epoch count default
/// per-model (see the `resolved_*` methods).
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub task: Task,
    pub model: ModelKind,
    /// `None` picks bag-of-words for linear models and sequences for neural.
    pub features: Option<FeatureKind>,
    /// Random-draw balance the training data before fitting.
    pub balance: bool,
    pub seed: u64,

    pub clean: CleanConfig,
    /// Override the shipped abbreviation lexicon.
    pub lexicon_path: Option<String>,
    /// Override the shipped stopword list.
    pub stopwords_path: Option<String>,

    pub vocab_size: usize,
    /// Sequence length; `None` uses the longest training document.
    pub max_len: Option<usize>,
    /// Clamp bag-of-words counts to presence indicators.
    pub binary_counts: bool,
    /// Extra TSV whose tweets join the vocabulary-fitting corpus (but never
    /// the training rows).
    pub vocab_union: Option<String>,

    /// `None` = per-model default (0.1 logistic, 0.01 hinge, 1e-3 neural).
    pub learning_rate: Option<f64>,
    /// `None` = per-model default (1e-4 linear, 1e-5 neural).
    pub l2_lambda: Option<f64>,
    /// Full-batch iteration cap for the linear fitters.
    pub max_epochs: usize,
    pub tol: f64,
    pub nb_alpha: f64,

    /// `None` = per-architecture, per-task default.
    pub epochs: Option<usize>,
    pub batch_size: usize,
    pub optimizer: OptimizerKind,
    pub dropout: f64,
    /// 0 disables early stopping.
    pub patience: usize,
    /// `None` = 60 for the LSTMs, 100 for the CNN.
    pub emb_dim: Option<usize>,
    pub hidden: usize,
    pub n_filters: usize,
    pub window: usize,
    /// Training fraction of the internal neural split.
    pub val_ratio: f64,

    pub train_path: String,
    pub val_path: Option<String>,
    pub model_out: String,
    pub history_out: Option<String>,
    pub vocab_dump: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            task: Task::A,
            model: ModelKind::Lr,
            features: None,
            balance: false,
            seed: 42,
            clean: CleanConfig::default(),
            lexicon_path: None,
            stopwords_path: None,
            vocab_size: 2500,
            max_len: None,
            binary_counts: false,
            vocab_union: None,
            learning_rate: None,
            l2_lambda: None,
            max_epochs: 500,
            tol: 1e-6,
            nb_alpha: 1.0,
            epochs: None,
            batch_size: 32,
            optimizer: OptimizerKind::Adam,
            dropout: 0.5,
            patience: 2,
            emb_dim: None,
            hidden: 100,
            n_filters: 100,
            window: 3,
            val_ratio: 0.9,
            train_path: String::new(),
            val_path: None,
            model_out: String::new(),
            history_out: None,
            vocab_dump: None,
        }
    }
}

impl RunConfig {
    pub fn resolved_features(&self) -> FeatureKind {
        self.features.unwrap_or(if self.model.is_neural() {
            FeatureKind::Seq
        } else {
            FeatureKind::Bow
        })
    }

    pub fn resolved_learning_rate(&self) -> f64 {
        self.learning_rate.unwrap_or(match self.model {
            ModelKind::Lr => 0.1,
            ModelKind::Sgd => 0.01,
            _ => 1e-3,
        })
    }

    pub fn resolved_l2(&self) -> f64 {
        self.l2_lambda
            .unwrap_or(if self.model.is_neural() { 1e-5 } else { 1e-4 })
    }

    pub fn resolved_emb_dim(&self) -> usize {
        self.emb_dim.unwrap_or(match self.model {
            ModelKind::Cnn => 100,
            _ => 60,
        })
    }

    pub fn resolved_epochs(&self) -> usize {
        match (self.epochs, self.model.arch()) {
            (Some(e), _) => e,
            (None, Some(arch)) => arch.default_epochs(self.task),
            (None, None) => 0,
        }
    }

    /// Check cross-field invariants. Neural models need sequence features,
    /// linear models need count-style features.
    pub fn validate(&self) -> Result<()> {
        let features = self.resolved_features();
        if self.model.is_neural() && features != FeatureKind::Seq {
            return Err(Error::InvalidConfig(format!(
                "model {:?} requires --features seq",
                self.model
            )));
        }
        if !self.model.is_neural() && features == FeatureKind::Seq {
            return Err(Error::InvalidConfig(format!(
                "model {:?} requires --features bow or tfidf",
                self.model
            )));
        }
        if self.vocab_size == 0 {
            return Err(Error::InvalidConfig("vocab size must be at least 1".into()));
        }
        if !(self.val_ratio > 0.0 && self.val_ratio < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "val ratio must be in (0, 1), got {}",
                self.val_ratio
            )));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::InvalidConfig(format!(
                "dropout must be in [0, 1), got {}",
                self.dropout
            )));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidConfig("batch size must be positive".into()));
        }
        if self.window == 0 {
            return Err(Error::InvalidConfig("window must be at least 1".into()));
        }
        if self.nb_alpha <= 0.0 {
            return Err(Error::InvalidConfig("nb alpha must be positive".into()));
        }
        Ok(())
    }

    fn fit_config(&self) -> FitConfig {
        FitConfig {
            l2_lambda: self.resolved_l2(),
            learning_rate: self.resolved_learning_rate(),
            max_epochs: self.max_epochs,
            tol: self.tol,
            seed: self.seed,
        }
    }

    fn train_config(&self) -> TrainConfig {
        TrainConfig {
            epochs: self.resolved_epochs(),
            batch_size: self.batch_size,
            learning_rate: self.resolved_learning_rate(),
            optimizer: self.optimizer,
            l2_lambda: self.resolved_l2(),
            dropout_p: self.dropout,
            patience: if self.patience == 0 {
                None
            } else {
                Some(self.patience)
            },
            seed: self.seed,
            ..TrainConfig::default()
        }
    }

    /// The copy stored inside a model file: output paths cleared so the same
    /// training command always snapshots identically.
    fn snapshot(&self) -> RunConfig {
        RunConfig {
            model_out: String::new(),
            history_out: None,
            vocab_dump: None,
            ..self.clone()
        }
    }
}

fn load_lexicon(cfg: &RunConfig) -> Result<AbbreviationLexicon> {
    match &cfg.lexicon_path {
        Some(p) => AbbreviationLexicon::load(p),
        None => Ok(AbbreviationLexicon::shipped()),
    }
}

fn load_stopwords(cfg: &RunConfig) -> Result<StopwordList> {
    match &cfg.stopwords_path {
        Some(p) => StopwordList::load(p),
        None => Ok(StopwordList::shipped()),
    }
}

fn label_indices(view: &TaskView, classes: &[String]) -> Result<Vec<usize>> {
    view.pairs
        .iter()
        .map(|(_, label)| {
            classes
                .iter()
                .position(|c| c == label)
                .ok_or_else(|| Error::InvalidArgument(format!("unexpected label {label:?}")))
        })
        .collect()
}

fn preprocess(
    texts: &[String],
    cfg: &RunConfig,
    lex: &AbbreviationLexicon,
    stopwords: &StopwordList,
) -> Vec<TokenList> {
    texts
        .iter()
        .map(|t| tokenize(&clean(t, &cfg.clean, lex, stopwords)))
        .collect()
}

fn counts_of(docs: &[TokenList], vocab: &Vocabulary, binary: bool) -> Vec<CountVector> {
    docs.iter()
        .map(|d| {
            let v = bow_vectorize(d, vocab);
            if binary {
                v.to_binary()
            } else {
                v
            }
        })
        .collect()
}

fn counts_to_sparse(counts: &[CountVector]) -> Vec<SparseVec> {
    counts
        .iter()
        .map(|c| c.pairs.iter().map(|&(i, n)| (i, n as f64)).collect())
        .collect()
}

fn tfidf_to_sparse(counts: &[CountVector], model: &TfidfModel) -> Result<Vec<SparseVec>> {
    counts.iter().map(|c| tfidf_transform(c, model)).collect()
}

/// What `cmd_train` hands back for reporting.
pub struct TrainOutcome {
    /// Name of the split metrics were computed on, plus the report.
    pub metrics: Option<(String, MetricsReport)>,
    pub history: Option<TrainHistory>,
}

/// Train a model per `cfg` and persist it to `cfg.model_out`.
pub fn cmd_train(cfg: &RunConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    if cfg.train_path.is_empty() {
        return Err(Error::InvalidConfig("missing training data path".into()));
    }
    if cfg.model_out.is_empty() {
        return Err(Error::InvalidConfig("missing model output path".into()));
    }

    let dataset = corpus::load_olid_tsv(&cfg.train_path)?;
    let mut view = corpus::task_view(&dataset, cfg.task);
    if view.pairs.is_empty() {
        return Err(Error::EmptyInput(format!(
            "no examples for task {} in {}",
            cfg.task, cfg.train_path
        )));
    }
    if cfg.balance {
        view = corpus::random_draw_balance(&view, cfg.seed)?;
    }

    let lex = load_lexicon(cfg)?;
    let stopwords = load_stopwords(cfg)?;
    let classes: Vec<String> = cfg.task.labels().iter().map(|s| s.to_string()).collect();
    let labels = label_indices(&view, &classes)?;
    let texts: Vec<String> = view.pairs.iter().map(|(t, _)| t.clone()).collect();
    let docs = preprocess(&texts, cfg, &lex, &stopwords);

    // vocabulary corpus: training docs, optionally extended by the
    // compatibility union file
    let mut vocab_docs = docs.clone();
    if let Some(extra_path) = &cfg.vocab_union {
        let rows = read_id_tweet_tsv(extra_path)?;
        let extra_texts: Vec<String> = rows.into_iter().map(|(_, tweet)| tweet).collect();
        vocab_docs.extend(preprocess(&extra_texts, cfg, &lex, &stopwords));
    }

    let features = cfg.resolved_features();
    let mode = if features == FeatureKind::Seq {
        VocabMode::Sequence
    } else {
        VocabMode::DenseCount
    };
    let vocab = build_vocabulary(&vocab_docs, cfg.vocab_size, mode)?;
    if let Some(dump_path) = &cfg.vocab_dump {
        std::fs::write(dump_path, vocab.dump()).map_err(|e| Error::io(dump_path, e))?;
    }

    let val_view = match &cfg.val_path {
        Some(p) => {
            let val_ds = corpus::load_olid_tsv(p)?;
            let v = corpus::task_view(&val_ds, cfg.task);
            if v.pairs.is_empty() {
                return Err(Error::EmptyInput(format!("no examples for task {} in {p}", cfg.task)));
            }
            Some(v)
        }
        None => None,
    };

    let (model_weights, feature_spec, outcome) = if cfg.model.is_neural() {
        train_neural(cfg, &vocab, &docs, &labels, &classes, val_view.as_ref(), &lex, &stopwords)?
    } else {
        train_linear(cfg, &vocab, &docs, &labels, &classes, val_view.as_ref(), &lex, &stopwords)?
    };

    let file = ModelFile {
        format_version: FORMAT_VERSION,
        config: cfg.snapshot(),
        task: cfg.task,
        labels: classes,
        clean: cfg.clean.clone(),
        lexicon: lex.iter().map(|(k, v)| (k.to_string(), v.to_vec())).collect(),
        stopwords: stopwords.iter().map(String::from).collect(),
        vocab_mode: mode,
        vocab_max_size: cfg.vocab_size,
        vocab_tokens: vocab.ordered_tokens().to_vec(),
        features: feature_spec,
        model: model_weights,
    };
    file.save(&cfg.model_out)?;

    if let (Some(history_path), Some(history)) = (&cfg.history_out, &outcome.history) {
        std::fs::write(history_path, history.to_csv())
            .map_err(|e| Error::io(history_path, e))?;
    }
    Ok(outcome)
}

#[allow(clippy::too_many_arguments)]
fn train_linear(
    cfg: &RunConfig,
    vocab: &Vocabulary,
    docs: &[TokenList],
    labels: &[usize],
    classes: &[String],
    val_view: Option<&TaskView>,
    lex: &AbbreviationLexicon,
    stopwords: &StopwordList,
) -> Result<(ModelWeights, FeatureSpec, TrainOutcome)> {
    let counts = counts_of(docs, vocab, cfg.binary_counts);
    let dim = vocab.dimension();
    let (x, feature_spec, tfidf) = match cfg.resolved_features() {
        FeatureKind::Bow => (
            counts_to_sparse(&counts),
            FeatureSpec::Bow {
                binary: cfg.binary_counts,
            },
            None,
        ),
        FeatureKind::Tfidf => {
            let model = tfidf_fit(&counts, counts.len())?;
            let x = tfidf_to_sparse(&counts, &model)?;
            let spec = FeatureSpec::Tfidf {
                document_count: model.document_count,
                idf_hex: model_file::encode_f64s(&model.idf),
            };
            (x, spec, Some(model))
        }
        FeatureKind::Seq => unreachable!("validated"),
    };

    let fit_cfg = cfg.fit_config();
    enum Fitted {
        Linear(LinearModel),
        Nb(NaiveBayesModel),
    }
    let fitted = match cfg.model {
        ModelKind::Lr => Fitted::Linear(linear::lr_fit(&x, dim, labels, classes, &fit_cfg)?),
        ModelKind::Sgd => Fitted::Linear(linear::hinge_sgd_fit(&x, dim, labels, classes, &fit_cfg)?),
        ModelKind::Nb => Fitted::Nb(linear::nb_fit(&x, dim, labels, classes, cfg.nb_alpha)?),
        _ => unreachable!("validated"),
    };

    // metrics on the given validation file, or on the training data itself
    let (split_name, eval_x, eval_gold): (String, Vec<SparseVec>, Vec<String>) = match val_view {
        Some(v) => {
            let texts: Vec<String> = v.pairs.iter().map(|(t, _)| t.clone()).collect();
            let val_docs = preprocess(&texts, cfg, lex, stopwords);
            let val_counts = counts_of(&val_docs, vocab, cfg.binary_counts);
            let val_x = match &tfidf {
                Some(m) => tfidf_to_sparse(&val_counts, m)?,
                None => counts_to_sparse(&val_counts),
            };
            let gold = v.pairs.iter().map(|(_, l)| l.clone()).collect();
            ("validation".to_string(), val_x, gold)
        }
        None => (
            "training".to_string(),
            x.clone(),
            labels.iter().map(|&i| classes[i].clone()).collect(),
        ),
    };
    let pred: Vec<String> = eval_x
        .iter()
        .map(|xi| {
            let idx = match &fitted {
                Fitted::Linear(m) => linear::linear_predict(m, xi),
                Fitted::Nb(m) => linear::nb_predict(m, xi),
            }?;
            Ok(classes[idx].clone())
        })
        .collect::<Result<_>>()?;
    let report = eval::metrics(&eval::confusion(&eval_gold, &pred, classes)?)?;

    let weights = match &fitted {
        Fitted::Linear(m) => model_file::linear_to_weights(m),
        Fitted::Nb(m) => model_file::nb_to_weights(m),
    };
    Ok((
        weights,
        feature_spec,
        TrainOutcome {
            metrics: Some((split_name, report)),
            history: None,
        },
    ))
}

// Deterministic index split mirroring corpus::split_train_val: seeded
// shuffle, then the first floor(ratio·n) indices.
fn split_indices(n: usize, ratio: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut order: Vec<usize> = (0..n).collect();
    Rng::from_seed(seed).shuffle(&mut order);
    let cut = (ratio * n as f64).floor() as usize;
    let val = order.split_off(cut);
    (order, val)
}

#[allow(clippy::too_many_arguments)]
fn train_neural(
    cfg: &RunConfig,
    vocab: &Vocabulary,
    docs: &[TokenList],
    labels: &[usize],
    classes: &[String],
    val_view: Option<&TaskView>,
    lex: &AbbreviationLexicon,
    stopwords: &StopwordList,
) -> Result<(ModelWeights, FeatureSpec, TrainOutcome)> {
    let arch = cfg.model.arch().expect("neural model");
    let max_len = match cfg.max_len {
        Some(m) => m.max(1),
        None => corpus_max_len(docs)?.max(1),
    };
    let encode_all = |docs: &[TokenList], labels: &[usize]| -> Vec<(EncodedSequence, usize)> {
        docs.iter()
            .zip(labels)
            .map(|(d, &l)| (word2idx_encode(d, vocab, max_len), l))
            .collect()
    };
    let all = encode_all(docs, labels);

    let (train_set, val_set) = match val_view {
        Some(v) => {
            let texts: Vec<String> = v.pairs.iter().map(|(t, _)| t.clone()).collect();
            let val_docs = preprocess(&texts, cfg, lex, stopwords);
            let val_labels = label_indices(v, classes)?;
            (all, encode_all(&val_docs, &val_labels))
        }
        None => {
            let (ti, vi) = split_indices(all.len(), cfg.val_ratio, cfg.seed);
            if ti.is_empty() || vi.is_empty() {
                return Err(Error::EmptyInput(
                    "training set too small for an internal validation split".into(),
                ));
            }
            let train: Vec<_> = ti.into_iter().map(|i| all[i].clone()).collect();
            let val: Vec<_> = vi.into_iter().map(|i| all[i].clone()).collect();
            (train, val)
        }
    };

    let dims = NetDims {
        vocab_rows: vocab.len() + 2,
        emb_dim: cfg.resolved_emb_dim(),
        hidden: cfg.hidden,
        n_filters: cfg.n_filters,
        window: cfg.window,
    };
    let (params, history) = train_model::<f32>(
        arch,
        classes,
        &train_set,
        &val_set,
        &dims,
        &cfg.train_config(),
    )?;
    let model = NeuralModel {
        arch,
        classes: classes.to_vec(),
        max_len,
        params,
    };

    let mut gold = Vec::with_capacity(val_set.len());
    let mut pred = Vec::with_capacity(val_set.len());
    for (seq, label) in &val_set {
        let (idx, _) = neural_predict(&model, seq)?;
        gold.push(classes[*label].clone());
        pred.push(classes[idx].clone());
    }
    let report = eval::metrics(&eval::confusion(&gold, &pred, classes)?)?;

    Ok((
        model_file::neural_to_weights(&model, &dims),
        FeatureSpec::Seq { max_len },
        TrainOutcome {
            metrics: Some(("validation".to_string(), report)),
            history: Some(history),
        },
    ))
}

/// A loaded model plus everything needed to map raw tweet text to a label.
pub struct Predictor {
    pub task: Task,
    pub labels: Vec<String>,
    clean_cfg: CleanConfig,
    lex: AbbreviationLexicon,
    stopwords: StopwordList,
    vocab: Vocabulary,
    features: FeatureSpec,
    tfidf: Option<TfidfModel>,
    model: PredictorModel,
}

#[allow(clippy::large_enum_variant)]
enum PredictorModel {
    Linear(LinearModel),
    Nb(NaiveBayesModel),
    Neural(NeuralModel<f32>),
}

impl Predictor {
    pub fn from_model_file(file: &ModelFile) -> Result<Predictor> {
        let model = match &file.model {
            ModelWeights::Linear { .. } => {
                PredictorModel::Linear(model_file::weights_to_linear(&file.model, &file.labels)?)
            }
            ModelWeights::NaiveBayes { .. } => {
                PredictorModel::Nb(model_file::weights_to_nb(&file.model, &file.labels)?)
            }
            ModelWeights::Neural { .. } => {
                PredictorModel::Neural(model_file::weights_to_neural(&file.model, &file.labels)?)
            }
        };
        Ok(Predictor {
            task: file.task,
            labels: file.labels.clone(),
            clean_cfg: file.clean.clone(),
            lex: file.abbreviation_lexicon(),
            stopwords: file.stopword_list(),
            vocab: file.vocabulary(),
            features: file.features.clone(),
            tfidf: file.tfidf_model()?,
            model,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Predictor> {
        Predictor::from_model_file(&ModelFile::load(path)?)
    }

    /// Predict the label of one raw tweet. Total: text that cleans to nothing
    /// still gets a prediction (empty feature vector).
    pub fn predict_text(&self, text: &str) -> Result<String> {
        let (label, _) = self.predict_with_probabilities(text)?;
        Ok(label)
    }

    /// Predict a label plus class probabilities where the model family
    /// defines them (logistic, naive Bayes, neural; hinge models yield none).
    pub fn predict_with_probabilities(&self, text: &str) -> Result<(String, Option<Vec<f64>>)> {
        let tokens = tokenize(&clean(text, &self.clean_cfg, &self.lex, &self.stopwords));
        let (idx, probs) = match (&self.model, &self.features) {
            (PredictorModel::Neural(m), FeatureSpec::Seq { max_len }) => {
                let seq = word2idx_encode(&tokens, &self.vocab, *max_len);
                let (idx, probs) = neural_predict(m, &seq)?;
                (idx, Some(probs))
            }
            (PredictorModel::Neural(_), _) => {
                return Err(Error::ModelFile(
                    "neural model stored without sequence features".into(),
                ))
            }
            (model, spec) => {
                let counts = bow_vectorize(&tokens, &self.vocab);
                let counts = match spec {
                    FeatureSpec::Bow { binary: true } => counts.to_binary(),
                    _ => counts,
                };
                let x: SparseVec = match (&self.tfidf, spec) {
                    (Some(tfidf), FeatureSpec::Tfidf { .. }) => tfidf_transform(&counts, tfidf)?,
                    _ => counts.pairs.iter().map(|&(i, n)| (i, n as f64)).collect(),
                };
                match model {
                    PredictorModel::Linear(m) => {
                        let idx = linear::linear_predict(m, &x)?;
                        let probs = if m.kind == LinearKind::Logistic {
                            Some(linear::lr_predict_proba(m, &x)?)
                        } else {
                            None
                        };
                        (idx, probs)
                    }
                    PredictorModel::Nb(m) => {
                        let idx = linear::nb_predict(m, &x)?;
                        let posterior = linear::nb_log_posterior(m, &x)?;
                        let max = posterior.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                        let exps: Vec<f64> = posterior.iter().map(|&p| (p - max).exp()).collect();
                        let sum: f64 = exps.iter().sum();
                        (idx, Some(exps.into_iter().map(|e| e / sum).collect()))
                    }
                    PredictorModel::Neural(_) => unreachable!("handled above"),
                }
            }
        };
        Ok((self.labels[idx].clone(), probs))
    }
}

/// Read a TSV with a header naming at least `id` and `tweet` columns.
/// Extra columns (such as the subtask labels) are allowed and ignored.
pub fn read_id_tweet_tsv(path: impl AsRef<Path>) -> Result<Vec<(String, String)>> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let content = std::fs::read_to_string(path).map_err(|e| Error::io(&display, e))?;
    let mut lines = content.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::malformed(&display, 1, "empty file"))?;
    let cols: Vec<&str> = header.trim_end_matches('\r').split('\t').collect();
    let id_col = cols
        .iter()
        .position(|&c| c == "id")
        .ok_or_else(|| Error::malformed(&display, 1, "no `id` column in header"))?;
    let tweet_col = cols
        .iter()
        .position(|&c| c == "tweet")
        .ok_or_else(|| Error::malformed(&display, 1, "no `tweet` column in header"))?;
    let mut rows = Vec::new();
    for (idx, line) in lines {
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != cols.len() {
            return Err(Error::malformed(
                &display,
                idx + 1,
                format!("expected {} columns, got {}", cols.len(), fields.len()),
            ));
        }
        rows.push((fields[id_col].to_string(), fields[tweet_col].to_string()));
    }
    Ok(rows)
}

/// Read an `id,label` CSV (no header).
pub fn read_label_csv(path: impl AsRef<Path>) -> Result<Vec<(String, String)>> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let content = std::fs::read_to_string(path).map_err(|e| Error::io(&display, e))?;
    let mut rows = Vec::new();
    for (idx, line) in content.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let (id, label) = line.split_once(',').ok_or_else(|| {
            Error::malformed(&display, idx + 1, "expected `id,label`")
        })?;
        if id.is_empty() || label.is_empty() {
            return Err(Error::malformed(&display, idx + 1, "empty id or label"));
        }
        rows.push((id.to_string(), label.to_string()));
    }
    Ok(rows)
}

/// Run a saved model over `data_path` (TSV with id and tweet columns) and
/// write one `id,label` line per input row, in input order, no header.
/// Returns the number of rows written.
pub fn cmd_predict(
    model_path: impl AsRef<Path>,
    data_path: impl AsRef<Path>,
    out_path: impl AsRef<Path>,
) -> Result<usize> {
    let predictor = Predictor::load(model_path)?;
    let rows = read_id_tweet_tsv(data_path)?;
    let mut out = String::new();
    for (id, tweet) in &rows {
        let label = predictor.predict_text(tweet)?;
        out.push_str(&format!("{id},{label}\n"));
    }
    let out_path = out_path.as_ref();
    std::fs::write(out_path, out).map_err(|e| Error::io(out_path.display().to_string(), e))?;
    Ok(rows.len())
}

// canonical label order when the observed labels all belong to one task
fn infer_classes(labels: impl Iterator<Item = String>) -> Vec<String> {
    let observed: std::collections::BTreeSet<String> = labels.collect();
    for task in [Task::A, Task::B, Task::C] {
        let task_set: Vec<&str> = task.labels().to_vec();
        if observed.iter().all(|l| task_set.contains(&l.as_str())) {
            return task_set.into_iter().map(String::from).collect();
        }
    }
    observed.into_iter().collect()
}

/// Score a prediction CSV against a gold CSV. The two files must cover
/// exactly the same ids, each exactly once.
pub fn cmd_evaluate(
    pred_path: impl AsRef<Path>,
    gold_path: impl AsRef<Path>,
) -> Result<MetricsReport> {
    let pred_rows = read_label_csv(&pred_path)?;
    let gold_rows = read_label_csv(&gold_path)?;
    let mut pred_map: BTreeMap<&str, &str> = BTreeMap::new();
    for (id, label) in &pred_rows {
        if pred_map.insert(id, label).is_some() {
            return Err(Error::InvalidArgument(format!(
                "duplicate id {id:?} in predictions"
            )));
        }
    }
    let mut gold = Vec::with_capacity(gold_rows.len());
    let mut pred = Vec::with_capacity(gold_rows.len());
    let mut seen: std::collections::BTreeSet<&str> = std::collections::BTreeSet::new();
    for (id, label) in &gold_rows {
        if !seen.insert(id) {
            return Err(Error::InvalidArgument(format!(
                "duplicate id {id:?} in gold labels"
            )));
        }
        let p = pred_map.remove(id.as_str()).ok_or_else(|| {
            Error::InvalidArgument(format!("id {id:?} has no prediction"))
        })?;
        gold.push(label.clone());
        pred.push(p.to_string());
    }
    if let Some((extra, _)) = pred_map.into_iter().next() {
        return Err(Error::InvalidArgument(format!(
            "prediction for unknown id {extra:?}"
        )));
    }
    let classes = infer_classes(gold.iter().chain(pred.iter()).cloned());
    eval::metrics(&eval::confusion(&gold, &pred, &classes)?)
}

/// Expose the sparse-matrix debug dump at the pipeline level.
pub fn dump_counts(ids: &[String], counts: &[CountVector]) -> String {
    features::dump_sparse_matrix(ids, counts)
}
