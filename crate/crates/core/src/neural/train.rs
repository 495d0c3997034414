//! Model assembly, seeded initialization, the mini-batch training loop with
//! early stopping, and prediction.
//!
//! Initialization draw order is part of the determinism contract. All draws
//! come from one generator seeded with `TrainConfig::seed`, in this order:
//!
//! 1. embedding table rows 1.. (row-major; row 0 stays zero for PAD);
//! 2. encoder weights: per gate (input, forget, output, candidate) first `w`
//!    then `u`, row-major — forward direction then backward for the BiLSTM —
//!    or the convolution filters row-major for the CNN;
//! 3. dense weights row-major.
//!
//! Every weight matrix draws uniformly from ±sqrt(6 / (rows + cols)). Biases
//! start at zero except the LSTM forget-gate bias, which starts at 1. The
//! same generator then drives epoch shuffles and dropout masks, interleaved
//! in processing order.

use crate::corpus::Task;
use crate::error::{Error, Result};
use crate::eval;
use crate::features::EncodedSequence;
use crate::rng::Rng;

use super::layers::{
    bilstm_backward, bilstm_forward, conv_pool_backward, conv_pool_forward, dropout_apply,
    lstm_backward, lstm_forward, ConvParams, DenseParams, DropoutMode, EmbeddingParams, LstmParams,
    GATE_FORGET,
};
use super::optim::{adam_step, sgd_step, AdamConfig, AdamMoments};
use super::tensor::{num, Scalar, Tensor2};

/// Network architecture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Arch {
    Lstm,
    BiLstm,
    Cnn,
}

impl Arch {
    /// Default epoch counts: LSTM 8 for task A and 7 otherwise, BiLSTM 7 for
    /// task A and 6 otherwise, CNN 8 everywhere.
    pub fn default_epochs(self, task: Task) -> usize {
        match (self, task) {
            (Arch::Lstm, Task::A) => 8,
            (Arch::Lstm, _) => 7,
            (Arch::BiLstm, Task::A) => 7,
            (Arch::BiLstm, _) => 6,
            (Arch::Cnn, _) => 8,
        }
    }
}

/// Layer sizes; which fields matter depends on the architecture.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct NetDims {
    /// Embedding rows: vocabulary size + 2 (PAD, UNK).
    pub vocab_rows: usize,
    pub emb_dim: usize,
    /// LSTM cell size.
    pub hidden: usize,
    /// CNN filter count.
    pub n_filters: usize,
    /// CNN window length.
    pub window: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    Sgd,
    Adam,
}

/// Training hyperparameters.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub optimizer: OptimizerKind,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub l2_lambda: f64,
    pub dropout_p: f64,
    /// Stop after this many epochs without validation-loss improvement;
    /// `None` disables early stopping.
    pub patience: Option<usize>,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 7,
            batch_size: 32,
            learning_rate: 1e-3,
            optimizer: OptimizerKind::Adam,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            l2_lambda: 1e-5,
            dropout_p: 0.5,
            patience: Some(2),
            seed: 42,
        }
    }
}

/// Per-epoch metric traces plus the index (1-based) of the epoch whose
/// parameters were kept.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainHistory {
    pub train_loss: Vec<f64>,
    pub val_loss: Vec<f64>,
    pub val_accuracy: Vec<f64>,
    pub val_macro_f1: Vec<f64>,
    pub best_epoch: usize,
}

impl TrainHistory {
    /// CSV export: `epoch,train_loss,val_loss,val_acc,val_macro_f1`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,train_loss,val_loss,val_acc,val_macro_f1\n");
        for e in 0..self.train_loss.len() {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                e + 1,
                self.train_loss[e],
                self.val_loss[e],
                self.val_accuracy[e],
                self.val_macro_f1[e]
            ));
        }
        out
    }
}

/// Sequence encoder variants.
#[derive(Debug, Clone, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum EncoderParams<F> {
    Lstm(LstmParams<F>),
    BiLstm {
        fwd: LstmParams<F>,
        bwd: LstmParams<F>,
    },
    Conv(ConvParams<F>),
}

/// Full parameter set: embedding, encoder, dense readout.
#[derive(Debug, Clone, PartialEq)]
pub struct NetParams<F> {
    pub embedding: EmbeddingParams<F>,
    pub encoder: EncoderParams<F>,
    pub dense: DenseParams<F>,
}

/// A trained network together with its label set and input length.
#[derive(Debug, Clone)]
pub struct NeuralModel<F> {
    pub arch: Arch,
    pub classes: Vec<String>,
    pub max_len: usize,
    pub params: NetParams<F>,
}

impl<F: Scalar> NetParams<F> {
    fn zeros_like(&self) -> Self {
        let encoder = match &self.encoder {
            EncoderParams::Lstm(p) => {
                EncoderParams::Lstm(LstmParams::zeros(p.input_dim(), p.hidden()))
            }
            EncoderParams::BiLstm { fwd, bwd } => EncoderParams::BiLstm {
                fwd: LstmParams::zeros(fwd.input_dim(), fwd.hidden()),
                bwd: LstmParams::zeros(bwd.input_dim(), bwd.hidden()),
            },
            EncoderParams::Conv(p) => EncoderParams::Conv(ConvParams::zeros(
                p.n_filters(),
                p.window,
                p.filters.cols() / p.window,
            )),
        };
        NetParams {
            embedding: EmbeddingParams {
                table: self.embedding.table.zeros_like(),
            },
            encoder,
            dense: DenseParams::zeros(self.dense.w.rows(), self.dense.w.cols()),
        }
    }

    /// Encoder output dimension (the dense layer's input).
    pub fn encoded_dim(&self) -> usize {
        match &self.encoder {
            EncoderParams::Lstm(p) => p.hidden(),
            EncoderParams::BiLstm { fwd, .. } => 2 * fwd.hidden(),
            EncoderParams::Conv(p) => p.n_filters(),
        }
    }
}

// Visit every parameter block of `params` and `grads` in the fixed documented
// order. The optimizer state is kept aligned with this order.
fn for_each_block<F: Scalar>(
    params: &mut NetParams<F>,
    grads: &NetParams<F>,
    mut f: impl FnMut(&mut [F], &[F]),
) {
    f(
        params.embedding.table.as_mut_slice(),
        grads.embedding.table.as_slice(),
    );
    match (&mut params.encoder, &grads.encoder) {
        (EncoderParams::Lstm(p), EncoderParams::Lstm(g)) => {
            for gate in 0..4 {
                f(p.w[gate].as_mut_slice(), g.w[gate].as_slice());
                f(p.u[gate].as_mut_slice(), g.u[gate].as_slice());
                f(&mut p.b[gate], &g.b[gate]);
            }
        }
        (
            EncoderParams::BiLstm { fwd, bwd },
            EncoderParams::BiLstm {
                fwd: gfwd,
                bwd: gbwd,
            },
        ) => {
            for (p, g) in [(fwd, gfwd), (bwd, gbwd)] {
                for gate in 0..4 {
                    f(p.w[gate].as_mut_slice(), g.w[gate].as_slice());
                    f(p.u[gate].as_mut_slice(), g.u[gate].as_slice());
                    f(&mut p.b[gate], &g.b[gate]);
                }
            }
        }
        (EncoderParams::Conv(p), EncoderParams::Conv(g)) => {
            f(p.filters.as_mut_slice(), g.filters.as_slice());
            f(&mut p.bias, &g.bias);
        }
        _ => unreachable!("parameter and gradient encoders always match"),
    }
    f(params.dense.w.as_mut_slice(), grads.dense.w.as_slice());
    f(&mut params.dense.b, &grads.dense.b);
}

fn glorot_fill<F: Scalar>(t: &mut Tensor2<F>, rng: &mut Rng, skip_first_row: bool) {
    let bound = (6.0 / (t.rows() + t.cols()) as f64).sqrt();
    let start = if skip_first_row { 1 } else { 0 };
    for r in start..t.rows() {
        for c in 0..t.cols() {
            t.set(r, c, num(rng.uniform(-bound, bound)));
        }
    }
}

fn init_lstm<F: Scalar>(input_dim: usize, hidden: usize, rng: &mut Rng) -> LstmParams<F> {
    let mut p = LstmParams::zeros(input_dim, hidden);
    for gate in 0..4 {
        glorot_fill(&mut p.w[gate], rng, false);
        glorot_fill(&mut p.u[gate], rng, false);
    }
    p.b[GATE_FORGET].iter_mut().for_each(|b| *b = F::one());
    p
}

/// Build and initialize the parameter set for `arch` with `n_scores` dense
/// outputs (1 for a binary head, the class count otherwise).
pub fn init_params<F: Scalar>(
    arch: Arch,
    dims: &NetDims,
    n_scores: usize,
    rng: &mut Rng,
) -> NetParams<F> {
    let mut embedding = EmbeddingParams {
        table: Tensor2::zeros(dims.vocab_rows, dims.emb_dim),
    };
    glorot_fill(&mut embedding.table, rng, true);
    let encoder = match arch {
        Arch::Lstm => EncoderParams::Lstm(init_lstm(dims.emb_dim, dims.hidden, rng)),
        Arch::BiLstm => EncoderParams::BiLstm {
            fwd: init_lstm(dims.emb_dim, dims.hidden, rng),
            bwd: init_lstm(dims.emb_dim, dims.hidden, rng),
        },
        Arch::Cnn => {
            let mut conv = ConvParams::zeros(dims.n_filters, dims.window, dims.emb_dim);
            glorot_fill(&mut conv.filters, rng, false);
            EncoderParams::Conv(conv)
        }
    };
    let encoded_dim = match arch {
        Arch::Lstm => dims.hidden,
        Arch::BiLstm => 2 * dims.hidden,
        Arch::Cnn => dims.n_filters,
    };
    let mut dense = DenseParams::zeros(n_scores, encoded_dim);
    glorot_fill(&mut dense.w, rng, false);
    NetParams {
        embedding,
        encoder,
        dense,
    }
}

enum EncoderTrace<F> {
    Lstm(super::layers::LstmTrace<F>),
    BiLstm(super::layers::BiLstmTrace<F>),
    Conv(super::layers::ConvTrace<F>),
}

struct ForwardTrace<F> {
    x_emb: Tensor2<F>,
    enc: EncoderTrace<F>,
    dropout_mask: Vec<F>,
    encoded: Vec<F>,
    scores: Vec<F>,
}

// Forward pass for one example. Only `seq.indices[..true_length]` is ever
// read, so anything beyond the true length cannot influence the output. For
// the CNN the embedded prefix is zero-padded up to the window length.
fn forward<F: Scalar>(
    params: &NetParams<F>,
    seq: &EncodedSequence,
    dropout_p: f64,
    mode: DropoutMode,
    rng: &mut Rng,
) -> Result<ForwardTrace<F>> {
    let upto = seq.true_length.min(seq.indices.len());
    let x_emb = match &params.encoder {
        EncoderParams::Conv(conv) => {
            let looked_up = params.embedding.forward(&seq.indices, upto)?;
            if looked_up.rows() >= conv.window {
                looked_up
            } else {
                let mut padded = Tensor2::zeros(conv.window, params.embedding.emb_dim());
                for t in 0..looked_up.rows() {
                    padded.row_mut(t).copy_from_slice(looked_up.row(t));
                }
                padded
            }
        }
        _ => params.embedding.forward(&seq.indices, upto)?,
    };
    let (enc, pre_dropout) = match &params.encoder {
        EncoderParams::Lstm(p) => {
            let trace = lstm_forward(&x_emb, p)?;
            let h = trace.final_h.clone();
            (EncoderTrace::Lstm(trace), h)
        }
        EncoderParams::BiLstm { fwd, bwd } => {
            let trace = bilstm_forward(&x_emb, fwd, bwd)?;
            let h = trace.output.clone();
            (EncoderTrace::BiLstm(trace), h)
        }
        EncoderParams::Conv(p) => {
            let trace = conv_pool_forward(&x_emb, p)?;
            let pooled = trace.pooled.clone();
            (EncoderTrace::Conv(trace), pooled)
        }
    };
    let (encoded, dropout_mask) = dropout_apply(&pre_dropout, dropout_p, mode, rng)?;
    let scores = params.dense.forward(&encoded)?;
    Ok(ForwardTrace {
        x_emb,
        enc,
        dropout_mask,
        encoded,
        scores,
    })
}

fn backward<F: Scalar>(
    params: &NetParams<F>,
    seq: &EncodedSequence,
    trace: &ForwardTrace<F>,
    d_scores: &[F],
    grads: &mut NetParams<F>,
) {
    let d_encoded = params
        .dense
        .backward(&trace.encoded, d_scores, &mut grads.dense);
    let d_pre_dropout: Vec<F> = d_encoded
        .iter()
        .zip(&trace.dropout_mask)
        .map(|(&d, &m)| d * m)
        .collect();
    let d_x = match (&params.encoder, &trace.enc, &mut grads.encoder) {
        (EncoderParams::Lstm(p), EncoderTrace::Lstm(t), EncoderParams::Lstm(g)) => {
            lstm_backward(&trace.x_emb, p, t, &d_pre_dropout, g)
        }
        (
            EncoderParams::BiLstm { fwd, bwd },
            EncoderTrace::BiLstm(t),
            EncoderParams::BiLstm {
                fwd: gfwd,
                bwd: gbwd,
            },
        ) => bilstm_backward(&trace.x_emb, fwd, bwd, t, &d_pre_dropout, gfwd, gbwd),
        (EncoderParams::Conv(p), EncoderTrace::Conv(t), EncoderParams::Conv(g)) => {
            conv_pool_backward(&trace.x_emb, p, t, &d_pre_dropout, g)
        }
        _ => unreachable!("trace variant always matches encoder"),
    };
    // only rows within the true length correspond to looked-up tokens
    let upto = seq.true_length.min(d_x.rows());
    params
        .embedding
        .backward_upto(&seq.indices, &d_x, upto, &mut grads.embedding.table);
}

// Data loss and head gradient for one example.
fn head_loss<F: Scalar>(scores: &[F], label: usize, n_classes: usize) -> Result<(F, Vec<F>)> {
    if n_classes == 2 {
        let (loss, dz) = super::losses::loss_bce_logits(scores[0], num(label as f64))?;
        Ok((loss, vec![dz]))
    } else {
        super::losses::loss_cross_entropy(scores, label)
    }
}

/// Class probabilities from head scores: `[1-sigmoid(z), sigmoid(z)]` for the
/// binary head, softmax otherwise.
pub fn head_probabilities<F: Scalar>(scores: &[F], n_classes: usize) -> Vec<f64> {
    if n_classes == 2 {
        let z = scores[0].to_f64().unwrap_or(f64::NAN);
        let p1 = if z >= 0.0 {
            1.0 / (1.0 + (-z).exp())
        } else {
            let e = z.exp();
            e / (1.0 + e)
        };
        vec![1.0 - p1, p1]
    } else {
        let vals: Vec<f64> = scores.iter().map(|s| s.to_f64().unwrap_or(f64::NAN)).collect();
        let max = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = vals.iter().map(|v| (v - max).exp()).collect();
        let sum: f64 = exps.iter().sum();
        exps.into_iter().map(|e| e / sum).collect()
    }
}

/// Predicted class index from probabilities: the binary head answers
/// `classes[1]` exactly when `p >= 0.5`; the multiclass head takes the argmax
/// with ties going to the earlier class.
pub fn predict_from_probabilities(probs: &[f64], n_classes: usize) -> usize {
    if n_classes == 2 {
        usize::from(probs[1] >= 0.5)
    } else {
        let mut best = 0;
        for (i, &p) in probs.iter().enumerate().skip(1) {
            if p > probs[best] {
                best = i;
            }
        }
        best
    }
}

/// Deterministic single-example prediction with dropout disabled. The input
/// length must equal the model's `max_len`.
pub fn neural_predict<F: Scalar>(
    model: &NeuralModel<F>,
    seq: &EncodedSequence,
) -> Result<(usize, Vec<f64>)> {
    if seq.indices.len() != model.max_len {
        return Err(Error::DimensionMismatch {
            expected: model.max_len,
            got: seq.indices.len(),
        });
    }
    let mut rng = Rng::from_seed(0); // eval mode draws nothing
    let trace = forward(&model.params, seq, 0.0, DropoutMode::Eval, &mut rng)?;
    let probs = head_probabilities(&trace.scores, model.classes.len());
    Ok((predict_from_probabilities(&probs, model.classes.len()), probs))
}

/// Mean loss, accuracy and macro-F1 over a labeled evaluation set.
fn evaluate_split<F: Scalar>(
    params: &NetParams<F>,
    data: &[(EncodedSequence, usize)],
    classes: &[String],
) -> Result<(f64, f64, f64)> {
    let mut rng = Rng::from_seed(0);
    let mut total_loss = 0.0;
    let mut gold = Vec::with_capacity(data.len());
    let mut pred = Vec::with_capacity(data.len());
    for (seq, label) in data {
        let trace = forward(params, seq, 0.0, DropoutMode::Eval, &mut rng)?;
        let (loss, _) = head_loss(&trace.scores, *label, classes.len())?;
        total_loss += loss.to_f64().unwrap_or(f64::NAN);
        let probs = head_probabilities(&trace.scores, classes.len());
        gold.push(classes[*label].clone());
        pred.push(classes[predict_from_probabilities(&probs, classes.len())].clone());
    }
    let report = eval::metrics(&eval::confusion(&gold, &pred, classes)?)?;
    Ok((
        total_loss / data.len() as f64,
        report.accuracy,
        report.macro_f1,
    ))
}

/// Train `arch` on `train`, tracking metrics on `val` after every epoch.
///
/// Training stops when the validation loss has not improved for
/// `cfg.patience` consecutive epochs (when set) or when `cfg.epochs` are
/// exhausted; the returned parameters are those of the best
/// validation-loss epoch. Fails fast on a non-finite training loss.
pub fn train_model<F: Scalar>(
    arch: Arch,
    classes: &[String],
    train: &[(EncodedSequence, usize)],
    val: &[(EncodedSequence, usize)],
    dims: &NetDims,
    cfg: &TrainConfig,
) -> Result<(NetParams<F>, TrainHistory)> {
    if train.is_empty() || val.is_empty() {
        return Err(Error::EmptyInput(
            "training and validation splits must be nonempty".into(),
        ));
    }
    if classes.len() < 2 {
        return Err(Error::InvalidArgument("need at least 2 classes".into()));
    }
    if cfg.epochs == 0 {
        return Err(Error::InvalidArgument("epochs must be at least 1".into()));
    }
    if !(0.0..1.0).contains(&cfg.dropout_p) {
        return Err(Error::InvalidArgument(format!(
            "dropout probability must be in [0, 1), got {}",
            cfg.dropout_p
        )));
    }
    for (seq, label) in train.iter().chain(val) {
        if *label >= classes.len() {
            return Err(Error::InvalidArgument(format!(
                "label index {label} out of range for {} classes",
                classes.len()
            )));
        }
        for &idx in &seq.indices {
            if idx as usize >= dims.vocab_rows {
                return Err(Error::InvalidArgument(format!(
                    "sequence index {idx} out of range for vocabulary of {} rows",
                    dims.vocab_rows
                )));
            }
        }
    }

    let n_scores = if classes.len() == 2 { 1 } else { classes.len() };
    let mut rng = Rng::from_seed(cfg.seed);
    let mut params = init_params::<F>(arch, dims, n_scores, &mut rng);

    // Adam moments aligned with the block traversal order.
    let adam_cfg = AdamConfig {
        beta1: cfg.beta1,
        beta2: cfg.beta2,
        epsilon: cfg.epsilon,
    };
    let mut moments: Vec<AdamMoments<F>> = Vec::new();
    {
        let zero = params.zeros_like();
        let mut sizes = Vec::new();
        for_each_block(&mut params, &zero, |p, _| sizes.push(p.len()));
        moments.extend(sizes.into_iter().map(AdamMoments::zeros));
    }

    let lr = num::<F>(cfg.learning_rate);
    let l2 = num::<F>(cfg.l2_lambda);
    let mut step: u64 = 0;
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut history = TrainHistory {
        train_loss: Vec::new(),
        val_loss: Vec::new(),
        val_accuracy: Vec::new(),
        val_macro_f1: Vec::new(),
        best_epoch: 0,
    };
    let mut best: Option<(f64, NetParams<F>)> = None;
    let mut epochs_without_improvement = 0usize;

    for epoch in 1..=cfg.epochs {
        rng.shuffle(&mut order);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let mut grads = params.zeros_like();
            let inv_batch = num::<F>(1.0 / batch.len() as f64);
            for &i in batch {
                let (seq, label) = &train[i];
                let trace = forward(&params, seq, cfg.dropout_p, DropoutMode::Train, &mut rng)?;
                let (loss, mut d_scores) = head_loss(&trace.scores, *label, classes.len())?;
                let loss = loss.to_f64().unwrap_or(f64::NAN);
                if !loss.is_finite() {
                    return Err(Error::Diverged(format!(
                        "non-finite training loss in epoch {epoch}"
                    )));
                }
                epoch_loss += loss;
                for d in &mut d_scores {
                    *d = *d * inv_batch;
                }
                backward(&params, seq, &trace, &d_scores, &mut grads);
            }
            step += 1;
            match cfg.optimizer {
                OptimizerKind::Sgd => {
                    for_each_block(&mut params, &grads, |p, g| sgd_step(p, g, lr, l2));
                }
                OptimizerKind::Adam => {
                    let mut block = 0;
                    for_each_block(&mut params, &grads, |p, g| {
                        adam_step(&mut moments[block], step, p, g, lr, l2, &adam_cfg);
                        block += 1;
                    });
                }
            }
        }

        let (val_loss, val_acc, val_f1) = evaluate_split(&params, val, classes)?;
        history.train_loss.push(epoch_loss / train.len() as f64);
        history.val_loss.push(val_loss);
        history.val_accuracy.push(val_acc);
        history.val_macro_f1.push(val_f1);

        let improved = best.as_ref().is_none_or(|(b, _)| val_loss < *b);
        if improved {
            best = Some((val_loss, params.clone()));
            history.best_epoch = epoch;
            epochs_without_improvement = 0;
        } else {
            epochs_without_improvement += 1;
            if let Some(patience) = cfg.patience {
                if epochs_without_improvement >= patience {
                    break;
                }
            }
        }
    }

    let (_, best_params) = best.expect("at least one epoch ran");
    Ok((best_params, history))
}
