//! Network layers with hand-written forward and backward passes: embedding
//! lookup, LSTM (with backpropagation through time), bidirectional LSTM,
//! 1-D convolution with max-over-time pooling, dense readout and inverted
//! dropout.
//!
//! Backward passes take the gradient of a scalar loss with respect to the
//! layer output and produce parameter gradients plus (where meaningful) the
//! gradient with respect to the layer input. Caches returned by the forward
//! passes carry exactly the intermediate values the backward passes need.

// index loops here walk several parameter arrays in lockstep
#![allow(clippy::needless_range_loop)]

use crate::error::{Error, Result};
use crate::rng::Rng;

use super::tensor::{add_assign, dot, num, Scalar, Tensor2};

// ---------------------------------------------------------------------------
// Embedding
// ---------------------------------------------------------------------------

/// Token-index to vector lookup table. Row 0 is the PAD row: it is pinned to
/// zero at initialization and receives no gradient, so it stays zero through
/// any amount of training.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingParams<F> {
    pub table: Tensor2<F>,
}

impl<F: Scalar> EmbeddingParams<F> {
    pub fn vocab_rows(&self) -> usize {
        self.table.rows()
    }

    pub fn emb_dim(&self) -> usize {
        self.table.cols()
    }

    /// Look up the first `upto` indices into a `[upto × emb_dim]` matrix.
    pub fn forward(&self, indices: &[u32], upto: usize) -> Result<Tensor2<F>> {
        let upto = upto.min(indices.len());
        let mut out = Tensor2::zeros(upto, self.emb_dim());
        for (t, &idx) in indices[..upto].iter().enumerate() {
            if idx as usize >= self.table.rows() {
                return Err(Error::InvalidArgument(format!(
                    "embedding index {idx} out of range for table with {} rows",
                    self.table.rows()
                )));
            }
            out.row_mut(t).copy_from_slice(self.table.row(idx as usize));
        }
        Ok(out)
    }

    /// Accumulate the first `upto` rows of `d_out` into the table gradient.
    /// Rows past `upto` belong to internal zero padding, not to looked-up
    /// tokens. The PAD row gradient is forced to zero.
    pub fn backward_upto(
        &self,
        indices: &[u32],
        d_out: &Tensor2<F>,
        upto: usize,
        grad_table: &mut Tensor2<F>,
    ) {
        for t in 0..upto.min(d_out.rows()) {
            let idx = indices[t] as usize;
            if idx == 0 {
                continue;
            }
            add_assign(grad_table.row_mut(idx), d_out.row(t));
        }
        grad_table.row_mut(0).iter_mut().for_each(|g| *g = F::zero());
    }
}

// ---------------------------------------------------------------------------
// LSTM
// ---------------------------------------------------------------------------

/// Gate order used everywhere (parameter layout, initialization draw order,
/// gradient traversal): input, forget, output, candidate.
pub const GATE_INPUT: usize = 0;
pub const GATE_FORGET: usize = 1;
pub const GATE_OUTPUT: usize = 2;
pub const GATE_CAND: usize = 3;

/// LSTM cell parameters: per gate an input weight `w [hidden × input]`, a
/// recurrent weight `u [hidden × hidden]` and a bias.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmParams<F> {
    pub w: [Tensor2<F>; 4],
    pub u: [Tensor2<F>; 4],
    pub b: [Vec<F>; 4],
}

impl<F: Scalar> LstmParams<F> {
    pub fn zeros(input_dim: usize, hidden: usize) -> Self {
        LstmParams {
            w: std::array::from_fn(|_| Tensor2::zeros(hidden, input_dim)),
            u: std::array::from_fn(|_| Tensor2::zeros(hidden, hidden)),
            b: std::array::from_fn(|_| vec![F::zero(); hidden]),
        }
    }

    pub fn hidden(&self) -> usize {
        self.w[0].rows()
    }

    pub fn input_dim(&self) -> usize {
        self.w[0].cols()
    }
}

/// Per-timestep activations cached for backpropagation through time.
#[derive(Debug, Clone)]
pub struct LstmStep<F> {
    pub i: Vec<F>,
    pub f: Vec<F>,
    pub o: Vec<F>,
    pub g: Vec<F>,
    pub c: Vec<F>,
    pub tanh_c: Vec<F>,
    pub h: Vec<F>,
}

/// Forward-pass record: all hidden states plus the final hidden state.
#[derive(Debug, Clone)]
pub struct LstmTrace<F> {
    pub steps: Vec<LstmStep<F>>,
    pub final_h: Vec<F>,
}

fn sigmoid<F: Scalar>(z: F) -> F {
    let one = F::one();
    if z >= F::zero() {
        one / (one + (-z).exp())
    } else {
        let e = z.exp();
        e / (one + e)
    }
}

/// Run the recurrence over the rows of `x` from a zero initial state.
/// `x` must contain exactly the unpadded prefix (`true_length` rows); with
/// zero rows the final hidden state is zero.
pub fn lstm_forward<F: Scalar>(x: &Tensor2<F>, p: &LstmParams<F>) -> Result<LstmTrace<F>> {
    if x.rows() > 0 && x.cols() != p.input_dim() {
        return Err(Error::DimensionMismatch {
            expected: p.input_dim(),
            got: x.cols(),
        });
    }
    let hidden = p.hidden();
    let mut steps = Vec::with_capacity(x.rows());
    let mut h_prev = vec![F::zero(); hidden];
    let mut c_prev = vec![F::zero(); hidden];
    for t in 0..x.rows() {
        let x_t = x.row(t);
        let mut pre: [Vec<F>; 4] = std::array::from_fn(|g| p.b[g].clone());
        for g in 0..4 {
            p.w[g].matvec_acc(x_t, &mut pre[g]);
            p.u[g].matvec_acc(&h_prev, &mut pre[g]);
        }
        let i: Vec<F> = pre[GATE_INPUT].iter().map(|&z| sigmoid(z)).collect();
        let f: Vec<F> = pre[GATE_FORGET].iter().map(|&z| sigmoid(z)).collect();
        let o: Vec<F> = pre[GATE_OUTPUT].iter().map(|&z| sigmoid(z)).collect();
        let g: Vec<F> = pre[GATE_CAND].iter().map(|&z| z.tanh()).collect();
        let c: Vec<F> = (0..hidden)
            .map(|k| f[k] * c_prev[k] + i[k] * g[k])
            .collect();
        let tanh_c: Vec<F> = c.iter().map(|&v| v.tanh()).collect();
        let h: Vec<F> = (0..hidden).map(|k| o[k] * tanh_c[k]).collect();
        h_prev = h.clone();
        c_prev = c.clone();
        steps.push(LstmStep {
            i,
            f,
            o,
            g,
            c,
            tanh_c,
            h,
        });
    }
    Ok(LstmTrace {
        final_h: h_prev,
        steps,
    })
}

/// Backpropagation through time. `d_final_h` is the loss gradient with
/// respect to the final hidden state; returns the input gradient and fills
/// the parameter gradients.
pub fn lstm_backward<F: Scalar>(
    x: &Tensor2<F>,
    p: &LstmParams<F>,
    trace: &LstmTrace<F>,
    d_final_h: &[F],
    grads: &mut LstmParams<F>,
) -> Tensor2<F> {
    let hidden = p.hidden();
    let t_len = trace.steps.len();
    let mut d_x = x.zeros_like();
    let mut d_h = d_final_h.to_vec();
    let mut d_c = vec![F::zero(); hidden];
    let one = F::one();

    for t in (0..t_len).rev() {
        let step = &trace.steps[t];
        let c_prev: &[F] = if t == 0 {
            &[]
        } else {
            &trace.steps[t - 1].c
        };
        let h_prev: &[F] = if t == 0 {
            &[]
        } else {
            &trace.steps[t - 1].h
        };

        // through h = o ⊙ tanh(c)
        let mut d_pre: [Vec<F>; 4] = std::array::from_fn(|_| vec![F::zero(); hidden]);
        for k in 0..hidden {
            let do_k = d_h[k] * step.tanh_c[k];
            let dc_k = d_c[k] + d_h[k] * step.o[k] * (one - step.tanh_c[k] * step.tanh_c[k]);
            let di_k = dc_k * step.g[k];
            let dg_k = dc_k * step.i[k];
            // initial cell state is zero, so the forget gate sees no gradient at t = 0
            let df_k = if t == 0 { F::zero() } else { dc_k * c_prev[k] };
            // pre-activation gradients through the gate nonlinearities
            d_pre[GATE_INPUT][k] = di_k * step.i[k] * (one - step.i[k]);
            d_pre[GATE_FORGET][k] = df_k * step.f[k] * (one - step.f[k]);
            d_pre[GATE_OUTPUT][k] = do_k * step.o[k] * (one - step.o[k]);
            d_pre[GATE_CAND][k] = dg_k * (one - step.g[k] * step.g[k]);
            // carry cell gradient to t-1
            d_c[k] = dc_k * step.f[k];
        }

        let x_t = x.row(t);
        let mut d_h_prev = vec![F::zero(); hidden];
        for g in 0..4 {
            grads.w[g].outer_acc(&d_pre[g], x_t);
            if t > 0 {
                grads.u[g].outer_acc(&d_pre[g], h_prev);
            }
            add_assign(&mut grads.b[g], &d_pre[g]);
            p.w[g].matvec_t_acc(&d_pre[g], d_x.row_mut(t));
            p.u[g].matvec_t_acc(&d_pre[g], &mut d_h_prev);
        }
        d_h = d_h_prev;
    }
    d_x
}

// ---------------------------------------------------------------------------
// Bidirectional LSTM
// ---------------------------------------------------------------------------

/// Forward + reversed-input LSTM; output is the concatenation of the two
/// final hidden states (forward half first).
pub struct BiLstmTrace<F> {
    pub fwd: LstmTrace<F>,
    pub bwd: LstmTrace<F>,
    pub output: Vec<F>,
}

fn reverse_rows<F: Scalar>(x: &Tensor2<F>) -> Tensor2<F> {
    let mut rev = Tensor2::zeros(x.rows(), x.cols());
    for t in 0..x.rows() {
        rev.row_mut(t).copy_from_slice(x.row(x.rows() - 1 - t));
    }
    rev
}

pub fn bilstm_forward<F: Scalar>(
    x: &Tensor2<F>,
    p_fwd: &LstmParams<F>,
    p_bwd: &LstmParams<F>,
) -> Result<BiLstmTrace<F>> {
    let fwd = lstm_forward(x, p_fwd)?;
    let bwd = lstm_forward(&reverse_rows(x), p_bwd)?;
    let mut output = fwd.final_h.clone();
    output.extend_from_slice(&bwd.final_h);
    Ok(BiLstmTrace { fwd, bwd, output })
}

pub fn bilstm_backward<F: Scalar>(
    x: &Tensor2<F>,
    p_fwd: &LstmParams<F>,
    p_bwd: &LstmParams<F>,
    trace: &BiLstmTrace<F>,
    d_output: &[F],
    grads_fwd: &mut LstmParams<F>,
    grads_bwd: &mut LstmParams<F>,
) -> Tensor2<F> {
    let hidden = p_fwd.hidden();
    let d_fwd = &d_output[..hidden];
    let d_bwd = &d_output[hidden..];
    let mut d_x = lstm_backward(x, p_fwd, &trace.fwd, d_fwd, grads_fwd);
    let x_rev = reverse_rows(x);
    let d_x_rev = lstm_backward(&x_rev, p_bwd, &trace.bwd, d_bwd, grads_bwd);
    for t in 0..x.rows() {
        add_assign(d_x.row_mut(t), d_x_rev.row(x.rows() - 1 - t));
    }
    d_x
}

// ---------------------------------------------------------------------------
// Convolution + max-over-time pooling
// ---------------------------------------------------------------------------

/// 1-D convolution filters over time: each filter is a flattened
/// `[window × emb_dim]` kernel applied at every valid position, followed by
/// ReLU and a per-filter max over positions.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvParams<F> {
    /// `[n_filters × window·emb_dim]`
    pub filters: Tensor2<F>,
    pub bias: Vec<F>,
    pub window: usize,
}

impl<F: Scalar> ConvParams<F> {
    pub fn zeros(n_filters: usize, window: usize, emb_dim: usize) -> Self {
        ConvParams {
            filters: Tensor2::zeros(n_filters, window * emb_dim),
            bias: vec![F::zero(); n_filters],
            window,
        }
    }

    pub fn n_filters(&self) -> usize {
        self.filters.rows()
    }
}

/// Per-filter winning position and pre-ReLU activation there.
#[derive(Debug, Clone)]
pub struct ConvTrace<F> {
    pub best_pos: Vec<usize>,
    pub best_pre: Vec<F>,
    pub pooled: Vec<F>,
}

/// Valid convolution over the rows of `x`, ReLU, then max over positions.
/// Ties in the max go to the earliest position. Errors when `x` has fewer
/// rows than the window.
pub fn conv_pool_forward<F: Scalar>(x: &Tensor2<F>, p: &ConvParams<F>) -> Result<ConvTrace<F>> {
    let len = x.rows();
    if len < p.window {
        return Err(Error::InvalidArgument(format!(
            "sequence length {len} shorter than convolution window {}",
            p.window
        )));
    }
    let emb_dim = x.cols();
    let positions = len - p.window + 1;
    let n = p.n_filters();
    let mut best_pos = vec![0usize; n];
    let mut best_pre = vec![F::neg_infinity(); n];
    for j in 0..positions {
        // flattened window [j, j+window)
        for k in 0..n {
            let filter = p.filters.row(k);
            let mut acc = p.bias[k];
            for w in 0..p.window {
                let seg = &filter[w * emb_dim..(w + 1) * emb_dim];
                acc = acc + dot(seg, x.row(j + w));
            }
            if acc > best_pre[k] {
                best_pre[k] = acc;
                best_pos[k] = j;
            }
        }
    }
    let pooled: Vec<F> = best_pre.iter().map(|&a| a.max(F::zero())).collect();
    Ok(ConvTrace {
        best_pos,
        best_pre,
        pooled,
    })
}

/// Backward through pooling, ReLU and convolution. Gradient flows only to the
/// winning position of each filter, and only where the pre-ReLU activation is
/// positive.
pub fn conv_pool_backward<F: Scalar>(
    x: &Tensor2<F>,
    p: &ConvParams<F>,
    trace: &ConvTrace<F>,
    d_pooled: &[F],
    grads: &mut ConvParams<F>,
) -> Tensor2<F> {
    let emb_dim = x.cols();
    let mut d_x = x.zeros_like();
    for k in 0..p.n_filters() {
        if trace.best_pre[k] <= F::zero() {
            continue;
        }
        let d_a = d_pooled[k];
        let j = trace.best_pos[k];
        grads.bias[k] = grads.bias[k] + d_a;
        let filter = p.filters.row(k);
        let grad_filter = grads.filters.row_mut(k);
        for w in 0..p.window {
            let seg = &mut grad_filter[w * emb_dim..(w + 1) * emb_dim];
            for (gf, &xv) in seg.iter_mut().zip(x.row(j + w)) {
                *gf = *gf + d_a * xv;
            }
            let fseg = &filter[w * emb_dim..(w + 1) * emb_dim];
            for (dx, &fw) in d_x.row_mut(j + w).iter_mut().zip(fseg) {
                *dx = *dx + d_a * fw;
            }
        }
    }
    d_x
}

// ---------------------------------------------------------------------------
// Dense
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct DenseParams<F> {
    /// `[out × in]`
    pub w: Tensor2<F>,
    pub b: Vec<F>,
}

impl<F: Scalar> DenseParams<F> {
    pub fn zeros(out: usize, input: usize) -> Self {
        DenseParams {
            w: Tensor2::zeros(out, input),
            b: vec![F::zero(); out],
        }
    }

    /// w·h + b
    pub fn forward(&self, h: &[F]) -> Result<Vec<F>> {
        if h.len() != self.w.cols() {
            return Err(Error::DimensionMismatch {
                expected: self.w.cols(),
                got: h.len(),
            });
        }
        let mut out = self.b.clone();
        self.w.matvec_acc(h, &mut out);
        Ok(out)
    }

    /// Returns the gradient with respect to `h`.
    pub fn backward(&self, h: &[F], d_out: &[F], grads: &mut DenseParams<F>) -> Vec<F> {
        grads.w.outer_acc(d_out, h);
        add_assign(&mut grads.b, d_out);
        let mut d_h = vec![F::zero(); h.len()];
        self.w.matvec_t_acc(d_out, &mut d_h);
        d_h
    }
}

// ---------------------------------------------------------------------------
// Dropout
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DropoutMode {
    Train,
    Eval,
}

/// Inverted dropout: in train mode each entry is zeroed with probability `p`
/// and survivors are scaled by `1/(1-p)`, so eval mode is the identity.
/// Returns the output and the applied scale mask (1/(1-p) or 0 per entry);
/// multiplying an upstream gradient by the mask is the backward pass.
///
/// Consumes exactly `h.len()` draws from `rng` in train mode with `p > 0`.
pub fn dropout_apply<F: Scalar>(
    h: &[F],
    p: f64,
    mode: DropoutMode,
    rng: &mut Rng,
) -> Result<(Vec<F>, Vec<F>)> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!(
            "dropout probability must be in [0, 1), got {p}"
        )));
    }
    let one = F::one();
    if mode == DropoutMode::Eval || p == 0.0 {
        return Ok((h.to_vec(), vec![one; h.len()]));
    }
    let scale = num::<F>(1.0 / (1.0 - p));
    let mut out = Vec::with_capacity(h.len());
    let mut mask = Vec::with_capacity(h.len());
    for &v in h {
        if rng.next_f64() < p {
            out.push(F::zero());
            mask.push(F::zero());
        } else {
            out.push(v * scale);
            mask.push(scale);
        }
    }
    Ok((out, mask))
}

/// [`dropout_apply`] with a one-shot seed, for callers outside a training
/// loop.
pub fn dropout_with_seed<F: Scalar>(
    h: &[F],
    p: f64,
    mode: DropoutMode,
    seed: u64,
) -> Result<(Vec<F>, Vec<F>)> {
    dropout_apply(h, p, mode, &mut Rng::from_seed(seed))
}
