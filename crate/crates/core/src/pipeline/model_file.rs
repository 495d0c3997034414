//! Self-contained model persistence.
//!
//! A model file is a versioned JSON document holding everything prediction
//! needs: the preprocessing flags, the abbreviation lexicon and stopword list
//! that were in effect, the vocabulary, feature parameters (IDF weights or
//! sequence length) and the model weights. Weight arrays are stored as IEEE
//! 754 bit patterns in fixed-width lowercase hex (16 digits per f64, 8 per
//! f32), so saving and loading round-trips exactly and equal training runs
//! produce byte-identical files.

use std::path::Path;

use crate::corpus::Task;
use crate::error::{Error, Result};
use crate::features::{TfidfModel, VocabMode, Vocabulary};
use crate::linear::{LinearKind, LinearModel, NaiveBayesModel};
use crate::neural::tensor::Tensor2;
use crate::neural::{
    Arch, ConvParams, DenseParams, EmbeddingParams, EncoderParams, LstmParams, NetDims, NetParams,
    NeuralModel,
};
use crate::textprep::{AbbreviationLexicon, CleanConfig, StopwordList};

use super::RunConfig;

pub const FORMAT_VERSION: u32 = 1;

pub fn encode_f64s(values: &[f64]) -> String {
    let mut out = String::with_capacity(values.len() * 16);
    for v in values {
        out.push_str(&format!("{:016x}", v.to_bits()));
    }
    out
}

pub fn decode_f64s(hex: &str) -> Result<Vec<f64>> {
    if !hex.len().is_multiple_of(16) {
        return Err(Error::ModelFile(format!(
            "f64 hex payload length {} is not a multiple of 16",
            hex.len()
        )));
    }
    hex.as_bytes()
        .chunks(16)
        .map(|chunk| {
            let s = std::str::from_utf8(chunk).expect("chunk of an ascii string");
            u64::from_str_radix(s, 16)
                .map(f64::from_bits)
                .map_err(|_| Error::ModelFile(format!("bad f64 hex chunk {s:?}")))
        })
        .collect()
}

pub fn encode_f32s(values: &[f32]) -> String {
    let mut out = String::with_capacity(values.len() * 8);
    for v in values {
        out.push_str(&format!("{:08x}", v.to_bits()));
    }
    out
}

pub fn decode_f32s(hex: &str) -> Result<Vec<f32>> {
    if !hex.len().is_multiple_of(8) {
        return Err(Error::ModelFile(format!(
            "f32 hex payload length {} is not a multiple of 8",
            hex.len()
        )));
    }
    hex.as_bytes()
        .chunks(8)
        .map(|chunk| {
            let s = std::str::from_utf8(chunk).expect("chunk of an ascii string");
            u32::from_str_radix(s, 16)
                .map(f32::from_bits)
                .map_err(|_| Error::ModelFile(format!("bad f32 hex chunk {s:?}")))
        })
        .collect()
}

/// One named weight tensor (vectors use rows = 1).
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct TensorBlock {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    pub data_hex: String,
}

impl TensorBlock {
    fn from_tensor(name: &str, t: &Tensor2<f32>) -> Self {
        TensorBlock {
            name: name.to_string(),
            rows: t.rows(),
            cols: t.cols(),
            data_hex: encode_f32s(t.as_slice()),
        }
    }

    fn from_vec(name: &str, v: &[f32]) -> Self {
        TensorBlock {
            name: name.to_string(),
            rows: 1,
            cols: v.len(),
            data_hex: encode_f32s(v),
        }
    }

    fn to_tensor(&self, expect_name: &str) -> Result<Tensor2<f32>> {
        self.check_name(expect_name)?;
        let data = decode_f32s(&self.data_hex)?;
        if data.len() != self.rows * self.cols {
            return Err(Error::ModelFile(format!(
                "tensor {} declares {}x{} but carries {} values",
                self.name,
                self.rows,
                self.cols,
                data.len()
            )));
        }
        Ok(Tensor2::from_vec(self.rows, self.cols, data))
    }

    fn to_vec(&self, expect_name: &str) -> Result<Vec<f32>> {
        self.check_name(expect_name)?;
        decode_f32s(&self.data_hex)
    }

    fn check_name(&self, expect: &str) -> Result<()> {
        if self.name != expect {
            return Err(Error::ModelFile(format!(
                "expected tensor {expect:?}, found {:?}",
                self.name
            )));
        }
        Ok(())
    }
}

/// Feature-stage parameters persisted alongside the vocabulary.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FeatureSpec {
    Bow { binary: bool },
    Tfidf { document_count: usize, idf_hex: String },
    Seq { max_len: usize },
}

/// Model weights, per family.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ModelWeights {
    Linear {
        kind: LinearKind,
        dim: usize,
        rows_hex: Vec<String>,
        bias_hex: String,
    },
    NaiveBayes {
        dim: usize,
        alpha: f64,
        log_prior_hex: String,
        log_likelihood_hex: Vec<String>,
    },
    Neural {
        arch: Arch,
        dims: NetDims,
        max_len: usize,
        tensors: Vec<TensorBlock>,
    },
}

/// The on-disk document.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct ModelFile {
    pub format_version: u32,
    /// Snapshot of the training configuration (output paths cleared).
    pub config: RunConfig,
    pub task: Task,
    pub labels: Vec<String>,
    pub clean: CleanConfig,
    pub lexicon: Vec<(String, Vec<String>)>,
    pub stopwords: Vec<String>,
    pub vocab_mode: VocabMode,
    pub vocab_max_size: usize,
    pub vocab_tokens: Vec<String>,
    pub features: FeatureSpec,
    pub model: ModelWeights,
}

impl ModelFile {
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| Error::ModelFile(format!("serialization failed: {e}")))?;
        std::fs::write(path, json.as_bytes())
            .map_err(|e| Error::io(path.display().to_string(), e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<ModelFile> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        let file: ModelFile = serde_json::from_str(&text)
            .map_err(|e| Error::ModelFile(format!("parse failed: {e}")))?;
        if file.format_version != FORMAT_VERSION {
            return Err(Error::ModelFile(format!(
                "unsupported format version {} (this build reads {FORMAT_VERSION})",
                file.format_version
            )));
        }
        Ok(file)
    }

    pub fn vocabulary(&self) -> Vocabulary {
        Vocabulary::from_ordered_tokens(
            self.vocab_tokens.clone(),
            self.vocab_max_size,
            self.vocab_mode,
        )
    }

    pub fn abbreviation_lexicon(&self) -> AbbreviationLexicon {
        AbbreviationLexicon::from_entries(self.lexicon.iter().cloned())
    }

    pub fn stopword_list(&self) -> StopwordList {
        let mut text = String::new();
        for w in &self.stopwords {
            text.push_str(w);
            text.push('\n');
        }
        StopwordList::parse(&text)
    }

    pub fn tfidf_model(&self) -> Result<Option<TfidfModel>> {
        match &self.features {
            FeatureSpec::Tfidf {
                document_count,
                idf_hex,
            } => Ok(Some(TfidfModel {
                idf: decode_f64s(idf_hex)?,
                document_count: *document_count,
            })),
            _ => Ok(None),
        }
    }
}

pub fn linear_to_weights(m: &LinearModel) -> ModelWeights {
    ModelWeights::Linear {
        kind: m.kind,
        dim: m.dim,
        rows_hex: m.weights.iter().map(|row| encode_f64s(row)).collect(),
        bias_hex: encode_f64s(&m.bias),
    }
}

pub fn weights_to_linear(w: &ModelWeights, classes: &[String]) -> Result<LinearModel> {
    let ModelWeights::Linear {
        kind,
        dim,
        rows_hex,
        bias_hex,
    } = w
    else {
        return Err(Error::ModelFile("expected linear weights".into()));
    };
    let weights = rows_hex
        .iter()
        .map(|h| decode_f64s(h))
        .collect::<Result<Vec<_>>>()?;
    for row in &weights {
        if row.len() != *dim {
            return Err(Error::ModelFile("linear weight row length mismatch".into()));
        }
    }
    Ok(LinearModel {
        kind: *kind,
        classes: classes.to_vec(),
        dim: *dim,
        weights,
        bias: decode_f64s(bias_hex)?,
    })
}

pub fn nb_to_weights(m: &NaiveBayesModel) -> ModelWeights {
    ModelWeights::NaiveBayes {
        dim: m.dim,
        alpha: m.alpha,
        log_prior_hex: encode_f64s(&m.log_prior),
        log_likelihood_hex: m.log_likelihood.iter().map(|r| encode_f64s(r)).collect(),
    }
}

pub fn weights_to_nb(w: &ModelWeights, classes: &[String]) -> Result<NaiveBayesModel> {
    let ModelWeights::NaiveBayes {
        dim,
        alpha,
        log_prior_hex,
        log_likelihood_hex,
    } = w
    else {
        return Err(Error::ModelFile("expected naive Bayes weights".into()));
    };
    Ok(NaiveBayesModel {
        classes: classes.to_vec(),
        dim: *dim,
        log_prior: decode_f64s(log_prior_hex)?,
        log_likelihood: log_likelihood_hex
            .iter()
            .map(|h| decode_f64s(h))
            .collect::<Result<Vec<_>>>()?,
        alpha: *alpha,
    })
}

// Tensor block order mirrors the parameter traversal used by the optimizers:
// embedding, encoder blocks (per gate w/u/b, forward then backward; or conv
// filters and bias), dense w and b.
fn lstm_blocks(prefix: &str, p: &LstmParams<f32>, out: &mut Vec<TensorBlock>) {
    const GATES: [&str; 4] = ["input", "forget", "output", "candidate"];
    for (g, gate) in GATES.iter().enumerate() {
        out.push(TensorBlock::from_tensor(&format!("{prefix}.w_{gate}"), &p.w[g]));
        out.push(TensorBlock::from_tensor(&format!("{prefix}.u_{gate}"), &p.u[g]));
        out.push(TensorBlock::from_vec(&format!("{prefix}.b_{gate}"), &p.b[g]));
    }
}

fn lstm_from_blocks(
    prefix: &str,
    blocks: &mut std::slice::Iter<'_, TensorBlock>,
) -> Result<LstmParams<f32>> {
    const GATES: [&str; 4] = ["input", "forget", "output", "candidate"];
    let mut next = || {
        blocks
            .next()
            .ok_or_else(|| Error::ModelFile("missing tensor block".into()))
    };
    let mut w = Vec::with_capacity(4);
    let mut u = Vec::with_capacity(4);
    let mut b = Vec::with_capacity(4);
    for gate in GATES {
        w.push(next()?.to_tensor(&format!("{prefix}.w_{gate}"))?);
        u.push(next()?.to_tensor(&format!("{prefix}.u_{gate}"))?);
        b.push(next()?.to_vec(&format!("{prefix}.b_{gate}"))?);
    }
    Ok(LstmParams {
        w: w.try_into().expect("four gates"),
        u: u.try_into().expect("four gates"),
        b: b.try_into().expect("four gates"),
    })
}

pub fn neural_to_weights(m: &NeuralModel<f32>, dims: &NetDims) -> ModelWeights {
    let mut tensors = vec![TensorBlock::from_tensor(
        "embedding",
        &m.params.embedding.table,
    )];
    match &m.params.encoder {
        EncoderParams::Lstm(p) => lstm_blocks("lstm", p, &mut tensors),
        EncoderParams::BiLstm { fwd, bwd } => {
            lstm_blocks("lstm_fwd", fwd, &mut tensors);
            lstm_blocks("lstm_bwd", bwd, &mut tensors);
        }
        EncoderParams::Conv(p) => {
            tensors.push(TensorBlock::from_tensor("conv.filters", &p.filters));
            tensors.push(TensorBlock::from_vec("conv.bias", &p.bias));
        }
    }
    tensors.push(TensorBlock::from_tensor("dense.w", &m.params.dense.w));
    tensors.push(TensorBlock::from_vec("dense.b", &m.params.dense.b));
    ModelWeights::Neural {
        arch: m.arch,
        dims: dims.clone(),
        max_len: m.max_len,
        tensors,
    }
}

pub fn weights_to_neural(w: &ModelWeights, classes: &[String]) -> Result<NeuralModel<f32>> {
    let ModelWeights::Neural {
        arch,
        dims,
        max_len,
        tensors,
    } = w
    else {
        return Err(Error::ModelFile("expected neural weights".into()));
    };
    let mut it = tensors.iter();
    let table = it
        .next()
        .ok_or_else(|| Error::ModelFile("missing embedding tensor".into()))?
        .to_tensor("embedding")?;
    let encoder = match arch {
        Arch::Lstm => EncoderParams::Lstm(lstm_from_blocks("lstm", &mut it)?),
        Arch::BiLstm => EncoderParams::BiLstm {
            fwd: lstm_from_blocks("lstm_fwd", &mut it)?,
            bwd: lstm_from_blocks("lstm_bwd", &mut it)?,
        },
        Arch::Cnn => {
            let filters = it
                .next()
                .ok_or_else(|| Error::ModelFile("missing conv filters".into()))?
                .to_tensor("conv.filters")?;
            let bias = it
                .next()
                .ok_or_else(|| Error::ModelFile("missing conv bias".into()))?
                .to_vec("conv.bias")?;
            EncoderParams::Conv(ConvParams {
                filters,
                bias,
                window: dims.window,
            })
        }
    };
    let dense_w = it
        .next()
        .ok_or_else(|| Error::ModelFile("missing dense weights".into()))?
        .to_tensor("dense.w")?;
    let dense_b = it
        .next()
        .ok_or_else(|| Error::ModelFile("missing dense bias".into()))?
        .to_vec("dense.b")?;
    if it.next().is_some() {
        return Err(Error::ModelFile("unexpected trailing tensor block".into()));
    }
    Ok(NeuralModel {
        arch: *arch,
        classes: classes.to_vec(),
        max_len: *max_len,
        params: NetParams {
            embedding: EmbeddingParams { table },
            encoder,
            dense: DenseParams {
                w: dense_w,
                b: dense_b,
            },
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hex_round_trips_exactly() {
        let values = vec![0.0f64, -0.0, 1.5, f64::MIN_POSITIVE, 1e300, -123.456];
        let decoded = decode_f64s(&encode_f64s(&values)).unwrap();
        for (a, b) in values.iter().zip(&decoded) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        let values32 = vec![0.25f32, -7.75, f32::MIN_POSITIVE, 3.4e38];
        let decoded32 = decode_f32s(&encode_f32s(&values32)).unwrap();
        for (a, b) in values32.iter().zip(&decoded32) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert!(decode_f64s("abc").is_err());
        assert!(decode_f32s("zzzzzzzz").is_err());
    }

    #[test]
    fn linear_weights_round_trip() {
        let classes = vec!["NOT".to_string(), "OFF".to_string()];
        let m = LinearModel {
            kind: LinearKind::Logistic,
            classes: classes.clone(),
            dim: 3,
            weights: vec![vec![0.1, -0.2, 1e-9]],
            bias: vec![0.5],
        };
        let back = weights_to_linear(&linear_to_weights(&m), &classes).unwrap();
        assert_eq!(m, back);
    }
}
