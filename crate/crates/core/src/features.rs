//! Vocabulary construction and featurization: bag-of-words counts, TF-IDF and
//! padded word-index sequences.
//!
//! A [`Vocabulary`] ranks tokens by corpus frequency (ties broken by token,
//! ascending) and keeps at most `max_size` of them. In `DenseCount` mode token
//! ranks are feature indices directly; in `Sequence` mode indices are shifted
//! by two so 0 and 1 stay reserved for PAD and UNK.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::textprep::TokenList;

/// Index 0 in sequence encodings: padding.
pub const PAD_INDEX: u32 = 0;
/// Index 1 in sequence encodings: out-of-vocabulary token.
pub const UNK_INDEX: u32 = 1;

/// How vocabulary ranks map to indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VocabMode {
    /// Rank r is feature index r; used by bag-of-words and TF-IDF.
    DenseCount,
    /// Rank r is index r + 2; 0 and 1 are PAD and UNK.
    Sequence,
}

/// Frequency-ranked token-to-index map with a size cap.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    index_of: HashMap<String, u32>,
    ordered_tokens: Vec<String>,
    /// Corpus frequency of each retained token, aligned with `ordered_tokens`.
    frequencies: Vec<u64>,
    max_size: usize,
    mode: VocabMode,
}

impl Vocabulary {
    /// Number of retained tokens.
    pub fn len(&self) -> usize {
        self.ordered_tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ordered_tokens.is_empty()
    }

    /// Feature dimension: vocabulary size in dense mode, vocabulary size + 2
    /// (PAD and UNK) in sequence mode.
    pub fn dimension(&self) -> usize {
        match self.mode {
            VocabMode::DenseCount => self.len(),
            VocabMode::Sequence => self.len() + 2,
        }
    }

    pub fn mode(&self) -> VocabMode {
        self.mode
    }

    pub fn max_size(&self) -> usize {
        self.max_size
    }

    /// Index of a token under the vocabulary's mode, if retained.
    pub fn index_of(&self, token: &str) -> Option<u32> {
        self.index_of.get(token).copied()
    }

    /// Retained tokens in rank order (most frequent first).
    pub fn ordered_tokens(&self) -> &[String] {
        &self.ordered_tokens
    }

    pub fn frequencies(&self) -> &[u64] {
        &self.frequencies
    }

    /// Rebuild a vocabulary from its rank-ordered token list, as read back
    /// from a model file. Frequencies are not persisted.
    pub fn from_ordered_tokens(tokens: Vec<String>, max_size: usize, mode: VocabMode) -> Self {
        let offset = match mode {
            VocabMode::DenseCount => 0,
            VocabMode::Sequence => 2,
        };
        let index_of = tokens
            .iter()
            .enumerate()
            .map(|(r, t)| (t.clone(), r as u32 + offset))
            .collect();
        let frequencies = vec![0; tokens.len()];
        Vocabulary {
            index_of,
            ordered_tokens: tokens,
            frequencies,
            max_size,
            mode,
        }
    }

    /// Debug dump: one `rank token frequency` line per retained token.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (rank, (token, freq)) in self
            .ordered_tokens
            .iter()
            .zip(self.frequencies.iter())
            .enumerate()
        {
            out.push_str(&format!("{rank} {token} {freq}\n"));
        }
        out
    }
}

/// Sparse token-count vector: (index, count) pairs with strictly increasing
/// indices and positive counts, plus the owning vocabulary's dimension.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountVector {
    pub dim: usize,
    pub pairs: Vec<(u32, u32)>,
}

impl CountVector {
    /// Total token mass (sum of counts).
    pub fn total(&self) -> u64 {
        self.pairs.iter().map(|&(_, c)| c as u64).sum()
    }

    /// Clamp every count to 1 (binary presence encoding).
    pub fn to_binary(&self) -> CountVector {
        CountVector {
            dim: self.dim,
            pairs: self.pairs.iter().map(|&(i, _)| (i, 1)).collect(),
        }
    }
}

/// Smoothed inverse-document-frequency weights fitted on a document collection.
#[derive(Debug, Clone, PartialEq)]
pub struct TfidfModel {
    pub idf: Vec<f64>,
    pub document_count: usize,
}

/// A fixed-length index sequence: `indices[..true_length]` are token (or UNK)
/// indices, the rest is PAD.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedSequence {
    pub indices: Vec<u32>,
    pub true_length: usize,
}

/// Count token frequencies over `docs` and keep the `max_size` most frequent,
/// breaking frequency ties by token (ascending). Errors when the corpus
/// contains no tokens at all.
pub fn build_vocabulary(docs: &[TokenList], max_size: usize, mode: VocabMode) -> Result<Vocabulary> {
    if max_size == 0 {
        return Err(Error::InvalidArgument("max_size must be at least 1".into()));
    }
    let mut counts: HashMap<&str, u64> = HashMap::new();
    for doc in docs {
        for token in doc {
            *counts.entry(token.as_str()).or_insert(0) += 1;
        }
    }
    if counts.is_empty() {
        return Err(Error::EmptyInput(
            "cannot build a vocabulary from a corpus with no tokens".into(),
        ));
    }
    let mut ranked: Vec<(&str, u64)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    ranked.truncate(max_size);

    let offset = match mode {
        VocabMode::DenseCount => 0,
        VocabMode::Sequence => 2,
    };
    let mut index_of = HashMap::with_capacity(ranked.len());
    let mut ordered_tokens = Vec::with_capacity(ranked.len());
    let mut frequencies = Vec::with_capacity(ranked.len());
    for (rank, (token, freq)) in ranked.iter().enumerate() {
        index_of.insert(token.to_string(), rank as u32 + offset);
        ordered_tokens.push(token.to_string());
        frequencies.push(*freq);
    }
    Ok(Vocabulary {
        index_of,
        ordered_tokens,
        frequencies,
        max_size,
        mode,
    })
}

/// Count in-vocabulary tokens of `doc`; out-of-vocabulary tokens are ignored.
///
/// # Panics
/// Debug-asserts that the vocabulary is in dense-count mode.
pub fn bow_vectorize(doc: &TokenList, vocab: &Vocabulary) -> CountVector {
    debug_assert_eq!(vocab.mode(), VocabMode::DenseCount);
    let mut counts: HashMap<u32, u32> = HashMap::new();
    for token in doc {
        if let Some(idx) = vocab.index_of(token) {
            *counts.entry(idx).or_insert(0) += 1;
        }
    }
    let mut pairs: Vec<(u32, u32)> = counts.into_iter().collect();
    pairs.sort_unstable_by_key(|&(i, _)| i);
    CountVector {
        dim: vocab.dimension(),
        pairs,
    }
}

/// Fit smoothed IDF weights: `idf(t) = ln((1 + n) / (1 + df(t))) + 1` where
/// `df(t)` counts documents with a nonzero count for `t`. Weights are always
/// at least 1: exactly 1 for terms in every document, `ln(1 + n) + 1` for
/// terms in none.
pub fn tfidf_fit(docs: &[CountVector], n_docs: usize) -> Result<TfidfModel> {
    if n_docs == 0 {
        return Err(Error::EmptyInput("tf-idf needs at least one document".into()));
    }
    let dim = docs.first().map_or(0, |d| d.dim);
    let mut df = vec![0u64; dim];
    for doc in docs {
        if doc.dim != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: doc.dim,
            });
        }
        for &(idx, count) in &doc.pairs {
            if count > 0 {
                df[idx as usize] += 1;
            }
        }
    }
    let idf = df
        .iter()
        .map(|&d| ((1.0 + n_docs as f64) / (1.0 + d as f64)).ln() + 1.0)
        .collect();
    Ok(TfidfModel {
        idf,
        document_count: n_docs,
    })
}

/// Weight counts by IDF and L2-normalize the document vector. A zero vector
/// stays zero. Output is sparse (index, weight) pairs over the same dimension.
pub fn tfidf_transform(doc: &CountVector, model: &TfidfModel) -> Result<Vec<(u32, f64)>> {
    if doc.dim != model.idf.len() {
        return Err(Error::DimensionMismatch {
            expected: model.idf.len(),
            got: doc.dim,
        });
    }
    let mut weighted: Vec<(u32, f64)> = doc
        .pairs
        .iter()
        .map(|&(idx, count)| (idx, count as f64 * model.idf[idx as usize]))
        .collect();
    let norm = weighted.iter().map(|&(_, w)| w * w).sum::<f64>().sqrt();
    if norm > 0.0 {
        for (_, w) in &mut weighted {
            *w /= norm;
        }
    }
    Ok(weighted)
}

/// Replace tokens by vocabulary indices (OOV becomes UNK), truncate to
/// `max_len` keeping the prefix, and post-pad with PAD.
///
/// # Panics
/// Debug-asserts that the vocabulary is in sequence mode and `max_len >= 1`.
pub fn word2idx_encode(doc: &TokenList, vocab: &Vocabulary, max_len: usize) -> EncodedSequence {
    debug_assert_eq!(vocab.mode(), VocabMode::Sequence);
    debug_assert!(max_len >= 1);
    let true_length = doc.len().min(max_len);
    let mut indices = Vec::with_capacity(max_len);
    for token in doc.iter().take(true_length) {
        indices.push(vocab.index_of(token).unwrap_or(UNK_INDEX));
    }
    indices.resize(max_len, PAD_INDEX);
    EncodedSequence {
        indices,
        true_length,
    }
}

/// Longest document length in tokens. Errors on an empty corpus; a corpus of
/// empty documents has maximum length 0.
pub fn corpus_max_len(docs: &[TokenList]) -> Result<usize> {
    docs.iter()
        .map(Vec::len)
        .max()
        .ok_or_else(|| Error::EmptyInput("corpus_max_len of an empty corpus".into()))
}

/// Debug dump of a sparse count matrix: one `doc_id index:count ...` line per
/// document.
pub fn dump_sparse_matrix(ids: &[String], docs: &[CountVector]) -> String {
    let mut out = String::new();
    for (id, doc) in ids.iter().zip(docs.iter()) {
        out.push_str(id);
        for &(idx, count) in &doc.pairs {
            out.push_str(&format!(" {idx}:{count}"));
        }
        out.push('\n');
    }
    out
}
