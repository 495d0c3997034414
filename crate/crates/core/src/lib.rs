//! Offensive-language classification for tweets.
//!
//! The crate covers the full pipeline for the three OffensEval 2019 tasks:
//!
//! - Task A: offensive vs. not offensive (OFF / NOT)
//! - Task B: targeted vs. untargeted insult (TIN / UNT)
//! - Task C: target type (IND / GRP / OTH)
//!
//! Modules map to pipeline stages:
//!
//! - [`corpus`]: OLID TSV loading, per-task views, splits, random-draw balancing
//! - [`textprep`]: tweet cleaning and tokenization
//! - [`features`]: vocabulary, bag-of-words counts, TF-IDF, padded index sequences
//! - [`linear`]: logistic regression, multinomial naive Bayes, hinge-loss SGD
//! - [`neural`]: embedding + LSTM / BiLSTM / CNN stack with hand-written backprop
//! - [`eval`]: accuracy, per-class precision/recall/F1, macro-F1, confusion matrices
//! - [`pipeline`]: the `train` / `predict` / `evaluate` commands and model files
//!
//! Everything randomized is driven by the pinned generator in [`rng`], so a
//! fixed seed reproduces splits, initializations and training runs exactly.

pub mod corpus;
pub mod error;
pub mod eval;
pub mod features;
pub mod linear;
pub mod neural;
pub mod pipeline;
pub mod rng;
pub mod textprep;

pub use error::{Error, Result};
