//! OLID-format corpus loading, per-task views, splits and class balancing.
//!
//! The OLID training file is UTF-8 TSV with a header line and five columns:
//! `id`, `tweet`, `subtask_a`, `subtask_b`, `subtask_c`. Labels form a
//! hierarchy: `subtask_b` is only present (non-`NULL`) for OFF tweets and
//! `subtask_c` only for TIN tweets.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};
use crate::rng::Rng;

/// One of the three classification tasks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Task {
    /// Offensive vs. not offensive.
    A,
    /// Targeted vs. untargeted insult.
    B,
    /// Target type: individual, group or other.
    C,
}

impl Task {
    /// The task's full label set, in canonical order. Macro-averaged metrics
    /// and tie-breaking use this order.
    pub fn labels(self) -> &'static [&'static str] {
        match self {
            Task::A => &["NOT", "OFF"],
            Task::B => &["TIN", "UNT"],
            Task::C => &["IND", "GRP", "OTH"],
        }
    }

    pub fn parse(s: &str) -> Result<Task> {
        match s {
            "A" | "a" => Ok(Task::A),
            "B" | "b" => Ok(Task::B),
            "C" | "c" => Ok(Task::C),
            other => Err(Error::InvalidArgument(format!("unknown task {other:?}"))),
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Task::A => write!(f, "A"),
            Task::B => write!(f, "B"),
            Task::C => write!(f, "C"),
        }
    }
}

/// Task A label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelA {
    Off,
    Not,
}

/// Task B label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelB {
    Tin,
    Unt,
}

/// Task C label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelC {
    Ind,
    Grp,
    Oth,
}

/// One labeled tweet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Example {
    pub id: String,
    pub text: String,
    pub label_a: LabelA,
    pub label_b: Option<LabelB>,
    pub label_c: Option<LabelC>,
}

/// An ordered collection of [`Example`]s with unique ids.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub examples: Vec<Example>,
    /// File path or tag describing where the data came from.
    pub source: String,
}

/// A per-task projection of a dataset: (text, label) pairs in load order.
#[derive(Debug, Clone)]
pub struct TaskView {
    pub task: Task,
    pub pairs: Vec<(String, String)>,
}

fn parse_label_a(s: &str, path: &str, line: usize) -> Result<LabelA> {
    match s {
        "OFF" => Ok(LabelA::Off),
        "NOT" => Ok(LabelA::Not),
        other => Err(Error::malformed(
            path,
            line,
            format!("unknown subtask_a label {other:?}"),
        )),
    }
}

fn parse_label_b(s: &str, path: &str, line: usize) -> Result<Option<LabelB>> {
    match s {
        "NULL" => Ok(None),
        "TIN" => Ok(Some(LabelB::Tin)),
        "UNT" => Ok(Some(LabelB::Unt)),
        other => Err(Error::malformed(
            path,
            line,
            format!("unknown subtask_b label {other:?}"),
        )),
    }
}

fn parse_label_c(s: &str, path: &str, line: usize) -> Result<Option<LabelC>> {
    match s {
        "NULL" => Ok(None),
        "IND" => Ok(Some(LabelC::Ind)),
        "GRP" => Ok(Some(LabelC::Grp)),
        "OTH" => Ok(Some(LabelC::Oth)),
        other => Err(Error::malformed(
            path,
            line,
            format!("unknown subtask_c label {other:?}"),
        )),
    }
}

/// Load an OLID training TSV. The literal string `NULL` (exact uppercase)
/// marks an absent subtask label; anything else unknown is an error, as are
/// rows with the wrong column count and duplicate ids.
pub fn load_olid_tsv(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let content = std::fs::read_to_string(path).map_err(|e| Error::io(&display, e))?;
    parse_olid_tsv(&content, &display)
}

/// Parse OLID TSV content; `origin` is used in error messages and recorded as
/// the dataset source.
pub fn parse_olid_tsv(content: &str, origin: &str) -> Result<Dataset> {
    let mut lines = content.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::malformed(origin, 1, "empty file, expected a header line"))?;
    let cols: Vec<&str> = header.split('\t').collect();
    if cols.len() != 5 || cols[0] != "id" {
        return Err(Error::malformed(
            origin,
            1,
            "expected header `id\\ttweet\\tsubtask_a\\tsubtask_b\\tsubtask_c`",
        ));
    }

    let mut examples = Vec::new();
    let mut seen = BTreeMap::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 5 {
            return Err(Error::malformed(
                origin,
                lineno,
                format!("expected 5 tab-separated columns, got {}", fields.len()),
            ));
        }
        let id = fields[0].to_string();
        if id.is_empty() {
            return Err(Error::malformed(origin, lineno, "empty id"));
        }
        if let Some(prev) = seen.insert(id.clone(), lineno) {
            return Err(Error::malformed(
                origin,
                lineno,
                format!("duplicate id {id:?}, first seen on line {prev}"),
            ));
        }
        let label_a = parse_label_a(fields[2], origin, lineno)?;
        let label_b = parse_label_b(fields[3], origin, lineno)?;
        let label_c = parse_label_c(fields[4], origin, lineno)?;
        if label_b.is_some() && label_a != LabelA::Off {
            return Err(Error::malformed(
                origin,
                lineno,
                "subtask_b label on a NOT-offensive row",
            ));
        }
        if label_c.is_some() && label_b != Some(LabelB::Tin) {
            return Err(Error::malformed(
                origin,
                lineno,
                "subtask_c label on a row that is not a targeted insult",
            ));
        }
        examples.push(Example {
            id,
            text: fields[1].to_string(),
            label_a,
            label_b,
            label_c,
        });
    }
    Ok(Dataset {
        examples,
        source: origin.to_string(),
    })
}

/// Deterministically shuffle `d` with the pinned generator, then split:
/// the first `floor(ratio * n)` examples form the first dataset, the rest the
/// second. The two parts partition `d` exactly.
pub fn split_train_val(d: &Dataset, ratio: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if d.examples.is_empty() {
        return Err(Error::EmptyInput("cannot split an empty dataset".into()));
    }
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "split ratio must be in (0, 1), got {ratio}"
        )));
    }
    let mut order: Vec<usize> = (0..d.examples.len()).collect();
    Rng::from_seed(seed).shuffle(&mut order);
    let cut = (ratio * d.examples.len() as f64).floor() as usize;
    let take = |idxs: &[usize], tag: &str| Dataset {
        examples: idxs.iter().map(|&i| d.examples[i].clone()).collect(),
        source: format!("{}#{tag}", d.source),
    };
    Ok((take(&order[..cut], "train"), take(&order[cut..], "val")))
}

/// Project a dataset onto one task. Task A keeps every example; B keeps only
/// rows with a subtask_b label; C only rows with a subtask_c label. Text is
/// passed through untouched.
pub fn task_view(d: &Dataset, task: Task) -> TaskView {
    let pairs = d
        .examples
        .iter()
        .filter_map(|ex| {
            let label = match task {
                Task::A => Some(match ex.label_a {
                    LabelA::Off => "OFF",
                    LabelA::Not => "NOT",
                }),
                Task::B => ex.label_b.map(|b| match b {
                    LabelB::Tin => "TIN",
                    LabelB::Unt => "UNT",
                }),
                Task::C => ex.label_c.map(|c| match c {
                    LabelC::Ind => "IND",
                    LabelC::Grp => "GRP",
                    LabelC::Oth => "OTH",
                }),
            };
            label.map(|l| (ex.text.clone(), l.to_string()))
        })
        .collect();
    TaskView { task, pairs }
}

/// Random-draw balancing: undersample every class to the size of the smallest
/// class present, uniformly without replacement, then shuffle the result.
///
/// Classes are processed in the task's canonical label order; when a label
/// outside the canonical set appears it is appended in first-appearance order.
/// Each class's draw consumes `sample_indices`, then a final `shuffle` fixes
/// the output order, all from one generator seeded with `seed`.
pub fn random_draw_balance(v: &TaskView, seed: u64) -> Result<TaskView> {
    let mut class_order: Vec<&str> = v.task.labels().to_vec();
    let mut by_class: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, (_, label)) in v.pairs.iter().enumerate() {
        if !class_order.contains(&label.as_str()) {
            class_order.push(label);
        }
        by_class.entry(label).or_default().push(i);
    }
    let present: Vec<&str> = class_order
        .iter()
        .copied()
        .filter(|c| by_class.contains_key(c))
        .collect();
    if present.len() < 2 {
        return Err(Error::EmptyInput(format!(
            "random draw needs at least 2 classes with examples, found {}",
            present.len()
        )));
    }
    let m = present
        .iter()
        .map(|c| by_class[c].len())
        .min()
        .expect("at least one class present");

    let mut rng = Rng::from_seed(seed);
    let mut kept: Vec<usize> = Vec::with_capacity(m * present.len());
    for class in &present {
        let members = &by_class[class];
        let picks = rng.sample_indices(members.len(), m);
        kept.extend(picks.into_iter().map(|p| members[p]));
    }
    rng.shuffle(&mut kept);
    Ok(TaskView {
        task: v.task,
        pairs: kept.into_iter().map(|i| v.pairs[i].clone()).collect(),
    })
}
