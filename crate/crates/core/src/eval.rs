//! Accuracy, per-class precision/recall/F1, macro-averaged F1 and confusion
//! matrices.
//!
//! All degenerate ratios (zero denominators) are defined as 0, and the macro
//! average runs over the full class list given to [`confusion`], including
//! classes that never occur in the data.

use crate::error::{Error, Result};

/// Square gold-by-predicted count matrix over an ordered class list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    pub classes: Vec<String>,
    /// counts[g][p]: gold class g predicted as class p.
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }
}

/// Per-class and aggregate classification metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub classes: Vec<String>,
    pub accuracy: f64,
    pub precision: Vec<f64>,
    pub recall: Vec<f64>,
    pub f1: Vec<f64>,
    pub macro_f1: f64,
}

impl MetricsReport {
    /// Human-readable table.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        out.push_str("class        precision   recall       f1\n");
        for (i, class) in self.classes.iter().enumerate() {
            out.push_str(&format!(
                "{:<10} {:>10.4} {:>8.4} {:>8.4}\n",
                class, self.precision[i], self.recall[i], self.f1[i]
            ));
        }
        out.push_str(&format!("accuracy  {:>10.4}\n", self.accuracy));
        out.push_str(&format!("macro F1  {:>10.4}\n", self.macro_f1));
        out
    }

    /// Machine-readable CSV: header plus one row per class plus aggregates.
    pub fn render_csv(&self) -> String {
        let mut out = String::from("metric,class,value\n");
        for (i, class) in self.classes.iter().enumerate() {
            out.push_str(&format!("precision,{class},{}\n", self.precision[i]));
            out.push_str(&format!("recall,{class},{}\n", self.recall[i]));
            out.push_str(&format!("f1,{class},{}\n", self.f1[i]));
        }
        out.push_str(&format!("accuracy,,{}\n", self.accuracy));
        out.push_str(&format!("macro_f1,,{}\n", self.macro_f1));
        out
    }
}

/// Build the confusion matrix of `pred` against `gold` over `classes`.
/// Lengths must agree and every label must be in `classes`.
pub fn confusion(gold: &[String], pred: &[String], classes: &[String]) -> Result<ConfusionMatrix> {
    if gold.len() != pred.len() {
        return Err(Error::DimensionMismatch {
            expected: gold.len(),
            got: pred.len(),
        });
    }
    let index_of = |label: &String| -> Result<usize> {
        classes
            .iter()
            .position(|c| c == label)
            .ok_or_else(|| Error::InvalidArgument(format!("label {label:?} not in class list")))
    };
    let k = classes.len();
    let mut counts = vec![vec![0u64; k]; k];
    for (g, p) in gold.iter().zip(pred.iter()) {
        counts[index_of(g)?][index_of(p)?] += 1;
    }
    Ok(ConfusionMatrix {
        classes: classes.to_vec(),
        counts,
    })
}

/// Compute metrics from a confusion matrix. Per class: precision TP/(TP+FP),
/// recall TP/(TP+FN), F1 = 2PR/(P+R), each 0 when its denominator is 0.
/// Macro-F1 averages F1 over all classes in the matrix's class list.
pub fn metrics(cm: &ConfusionMatrix) -> Result<MetricsReport> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::EmptyInput("empty confusion matrix".into()));
    }
    let k = cm.classes.len();
    let mut precision = Vec::with_capacity(k);
    let mut recall = Vec::with_capacity(k);
    let mut f1 = Vec::with_capacity(k);
    let mut trace = 0u64;
    for c in 0..k {
        let tp = cm.counts[c][c];
        trace += tp;
        let fp: u64 = (0..k).filter(|&g| g != c).map(|g| cm.counts[g][c]).sum();
        let fn_: u64 = (0..k).filter(|&p| p != c).map(|p| cm.counts[c][p]).sum();
        let p = safe_ratio(tp, tp + fp);
        let r = safe_ratio(tp, tp + fn_);
        precision.push(p);
        recall.push(r);
        f1.push(if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 });
    }
    let macro_f1 = f1.iter().sum::<f64>() / k as f64;
    Ok(MetricsReport {
        classes: cm.classes.clone(),
        accuracy: trace as f64 / total as f64,
        precision,
        recall,
        f1,
        macro_f1,
    })
}

fn safe_ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn labels(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn confusion_counts_pairs() {
        let classes = labels(&["A", "B"]);
        let cm = confusion(&labels(&["A", "B"]), &labels(&["A", "B"]), &classes).unwrap();
        assert_eq!(cm.counts, vec![vec![1, 0], vec![0, 1]]);

        let cm = confusion(&labels(&["A", "A"]), &labels(&["B", "B"]), &classes).unwrap();
        assert_eq!(cm.counts, vec![vec![0, 2], vec![0, 0]]);

        let cm = confusion(&[], &[], &classes).unwrap();
        assert_eq!(cm.total(), 0);
    }

    #[test]
    fn confusion_rejects_bad_input() {
        let classes = labels(&["A", "B"]);
        assert!(confusion(&labels(&["A"]), &labels(&[]), &classes).is_err());
        assert!(confusion(&labels(&["X"]), &labels(&["A"]), &classes).is_err());
    }

    #[test]
    fn perfect_predictions_score_one() {
        let classes = labels(&["A", "B"]);
        let gold = labels(&["A", "B", "A", "B"]);
        let cm = confusion(&gold, &gold, &classes).unwrap();
        let m = metrics(&cm).unwrap();
        assert_eq!(m.accuracy, 1.0);
        assert_eq!(m.macro_f1, 1.0);
    }

    #[test]
    fn constant_majority_on_66_34_split() {
        // 66 gold-majority and 34 gold-minority examples, all predicted majority
        let classes = labels(&["MAJ", "MIN"]);
        let mut gold = vec!["MAJ".to_string(); 66];
        gold.extend(vec!["MIN".to_string(); 34]);
        let pred = vec!["MAJ".to_string(); 100];
        let m = metrics(&confusion(&gold, &pred, &classes).unwrap()).unwrap();
        assert!((m.accuracy - 0.66).abs() < 1e-12);
        assert!((m.f1[0] - 0.795_180_722_891_566_3).abs() < 1e-12);
        assert_eq!(m.f1[1], 0.0);
        assert!((m.macro_f1 - 0.397_590_361_445_783_14).abs() < 1e-12);
    }

    #[test]
    fn absent_class_contributes_zero_to_macro() {
        let classes = labels(&["A", "B", "C"]);
        let gold = labels(&["A", "B"]);
        let pred = labels(&["A", "B"]);
        let m = metrics(&confusion(&gold, &pred, &classes).unwrap()).unwrap();
        assert_eq!(m.f1[2], 0.0);
        assert!((m.macro_f1 - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(m.accuracy, 1.0);
    }

    #[test]
    fn empty_matrix_is_an_error() {
        let classes = labels(&["A", "B"]);
        let cm = confusion(&[], &[], &classes).unwrap();
        assert!(metrics(&cm).is_err());
    }

    // independent recomputation straight from the label pairs
    fn brute_force_macro_f1(gold: &[String], pred: &[String], classes: &[String]) -> f64 {
        let mut f1_sum = 0.0;
        for class in classes {
            let tp = gold
                .iter()
                .zip(pred)
                .filter(|(g, p)| *g == class && *p == class)
                .count() as f64;
            let fp = gold
                .iter()
                .zip(pred)
                .filter(|(g, p)| *g != class && *p == class)
                .count() as f64;
            let fn_ = gold
                .iter()
                .zip(pred)
                .filter(|(g, p)| *g == class && *p != class)
                .count() as f64;
            let p = if tp + fp > 0.0 { tp / (tp + fp) } else { 0.0 };
            let r = if tp + fn_ > 0.0 { tp / (tp + fn_) } else { 0.0 };
            f1_sum += if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 };
        }
        f1_sum / classes.len() as f64
    }

    proptest! {
        #[test]
        fn macro_f1_matches_brute_force(
            pairs in proptest::collection::vec((0usize..4, 0usize..4), 1..100),
        ) {
            let classes = labels(&["C0", "C1", "C2", "C3"]);
            let gold: Vec<String> = pairs.iter().map(|&(g, _)| classes[g].clone()).collect();
            let pred: Vec<String> = pairs.iter().map(|&(_, p)| classes[p].clone()).collect();
            let m = metrics(&confusion(&gold, &pred, &classes).unwrap()).unwrap();
            let expected = brute_force_macro_f1(&gold, &pred, &classes);
            prop_assert_eq!(m.macro_f1, expected);
        }

        #[test]
        fn class_order_permutation_preserves_metrics(
            pairs in proptest::collection::vec((0usize..3, 0usize..3), 1..60),
        ) {
            let order_a = labels(&["X", "Y", "Z"]);
            let order_b = labels(&["Z", "X", "Y"]);
            let gold: Vec<String> = pairs.iter().map(|&(g, _)| order_a[g].clone()).collect();
            let pred: Vec<String> = pairs.iter().map(|&(_, p)| order_a[p].clone()).collect();
            let ma = metrics(&confusion(&gold, &pred, &order_a).unwrap()).unwrap();
            let mb = metrics(&confusion(&gold, &pred, &order_b).unwrap()).unwrap();
            prop_assert_eq!(ma.accuracy, mb.accuracy);
            // per-class F1s are identical; only their summation order differs
            prop_assert!((ma.macro_f1 - mb.macro_f1).abs() < 1e-12);
        }

        #[test]
        fn relabeling_bijection_preserves_metrics(
            pairs in proptest::collection::vec((0usize..3, 0usize..3), 1..60),
        ) {
            let original = labels(&["X", "Y", "Z"]);
            let renamed = labels(&["P", "Q", "R"]);
            let gold: Vec<String> = pairs.iter().map(|&(g, _)| original[g].clone()).collect();
            let pred: Vec<String> = pairs.iter().map(|&(_, p)| original[p].clone()).collect();
            let gold2: Vec<String> = pairs.iter().map(|&(g, _)| renamed[g].clone()).collect();
            let pred2: Vec<String> = pairs.iter().map(|&(_, p)| renamed[p].clone()).collect();
            let m1 = metrics(&confusion(&gold, &pred, &original).unwrap()).unwrap();
            let m2 = metrics(&confusion(&gold2, &pred2, &renamed).unwrap()).unwrap();
            prop_assert_eq!(m1.accuracy, m2.accuracy);
            prop_assert_eq!(m1.macro_f1, m2.macro_f1);
        }

        #[test]
        fn self_agreement_has_accuracy_one(
            seq in proptest::collection::vec(0usize..3, 1..50),
        ) {
            let classes = labels(&["X", "Y", "Z"]);
            let gold: Vec<String> = seq.iter().map(|&g| classes[g].clone()).collect();
            let m = metrics(&confusion(&gold, &gold, &classes).unwrap()).unwrap();
            prop_assert_eq!(m.accuracy, 1.0);
        }
    }
}
