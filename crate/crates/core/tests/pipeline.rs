//! End-to-end tests of the train / predict / evaluate pipeline on synthetic
//! data, including the command-line binary itself.

mod common;

use std::path::{Path, PathBuf};
use std::process::Command;

use offlang::corpus::Task;
use offlang::pipeline::{
    cmd_evaluate, cmd_predict, cmd_train, FeatureKind, ModelFile, ModelKind, Predictor, RunConfig,
};

use common::{gold_csv_for_task, synthetic_olid_tsv};

struct Workspace {
    dir: tempfile::TempDir,
}

impl Workspace {
    fn new() -> Self {
        Workspace {
            dir: tempfile::tempdir().expect("create temp dir"),
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn write(&self, name: &str, content: &str) -> PathBuf {
        let p = self.path(name);
        std::fs::write(&p, content).expect("write test file");
        p
    }
}

fn base_config(train: &Path, out: &Path) -> RunConfig {
    RunConfig {
        task: Task::A,
        model: ModelKind::Lr,
        train_path: train.display().to_string(),
        model_out: out.display().to_string(),
        seed: 7,
        ..RunConfig::default()
    }
}

#[test]
fn linear_train_predict_evaluate_round_trip() {
    let ws = Workspace::new();
    let train_tsv = synthetic_olid_tsv(300, 1);
    let test_tsv = synthetic_olid_tsv(80, 2);
    let train = ws.write("train.tsv", &train_tsv);
    let test = ws.write("test.tsv", &test_tsv);
    let gold = ws.write("gold.csv", &gold_csv_for_task(&test_tsv, 'A'));
    let model = ws.path("model.json");

    let cfg = RunConfig {
        balance: true,
        ..base_config(&train, &model)
    };
    let outcome = cmd_train(&cfg).unwrap();
    let (split, report) = outcome.metrics.expect("training metrics");
    assert_eq!(split, "training");
    assert!(report.accuracy > 0.8, "training accuracy {}", report.accuracy);

    let preds = ws.path("preds.csv");
    let n = cmd_predict(&model, &test, &preds).unwrap();
    assert_eq!(n, 80);
    let lines: Vec<String> = std::fs::read_to_string(&preds)
        .unwrap()
        .lines()
        .map(String::from)
        .collect();
    assert_eq!(lines.len(), 80);
    // input order preserved, labels valid
    for (line, row) in lines.iter().zip(test_tsv.lines().skip(1)) {
        let (id, label) = line.split_once(',').unwrap();
        assert_eq!(id, row.split('\t').next().unwrap());
        assert!(label == "OFF" || label == "NOT");
    }

    let report = cmd_evaluate(&preds, &gold).unwrap();
    assert!(
        report.macro_f1 > 0.75,
        "synthetic data should be separable, macro F1 {}",
        report.macro_f1
    );
}

#[test]
fn tfidf_nb_and_hinge_variants_train() {
    let ws = Workspace::new();
    let train = ws.write("train.tsv", &synthetic_olid_tsv(200, 3));
    for (model, features) in [
        (ModelKind::Lr, FeatureKind::Tfidf),
        (ModelKind::Nb, FeatureKind::Bow),
        (ModelKind::Sgd, FeatureKind::Bow),
        (ModelKind::Nb, FeatureKind::Tfidf),
    ] {
        let out = ws.path(&format!("{model:?}-{features:?}.json"));
        let cfg = RunConfig {
            model,
            features: Some(features),
            balance: true,
            ..base_config(&train, &out)
        };
        let outcome = cmd_train(&cfg).unwrap_or_else(|e| panic!("{model:?}+{features:?}: {e}"));
        let (_, report) = outcome.metrics.unwrap();
        assert!(
            report.accuracy > 0.7,
            "{model:?}+{features:?} accuracy {}",
            report.accuracy
        );
        // model file loads and predicts
        let predictor = Predictor::load(&out).unwrap();
        let label = predictor.predict_text("you are trash and a clown").unwrap();
        assert!(label == "OFF" || label == "NOT");
    }
}

#[test]
fn task_b_and_c_pipelines() {
    let ws = Workspace::new();
    let train = ws.write("train.tsv", &synthetic_olid_tsv(400, 4));
    for (task, n_classes) in [(Task::B, 2), (Task::C, 3)] {
        let out = ws.path(&format!("task{task}.json"));
        let cfg = RunConfig {
            task,
            balance: true,
            ..base_config(&train, &out)
        };
        cmd_train(&cfg).unwrap();
        let file = ModelFile::load(&out).unwrap();
        assert_eq!(file.labels.len(), n_classes);
        assert_eq!(file.task, task);
    }
}

#[test]
fn neural_models_train_and_predict_through_files() {
    let ws = Workspace::new();
    let train_tsv = synthetic_olid_tsv(120, 5);
    let test_tsv = synthetic_olid_tsv(30, 6);
    let train = ws.write("train.tsv", &train_tsv);
    let test = ws.write("test.tsv", &test_tsv);

    for model in [ModelKind::Lstm, ModelKind::Bilstm, ModelKind::Cnn] {
        let out = ws.path(&format!("{model:?}.json"));
        let history = ws.path(&format!("{model:?}-history.csv"));
        let cfg = RunConfig {
            model,
            epochs: Some(2),
            hidden: 8,
            n_filters: 8,
            emb_dim: Some(6),
            vocab_size: 60,
            history_out: Some(history.display().to_string()),
            ..base_config(&train, &out)
        };
        let outcome = cmd_train(&cfg).unwrap_or_else(|e| panic!("{model:?}: {e}"));
        let history_text = std::fs::read_to_string(&history).unwrap();
        assert!(history_text.starts_with("epoch,train_loss,val_loss,val_acc,val_macro_f1"));
        assert_eq!(
            history_text.lines().count(),
            outcome.history.unwrap().val_loss.len() + 1
        );

        let preds = ws.path(&format!("{model:?}-preds.csv"));
        let n = cmd_predict(&out, &test, &preds).unwrap();
        assert_eq!(n, 30);
    }
}

#[test]
fn model_file_round_trip_preserves_predictions() {
    let ws = Workspace::new();
    let train_tsv = synthetic_olid_tsv(150, 8);
    let train = ws.write("train.tsv", &train_tsv);
    let out = ws.path("model.json");
    let cfg = RunConfig {
        model: ModelKind::Lstm,
        epochs: Some(2),
        hidden: 6,
        emb_dim: Some(5),
        vocab_size: 50,
        ..base_config(&train, &out)
    };
    cmd_train(&cfg).unwrap();

    // loading twice gives identical predictions on arbitrary text
    let p1 = Predictor::load(&out).unwrap();
    let p2 = Predictor::load(&out).unwrap();
    for text in [
        "you are a pathetic clown URL",
        "lovely sunshine in the garden",
        "@USER @USER URL",
        "",
        "sooooo much chaos!!!",
    ] {
        assert_eq!(
            p1.predict_with_probabilities(text).unwrap(),
            p2.predict_with_probabilities(text).unwrap()
        );
    }
}

#[test]
fn same_seed_produces_byte_identical_model_files() {
    let ws = Workspace::new();
    let train = ws.write("train.tsv", &synthetic_olid_tsv(100, 9));
    for model in [ModelKind::Lr, ModelKind::Lstm] {
        let out1 = ws.path(&format!("{model:?}-run1.json"));
        let out2 = ws.path(&format!("{model:?}-run2.json"));
        let make = |out: &Path| RunConfig {
            model,
            epochs: Some(2),
            hidden: 5,
            emb_dim: Some(4),
            vocab_size: 40,
            balance: true,
            ..base_config(&train, out)
        };
        cmd_train(&make(&out1)).unwrap();
        cmd_train(&make(&out2)).unwrap();
        let b1 = std::fs::read(&out1).unwrap();
        let b2 = std::fs::read(&out2).unwrap();
        assert_eq!(b1, b2, "{model:?} model files differ between identical runs");
    }
}

#[test]
fn invalid_configurations_fail_before_any_work() {
    let ws = Workspace::new();
    let train = ws.write("train.tsv", &synthetic_olid_tsv(50, 10));
    let out = ws.path("model.json");

    let neural_bow = RunConfig {
        model: ModelKind::Lstm,
        features: Some(FeatureKind::Bow),
        ..base_config(&train, &out)
    };
    assert!(cmd_train(&neural_bow).is_err());

    let linear_seq = RunConfig {
        model: ModelKind::Lr,
        features: Some(FeatureKind::Seq),
        ..base_config(&train, &out)
    };
    assert!(cmd_train(&linear_seq).is_err());

    let bad_dropout = RunConfig {
        model: ModelKind::Lstm,
        dropout: 1.0,
        ..base_config(&train, &out)
    };
    assert!(cmd_train(&bad_dropout).is_err());
    assert!(!out.exists(), "no model file on config error");
}

#[test]
fn tweets_that_clean_to_nothing_still_get_predictions() {
    let ws = Workspace::new();
    let train = ws.write("train.tsv", &synthetic_olid_tsv(100, 11));
    let out = ws.path("model.json");
    cmd_train(&base_config(&train, &out)).unwrap();

    let test = ws.write(
        "test.tsv",
        "id\ttweet\n1\t@USER URL\n2\t!!!\n3\tnormal sunshine tweet\n",
    );
    let preds = ws.path("preds.csv");
    assert_eq!(cmd_predict(&out, &test, &preds).unwrap(), 3);
    let content = std::fs::read_to_string(&preds).unwrap();
    assert_eq!(content.lines().count(), 3);
}

#[test]
fn evaluate_rejects_mismatched_ids() {
    let ws = Workspace::new();
    let pred = ws.write("pred.csv", "1,OFF\n2,NOT\n");
    let gold = ws.write("gold.csv", "1,OFF\n3,NOT\n");
    assert!(cmd_evaluate(&pred, &gold).is_err());

    let dup_pred = ws.write("dup.csv", "1,OFF\n1,NOT\n");
    let gold2 = ws.write("gold2.csv", "1,OFF\n");
    assert!(cmd_evaluate(&dup_pred, &gold2).is_err());

    let ok_pred = ws.write("ok.csv", "1,OFF\n2,NOT\n");
    let ok_gold = ws.write("okg.csv", "1,OFF\n2,OFF\n");
    let report = cmd_evaluate(&ok_pred, &ok_gold).unwrap();
    assert_eq!(report.accuracy, 0.5);
}

#[test]
fn vocab_union_includes_test_tokens() {
    let ws = Workspace::new();
    let train = ws.write("train.tsv", &synthetic_olid_tsv(100, 12));
    // the union file carries a token absent from training data
    let extra = ws.write(
        "extra.tsv",
        "id\ttweet\n900\tzyzzyva zyzzyva zyzzyva zyzzyva zyzzyva zyzzyva zyzzyva zyzzyva zyzzyva\n",
    );
    let out_with = ws.path("with.json");
    let cfg = RunConfig {
        vocab_union: Some(extra.display().to_string()),
        vocab_size: 5000,
        ..base_config(&train, &out_with)
    };
    cmd_train(&cfg).unwrap();
    let file = ModelFile::load(&out_with).unwrap();
    assert!(file.vocab_tokens.iter().any(|t| t == "zyzzyva"));

    let out_without = ws.path("without.json");
    cmd_train(&RunConfig {
        vocab_size: 5000,
        ..base_config(&train, &out_without)
    })
    .unwrap();
    let file = ModelFile::load(&out_without).unwrap();
    assert!(!file.vocab_tokens.iter().any(|t| t == "zyzzyva"));
}

#[test]
fn vocab_dump_has_rank_token_frequency_lines() {
    let ws = Workspace::new();
    let train = ws.write("train.tsv", &synthetic_olid_tsv(60, 13));
    let out = ws.path("model.json");
    let dump = ws.path("vocab.txt");
    let cfg = RunConfig {
        vocab_dump: Some(dump.display().to_string()),
        ..base_config(&train, &out)
    };
    cmd_train(&cfg).unwrap();
    let text = std::fs::read_to_string(&dump).unwrap();
    let first = text.lines().next().unwrap();
    let parts: Vec<&str> = first.split(' ').collect();
    assert_eq!(parts.len(), 3);
    assert_eq!(parts[0], "0");
    assert!(parts[2].parse::<u64>().unwrap() >= 1);
    // frequencies are non-increasing down the ranking
    let freqs: Vec<u64> = text
        .lines()
        .map(|l| l.split(' ').nth(2).unwrap().parse().unwrap())
        .collect();
    assert!(freqs.windows(2).all(|w| w[0] >= w[1]));
}

// --- binary-level tests -----------------------------------------------

fn offlang_bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_offlang"))
}

#[test]
fn cli_train_predict_evaluate() {
    let ws = Workspace::new();
    let train_tsv = synthetic_olid_tsv(150, 14);
    let test_tsv = synthetic_olid_tsv(40, 15);
    let train = ws.write("train.tsv", &train_tsv);
    let test = ws.write("test.tsv", &test_tsv);
    let gold = ws.write("gold.csv", &gold_csv_for_task(&test_tsv, 'A'));
    let model = ws.path("model.json");
    let preds = ws.path("preds.csv");

    let status = offlang_bin()
        .args(["train", "--task", "A", "--model", "lr", "--features", "bow"])
        .args(["--balance", "--seed", "7"])
        .arg("--train")
        .arg(&train)
        .arg("--out")
        .arg(&model)
        .status()
        .expect("run train");
    assert!(status.success());

    let status = offlang_bin()
        .arg("predict")
        .arg("--model")
        .arg(&model)
        .arg("--data")
        .arg(&test)
        .arg("--out")
        .arg(&preds)
        .status()
        .expect("run predict");
    assert!(status.success());

    let output = offlang_bin()
        .arg("evaluate")
        .arg("--pred")
        .arg(&preds)
        .arg("--gold")
        .arg(&gold)
        .output()
        .expect("run evaluate");
    assert!(output.status.success());
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("macro F1"), "report missing: {stdout}");
}

#[test]
fn cli_config_file_with_flag_override() {
    let ws = Workspace::new();
    let train = ws.write("train.tsv", &synthetic_olid_tsv(100, 16));
    let model = ws.path("model.json");
    // config file says seed 1, nb; flags override the model to lr
    let config = ws.write(
        "run.json",
        &format!(
            r#"{{"task":"A","model":"nb","seed":1,"train_path":{:?},"model_out":{:?}}}"#,
            train.display().to_string(),
            model.display().to_string()
        ),
    );
    let status = offlang_bin()
        .arg("train")
        .arg("--config")
        .arg(&config)
        .args(["--model", "lr"])
        .status()
        .expect("run train");
    assert!(status.success());
    let file = ModelFile::load(&model).unwrap();
    assert_eq!(file.config.model, ModelKind::Lr);
    assert_eq!(file.config.seed, 1);
}

#[test]
fn cli_errors_exit_nonzero_with_one_line_diagnostic() {
    let output = offlang_bin()
        .args(["train", "--task", "A", "--model", "lstm", "--features", "bow"])
        .args(["--train", "/nonexistent.tsv", "--out", "/tmp/x.json"])
        .output()
        .expect("run train");
    assert!(!output.status.success());
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.starts_with("error: "), "stderr: {stderr}");
    assert_eq!(stderr.trim_end().lines().count(), 1);

    let output = offlang_bin()
        .args(["evaluate", "--pred", "/nope.csv", "--gold", "/nope2.csv"])
        .output()
        .expect("run evaluate");
    assert!(!output.status.success());
}
