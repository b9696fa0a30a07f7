use std::path::Path;
use std::process::Command;

use serde_json::Value;

fn treegp(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_treegp")).args(args).output().unwrap()
}

fn ok(args: &[&str]) {
    let out = treegp(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

const TREES: &str = "(S (NP (DT a) (NN dog)) (VP (VBD ran)))\n(S (NP (PRP it)) (VP (VBD ran)))\n(S (NP (DT the) (NN cat)) (VP (VBD sat)))\n(S (NP (NNP John)) (VP (VBD saw) (NP (PRP it))))\n(S (NP (DT a) (NN cat)) (VP (VBD saw) (NP (DT a) (NN dog))))\n(S (NP (PRP they)) (VP (VBD sat)))\n";

#[test]
fn kernel_command_writes_gram_and_gradients() {
    let dir = tempfile::tempdir().unwrap();
    let trees = write(dir.path(), "t.txt", "(S (A a) (B b))\n");
    let out = dir.path().join("k");
    ok(&["kernel", "--trees", &trees, "--no-normalize", "--lambda", "1", "--alpha-value", "1", "--grads", "--out", out.to_str().unwrap()]);
    let read = |f: &str| std::fs::read_to_string(out.join(f)).unwrap().trim().parse::<f64>().unwrap();
    assert_eq!(read("gram.csv"), 6.0);
    assert_eq!(read("gram_grad_lambda.all.csv"), 10.0);
    assert_eq!(read("gram_grad_alpha.all.csv"), 4.0);
    assert_eq!(json(&out.join("kernel.json"))["command"], "kernel");
}

#[test]
fn train_then_predict_reproduces_training_fit() {
    let dir = tempfile::tempdir().unwrap();
    let trees = write(dir.path(), "t.txt", TREES);
    let targets = write(dir.path(), "y.csv", "score,len\n1.0,4\n0.5,3\n1.2,4\n-0.3,5\n0.1,7\n0.4,3\n");
    let feats = write(dir.path(), "f.csv", "x\n0.1\n0.4\n0.2\n0.9\n1.0\n0.3\n");
    let out = dir.path().join("train");
    let out_s = out.to_str().unwrap();
    ok(&["train", "--trees", &trees, "--trees", &trees, "--features", &feats, "--targets", &targets, "--target-column", "score", "--combine", "product", "--restarts", "2", "--out", out_s]);
    let report = json(&out.join("train.json"));
    let names: Vec<&str> = report["results"]["hyperparameters"].as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(names, ["k0.lambda.all", "k0.alpha.all", "k1.lambda.all", "k1.alpha.all", "k2.rbf.variance", "k2.rbf.lengthscale"]);
    let train_rmse = report["results"]["training_rmse"].as_f64().unwrap();

    let pred = dir.path().join("pred");
    let model = out.join("model.json");
    ok(&["predict", "--model", model.to_str().unwrap(), "--trees", &trees, "--trees", &trees, "--features", &feats, "--targets", &targets, "--out", pred.to_str().unwrap()]);
    let p = json(&pred.join("predict.json"));
    assert!((p["results"]["metrics"]["rmse"].as_f64().unwrap() - train_rmse).abs() < 1e-10);
    let csv = std::fs::read_to_string(pred.join("predictions.csv")).unwrap();
    assert!(csv.starts_with("mean,variance\n"));
    assert_eq!(csv.lines().count(), 7);
}

#[test]
fn failures_print_a_code_and_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let trees = write(dir.path(), "t.txt", TREES);
    let short = write(dir.path(), "y.txt", "1\n2\n");
    let bad = write(dir.path(), "bad.txt", "(S (A a)\n");
    let out = dir.path().to_str().unwrap();
    let cases: Vec<(Vec<&str>, &str)> = vec![
        (vec!["predict", "--trees", &trees, "--out", out], "ERROR missing-model"),
        (vec!["train", "--trees", &trees, "--targets", &short, "--out", out], "ERROR shape-mismatch"),
        (vec!["kernel", "--trees", &bad, "--out", out], "ERROR unbalanced-brackets"),
        (vec!["kernel", "--trees", &trees, "--subset-symbols", "S", "--out", out], "ERROR usage"),
        (vec!["kernel", "--trees", &trees, "--hyper", "lambda.zzz=1", "--out", out], "ERROR usage"),
        (vec!["kernel", "--nope"], "ERROR usage"),
    ];
    for (args, prefix) in cases {
        let o = treegp(&args);
        assert!(!o.status.success(), "{args:?}");
        let err = String::from_utf8_lossy(&o.stderr);
        assert!(err.starts_with(prefix), "{args:?}: {err}");
    }
}

#[test]
fn per_word_divides_targets_by_token_count() {
    let dir = tempfile::tempdir().unwrap();
    let trees = write(dir.path(), "t.txt", TREES);
    let targets = write(dir.path(), "y.txt", "3\n2\n3\n3\n6\n2\n");
    let out = dir.path().join("o");
    ok(&["train", "--trees", &trees, "--targets", &targets, "--per-word", "0", "--no-center", "--restarts", "1", "--out", out.to_str().unwrap()]);
    let model = json(&out.join("model.json"));
    let y: Vec<f64> = model["targets"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    assert_eq!(y, vec![1.0, 1.0, 1.0, 1.0, 6.0 / 5.0, 1.0]);
    assert_eq!(model["target_mean"], 0.0);
}

#[test]
fn crossval_reports_every_fold_and_row() {
    let dir = tempfile::tempdir().unwrap();
    let trees = write(dir.path(), "t.txt", TREES);
    let targets = write(dir.path(), "y.txt", "1,0\n2,1\n3,0\n4,1\n5,0\n6,1\n");
    let out = dir.path().join("cv");
    ok(&["crossval", "--trees", &trees, "--targets", &targets, "--folds", "3", "--restarts", "1", "--out", out.to_str().unwrap()]);
    let folds = std::fs::read_to_string(out.join("crossval_folds.csv")).unwrap();
    assert_eq!(folds.lines().count(), 1 + 2 * 3);
    let preds = std::fs::read_to_string(out.join("crossval_predictions.csv")).unwrap();
    assert_eq!(preds.lines().count(), 1 + 2 * 6);
    let r = json(&out.join("crossval.json"));
    assert_eq!(r["results"]["columns"].as_array().unwrap().len(), 2);
}
