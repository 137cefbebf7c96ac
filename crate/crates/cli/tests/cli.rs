use std::path::Path;
use std::process::{Command, Output};

fn lace(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lace")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn small_config(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("config.json");
    std::fs::write(
        &path,
        r#"{
  "dataset": {"kind": "synthetic", "classes": 4, "per_class": 30, "test_per_class": 10, "dim": 6, "spread": 0.2},
  "epochs": 3,
  "batch_size": 20,
  "trials": 2,
  "sgd": {"lr0": 0.05}
}"#,
    )
    .unwrap();
    path
}

#[test]
fn eval_loss_symmetric_pair() {
    let o = lace(&["eval-loss", "--logits", "0,0", "--class", "0"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("cross_entropy    0.693147"), "{s}");
    assert!(s.contains("adaptive         0.346574"), "{s}");
    assert!(s.contains("k(q_c)           0.846574"), "{s}");
}

#[test]
fn eval_loss_json_and_negative_logits() {
    let o = lace(&["eval-loss", "--logits", "-1,2,0.5", "--class", "1", "--json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["probs"].as_array().unwrap().len(), 3);
    let bad = lace(&["eval-loss", "--logits", "0,0", "--class", "2"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn gradcheck_passes_and_catches_corruption() {
    let o = lace(&["gradcheck", "--classes", "2,5", "--samples", "50", "--seed", "3"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert_eq!(stdout(&o).lines().filter(|l| l.starts_with("ok")).count(), 4);
    let bad = lace(&["gradcheck", "--classes", "3", "--samples", "20", "--corrupt", "1e-3"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(stdout(&bad).contains("FAIL"));
}

#[test]
fn train_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let out = dir.path().join("run");
    let o = lace(&[
        "train", "--config", cfg.to_str().unwrap(), "--loss", "adaptive", "--seed", "4",
        "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("adaptive_trial1.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "epoch,lr,train_loss,test_top1_acc,test_top5_err");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("0,0.05,"));
}

#[test]
fn compare_writes_table_and_checksums() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let out = dir.path().join("cmp");
    let o = lace(&["compare", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--threads", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = stdout(&o);
    assert!(s.contains("paired seeds verified: yes"), "{s}");
    assert!(s.contains("mean and std."));
    for f in ["summary.txt", "summary.json", "checksums.csv", "cross_entropy_trial2.csv", "adaptive_trial2.csv"] {
        assert!(out.join(f).is_file(), "{f}");
    }
}

#[test]
fn compare_needs_two_trials() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let o = lace(&["compare", "--config", cfg.to_str().unwrap(), "--trials", "1", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("at least 2 trials"));
}

#[test]
fn inspect_data_default_blobs() {
    let o = lace(&["inspect-data"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("train n=2000") && s.contains("test  n=1000"), "{s}");
}

#[test]
fn bad_config_and_missing_cifar() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"epoch": 3}"#).unwrap();
    assert_eq!(lace(&["train", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
    std::fs::write(
        &cfg,
        r#"{"dataset": {"kind": "cifar100", "train_path": "/nonexistent/train.bin", "test_path": "/nonexistent/test.bin"}}"#,
    )
    .unwrap();
    assert_eq!(lace(&["inspect-data", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
    assert!(!lace(&["train", "--loss", "focal"]).status.success());
}

#[test]
fn shipped_configs_are_valid() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let o = lace(&["inspect-data", "--config", root.join("blobs.json").to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("classes=10"));
}
