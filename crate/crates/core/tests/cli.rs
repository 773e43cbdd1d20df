use std::fs;
use std::process::Command;

fn taxex() -> Command {
    Command::new(env!("CARGO_BIN_EXE_taxex"))
}

const TINY: &str = "
num_types = 4
train_size = 120
validation_size = 30
test_size = 40
splits = 1
seeds = 1
epochs = 2
learning_rates = 0.01
methods = naive-join, plm
";

#[test]
fn run_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.cfg");
    fs::write(&cfg, TINY).unwrap();
    let out = dir.path().join("out.csv");
    let res = taxex().args(["run", "--config"]).arg(&cfg).arg("--out").arg(&out).output().unwrap();
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let csv = fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("setup,method,split_seed,train_seed,precision,recall,f1\n"));
    assert_eq!(csv.lines().count(), 3);
    assert!(String::from_utf8_lossy(&res.stderr).contains("naive-join"));
}

#[test]
fn bad_config_fails_with_a_diagnostic() {
    let res = taxex().args(["run", "seeds=many"]).output().unwrap();
    assert!(!res.status.success());
    assert!(String::from_utf8_lossy(&res.stderr).contains("seeds"));
    let res = taxex().args(["run", "--config", "/definitely/missing.cfg"]).output().unwrap();
    assert!(!res.status.success());
    assert!(String::from_utf8_lossy(&res.stderr).contains("missing.cfg"));
}

#[test]
fn non_disjoint_setup_rejects_plain_cl() {
    let res = taxex().args(["run", "setup=subtype", "methods=cl", "train_size=100"]).output().unwrap();
    assert!(!res.status.success());
}

#[test]
fn empty_sweep_succeeds() {
    let res = taxex().args(["sweep", "--axis", "few_shot_k", "--values", ""]).output().unwrap();
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    assert_eq!(
        String::from_utf8_lossy(&res.stdout),
        "few_shot_k,setup,method,split_seed,train_seed,precision,recall,f1\n"
    );
}

#[test]
fn generated_corpus_scores_perfectly_against_itself() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.conll");
    let res = taxex()
        .args(["gen-corpus", "--out"])
        .arg(&path)
        .args(["num_types=3", "train_size=40", "validation_size=5", "test_size=5"])
        .output()
        .unwrap();
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let res = taxex().args(["eval", "--pred"]).arg(&path).arg("--gold").arg(&path).output().unwrap();
    assert!(res.status.success());
    let stdout = String::from_utf8_lossy(&res.stdout);
    assert!(stdout.lines().nth(1).unwrap().starts_with("1.000000,1.000000,1.000000"));
}
