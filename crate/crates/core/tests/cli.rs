use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use mulrnn::cells::{CellDims, CellKind, InitScheme};
use mulrnn::data::{synth, Vocabulary};
use mulrnn::model::{LanguageModel, LmConfig};
use mulrnn::tensor::Rng;
use mulrnn::train::Checkpoint;

fn mulrnn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mulrnn")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn zero_checkpoint(path: &Path) {
    let cfg = LmConfig::new(CellKind::Mgru, CellDims::new(27, 12, 27).unwrap(), 16).unwrap();
    let model = LanguageModel::new(cfg, &mut Rng::new(0), InitScheme::Zeros).unwrap();
    Checkpoint::from_model(model, Vocabulary::text8(), 42).save(path).unwrap();
}

#[test]
fn params_hand_sum() {
    let o = mulrnn(&["params", "--cell", "mrnn", "--vocab", "7", "--hidden", "8", "--intermediate", "5"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("total=179"), "{}", stdout(&o));
    assert!(stderr(&o).contains("seed="));
}

#[test]
fn params_trnn_lists_every_slice() {
    let o = mulrnn(&["params", "--cell", "trnn", "--vocab", "27", "--hidden", "64"]);
    let out = stdout(&o);
    assert!(out.contains("W[0]") && out.contains("W[26]") && !out.contains("W[27]"));
    assert!(out.contains(&format!("total={}", 27 * 64 * 64 + 64 * 27 + 64)), "{out}");
}

#[test]
fn params_budget_table() {
    let o = mulrnn(&["params", "--anchor", "mlstm", "--hidden", "700", "--vocab", "50", "--intermediate", "50"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    for kind in ["mlstm", "mgru", "tmlstm", "tmgru"] {
        let line = out.lines().find(|l| l.split_whitespace().next() == Some(kind)).unwrap();
        let dev: f64 = line.split_whitespace().last().unwrap().parse().unwrap();
        assert!(dev.abs() < 5.0, "{line}");
    }
    assert!(out.lines().any(|l| l.starts_with("mlstm") && l.contains(" 700 ")), "{out}");
}

#[test]
fn invalid_cell_exits_1_listing_kinds() {
    let o = mulrnn(&["train", "--cell", "qrnn"]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.starts_with("error code=1"), "{err}");
    for kind in CellKind::ALL {
        assert!(err.contains(kind.name()), "{err}");
    }
}

#[test]
fn unknown_config_key_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "[train]\nlearning_rate = 0.1\n").unwrap();
    let o = mulrnn(&["train", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("unknown key `learning_rate`"), "{}", stderr(&o));
}

#[test]
fn missing_data_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = mulrnn(&["train", "--data-dir", dir.path().to_str().unwrap(), "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("ptb.train.txt"));
}

#[test]
fn eval_zero_weight_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let ckpt = dir.path().join("zero.ckpt");
    zero_checkpoint(&ckpt);
    let text = dir.path().join("sample.txt");
    fs::write(&text, synth::text8_like(3_000, 1)).unwrap();
    let args = ["eval", ckpt.to_str().unwrap(), "--text", text.to_str().unwrap()];
    let a = mulrnn(&args);
    assert!(a.status.success(), "{}", stderr(&a));
    assert_eq!(stdout(&a), "bpc=4.7549\n");
    assert!(stderr(&a).contains("seed=42"));
    let b = mulrnn(&args);
    assert_eq!(stdout(&a), stdout(&b));
}

#[test]
fn eval_missing_checkpoint_exits_2() {
    let o = mulrnn(&["eval", "/nonexistent/best.ckpt", "--text", "/dev/null"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("kind=io"), "{}", stderr(&o));
}

#[test]
fn corrupt_checkpoint_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let ckpt = dir.path().join("zero.ckpt");
    zero_checkpoint(&ckpt);
    let mut bytes = fs::read(&ckpt).unwrap();
    let mid = bytes.len() / 2;
    bytes[mid] ^= 0xff;
    fs::write(&ckpt, bytes).unwrap();
    let o = mulrnn(&["sample", ckpt.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("checksum"), "{}", stderr(&o));
}

#[test]
fn gradcheck_single_kind() {
    let o = mulrnn(&["gradcheck", "--cell", "mgru", "--seed", "1"]);
    assert!(o.status.success(), "{}{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).contains("mgru PASS"), "{}", stdout(&o));
}

fn train_args<'a>(data: &'a str, out: &'a str) -> Vec<&'a str> {
    vec![
        "train", "--dataset", "raw", "--data-dir", data, "--out-dir", out, "--cell", "mlstm", "--hidden", "12",
        "--seq-len", "20", "--batch-size", "4", "--epochs", "2", "--lr", "0.01", "--seed", "3", "--tick-clock", "1",
    ]
}

#[test]
fn train_writes_artifacts_and_resolved_config_reproduces() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("input.txt");
    fs::write(&data, synth::periodic("hello world, ", 4_000)).unwrap();
    let out1 = dir.path().join("run1");
    let o = mulrnn(&train_args(data.to_str().unwrap(), out1.to_str().unwrap()));
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("seed=3"));
    for f in ["best.ckpt", "last.ckpt", "metrics.log", "resolved.cfg"] {
        assert!(out1.join(f).is_file(), "missing {f}");
    }
    let metrics = fs::read_to_string(out1.join("metrics.log")).unwrap();
    assert!(metrics.lines().all(|l| l.contains("\"loss_nats\"") && l.contains("\"wall_ms\"")));
    assert_eq!(metrics.lines().filter(|l| l.contains("\"valid\"")).count(), 2);

    let out2 = dir.path().join("run2");
    let cfg = out1.join("resolved.cfg");
    let o = mulrnn(&[
        "train", "--config", cfg.to_str().unwrap(), "--out-dir", out2.to_str().unwrap(), "--tick-clock", "1",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(metrics, fs::read_to_string(out2.join("metrics.log")).unwrap());
    assert_eq!(fs::read(out1.join("best.ckpt")).unwrap(), fs::read(out2.join("best.ckpt")).unwrap());

    let best = out1.join("best.ckpt");
    let o = mulrnn(&["sample", best.to_str().unwrap(), "--prime", "hello", "--length", "30", "--temperature", "0"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("hello"));
    assert_eq!(stdout(&o).trim_end_matches('\n').chars().count(), 35);

    let o = mulrnn(&[
        "eval", best.to_str().unwrap(), "--split", "valid", "--dataset", "raw", "--data-dir", data.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("bpc="));
}
