//! The `mulrnn` command line: `train`, `eval`, `gradcheck`, `params` and
//! `sample`.
//!
//! Failures print one line `error code=<n> kind=<kind>: <reason>` to
//! standard error. Exit codes: 1 configuration, 2 data or checkpoint I/O,
//! 3 numeric abort. Every command reports its seed on standard error as
//! `seed=<n>`, keeping standard output for results.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::cells::{param_count_with, CellDims, CellKind, CellOptions, InitScheme, LstmOutput, MlstmForm};
use crate::config::{DatasetKind, ExperimentConfig};
use crate::data::{Split, TokenBatch};
use crate::error::{Error, Result};
use crate::model::{grad_check_model, sample, LanguageModel, LmConfig};
use crate::tensor::Rng;
use crate::train::{
    evaluate, solve_budget, train, Checkpoint, Clock, EvalOptions, JsonLinesSink, SystemClock, TickClock,
    TrainData,
};

#[derive(Parser, Debug)]
#[command(name = "mulrnn", version, about = "Character-level multiplicative RNN language models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Train a model and write best.ckpt, last.ckpt, metrics.log and resolved.cfg.
    Train(TrainArgs),
    /// Print the BPC of a checkpoint on one split.
    Eval(EvalArgs),
    /// Compare analytic and finite-difference gradients.
    Gradcheck(GradcheckArgs),
    /// Parameter breakdown for one cell, or hidden sizes for a budget.
    Params(ParamsArgs),
    /// Generate text from a checkpoint.
    Sample(SampleArgs),
}

#[derive(Args, Debug, Default)]
pub struct DataArgs {
    #[arg(long)]
    pub dataset: Option<DatasetKind>,
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
    /// Accept Text8 files of any length (split 90:5:5).
    #[arg(long)]
    pub fixture: bool,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub cell: Option<CellKind>,
    #[arg(long)]
    pub hidden: Option<usize>,
    #[arg(long)]
    pub intermediate: Option<usize>,
    /// Target cell parameter count; the hidden size is solved to match.
    #[arg(long)]
    pub budget: Option<usize>,
    #[arg(long)]
    pub seq_len: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub grad_clip: Option<f64>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub eval_carry: Option<bool>,
    #[arg(long)]
    pub mlstm_form: Option<MlstmForm>,
    #[arg(long)]
    pub lstm_output: Option<LstmOutput>,
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Replace wall-clock time in metrics with a fixed tick per reading,
    /// making metrics.log reproducible byte for byte.
    #[arg(long, value_name = "MS")]
    pub tick_clock: Option<f64>,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    pub checkpoint: PathBuf,
    #[arg(long, default_value = "test")]
    pub split: Split,
    /// Evaluate this text file instead of a corpus split.
    #[arg(long, conflicts_with = "split")]
    pub text: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, num_args = 0..=1, default_missing_value = "true", default_value = "true")]
    pub eval_carry: bool,
    #[arg(long, default_value_t = 1)]
    pub batch_size: usize,
    /// Defaults to the checkpoint's training window.
    #[arg(long)]
    pub seq_len: Option<usize>,
}

#[derive(Args, Debug)]
pub struct GradcheckArgs {
    /// A cell kind, or `all`.
    #[arg(long, default_value = "all")]
    pub cell: String,
    #[arg(long, default_value_t = 7)]
    pub vocab: usize,
    #[arg(long, default_value_t = 8)]
    pub hidden: usize,
    #[arg(long, default_value_t = 5)]
    pub intermediate: usize,
    #[arg(long, default_value_t = 3)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 4)]
    pub seq_len: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-5)]
    pub step: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub tol: f64,
    #[arg(long, default_value = "text")]
    pub mlstm_form: MlstmForm,
    #[arg(long, default_value = "sigmoid")]
    pub lstm_output: LstmOutput,
}

#[derive(Args, Debug)]
pub struct ParamsArgs {
    #[arg(long)]
    pub cell: Option<CellKind>,
    #[arg(long)]
    pub vocab: usize,
    #[arg(long)]
    pub hidden: Option<usize>,
    /// Defaults to the vocabulary size.
    #[arg(long)]
    pub intermediate: Option<usize>,
    /// Solve every kind's hidden size for this cell parameter count.
    #[arg(long)]
    pub budget: Option<usize>,
    /// Take the budget from this kind at `--hidden`.
    #[arg(long, conflicts_with = "budget", requires = "hidden")]
    pub anchor: Option<CellKind>,
    #[arg(long, default_value = "text")]
    pub mlstm_form: MlstmForm,
}

#[derive(Args, Debug)]
pub struct SampleArgs {
    pub checkpoint: PathBuf,
    #[arg(long, default_value = " ")]
    pub prime: String,
    #[arg(long, default_value_t = 200)]
    pub length: usize,
    #[arg(long, default_value_t = 1.0)]
    pub temperature: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// Exit code for an error: 1 configuration, 2 data, 3 numeric.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Corpus(_) | Error::Io { .. } | Error::Checkpoint(_) => 2,
        Error::Numeric { .. } | Error::Optimizer { .. } => 3,
        _ => 1,
    }
}

fn kind_label(err: &Error) -> &'static str {
    match err {
        Error::Shape { .. } => "shape",
        Error::Index { .. } => "index",
        Error::Contract(_) => "contract",
        Error::Corpus(_) => "corpus",
        Error::Input(_) => "input",
        Error::Io { .. } => "io",
        Error::Optimizer { .. } => "optimizer",
        Error::Budget(_) => "budget",
        Error::Config(_) => "config",
        Error::Numeric { .. } => "numeric",
        Error::Checkpoint(_) => "checkpoint",
    }
}

fn report(code: i32, kind: &str, msg: &str) {
    eprintln!("error code={code} kind={kind}: {}", msg.replace('\n', " "));
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help / --version
            let _ = e.print();
            return 0;
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            report(1, "usage", first.trim_start_matches("error: "));
            return 1;
        }
    };
    let result = match cli.command {
        Command::Train(a) => cmd_train(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Gradcheck(a) => cmd_gradcheck(a),
        Command::Params(a) => cmd_params(a),
        Command::Sample(a) => cmd_sample(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let code = exit_code(&e);
            report(code, kind_label(&e), &e.to_string());
            code
        }
    }
}

fn apply_data(cfg: &mut ExperimentConfig, d: &DataArgs) {
    if let Some(v) = d.dataset {
        cfg.dataset = v;
    }
    if let Some(v) = &d.data_dir {
        cfg.data_dir = v.clone();
    }
    if d.fixture {
        cfg.fixture = true;
    }
}

/// The configuration a `train` invocation runs with: file (or defaults),
/// then command-line overrides.
pub fn train_config_from(a: &TrainArgs) -> Result<ExperimentConfig> {
    let mut c = match &a.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(v) = a.cell {
        c.cell = v;
    }
    if let Some(v) = a.hidden {
        c.hidden = v;
        c.budget = None;
    }
    if let Some(v) = a.intermediate {
        c.intermediate = Some(v);
    }
    if let Some(v) = a.budget {
        c.budget = Some(v);
    }
    if let Some(v) = a.seq_len {
        c.seq_len = Some(v);
    }
    if let Some(v) = a.batch_size {
        c.batch_size = Some(v);
    }
    if let Some(v) = a.epochs {
        c.epochs = v;
    }
    if let Some(v) = a.lr {
        c.adam.lr = v;
    }
    if let Some(v) = a.seed {
        c.seed = v;
    }
    if let Some(v) = a.grad_clip {
        c.grad_clip_norm = Some(v);
    }
    if let Some(v) = a.eval_carry {
        c.eval_carry = v;
    }
    if let Some(v) = a.mlstm_form {
        c.options.mlstm_form = v;
    }
    if let Some(v) = a.lstm_output {
        c.options.lstm_output = v;
    }
    apply_data(&mut c, &a.data);
    if let Some(v) = &a.out_dir {
        c.out_dir = v.clone();
    }
    Ok(c)
}

fn write_file(path: &Path, body: &str) -> Result<()> {
    fs::write(path, body).map_err(|e| Error::io(path, e))
}

fn cmd_train(a: TrainArgs) -> Result<i32> {
    let requested = train_config_from(&a)?;
    eprintln!("seed={}", requested.seed);
    let corpus = requested.load_corpus()?;
    for w in &corpus.warnings {
        eprintln!("warning: {w}");
    }
    let cfg = requested.resolve(corpus.vocab.size())?;
    let out = &cfg.out_dir;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    write_file(&out.join("resolved.cfg"), &cfg.to_text())?;

    let train_ids = corpus.encode(Split::Train)?;
    let valid_ids = corpus.encode(Split::Valid)?;
    let lm = cfg.lm_config(corpus.vocab.size())?;
    let tc = cfg.train_config();
    let model = LanguageModel::new(
        lm,
        &mut Rng::new(cfg.seed),
        InitScheme::Glorot {
            forget_bias: cfg.forget_bias,
        },
    )?;
    eprintln!(
        "{} n={} m={} V={} params={}",
        lm.cell.kind,
        lm.cell.dims.hidden,
        lm.cell.dims.intermediate,
        lm.vocab_size(),
        lm.param_count()
    );

    let metrics_path = out.join("metrics.log");
    write_file(&metrics_path, "")?;
    let mut sink = JsonLinesSink::append(&metrics_path)?;
    let mut clock: Box<dyn Clock> = match a.tick_clock {
        Some(ms) => Box::new(TickClock::new(ms)),
        None => Box::new(SystemClock::start()),
    };
    let outcome = train(
        model,
        &corpus.vocab,
        TrainData {
            train: &train_ids,
            valid: &valid_ids,
        },
        &tc,
        &mut sink,
        clock.as_mut(),
    )?;
    outcome.best.save(&out.join("best.ckpt"))?;
    outcome.last.save(&out.join("last.ckpt"))?;
    println!(
        "best_epoch={} valid_bpc={:.4} epochs_run={} clip_events={}",
        outcome.best.epoch,
        outcome.best.valid_bpc,
        outcome.history.len(),
        outcome.clip_events
    );
    Ok(0)
}

fn cmd_eval(a: EvalArgs) -> Result<i32> {
    let ckpt = Checkpoint::load(&a.checkpoint)?;
    eprintln!("seed={}", ckpt.seed);
    let text = match &a.text {
        Some(p) => fs::read_to_string(p).map_err(|e| Error::io(p, e))?,
        None => {
            let mut c = match &a.config {
                Some(p) => ExperimentConfig::load(p)?,
                None => ExperimentConfig::default(),
            };
            apply_data(&mut c, &a.data);
            c.load_corpus()?.text(a.split).to_string()
        }
    };
    let ids = ckpt.vocab.encode(&text)?;
    let opts = EvalOptions {
        batch_size: a.batch_size,
        seq_len: a.seq_len.unwrap_or(ckpt.model.config.seq_len),
        carry: a.eval_carry,
    };
    let bpc = evaluate(&ckpt.model, &ids, opts)?;
    println!("bpc={bpc:.4}");
    Ok(0)
}

fn cmd_gradcheck(a: GradcheckArgs) -> Result<i32> {
    eprintln!("seed={}", a.seed);
    let kinds: Vec<CellKind> = if a.cell == "all" {
        CellKind::ALL.to_vec()
    } else {
        vec![a.cell.parse()?]
    };
    let options = CellOptions {
        mlstm_form: a.mlstm_form,
        lstm_output: a.lstm_output,
    };
    let mut all_ok = true;
    for kind in kinds {
        let report = gradient_report(kind, a.vocab, a.hidden, a.intermediate, a.batch_size, a.seq_len, options, a.seed, a.step, a.tol)?;
        for p in &report.params {
            println!("{kind:<7} {:<8} max_rel_err={:.3e}", p.name, p.max_rel_err);
        }
        let ok = report.passed();
        println!("{kind:<7} {} max_rel_err={:.3e}", if ok { "PASS" } else { "FAIL" }, report.max_rel_err());
        all_ok &= ok;
    }
    Ok(if all_ok { 0 } else { 3 })
}

/// Gradient check on a random batch, every parameter drawn uniformly from
/// `[-1, 1]`.
#[allow(clippy::too_many_arguments)]
pub fn gradient_report(
    kind: CellKind,
    vocab: usize,
    hidden: usize,
    intermediate: usize,
    batch: usize,
    seq_len: usize,
    options: CellOptions,
    seed: u64,
    step: f64,
    tol: f64,
) -> Result<crate::tensor::GradCheckReport> {
    let mut cfg = LmConfig::new(kind, CellDims::new(vocab, hidden, intermediate)?, seq_len)?;
    cfg.cell = cfg.cell.with_options(options);
    let mut rng = Rng::new(seed);
    let mut model = LanguageModel::new(cfg, &mut rng, InitScheme::Zeros)?;
    for (_, p) in model.params.iter_mut() {
        for v in p.data_mut() {
            *v = rng.uniform(-1.0, 1.0);
        }
    }
    let ids = (0..batch * seq_len).map(|_| rng.below(vocab) as u32).collect();
    let tokens = TokenBatch::new(ids, batch, seq_len)?;
    grad_check_model(&model, &tokens, &model.zero_state(batch), step, tol)
}

fn cmd_params(a: ParamsArgs) -> Result<i32> {
    eprintln!("seed=0");
    let m = a.intermediate.unwrap_or(a.vocab);
    let options = CellOptions {
        mlstm_form: a.mlstm_form,
        ..Default::default()
    };
    let target = match (a.budget, a.anchor) {
        (Some(b), _) => Some(b),
        (None, Some(anchor)) => {
            let n = a.hidden.expect("clap enforces --hidden with --anchor");
            Some(param_count_with(anchor, CellDims::new(a.vocab, n, m)?, options))
        }
        (None, None) => None,
    };
    if let Some(target) = target {
        println!("budget={target} vocab={} intermediate={m}", a.vocab);
        println!("{:<7} {:>7} {:>10} {:>8}", "cell", "hidden", "params", "dev%");
        for row in solve_budget(&CellKind::ALL, a.vocab, m, target)? {
            println!(
                "{:<7} {:>7} {:>10} {:>+8.3}",
                row.kind.name(),
                row.hidden,
                row.params,
                row.rel_dev * 100.0
            );
        }
        return Ok(0);
    }

    let kind = a
        .cell
        .ok_or_else(|| Error::Config("params needs --cell, --budget or --anchor".into()))?;
    let hidden = a
        .hidden
        .ok_or_else(|| Error::Config("params --cell needs --hidden".into()))?;
    let dims = CellDims::new(a.vocab, hidden, m)?;
    let cell = crate::cells::Cell::new(kind, dims).with_options(options);
    println!("{:<8} {:>12} {:>10}", "name", "shape", "count");
    for (name, r, c) in cell.layout() {
        println!("{name:<8} {:>12} {:>10}", format!("{r}x{c}"), r * c);
    }
    println!("total={}", cell.param_count());
    Ok(0)
}

fn cmd_sample(a: SampleArgs) -> Result<i32> {
    eprintln!("seed={}", a.seed);
    let ckpt = Checkpoint::load(&a.checkpoint)?;
    let text = sample(&ckpt.model, &ckpt.vocab, &a.prime, a.length, a.temperature, &mut Rng::new(a.seed))?;
    println!("{}{text}", a.prime);
    Ok(0)
}
