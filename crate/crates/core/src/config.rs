//! Experiment configuration: a flat `key = value` file with `[model]`,
//! `[train]` and `[data]` sections.
//!
//! ```text
//! [model]
//! cell = mgru
//! hidden = 64
//!
//! [train]
//! epochs = 3
//! ```
//!
//! Missing keys take their defaults, unknown keys are errors, and
//! [`ExperimentConfig::to_text`] writes every key so a saved file reproduces
//! the run exactly.

use std::fmt::{self, Display, Write as _};
use std::path::PathBuf;
use std::str::FromStr;

use indexmap::IndexMap;

use crate::cells::{Cell, CellDims, CellKind, CellOptions, LstmOutput, MlstmForm};
use crate::data::{load_ptb, load_raw, load_text8, CorpusSplits, Text8Mode};
use crate::error::{Error, Result};
use crate::model::LmConfig;
use crate::train::{solve_hidden_size, AdamConfig, TrainConfig};

struct Entry {
    value: String,
    line: usize,
}

/// Parsed sections, consumed key by key so leftovers can be reported.
pub(crate) struct Doc {
    sections: IndexMap<String, IndexMap<String, Entry>>,
}

impl Doc {
    pub(crate) fn parse(text: &str) -> Result<Doc> {
        let mut sections: IndexMap<String, IndexMap<String, Entry>> = IndexMap::new();
        let mut current: Option<String> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let s = raw.trim();
            if s.is_empty() || s.starts_with('#') || s.starts_with(';') {
                continue;
            }
            if let Some(name) = s.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
                let name = name.trim().to_string();
                sections.entry(name.clone()).or_default();
                current = Some(name);
                continue;
            }
            let Some((k, v)) = s.split_once('=') else {
                return Err(Error::Config(format!("line {line}: expected `key = value`, found {s:?}")));
            };
            let Some(section) = &current else {
                return Err(Error::Config(format!("line {line}: key outside of any [section]")));
            };
            let key = k.trim().to_string();
            let map = sections.get_mut(section).unwrap();
            if map.contains_key(&key) {
                return Err(Error::Config(format!("line {line}: duplicate key `{key}` in [{section}]")));
            }
            map.insert(
                key,
                Entry {
                    value: v.trim().to_string(),
                    line,
                },
            );
        }
        Ok(Doc { sections })
    }

    fn take(&mut self, section: &str, key: &str) -> Option<Entry> {
        self.sections.get_mut(section)?.shift_remove(key)
    }

    pub(crate) fn get<T: FromStr>(&mut self, section: &str, key: &str, default: T) -> Result<T>
    where
        T::Err: Display,
    {
        match self.take(section, key) {
            None => Ok(default),
            Some(e) => e.value.parse().map_err(|err| {
                Error::Config(format!("line {}: bad value for `{key}`: {err}", e.line))
            }),
        }
    }

    /// Optional value where `word` (e.g. `none`, `auto`) stands for absence.
    pub(crate) fn get_opt<T: FromStr>(
        &mut self,
        section: &str,
        key: &str,
        word: &str,
        default: Option<T>,
    ) -> Result<Option<T>>
    where
        T::Err: Display,
    {
        match self.take(section, key) {
            None => Ok(default),
            Some(e) if e.value == word => Ok(None),
            Some(e) => e.value.parse().map(Some).map_err(|err| {
                Error::Config(format!("line {}: bad value for `{key}`: {err}", e.line))
            }),
        }
    }

    pub(crate) fn require<T: FromStr>(&mut self, section: &str, key: &str) -> Result<T>
    where
        T::Err: Display,
    {
        let e = self
            .take(section, key)
            .ok_or_else(|| Error::Config(format!("missing key `{key}` in [{section}]")))?;
        e.value
            .parse()
            .map_err(|err| Error::Config(format!("line {}: bad value for `{key}`: {err}", e.line)))
    }

    /// Fails on anything not consumed, or on sections outside `known`.
    pub(crate) fn finish(self, known: &[&str]) -> Result<()> {
        for (section, entries) in self.sections {
            if !known.contains(&section.as_str()) {
                return Err(Error::Config(format!("unknown section [{section}]")));
            }
            if let Some((key, e)) = entries.into_iter().next() {
                return Err(Error::Config(format!(
                    "line {}: unknown key `{key}` in [{section}]",
                    e.line
                )));
            }
        }
        Ok(())
    }
}

pub(crate) fn opt<T: Display>(v: &Option<T>, word: &str) -> String {
    match v {
        Some(x) => x.to_string(),
        None => word.to_string(),
    }
}

/// Writes a model config as `[section]` keys; read back by [`read_lm`].
pub(crate) fn write_lm(out: &mut String, section: &str, cfg: &LmConfig) {
    let c = &cfg.cell;
    let _ = writeln!(out, "[{section}]");
    let _ = writeln!(out, "cell = {}", c.kind);
    let _ = writeln!(out, "vocab_size = {}", c.dims.input);
    let _ = writeln!(out, "hidden = {}", c.dims.hidden);
    let _ = writeln!(out, "intermediate = {}", c.dims.intermediate);
    let _ = writeln!(out, "seq_len = {}", cfg.seq_len);
    let _ = writeln!(out, "mlstm_form = {}", c.options.mlstm_form);
    let _ = writeln!(out, "lstm_output = {}", c.options.lstm_output);
    let _ = writeln!(out, "tie_intermediate = {}", cfg.tie_intermediate_to_input);
    let _ = writeln!(out, "dense_embedding = {}", cfg.dense_embedding);
}

pub(crate) fn read_lm(doc: &mut Doc, section: &str) -> Result<LmConfig> {
    let kind: CellKind = doc.require(section, "cell")?;
    let dims = CellDims::new(
        doc.require(section, "vocab_size")?,
        doc.require(section, "hidden")?,
        doc.require(section, "intermediate")?,
    )?;
    let options = CellOptions {
        mlstm_form: doc.get(section, "mlstm_form", MlstmForm::default())?,
        lstm_output: doc.get(section, "lstm_output", LstmOutput::default())?,
    };
    let cfg = LmConfig {
        cell: Cell::new(kind, dims).with_options(options),
        seq_len: doc.require(section, "seq_len")?,
        tie_intermediate_to_input: doc.get(section, "tie_intermediate", false)?,
        dense_embedding: doc.get(section, "dense_embedding", false)?,
    };
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DatasetKind {
    /// `ptb.train.txt`, `ptb.valid.txt`, `ptb.test.txt` under `data_dir`.
    #[default]
    Ptb,
    /// A `text8` file under `data_dir`.
    Text8,
    /// Any text file (or `input.txt` under a directory), split 90:5:5.
    Raw,
}

impl FromStr for DatasetKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ptb" => Ok(DatasetKind::Ptb),
            "text8" => Ok(DatasetKind::Text8),
            "raw" => Ok(DatasetKind::Raw),
            other => Err(Error::Config(format!(
                "unknown dataset {other:?}; expected ptb, text8 or raw"
            ))),
        }
    }
}

impl Display for DatasetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DatasetKind::Ptb => "ptb",
            DatasetKind::Text8 => "text8",
            DatasetKind::Raw => "raw",
        })
    }
}

impl DatasetKind {
    /// Sequence length when none is configured.
    pub fn default_seq_len(self) -> usize {
        match self {
            DatasetKind::Text8 => 200,
            DatasetKind::Ptb | DatasetKind::Raw => 150,
        }
    }

    pub fn default_batch_size(self) -> usize {
        match self {
            DatasetKind::Text8 => 50,
            DatasetKind::Ptb | DatasetKind::Raw => 32,
        }
    }
}

/// Everything one training run needs. `None` fields are filled in from the
/// dataset or vocabulary by [`ExperimentConfig::resolve`].
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub cell: CellKind,
    pub hidden: usize,
    /// Defaults to the vocabulary size.
    pub intermediate: Option<usize>,
    /// Target cell parameter count; when set, overrides `hidden`.
    pub budget: Option<usize>,
    pub seq_len: Option<usize>,
    pub options: CellOptions,
    pub tie_intermediate: bool,
    pub dense_embedding: bool,

    pub epochs: usize,
    pub batch_size: Option<usize>,
    pub adam: AdamConfig,
    pub grad_clip_norm: Option<f64>,
    pub seed: u64,
    pub eval_carry: bool,
    pub eval_batch_size: Option<usize>,
    pub log_every: u64,
    pub shuffle: bool,
    pub stop_below_bpc: Option<f64>,
    pub forget_bias: f64,

    pub dataset: DatasetKind,
    pub data_dir: PathBuf,
    /// Accept Text8 files of any length.
    pub fixture: bool,
    pub out_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let t = TrainConfig::default();
        ExperimentConfig {
            cell: CellKind::Mlstm,
            hidden: 128,
            intermediate: None,
            budget: None,
            seq_len: None,
            options: CellOptions::default(),
            tie_intermediate: false,
            dense_embedding: false,
            epochs: t.epochs,
            batch_size: None,
            adam: t.adam,
            grad_clip_norm: t.grad_clip_norm,
            seed: t.seed,
            eval_carry: t.eval_carry,
            eval_batch_size: t.eval_batch_size,
            log_every: t.log_every,
            shuffle: t.shuffle,
            stop_below_bpc: t.stop_below_bpc,
            forget_bias: 1.0,
            dataset: DatasetKind::default(),
            data_dir: PathBuf::from("data"),
            fixture: false,
            out_dir: PathBuf::from("runs"),
        }
    }
}

const SECTIONS: [&str; 3] = ["model", "train", "data"];

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let d = ExperimentConfig::default();
        let mut doc = Doc::parse(text)?;
        let (m, t, s) = ("model", "train", "data");
        let cfg = ExperimentConfig {
            cell: doc.get(m, "cell", d.cell)?,
            hidden: doc.get(m, "hidden", d.hidden)?,
            intermediate: doc.get_opt(m, "intermediate", "auto", d.intermediate)?,
            budget: doc.get_opt(m, "budget", "none", d.budget)?,
            seq_len: doc.get_opt(m, "seq_len", "auto", d.seq_len)?,
            options: CellOptions {
                mlstm_form: doc.get(m, "mlstm_form", d.options.mlstm_form)?,
                lstm_output: doc.get(m, "lstm_output", d.options.lstm_output)?,
            },
            tie_intermediate: doc.get(m, "tie_intermediate", d.tie_intermediate)?,
            dense_embedding: doc.get(m, "dense_embedding", d.dense_embedding)?,

            epochs: doc.get(t, "epochs", d.epochs)?,
            batch_size: doc.get_opt(t, "batch_size", "auto", d.batch_size)?,
            adam: AdamConfig {
                lr: doc.get(t, "lr", d.adam.lr)?,
                beta1: doc.get(t, "beta1", d.adam.beta1)?,
                beta2: doc.get(t, "beta2", d.adam.beta2)?,
                eps: doc.get(t, "eps", d.adam.eps)?,
            },
            grad_clip_norm: doc.get_opt(t, "grad_clip_norm", "none", d.grad_clip_norm)?,
            seed: doc.get(t, "seed", d.seed)?,
            eval_carry: doc.get(t, "eval_carry", d.eval_carry)?,
            eval_batch_size: doc.get_opt(t, "eval_batch_size", "auto", d.eval_batch_size)?,
            log_every: doc.get(t, "log_every", d.log_every)?,
            shuffle: doc.get(t, "shuffle", d.shuffle)?,
            stop_below_bpc: doc.get_opt(t, "stop_below_bpc", "none", d.stop_below_bpc)?,
            forget_bias: doc.get(t, "forget_bias", d.forget_bias)?,

            dataset: doc.get(s, "dataset", d.dataset)?,
            data_dir: doc.get(s, "data_dir", d.data_dir)?,
            fixture: doc.get(s, "fixture", d.fixture)?,
            out_dir: doc.get(s, "out_dir", d.out_dir)?,
        };
        doc.finish(&SECTIONS)?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Canonical text: every key, fixed order.
    pub fn to_text(&self) -> String {
        let mut o = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(o, "{k} = {v}");
        };
        kv("[model]\ncell", self.cell.to_string());
        kv("hidden", self.hidden.to_string());
        kv("intermediate", opt(&self.intermediate, "auto"));
        kv("budget", opt(&self.budget, "none"));
        kv("seq_len", opt(&self.seq_len, "auto"));
        kv("mlstm_form", self.options.mlstm_form.to_string());
        kv("lstm_output", self.options.lstm_output.to_string());
        kv("tie_intermediate", self.tie_intermediate.to_string());
        kv("dense_embedding", self.dense_embedding.to_string());

        kv("\n[train]\nepochs", self.epochs.to_string());
        kv("batch_size", opt(&self.batch_size, "auto"));
        kv("lr", self.adam.lr.to_string());
        kv("beta1", self.adam.beta1.to_string());
        kv("beta2", self.adam.beta2.to_string());
        kv("eps", self.adam.eps.to_string());
        kv("grad_clip_norm", opt(&self.grad_clip_norm, "none"));
        kv("seed", self.seed.to_string());
        kv("eval_carry", self.eval_carry.to_string());
        kv("eval_batch_size", opt(&self.eval_batch_size, "auto"));
        kv("log_every", self.log_every.to_string());
        kv("shuffle", self.shuffle.to_string());
        kv("stop_below_bpc", opt(&self.stop_below_bpc, "none"));
        kv("forget_bias", self.forget_bias.to_string());

        kv("\n[data]\ndataset", self.dataset.to_string());
        kv("data_dir", self.data_dir.display().to_string());
        kv("fixture", self.fixture.to_string());
        kv("out_dir", self.out_dir.display().to_string());
        o
    }

    /// Fills every `auto` field for a corpus with `vocab_size` symbols and
    /// solves the hidden size when a budget is set. The result, written with
    /// [`to_text`](Self::to_text), reproduces the same run.
    pub fn resolve(&self, vocab_size: usize) -> Result<ExperimentConfig> {
        let mut r = self.clone();
        let m = self.intermediate.unwrap_or(vocab_size);
        r.intermediate = Some(m);
        r.seq_len = Some(self.seq_len.unwrap_or(self.dataset.default_seq_len()));
        let b = self.batch_size.unwrap_or(self.dataset.default_batch_size());
        r.batch_size = Some(b);
        r.eval_batch_size = Some(self.eval_batch_size.unwrap_or(b));
        if let Some(target) = self.budget {
            r.hidden = solve_hidden_size(self.cell, vocab_size, m, target)?;
            r.budget = None;
        }
        r.lm_config(vocab_size)?;
        r.train_config().validate()?;
        Ok(r)
    }

    /// Reads the configured corpus. PTB expects `ptb.{train,valid,test}.txt`
    /// under `data_dir`; Text8 a `text8` file; raw any text file (a
    /// directory means its `input.txt`).
    pub fn load_corpus(&self) -> Result<CorpusSplits> {
        let dir = &self.data_dir;
        let file_or = |name: &str| if dir.is_file() { dir.clone() } else { dir.join(name) };
        match self.dataset {
            DatasetKind::Ptb => load_ptb(
                &dir.join("ptb.train.txt"),
                &dir.join("ptb.valid.txt"),
                &dir.join("ptb.test.txt"),
            ),
            DatasetKind::Text8 => {
                let mode = if self.fixture { Text8Mode::Fixture } else { Text8Mode::Strict };
                load_text8(&file_or("text8"), mode)
            }
            DatasetKind::Raw => load_raw(&file_or("input.txt")),
        }
    }

    pub fn lm_config(&self, vocab_size: usize) -> Result<LmConfig> {
        let dims = CellDims::new(
            vocab_size,
            self.hidden,
            self.intermediate.unwrap_or(vocab_size),
        )?;
        let cfg = LmConfig {
            cell: Cell::new(self.cell, dims).with_options(self.options),
            seq_len: self.seq_len.unwrap_or(self.dataset.default_seq_len()),
            tie_intermediate_to_input: self.tie_intermediate,
            dense_embedding: self.dense_embedding,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn train_config(&self) -> TrainConfig {
        let batch_size = self.batch_size.unwrap_or(self.dataset.default_batch_size());
        TrainConfig {
            epochs: self.epochs,
            batch_size,
            adam: self.adam,
            grad_clip_norm: self.grad_clip_norm,
            seed: self.seed,
            eval_carry: self.eval_carry,
            eval_batch_size: self.eval_batch_size,
            log_every: self.log_every,
            shuffle: self.shuffle,
            stop_below_bpc: self.stop_below_bpc,
        }
    }
}
