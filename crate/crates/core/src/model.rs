//! Character-level language model: one recurrent cell, a softmax readout,
//! teacher-forced sequence loss, the bits-per-character metric and sampling.

use std::f64::consts::LN_2;

use crate::cells::{Cell, CellDims, CellKind, CellState, InitScheme, StateVars};
use crate::data::{TokenBatch, Vocabulary};
use crate::error::{Error, Result};
use crate::tensor::{grad_check, Bound, GradCheckReport, Matrix, ParamSet, Rng, Tape, Var};

/// Readout weights, `V x n`.
pub const W_OUT: &str = "W_out";
/// Readout bias, `V x 1`.
pub const B_OUT: &str = "b_out";
/// Optional dense input embedding, `V x V`.
pub const EMBED: &str = "E";

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LmConfig {
    pub cell: Cell,
    pub seq_len: usize,
    /// Requires `intermediate == input`.
    pub tie_intermediate_to_input: bool,
    /// Feed `E * onehot(x)` instead of the raw one-hot column.
    pub dense_embedding: bool,
}

impl LmConfig {
    pub fn new(kind: CellKind, dims: CellDims, seq_len: usize) -> Result<Self> {
        let cfg = LmConfig {
            cell: Cell::new(kind, dims),
            seq_len,
            tie_intermediate_to_input: false,
            dense_embedding: false,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn vocab_size(&self) -> usize {
        self.cell.dims.input
    }

    pub fn validate(&self) -> Result<()> {
        self.cell.dims.validate()?;
        if self.seq_len < 1 {
            return Err(Error::Config("seq_len must be at least 1".into()));
        }
        if self.tie_intermediate_to_input && self.cell.dims.intermediate != self.cell.dims.input {
            return Err(Error::Config(format!(
                "intermediate size {} must equal the vocabulary size {} when tied",
                self.cell.dims.intermediate, self.cell.dims.input
            )));
        }
        Ok(())
    }

    /// Every model parameter: cell layout, then embedding, then readout.
    pub fn layout(&self) -> Vec<(String, usize, usize)> {
        let (v, n) = (self.cell.dims.input, self.cell.dims.hidden);
        let mut out = self.cell.layout();
        if self.dense_embedding {
            out.push((EMBED.into(), v, v));
        }
        out.push((W_OUT.into(), v, n));
        out.push((B_OUT.into(), v, 1));
        out
    }

    pub fn param_count(&self) -> usize {
        self.layout().iter().map(|(_, r, c)| r * c).sum()
    }
}

/// Gradient of the mean loss plus the carried state.
#[derive(Clone, Debug)]
pub struct LossAndGrads {
    pub loss: f64,
    pub grads: ParamSet,
    pub final_state: CellState,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LanguageModel {
    pub config: LmConfig,
    /// Cell parameters under their layout names plus `W_out`, `b_out` and
    /// optionally `E`.
    pub params: ParamSet,
}

impl LanguageModel {
    pub fn new(config: LmConfig, rng: &mut Rng, scheme: InitScheme) -> Result<Self> {
        config.validate()?;
        let mut params = config.cell.init_params(rng, scheme);
        let (v, n) = (config.cell.dims.input, config.cell.dims.hidden);
        let zeros = matches!(scheme, InitScheme::Zeros);
        if config.dense_embedding {
            let e = if zeros { Matrix::zeros(v, v) } else { Matrix::identity(v) };
            params.insert(EMBED, e);
        }
        let w = if zeros {
            Matrix::zeros(v, n)
        } else {
            crate::cells::glorot(v, n, rng)
        };
        params.insert(W_OUT, w);
        params.insert(B_OUT, Matrix::zeros(v, 1));
        Ok(LanguageModel { config, params })
    }

    /// Wraps existing parameters after checking names and shapes.
    pub fn from_params(config: LmConfig, params: ParamSet) -> Result<Self> {
        config.validate()?;
        let layout = config.layout();
        for (name, r, c) in &layout {
            let m = params.require(name)?;
            if m.shape() != (*r, *c) {
                return Err(Error::Shape {
                    op: "model parameter",
                    left: (*r, *c),
                    right: m.shape(),
                });
            }
        }
        if params.len() != layout.len() {
            return Err(Error::Contract(format!(
                "expected {} parameters, found {}",
                layout.len(),
                params.len()
            )));
        }
        Ok(LanguageModel { config, params })
    }

    pub fn cell(&self) -> &Cell {
        &self.config.cell
    }

    pub fn vocab_size(&self) -> usize {
        self.config.vocab_size()
    }

    pub fn zero_state(&self, batch: usize) -> CellState {
        self.config.cell.zero_state(batch)
    }

    fn input(&self, tape: &mut Tape, bound: &Bound, ids: &[usize]) -> Result<Var> {
        let onehot = tape.constant(Matrix::one_hot(ids, self.vocab_size())?);
        if self.config.dense_embedding {
            tape.matmul(bound.var(EMBED)?, onehot)
        } else {
            Ok(onehot)
        }
    }

    fn readout(&self, tape: &mut Tape, bound: &Bound, h: Var) -> Result<Var> {
        let z = tape.matmul(bound.var(W_OUT)?, h)?;
        tape.add_bias(z, bound.var(B_OUT)?)
    }

    /// Builds the teacher-forced unroll on `tape`. Returns the mean loss
    /// node and the state after consuming every token of the window
    /// (including the last, which has no target inside the window).
    fn unroll(
        &self,
        tape: &mut Tape,
        bound: &Bound,
        batch: &TokenBatch,
        initial: &CellState,
    ) -> Result<(Var, StateVars)> {
        let t_len = batch.seq_len();
        if t_len < 2 {
            return Err(Error::Input(format!(
                "sequence_loss needs at least 2 time steps, got {t_len}"
            )));
        }
        if let Some(max) = batch.max_id() {
            if max as usize >= self.vocab_size() {
                return Err(Error::Index {
                    what: "token id",
                    index: max as usize,
                    limit: self.vocab_size(),
                });
            }
        }
        if initial.batch() != batch.batch() {
            return Err(Error::Shape {
                op: "initial state",
                left: initial.h.shape(),
                right: (batch.batch(), batch.seq_len()),
            });
        }
        let mut state = initial.bind(tape);
        let mut terms = Vec::with_capacity(t_len - 1);
        for t in 0..t_len - 1 {
            let x = self.input(tape, bound, &batch.column(t))?;
            state = self.config.cell.step(tape, bound, &state, x)?;
            let logits = self.readout(tape, bound, state.h)?;
            terms.push(tape.softmax_cross_entropy(logits, &batch.column(t + 1))?);
        }
        let loss = tape.mean_scalars(&terms)?;
        // advance over the final token so a carried state has seen the whole window
        let x = self.input(tape, bound, &batch.column(t_len - 1))?;
        let last = self.config.cell.step(tape, bound, &state, x)?;
        Ok((loss, last))
    }

    /// Mean next-character cross-entropy in nats over all `B x (T-1)`
    /// predictions, and the state to carry into the next window.
    pub fn sequence_loss(&self, batch: &TokenBatch, initial: &CellState) -> Result<(f64, CellState)> {
        let mut tape = Tape::new();
        let bound = self.params.bind(&mut tape);
        let (loss, last) = self.unroll(&mut tape, &bound, batch, initial)?;
        Ok((tape.value(loss).data()[0], last.detach(&tape)))
    }

    pub fn loss_and_grads(&self, batch: &TokenBatch, initial: &CellState) -> Result<LossAndGrads> {
        let mut tape = Tape::new();
        let bound = self.params.bind(&mut tape);
        let (loss, last) = self.unroll(&mut tape, &bound, batch, initial)?;
        tape.backward(loss)?;
        Ok(LossAndGrads {
            loss: tape.value(loss).data()[0],
            grads: bound.grads(&tape),
            final_state: last.detach(&tape),
        })
    }

    /// Feeds one token per column and returns the readout logits (`V x B`)
    /// with the next state.
    pub fn step_logits(&self, state: &CellState, ids: &[usize]) -> Result<(Matrix, CellState)> {
        let mut tape = Tape::new();
        let bound = self.params.bind(&mut tape);
        let s = state.bind(&mut tape);
        let x = self.input(&mut tape, &bound, ids)?;
        let next = self.config.cell.step(&mut tape, &bound, &s, x)?;
        let logits = self.readout(&mut tape, &bound, next.h)?;
        Ok((tape.value(logits).clone(), next.detach(&tape)))
    }
}

/// Central-difference check of [`LanguageModel::loss_and_grads`] over every
/// model parameter (cell, embedding and readout).
pub fn grad_check_model(
    model: &LanguageModel,
    batch: &TokenBatch,
    initial: &CellState,
    step: f64,
    tol: f64,
) -> Result<GradCheckReport> {
    // surface shape and id errors before the closure has to unwrap
    model.loss_and_grads(batch, initial)?;
    let mut probe = model.clone();
    Ok(grad_check(&model.params, step, tol, |p| {
        probe.params = p.clone();
        let out = probe
            .loss_and_grads(batch, initial)
            .expect("validated above");
        (out.loss, out.grads)
    }))
}

/// Nats to bits.
pub fn bpc(loss_nats: f64) -> f64 {
    loss_nats / LN_2
}

/// Primes the model with the in-vocabulary characters of `prime`, then
/// draws `length` characters. `temperature == 0` means greedy argmax.
pub fn sample(
    model: &LanguageModel,
    vocab: &Vocabulary,
    prime: &str,
    length: usize,
    temperature: f64,
    rng: &mut Rng,
) -> Result<String> {
    if !temperature.is_finite() || temperature < 0.0 {
        return Err(Error::Input(format!(
            "temperature must be a finite non-negative number, got {temperature}"
        )));
    }
    if vocab.size() != model.vocab_size() {
        return Err(Error::Input(format!(
            "vocabulary of {} symbols does not match model input width {}",
            vocab.size(),
            model.vocab_size()
        )));
    }
    let primed: Vec<usize> = prime.chars().filter_map(|c| vocab.id(c)).map(|i| i as usize).collect();
    if primed.is_empty() {
        return Err(Error::Input(format!(
            "prime {prime:?} contains no in-vocabulary character"
        )));
    }

    let mut state = model.zero_state(1);
    let mut logits = Matrix::zeros(model.vocab_size(), 1);
    for &id in &primed {
        (logits, state) = model.step_logits(&state, &[id])?;
    }

    let mut out = String::with_capacity(length);
    for _ in 0..length {
        let z = logits.column_values(0);
        let next = if temperature == 0.0 {
            argmax(&z)
        } else {
            let scaled = Matrix::column(&z.iter().map(|v| v / temperature).collect::<Vec<_>>());
            rng.categorical(scaled.softmax_columns().data())
        };
        out.push(vocab.char_of(next as u32).unwrap_or(crate::data::UNKNOWN_CHAR));
        (logits, state) = model.step_logits(&state, &[next])?;
    }
    Ok(out)
}

fn argmax(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) })
        .0
}
