use crate::cells::CellState;
use crate::data::{batchify, BatchMode, TokenBatch, TokenId, Vocabulary};
use crate::error::{Error, Result};
use crate::model::{bpc, LanguageModel};

use super::adam::{clip_global_norm, AdamConfig, AdamState};
use super::checkpoint::Checkpoint;
use super::metrics::{Clock, MetricsRecord, MetricsSink};

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub adam: AdamConfig,
    /// Global-norm clipping threshold; off when `None`.
    pub grad_clip_norm: Option<f64>,
    pub seed: u64,
    /// Carry hidden state across evaluation windows instead of resetting.
    pub eval_carry: bool,
    /// Evaluation batch size; defaults to `batch_size`.
    pub eval_batch_size: Option<usize>,
    /// Steps per training metrics record.
    pub log_every: u64,
    /// Shuffle training windows each epoch (no state carry) instead of
    /// streaming them contiguously.
    pub shuffle: bool,
    /// Stop once validation BPC drops below this value.
    pub stop_below_bpc: Option<f64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 10,
            batch_size: 32,
            adam: AdamConfig::default(),
            grad_clip_norm: None,
            seed: 0,
            eval_carry: true,
            eval_batch_size: None,
            log_every: 100,
            shuffle: false,
            stop_below_bpc: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(msg.into()));
        if self.epochs < 1 {
            return bad("epochs must be at least 1");
        }
        if self.batch_size < 1 || self.eval_batch_size == Some(0) {
            return bad("batch size must be at least 1");
        }
        if !(self.adam.lr > 0.0 && self.adam.lr.is_finite()) {
            return bad("learning rate must be positive");
        }
        if !(0.0..1.0).contains(&self.adam.beta1) || !(0.0..1.0).contains(&self.adam.beta2) {
            return bad("adam betas must lie in [0, 1)");
        }
        if self.adam.eps.is_nan() || self.adam.eps <= 0.0 {
            return bad("adam eps must be positive");
        }
        if matches!(self.grad_clip_norm, Some(c) if c.is_nan() || c <= 0.0) {
            return bad("grad_clip_norm must be positive");
        }
        if self.log_every < 1 {
            return bad("log_every must be at least 1");
        }
        Ok(())
    }

    pub fn eval_options(&self, seq_len: usize) -> EvalOptions {
        EvalOptions {
            batch_size: self.eval_batch_size.unwrap_or(self.batch_size),
            seq_len,
            carry: self.eval_carry,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EvalOptions {
    pub batch_size: usize,
    pub seq_len: usize,
    pub carry: bool,
}

/// Total loss in nats and the number of predicted positions.
pub fn evaluate_nats(model: &LanguageModel, ids: &[TokenId], opts: EvalOptions) -> Result<(f64, usize)> {
    if ids.len() < 2 {
        return Err(Error::Corpus(format!(
            "split of {} characters is too short to evaluate",
            ids.len()
        )));
    }
    // Shrink the window and batch for short splits rather than refuse them.
    let seq_len = opts.seq_len.clamp(2, ids.len());
    let batch = opts.batch_size.clamp(1, ids.len() / seq_len);
    let mut state = model.zero_state(batch);
    let mut total = 0.0;
    let mut count = 0;
    for window in batchify(ids, batch, seq_len, BatchMode::Contiguous)? {
        if !opts.carry {
            state = model.zero_state(batch);
        }
        let (loss, next) = model.sequence_loss(&window, &state)?;
        let n = batch * (seq_len - 1);
        total += loss * n as f64;
        count += n;
        state = next;
    }
    Ok((total, count))
}

/// Mean bits per character over every predicted position of `ids`.
pub fn evaluate(model: &LanguageModel, ids: &[TokenId], opts: EvalOptions) -> Result<f64> {
    let (total, count) = evaluate_nats(model, ids, opts)?;
    Ok(bpc(total / count as f64))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpochSummary {
    pub epoch: usize,
    pub steps: u64,
    pub train_loss: f64,
    pub valid_bpc: f64,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    /// Lowest validation BPC over all epochs.
    pub best: Checkpoint,
    pub last: Checkpoint,
    pub history: Vec<EpochSummary>,
    pub clip_events: u64,
}

/// Token streams for training. The validation stream picks the best epoch.
#[derive(Clone, Copy, Debug)]
pub struct TrainData<'a> {
    pub train: &'a [TokenId],
    pub valid: &'a [TokenId],
}

struct Interval {
    loss_sum: f64,
    steps: u64,
    chars: usize,
    clipped: u64,
    started_ms: f64,
}

impl Interval {
    fn new(now: f64) -> Self {
        Interval {
            loss_sum: 0.0,
            steps: 0,
            chars: 0,
            clipped: 0,
            started_ms: now,
        }
    }
}

fn rate(chars: usize, from_ms: f64, to_ms: f64) -> f64 {
    let dt = (to_ms - from_ms) / 1e3;
    if dt > 0.0 {
        chars as f64 / dt
    } else {
        0.0
    }
}

/// Runs the epoch loop: Adam over contiguous truncated-BPTT windows, state
/// carried within an epoch and reset between epochs, one validation pass per
/// epoch, best checkpoint by validation BPC.
pub fn train(
    model: LanguageModel,
    vocab: &Vocabulary,
    data: TrainData<'_>,
    cfg: &TrainConfig,
    sink: &mut dyn MetricsSink,
    clock: &mut dyn Clock,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    if data.train.is_empty() || data.valid.is_empty() {
        return Err(Error::Config("training and validation data must be non-empty".into()));
    }
    if vocab.size() != model.vocab_size() {
        return Err(Error::Config(format!(
            "vocabulary has {} symbols but the model expects {}",
            vocab.size(),
            model.vocab_size()
        )));
    }
    let seq_len = model.config.seq_len;
    if seq_len < 2 {
        return Err(Error::Config("training needs seq_len >= 2".into()));
    }
    let batches_per_epoch = crate::data::batch_count(data.train.len(), cfg.batch_size, seq_len);
    if batches_per_epoch == 0 {
        return Err(Error::Config(format!(
            "training data of {} characters is shorter than one batch ({} x {seq_len})",
            data.train.len(),
            cfg.batch_size
        )));
    }
    let eval_opts = cfg.eval_options(seq_len);

    let mut model = model;
    let mut adam = AdamState::new(cfg.adam, &model.params);
    let mut step: u64 = 0;
    let mut clip_events = 0;
    let mut history = Vec::new();
    let mut best: Option<Checkpoint> = None;

    for epoch in 1..=cfg.epochs {
        let mode = if cfg.shuffle {
            BatchMode::Shuffled {
                seed: cfg.seed.wrapping_add(epoch as u64),
            }
        } else {
            BatchMode::Contiguous
        };
        let mut state: CellState = model.zero_state(cfg.batch_size);
        let mut interval = Interval::new(clock.elapsed_ms());
        let mut epoch_loss = 0.0;
        let mut epoch_steps = 0u64;

        for window in batchify(data.train, cfg.batch_size, seq_len, mode)? {
            step += 1;
            let initial = if cfg.shuffle { model.zero_state(cfg.batch_size) } else { state };
            let mut out = model.loss_and_grads(&window, &initial)?;
            if !out.loss.is_finite() {
                return Err(Error::Numeric {
                    step,
                    lr: cfg.adam.lr,
                    reason: format!("training loss became {}", out.loss),
                });
            }
            if let Some(max) = cfg.grad_clip_norm {
                if clip_global_norm(&mut out.grads, max).1 {
                    interval.clipped += 1;
                    clip_events += 1;
                }
            }
            adam.step(&mut model.params, &out.grads)?;
            state = out.final_state;

            interval.loss_sum += out.loss;
            interval.steps += 1;
            interval.chars += chars_in(&window);
            epoch_loss += out.loss;
            epoch_steps += 1;
            if interval.steps == cfg.log_every {
                flush(sink, clock, &mut interval, step, epoch)?;
            }
        }
        if interval.steps > 0 {
            flush(sink, clock, &mut interval, step, epoch)?;
        }

        let t0 = clock.elapsed_ms();
        let (nats, count) = evaluate_nats(&model, data.valid, eval_opts)?;
        let loss = nats / count as f64;
        let valid_bpc = bpc(loss);
        if !valid_bpc.is_finite() {
            return Err(Error::Numeric {
                step,
                lr: cfg.adam.lr,
                reason: format!("validation BPC became {valid_bpc}"),
            });
        }
        let t1 = clock.elapsed_ms();
        sink.record(&MetricsRecord {
            step,
            epoch,
            split: "valid".into(),
            loss_nats: loss,
            bpc: valid_bpc,
            chars_per_sec: rate(count, t0, t1),
            wall_ms: t1,
            clipped: 0,
        })?;
        history.push(EpochSummary {
            epoch,
            steps: epoch_steps,
            train_loss: epoch_loss / epoch_steps as f64,
            valid_bpc,
        });
        if best.as_ref().is_none_or(|b| valid_bpc < b.valid_bpc) {
            best = Some(snapshot(&model, vocab, &adam, epoch, valid_bpc, cfg.seed));
        }
        if matches!(cfg.stop_below_bpc, Some(t) if valid_bpc < t) {
            break;
        }
    }

    let last_summary = history.last().expect("at least one epoch");
    let last = snapshot(&model, vocab, &adam, last_summary.epoch, last_summary.valid_bpc, cfg.seed);
    Ok(TrainOutcome {
        best: best.expect("at least one epoch"),
        last,
        history,
        clip_events,
    })
}

fn chars_in(window: &TokenBatch) -> usize {
    window.batch() * window.seq_len()
}

fn flush(
    sink: &mut dyn MetricsSink,
    clock: &mut dyn Clock,
    interval: &mut Interval,
    step: u64,
    epoch: usize,
) -> Result<()> {
    let now = clock.elapsed_ms();
    let loss = interval.loss_sum / interval.steps as f64;
    sink.record(&MetricsRecord {
        step,
        epoch,
        split: "train".into(),
        loss_nats: loss,
        bpc: bpc(loss),
        chars_per_sec: rate(interval.chars, interval.started_ms, now),
        wall_ms: now,
        clipped: interval.clipped,
    })?;
    *interval = Interval::new(now);
    Ok(())
}

fn snapshot(
    model: &LanguageModel,
    vocab: &Vocabulary,
    adam: &AdamState,
    epoch: usize,
    valid_bpc: f64,
    seed: u64,
) -> Checkpoint {
    Checkpoint {
        model: model.clone(),
        vocab: vocab.clone(),
        adam: Some(adam.clone()),
        epoch,
        valid_bpc,
        seed,
    }
}
