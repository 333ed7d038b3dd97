//! Memorize a 10KB periodic corpus with an mGRU, then sample from it.
//!
//!     cargo run --release --example overfit_periodic

use std::time::Instant;

use mulrnn::cells::{CellDims, CellKind, InitScheme};
use mulrnn::data::{synth, Vocabulary};
use mulrnn::model::{sample, LanguageModel, LmConfig};
use mulrnn::tensor::Rng;
use mulrnn::train::{evaluate, train, MetricsRecord, SystemClock, TrainConfig, TrainData};

const PATTERN: &str = "the quick brown fox jumps over the lazy dog ";

fn main() -> mulrnn::Result<()> {
    let vocab = Vocabulary::text8();
    let text = synth::periodic(PATTERN, 10_000);
    let ids = vocab.encode(&text)?;

    let dims = CellDims::new(vocab.size(), 64, 27)?;
    let config = LmConfig::new(CellKind::Mgru, dims, 50)?;
    let cfg = TrainConfig {
        epochs: 200,
        batch_size: 20,
        seed: 7,
        log_every: 1_000,
        stop_below_bpc: Some(0.5),
        ..Default::default()
    };
    let model = LanguageModel::new(config, &mut Rng::new(cfg.seed), InitScheme::default())?;
    println!("seed={} params={}", cfg.seed, model.config.param_count());

    let started = Instant::now();
    let mut records: Vec<MetricsRecord> = Vec::new();
    let out = train(
        model,
        &vocab,
        TrainData { train: &ids, valid: &ids },
        &cfg,
        &mut records,
        &mut SystemClock::start(),
    )?;
    for e in out.history.iter().filter(|e| e.epoch % 10 == 0 || e.epoch == out.history.len()) {
        println!("epoch {:>3}  train loss {:.4} nats  bpc {:.4}", e.epoch, e.train_loss, e.valid_bpc);
    }

    let best = &out.best.model;
    let bpc = evaluate(best, &ids, cfg.eval_options(best.config.seq_len))?;
    println!(
        "training-set bpc={bpc:.4} after {} epochs in {:.1}s",
        out.best.epoch,
        started.elapsed().as_secs_f64()
    );

    let continuation = sample(best, &vocab, "the quick ", 60, 0.0, &mut Rng::new(cfg.seed))?;
    println!("greedy sample: the quick {continuation}");
    Ok(())
}
