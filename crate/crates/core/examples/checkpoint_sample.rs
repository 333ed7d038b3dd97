//! Train briefly, write a checkpoint, read it back, and sample at several
//! temperatures.
//!
//!     cargo run --release --example checkpoint_sample

use mulrnn::cells::{CellDims, CellKind, InitScheme};
use mulrnn::data::{synth, Vocabulary};
use mulrnn::model::{sample, LanguageModel, LmConfig};
use mulrnn::tensor::Rng;
use mulrnn::train::{evaluate, train, Checkpoint, EvalOptions, NullSink, TickClock, TrainConfig, TrainData};

fn main() -> mulrnn::Result<()> {
    let vocab = Vocabulary::text8();
    let ids = vocab.encode(&synth::text8_like(60_000, 9))?;
    let (train_ids, valid_ids) = ids.split_at(54_000);

    let config = LmConfig::new(CellKind::Tmgru, CellDims::new(27, 64, 27)?, 50)?;
    let cfg = TrainConfig {
        epochs: 3,
        batch_size: 16,
        seed: 5,
        ..Default::default()
    };
    let model = LanguageModel::new(config, &mut Rng::new(cfg.seed), InitScheme::default())?;
    let out = train(
        model,
        &vocab,
        TrainData { train: train_ids, valid: valid_ids },
        &cfg,
        &mut NullSink,
        &mut TickClock::new(1.0),
    )?;

    let path = std::env::temp_dir().join("mulrnn-example.ckpt");
    out.best.save(&path)?;
    let back = Checkpoint::load(&path)?;
    let opts = EvalOptions { batch_size: 1, seq_len: 100, carry: true };
    let before = evaluate(&out.best.model, valid_ids, opts)?;
    let after = evaluate(&back.model, valid_ids, opts)?;
    println!(
        "{} bytes, epoch {}, valid bpc {:.4}; reloaded evaluation identical: {}",
        std::fs::metadata(&path).map(|m| m.len()).unwrap_or(0),
        back.epoch,
        back.valid_bpc,
        before.to_bits() == after.to_bits()
    );

    for temperature in [0.0, 0.5, 1.0] {
        let text = sample(&back.model, &back.vocab, "the ", 70, temperature, &mut Rng::new(back.seed))?;
        println!("T={temperature:<3} the {text}");
    }
    std::fs::remove_file(&path).ok();
    Ok(())
}
