//! Truncated backpropagation through time with the hidden state carried
//! across windows, and what carrying it buys at evaluation time.
//!
//!     cargo run --release --example stateful_eval

use mulrnn::cells::{CellDims, CellKind, InitScheme};
use mulrnn::data::{split_text8, synth, Split, Text8Mode};
use mulrnn::model::{LanguageModel, LmConfig};
use mulrnn::tensor::Rng;
use mulrnn::train::{evaluate, train, EvalOptions, NullSink, SystemClock, TrainConfig, TrainData};

fn main() -> mulrnn::Result<()> {
    let corpus = split_text8(synth::text8_like(200_000, 4), Text8Mode::Fixture)?;
    let train_ids = corpus.encode(Split::Train)?;
    let valid_ids = corpus.encode(Split::Valid)?;

    let config = LmConfig::new(CellKind::Mlstm, CellDims::new(27, 96, 27)?, 32)?;
    let cfg = TrainConfig {
        epochs: 2,
        batch_size: 16,
        seed: 11,
        ..Default::default()
    };
    let model = LanguageModel::new(config, &mut Rng::new(cfg.seed), InitScheme::default())?;
    let out = train(
        model,
        &corpus.vocab,
        TrainData { train: &train_ids, valid: &valid_ids },
        &cfg,
        &mut NullSink,
        &mut SystemClock::start(),
    )?;
    let model = &out.best.model;

    println!("window  carried  reset");
    for seq_len in [4, 16, 64, 256] {
        let carried = evaluate(model, &valid_ids, EvalOptions { batch_size: 1, seq_len, carry: true })?;
        let reset = evaluate(model, &valid_ids, EvalOptions { batch_size: 1, seq_len, carry: false })?;
        println!("{seq_len:>6}  {carried:.4}   {reset:.4}");
    }
    Ok(())
}
