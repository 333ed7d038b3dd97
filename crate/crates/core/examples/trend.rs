//! Equal-budget comparison of the plain RNN against every multiplicative
//! cell on 500KB of synthetic Text8-style text (3 epochs each, ~10 min in
//! release mode).
//!
//!     cargo run --release --example trend
//!
//! Every knob can be overridden from the environment: `TREND_CHARS`,
//! `TREND_EPOCHS`, `TREND_ANCHOR_HIDDEN` (mLSTM hidden size fixing the
//! budget), `TREND_INTERMEDIATE`, `TREND_BATCH`, `TREND_SEQ_LEN`,
//! `TREND_LR`, `TREND_CLIP` and `TREND_DATA_SEED`.

use std::env;

use mulrnn::cells::CellKind;
use mulrnn::data::{split_text8, synth, Text8Mode};
use mulrnn::train::{compare_at_budget, AdamConfig, TrainConfig};

fn var<T: std::str::FromStr>(name: &str) -> Option<T> {
    env::var(name).ok().and_then(|v| v.parse().ok())
}

fn main() -> mulrnn::Result<()> {
    let chars = var("TREND_CHARS").unwrap_or(500_000);
    let anchor_hidden = var("TREND_ANCHOR_HIDDEN").unwrap_or(150);
    let intermediate = var("TREND_INTERMEDIATE").unwrap_or(64);
    let seq_len = var("TREND_SEQ_LEN").unwrap_or(50);
    let data_seed = var("TREND_DATA_SEED").unwrap_or(2017);

    let corpus = split_text8(synth::text8_like(chars, data_seed), Text8Mode::Fixture)?;
    let cfg = TrainConfig {
        epochs: var("TREND_EPOCHS").unwrap_or(3),
        batch_size: var("TREND_BATCH").unwrap_or(8),
        adam: AdamConfig {
            lr: var("TREND_LR").unwrap_or(3e-3),
            ..Default::default()
        },
        grad_clip_norm: var("TREND_CLIP"),
        seed: 1,
        ..Default::default()
    };
    println!(
        "seed={} data_seed={data_seed} chars={chars} epochs={} anchor=mlstm/{anchor_hidden} m={intermediate}",
        cfg.seed, cfg.epochs
    );

    let mut kinds = vec![CellKind::Rnn];
    kinds.extend(CellKind::MULTIPLICATIVE);
    let rows = compare_at_budget(
        &kinds,
        CellKind::Mlstm,
        anchor_hidden,
        intermediate,
        seq_len,
        &corpus,
        &cfg,
        |r| {
            println!(
                "{:<7} n={:<4} cell params={:<6} valid bpc={:.4}  ({:.0}s)",
                r.kind.name(), r.hidden, r.cell_params, r.valid_bpc, r.seconds
            )
        },
    )?;

    let baseline = rows[0].valid_bpc;
    let beaten = rows[1..].iter().filter(|r| r.valid_bpc < baseline).count();
    println!("{beaten}/{} multiplicative cells below the rnn baseline", rows.len() - 1);
    Ok(())
}
