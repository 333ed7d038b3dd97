//! Loading, splitting, encoding and batching a corpus.
//!
//!     cargo run --example corpus                 # synthetic Text8-style text
//!     cargo run --example corpus -- path/text8   # the real file (100M chars)
//!     cargo run --example corpus -- path/ptb/    # ptb.{train,valid,test}.txt

use std::path::Path;

use mulrnn::data::{batch_count, batchify, load_ptb, load_text8, split_text8, synth, BatchMode, Split, Text8Mode};

fn main() -> mulrnn::Result<()> {
    let corpus = match std::env::args().nth(1) {
        Some(arg) if Path::new(&arg).is_dir() => {
            let p = |n: &str| Path::new(&arg).join(format!("ptb.{n}.txt"));
            load_ptb(&p("train"), &p("valid"), &p("test"))?
        }
        Some(arg) => load_text8(Path::new(&arg), Text8Mode::Strict)?,
        None => split_text8(synth::text8_like(200_000, 1), Text8Mode::Fixture)?,
    };
    for w in &corpus.warnings {
        println!("warning: {w}");
    }
    let s = corpus.sizes;
    println!("splits: train {} / valid {} / test {} characters", s.train, s.valid, s.test);
    println!("vocabulary: {} symbols {:?}", corpus.vocab.size(), corpus.vocab.chars().iter().collect::<String>());

    let ids = corpus.encode(Split::Train)?;
    let (batch, seq_len) = (4, 40);
    let mut batches = batchify(&ids, batch, seq_len, BatchMode::Contiguous)?;
    println!("{} contiguous batches of {batch} x {seq_len}", batch_count(ids.len(), batch, seq_len));
    let first = batches.next().expect("at least one batch");
    let second = batches.next().expect("at least two batches");
    for b in 0..batch {
        // row b of consecutive batches continues the same stream
        println!(
            "stream {b}: {:?} -> {:?}",
            corpus.vocab.decode(first.row(b)),
            corpus.vocab.decode(second.row(b))
        );
    }
    Ok(())
}
