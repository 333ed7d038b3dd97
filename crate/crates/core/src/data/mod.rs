//! Corpus loading, vocabularies and batching.

mod batch;
mod corpus;
pub mod synth;
mod vocab;

pub use batch::{batch_count, batchify, batchify_text, BatchMode, Batches, TokenBatch};
pub use corpus::{
    load_ptb, load_ptb_expecting, load_raw, load_text8, split_raw, split_text8, CorpusSplits,
    Split, SplitSizes, Text8Mode, TEXT8_LEN,
};
pub use vocab::{TokenId, Vocabulary, UNKNOWN_CHAR};
