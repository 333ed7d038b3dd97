use super::vocab::{TokenId, Vocabulary};
use crate::error::{Error, Result};
use crate::tensor::Rng;

/// `batch x seq_len` token ids, row-major (one row per sequence).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TokenBatch {
    ids: Vec<TokenId>,
    batch: usize,
    seq_len: usize,
}

impl TokenBatch {
    pub fn new(ids: Vec<TokenId>, batch: usize, seq_len: usize) -> Result<Self> {
        if ids.len() != batch * seq_len || batch == 0 || seq_len == 0 {
            return Err(Error::Shape {
                op: "token batch",
                left: (batch, seq_len),
                right: (ids.len(), 1),
            });
        }
        Ok(TokenBatch { ids, batch, seq_len })
    }

    pub fn from_rows<R: AsRef<[TokenId]>>(rows: &[R]) -> Result<Self> {
        let seq_len = rows.first().map_or(0, |r| r.as_ref().len());
        if rows.iter().any(|r| r.as_ref().len() != seq_len) {
            return Err(Error::Input("ragged token rows".into()));
        }
        let ids = rows.iter().flat_map(|r| r.as_ref().iter().copied()).collect();
        Self::new(ids, rows.len(), seq_len)
    }

    pub fn batch(&self) -> usize {
        self.batch
    }

    pub fn seq_len(&self) -> usize {
        self.seq_len
    }

    pub fn ids(&self) -> &[TokenId] {
        &self.ids
    }

    pub fn row(&self, b: usize) -> &[TokenId] {
        &self.ids[b * self.seq_len..(b + 1) * self.seq_len]
    }

    /// Ids at time `t` across the batch.
    pub fn column(&self, t: usize) -> Vec<usize> {
        (0..self.batch)
            .map(|b| self.ids[b * self.seq_len + t] as usize)
            .collect()
    }

    pub fn max_id(&self) -> Option<TokenId> {
        self.ids.iter().copied().max()
    }

    /// Keeps only the listed rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        let picked: Vec<&[TokenId]> = rows.iter().map(|&r| self.row(r)).collect();
        Self::from_rows(&picked)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum BatchMode {
    /// `B` contiguous streams cut into consecutive windows, so state can be
    /// carried from one batch to the next.
    #[default]
    Contiguous,
    /// Independent windows in seeded random order.
    Shuffled { seed: u64 },
}

/// Number of batches one epoch over `len` tokens yields.
pub fn batch_count(len: usize, batch: usize, seq_len: usize) -> usize {
    if batch == 0 || seq_len == 0 {
        0
    } else {
        len / (batch * seq_len)
    }
}

/// Streams one epoch of batches over `ids`. Trailing tokens that do not fill
/// a whole window are dropped; every kept token appears exactly once.
pub fn batchify(ids: &[TokenId], batch: usize, seq_len: usize, mode: BatchMode) -> Result<Batches<'_>> {
    if batch == 0 || seq_len == 0 {
        return Err(Error::Config("batch size and sequence length must be positive".into()));
    }
    let count = batch_count(ids.len(), batch, seq_len);
    if count == 0 {
        return Err(Error::Corpus(format!(
            "text of {} tokens is shorter than one batch ({batch} x {seq_len})",
            ids.len()
        )));
    }
    let order = match mode {
        BatchMode::Contiguous => None,
        BatchMode::Shuffled { seed } => {
            let mut windows: Vec<usize> = (0..count * batch).collect();
            Rng::new(seed).shuffle(&mut windows);
            Some(windows)
        }
    };
    Ok(Batches {
        ids,
        batch,
        seq_len,
        count,
        next: 0,
        order,
    })
}

/// Convenience: encode and batch a whole text.
pub fn batchify_text(
    text: &str,
    vocab: &Vocabulary,
    batch: usize,
    seq_len: usize,
    mode: BatchMode,
) -> Result<Vec<TokenBatch>> {
    let ids = vocab.encode(text)?;
    Ok(batchify(&ids, batch, seq_len, mode)?.collect())
}

#[derive(Debug, Clone)]
pub struct Batches<'a> {
    ids: &'a [TokenId],
    batch: usize,
    seq_len: usize,
    count: usize,
    next: usize,
    order: Option<Vec<usize>>,
}

impl Batches<'_> {
    /// Length of each contiguous stream (before window truncation).
    fn stream_len(&self) -> usize {
        self.ids.len() / self.batch
    }
}

impl Iterator for Batches<'_> {
    type Item = TokenBatch;

    fn next(&mut self) -> Option<TokenBatch> {
        if self.next >= self.count {
            return None;
        }
        let k = self.next;
        self.next += 1;
        let t = self.seq_len;
        let mut out = Vec::with_capacity(self.batch * t);
        for b in 0..self.batch {
            let start = match &self.order {
                None => b * self.stream_len() + k * t,
                Some(order) => order[k * self.batch + b] * t,
            };
            out.extend_from_slice(&self.ids[start..start + t]);
        }
        Some(TokenBatch {
            ids: out,
            batch: self.batch,
            seq_len: t,
        })
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = self.count - self.next;
        (left, Some(left))
    }
}

impl ExactSizeIterator for Batches<'_> {}
