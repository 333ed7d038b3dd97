use std::time::Instant;

use super::budget::solve_hidden_size;
use super::metrics::{NullSink, SystemClock};
use super::trainer::{train, TrainConfig, TrainData};
use crate::cells::{param_count, CellDims, CellKind, InitScheme};
use crate::data::{CorpusSplits, Split};
use crate::error::Result;
use crate::model::{LanguageModel, LmConfig};
use crate::tensor::Rng;

/// One cell kind trained at the shared parameter budget.
#[derive(Clone, Debug)]
pub struct BudgetRun {
    pub kind: CellKind,
    pub hidden: usize,
    /// Recurrent-cell parameters (embedding and softmax excluded).
    pub cell_params: usize,
    pub valid_bpc: f64,
    pub seconds: f64,
}

/// Trains each of `kinds` with the hidden size that best matches the cell
/// parameter count of `anchor` at `anchor_hidden`, and reports the best
/// validation BPC of each.
///
/// Every model starts from `cfg.seed`, sees the same batches and differs
/// only in its cell; `on_row` is called as each run finishes.
#[allow(clippy::too_many_arguments)]
pub fn compare_at_budget(
    kinds: &[CellKind],
    anchor: CellKind,
    anchor_hidden: usize,
    intermediate: usize,
    seq_len: usize,
    corpus: &CorpusSplits,
    cfg: &TrainConfig,
    mut on_row: impl FnMut(&BudgetRun),
) -> Result<Vec<BudgetRun>> {
    let v = corpus.vocab.size();
    let train_ids = corpus.encode(Split::Train)?;
    let valid_ids = corpus.encode(Split::Valid)?;
    let budget = param_count(anchor, CellDims::new(v, anchor_hidden, intermediate)?);

    let mut rows = Vec::with_capacity(kinds.len());
    for &kind in kinds {
        let hidden = solve_hidden_size(kind, v, intermediate, budget)?;
        let dims = CellDims::new(v, hidden, intermediate)?;
        let config = LmConfig::new(kind, dims, seq_len)?;
        let model = LanguageModel::new(config, &mut Rng::new(cfg.seed), InitScheme::default())?;
        let started = Instant::now();
        let out = train(
            model,
            &corpus.vocab,
            TrainData { train: &train_ids, valid: &valid_ids },
            cfg,
            &mut NullSink,
            &mut SystemClock::start(),
        )?;
        let row = BudgetRun {
            kind,
            hidden,
            cell_params: param_count(kind, dims),
            valid_bpc: out.best.valid_bpc,
            seconds: started.elapsed().as_secs_f64(),
        };
        on_row(&row);
        rows.push(row);
    }
    Ok(rows)
}
