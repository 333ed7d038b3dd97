//! Hidden-size solver for equal parameter budgets across cell kinds.

use crate::cells::{param_count, CellDims, CellKind};
use crate::error::{Error, Result};

fn count_at(kind: CellKind, vocab: usize, intermediate: usize, hidden: usize) -> usize {
    param_count(
        kind,
        CellDims {
            input: vocab,
            hidden,
            intermediate,
        },
    )
}

/// Hidden size whose cell parameter count is closest to `target`; ties go
/// to the smaller size. Relies on the count growing strictly with `n`.
pub fn solve_hidden_size(kind: CellKind, vocab: usize, intermediate: usize, target: usize) -> Result<usize> {
    CellDims::new(vocab, 1, intermediate)?;
    let at = |n| count_at(kind, vocab, intermediate, n);
    if target < at(1) {
        return Err(Error::Budget(format!(
            "target {target} is below the {} parameters of a {kind} cell with one hidden unit",
            at(1)
        )));
    }
    // smallest n with count >= target
    let mut hi = 1usize;
    while at(hi) < target {
        hi *= 2;
    }
    let mut lo = hi / 2;
    while lo + 1 < hi {
        let mid = lo + (hi - lo) / 2;
        if at(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let above = hi;
    if above > 1 {
        let below = above - 1;
        if target - at(below) <= at(above) - target {
            return Ok(below);
        }
    }
    Ok(above)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BudgetRow {
    pub kind: CellKind,
    pub hidden: usize,
    pub params: usize,
    /// `(params - target) / target`.
    pub rel_dev: f64,
}

/// Solves every kind in `kinds` against one parameter target.
pub fn solve_budget(kinds: &[CellKind], vocab: usize, intermediate: usize, target: usize) -> Result<Vec<BudgetRow>> {
    kinds
        .iter()
        .map(|&kind| {
            let hidden = solve_hidden_size(kind, vocab, intermediate, target)?;
            let params = count_at(kind, vocab, intermediate, hidden);
            Ok(BudgetRow {
                kind,
                hidden,
                params,
                rel_dev: (params as f64 - target as f64) / target as f64,
            })
        })
        .collect()
}
