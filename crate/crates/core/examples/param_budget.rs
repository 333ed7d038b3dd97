//! Hidden sizes that give every cell kind the parameter count of an anchor
//! model, as used for equal-budget comparisons.
//!
//!     cargo run --example param_budget [vocab] [anchor_hidden]
//!
//! Defaults to an mLSTM with n=700 on a 50-symbol vocabulary and m=V.

use mulrnn::cells::{param_count, CellDims, CellKind};
use mulrnn::train::solve_budget;

fn main() -> mulrnn::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>());
    let vocab = args.next().transpose().ok().flatten().unwrap_or(50);
    let anchor_hidden = args.next().transpose().ok().flatten().unwrap_or(700);

    let anchor = param_count(CellKind::Mlstm, CellDims::new(vocab, anchor_hidden, vocab)?);
    println!("anchor: mlstm n={anchor_hidden}, V=m={vocab}: {anchor} cell parameters");
    println!("{:<7} {:>6} {:>10} {:>8}", "cell", "n", "params", "dev");
    for row in solve_budget(&CellKind::ALL, vocab, vocab, anchor)? {
        println!(
            "{:<7} {:>6} {:>10} {:>7.2}%",
            row.kind.name(),
            row.hidden,
            row.params,
            row.rel_dev * 100.0
        );
    }
    Ok(())
}
