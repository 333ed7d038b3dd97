//! Analytic gradients of the sequence loss against central differences for
//! every cell kind (V=7, n=8, m=5, B=3, T=4).
//!
//!     cargo run --release --example gradient_check [seed]
//!
//! Relative errors are `|a - n| / max(|a|, |n|, 1e-8)`. With step 1e-5 the
//! finite difference of an f64 loss near 2 cannot resolve much below 2e-11,
//! so the tiniest entries can show relative errors around 1e-4 whatever the
//! analytic gradient does; the `abs err` column makes that visible.

use mulrnn::cells::{CellKind, CellOptions};
use mulrnn::cli::gradient_report;

fn main() -> mulrnn::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    println!("seed={seed}");
    println!("{:<7} {:>12} {:>10} {:>12} {:>12}", "cell", "step 1e-5", "worst in", "abs err", "step 1e-4");
    for kind in CellKind::ALL {
        let fine = gradient_report(kind, 7, 8, 5, 3, 4, CellOptions::default(), seed, 1e-5, 1e-4)?;
        let coarse = gradient_report(kind, 7, 8, 5, 3, 4, CellOptions::default(), seed, 1e-4, 1e-4)?;
        let worst = fine
            .params
            .iter()
            .max_by(|a, b| a.max_rel_err.total_cmp(&b.max_rel_err))
            .expect("every model has parameters");
        println!(
            "{:<7} {:>12.3e} {:>10} {:>12.1e} {:>12.3e}",
            kind.name(),
            fine.max_rel_err(),
            worst.name,
            (worst.analytic - worst.numeric).abs(),
            coarse.max_rel_err()
        );
    }
    Ok(())
}
