//! An mRNN is a tensor RNN whose per-character transition matrices are
//! factorized: `W[i] = V diag(W_x[:, i]) W_h`. This builds the explicit
//! tRNN from an mRNN's weights, runs both over the same characters, and
//! compares parameter counts.
//!
//!     cargo run --example factorization

use mulrnn::cells::{param_count, Cell, CellDims, CellKind, CellState, InitScheme};
use mulrnn::tensor::{Matrix, ParamSet, Rng};

fn main() -> mulrnn::Result<()> {
    let dims = CellDims::new(27, 32, 20)?;
    let mut rng = Rng::new(3);
    let mrnn = Cell::new(CellKind::Mrnn, dims);
    let p = mrnn.init_params(&mut rng, InitScheme::default());

    let (v, w_x, w_h) = (p.require("V")?, p.require("W_x")?, p.require("W_h")?);
    let mut t = ParamSet::new();
    t.insert("U", p.require("U")?.clone());
    for i in 0..dims.input {
        let mut scaled = w_h.clone();
        for r in 0..scaled.rows() {
            let k = w_x.get(r, i);
            for c in 0..scaled.cols() {
                scaled.set(r, c, scaled.get(r, c) * k);
            }
        }
        t.insert(format!("W[{i}]"), v.matmul(&scaled)?);
    }
    t.insert("b", p.require("b")?.clone());
    let trnn = Cell::new(CellKind::Trnn, dims);
    trnn.check_params(&t)?;

    let mut a = CellState { h: Matrix::zeros(dims.hidden, 1), c: None };
    let mut b = a.clone();
    let mut worst: f64 = 0.0;
    for id in "factorized".bytes().map(|c| (c - b'a' + 1) as usize) {
        let x = Matrix::one_hot(&[id], dims.input)?;
        a = mrnn.forward(&p, &a, &x)?;
        b = trnn.forward(&t, &b, &x)?;
        worst = worst.max(a.h.max_abs_diff(&b.h));
    }
    println!("max |h_mrnn - h_trnn| over 10 steps: {worst:.2e}");
    println!(
        "parameters: mrnn {} vs explicit trnn {}",
        param_count(CellKind::Mrnn, dims),
        param_count(CellKind::Trnn, dims)
    );
    Ok(())
}
