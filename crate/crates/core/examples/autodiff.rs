//! The autodiff tape on its own: a one-layer softmax classifier, its
//! gradient, and a finite-difference spot check.
//!
//!     cargo run --example autodiff

use mulrnn::tensor::{Matrix, Tape};

fn loss_at(w: &Matrix, x: &Matrix, targets: &[usize]) -> mulrnn::Result<f64> {
    let mut tape = Tape::new();
    let w = tape.constant(w.clone());
    let x = tape.constant(x.clone());
    let logits = tape.matmul(w, x)?;
    let loss = tape.softmax_cross_entropy(logits, targets)?;
    Ok(tape.value(loss).get(0, 0))
}

fn main() -> mulrnn::Result<()> {
    // three classes, two features, a batch of four columns
    let w0 = Matrix::from_rows(&[[0.5, -0.2], [0.1, 0.3], [-0.4, 0.8]]);
    let x0 = Matrix::from_rows(&[[1.0, 0.0, -1.0, 2.0], [0.5, 1.5, 0.0, -1.0]]);
    let targets = [0, 2, 1, 0];

    let mut tape = Tape::new();
    let w = tape.param(w0.clone());
    let x = tape.constant(x0.clone());
    let h = tape.matmul(w, x)?;
    let loss = tape.softmax_cross_entropy(h, &targets)?;
    tape.backward(loss)?;

    println!("nodes on tape: {}", tape.len());
    println!("mean cross-entropy: {:.6} nats", tape.value(loss).get(0, 0));
    let grad = tape.grad(w);
    for r in 0..grad.rows() {
        println!("dL/dW row {r}: {:+.6} {:+.6}", grad.get(r, 0), grad.get(r, 1));
    }

    let step = 1e-6;
    let (mut plus, mut minus) = (w0.clone(), w0.clone());
    plus.set(2, 1, w0.get(2, 1) + step);
    minus.set(2, 1, w0.get(2, 1) - step);
    let numeric = (loss_at(&plus, &x0, &targets)? - loss_at(&minus, &x0, &targets)?) / (2.0 * step);
    println!("W[2,1]: analytic {:+.9}  central difference {:+.9}", grad.get(2, 1), numeric);
    Ok(())
}
