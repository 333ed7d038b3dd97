//! Adam with bias correction and global-norm clipping on a badly scaled
//! quadratic.
//!
//! Bias correction makes the very first move exactly `lr` per coordinate
//! whatever the gradient scale, so x (gradient 6) and y (gradient 400)
//! both move by 0.1 on step 1.
//!
//!     cargo run --example adam

use mulrnn::tensor::{Matrix, ParamSet};
use mulrnn::train::{clip_global_norm, AdamConfig, AdamState};

/// `f(x, y) = x^2 + 100 y^2`
fn grads(p: &ParamSet) -> (f64, ParamSet) {
    let v = p.get("xy").expect("single parameter");
    let (x, y) = (v.get(0, 0), v.get(1, 0));
    let mut g = ParamSet::new();
    g.insert("xy", Matrix::column(&[2.0 * x, 200.0 * y]));
    (x * x + 100.0 * y * y, g)
}

fn main() -> mulrnn::Result<()> {
    let mut params = ParamSet::new();
    params.insert("xy", Matrix::column(&[3.0, -2.0]));
    let mut adam = AdamState::new(AdamConfig { lr: 0.1, ..Default::default() }, &params);

    for step in 1..=300 {
        let (f, mut g) = grads(&params);
        let (norm, clipped) = clip_global_norm(&mut g, 50.0);
        adam.step(&mut params, &g)?;
        if step <= 3 || step % 50 == 0 {
            let v = params.get("xy").expect("single parameter");
            println!(
                "step {step:>3}  f={f:<12.6e} |g|={norm:<10.3e}{}  x={:+.6} y={:+.6}",
                if clipped { " (clipped)" } else { "          " },
                v.get(0, 0),
                v.get(1, 0)
            );
        }
    }
    Ok(())
}
