//! Helpers shared by several integration-test targets.
#![allow(dead_code)]

use mulrnn::cells::{Cell, CellDims, CellKind, CellState, InitScheme};
use mulrnn::tensor::{Matrix, ParamSet, Rng};

pub fn random_matrix(rows: usize, cols: usize, rng: &mut Rng) -> Matrix {
    Matrix::from_vec(rows, cols, (0..rows * cols).map(|_| rng.uniform(-1.0, 1.0)).collect()).unwrap()
}

/// `V diag(W_x[:, i]) W_h`: the transition an mRNN applies for input `i`.
fn slice(v: &Matrix, w_x: &Matrix, w_h: &Matrix, i: usize) -> Matrix {
    let mut scaled = w_h.clone();
    for r in 0..scaled.rows() {
        let k = w_x.get(r, i);
        for c in 0..scaled.cols() {
            scaled.set(r, c, scaled.get(r, c) * k);
        }
    }
    v.matmul(&scaled).unwrap()
}

/// Builds the explicit tRNN whose slices are the mRNN's factorized
/// transitions, and checks the two cells agree step for step.
pub fn factorization_trial(seed: u64) -> f64 {
    let mut rng = Rng::new(seed);
    let (vocab, n, m) = (2 + rng.below(8), 1 + rng.below(10), 1 + rng.below(10));
    let batch = 1 + rng.below(4);
    let dims = CellDims::new(vocab, n, m).unwrap();
    let mrnn = Cell::new(CellKind::Mrnn, dims);
    let mut p = mrnn.init_params(&mut rng, InitScheme::default());
    p.insert("b", random_matrix(n, 1, &mut rng));

    let trnn = Cell::new(CellKind::Trnn, dims);
    let mut t = ParamSet::new();
    t.insert("U", p.get("U").unwrap().clone());
    for i in 0..vocab {
        t.insert(
            format!("W[{i}]"),
            slice(p.get("V").unwrap(), p.get("W_x").unwrap(), p.get("W_h").unwrap(), i),
        );
    }
    t.insert("b", p.get("b").unwrap().clone());
    trnn.check_params(&t).unwrap();

    let mut state = CellState {
        h: random_matrix(n, batch, &mut rng),
        c: None,
    };
    let mut worst: f64 = 0.0;
    for _ in 0..3 {
        let ids: Vec<usize> = (0..batch).map(|_| rng.below(vocab)).collect();
        let x = Matrix::one_hot(&ids, vocab).unwrap();
        let a = mrnn.forward(&p, &state, &x).unwrap();
        let b = trnn.forward(&t, &state, &x).unwrap();
        worst = worst.max(a.h.max_abs_diff(&b.h));
        state = a;
    }
    worst
}

/// tmLSTM with every gate's factor pair set to the shared one reduces to
/// the mLSTM.
pub fn reduction_trial(seed: u64) -> f64 {
    let mut rng = Rng::new(seed);
    let (vocab, n, m) = (2 + rng.below(8), 1 + rng.below(10), 1 + rng.below(10));
    let batch = 1 + rng.below(4);
    let dims = CellDims::new(vocab, n, m).unwrap();
    let mlstm = Cell::new(CellKind::Mlstm, dims);
    let p = mlstm.init_params(&mut rng, InitScheme::default());

    let tmlstm = Cell::new(CellKind::Tmlstm, dims);
    let mut t = ParamSet::new();
    for (name, _, _) in tmlstm.layout() {
        let source = match name.as_str() {
            n if n.starts_with("W_") && n.ends_with('x') => "W_x".to_string(),
            n if n.starts_with("W_") && n.ends_with('h') && n.len() == 4 => "W_h".to_string(),
            n => n.to_string(),
        };
        t.insert(name, p.get(&source).unwrap().clone());
    }
    tmlstm.check_params(&t).unwrap();

    let state = CellState {
        h: random_matrix(n, batch, &mut rng),
        c: Some(random_matrix(n, batch, &mut rng)),
    };
    let ids: Vec<usize> = (0..batch).map(|_| rng.below(vocab)).collect();
    let x = Matrix::one_hot(&ids, vocab).unwrap();
    let a = mlstm.forward(&p, &state, &x).unwrap();
    let b = tmlstm.forward(&t, &state, &x).unwrap();
    a.h.max_abs_diff(&b.h).max(a.c.unwrap().max_abs_diff(&b.c.unwrap()))
}
