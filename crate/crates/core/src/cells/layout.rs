//! Parameter layouts, closed-form counts and initialization.

use serde::{Deserialize, Serialize};

use super::kind::{CellDims, CellKind, CellOptions, MlstmForm};
use crate::tensor::{Matrix, ParamSet, Rng};

/// How `init_params` fills matrices.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum InitScheme {
    /// Uniform in `±sqrt(6 / (rows + cols))`; biases zero except the
    /// LSTM-family forget gate, which starts at `forget_bias`.
    Glorot { forget_bias: f64 },
    /// Every entry zero. Gives a uniform predictive distribution.
    Zeros,
}

impl Default for InitScheme {
    fn default() -> Self {
        InitScheme::Glorot { forget_bias: 1.0 }
    }
}

/// Declared `(name, rows, cols)` for every parameter of a cell, in a fixed
/// order.
pub fn layout(kind: CellKind, dims: CellDims, options: CellOptions) -> Vec<(String, usize, usize)> {
    let CellDims {
        input: v,
        hidden: n,
        intermediate: m,
    } = dims;
    let mut out: Vec<(String, usize, usize)> = Vec::new();
    let mut push = |name: String, r: usize, c: usize| out.push((name, r, c));

    match kind {
        CellKind::Rnn => {
            push("U".into(), n, v);
            push("W".into(), n, n);
            push("b".into(), n, 1);
        }
        CellKind::Trnn => {
            push("U".into(), n, v);
            for i in 0..v {
                push(format!("W[{i}]"), n, n);
            }
            push("b".into(), n, 1);
        }
        CellKind::Mrnn => {
            push("U".into(), n, v);
            push("V".into(), n, m);
            push("W_x".into(), m, v);
            push("W_h".into(), m, n);
            push("b".into(), n, 1);
        }
        CellKind::Lstm => {
            for g in ["i", "f", "o", "h"] {
                push(format!("U_{g}"), n, v);
                push(format!("W_{g}"), n, n);
                push(format!("b_{g}"), n, 1);
            }
        }
        CellKind::Mlstm => {
            push("W_x".into(), m, v);
            push("W_h".into(), m, n);
            match options.mlstm_form {
                MlstmForm::Text => {
                    for g in ["i", "f", "o", "h"] {
                        push(format!("U_{g}"), n, v);
                        push(format!("V_{g}"), n, m);
                        push(format!("b_{g}"), n, 1);
                    }
                }
                MlstmForm::Printed => {
                    for g in ["i", "f", "o"] {
                        push(format!("W_{g}"), n, n);
                        push(format!("V_{g}"), n, m);
                        push(format!("b_{g}"), n, 1);
                    }
                    push("U_h".into(), n, v);
                    push("V_h".into(), n, m);
                    push("b_h".into(), n, 1);
                }
            }
        }
        CellKind::Tmlstm => {
            for g in ["i", "f", "o", "h"] {
                push(format!("W_{g}x"), m, v);
                push(format!("W_{g}h"), m, n);
                push(format!("U_{g}"), n, v);
                push(format!("V_{g}"), n, m);
                push(format!("b_{g}"), n, 1);
            }
        }
        CellKind::Gru => {
            for g in ["z", "r", "h"] {
                push(format!("U_{g}"), n, v);
                push(format!("W_{g}"), n, n);
                push(format!("b_{g}"), n, 1);
            }
        }
        CellKind::Mgru => {
            push("W_x".into(), m, v);
            push("W_h".into(), m, n);
            push("U_z".into(), n, v);
            push("V_z".into(), n, m);
            push("b_z".into(), n, 1);
            // the reset gate filters m, so it lives in the intermediate space
            push("U_r".into(), m, v);
            push("V_r".into(), m, m);
            push("b_r".into(), m, 1);
            push("U_h".into(), n, v);
            push("V_h".into(), n, m);
            push("b_h".into(), n, 1);
        }
        CellKind::Tmgru => {
            for g in ["z", "r", "h"] {
                push(format!("W_{g}x"), m, v);
                push(format!("W_{g}h"), m, n);
                push(format!("U_{g}"), n, v);
                push(format!("V_{g}"), n, m);
                push(format!("b_{g}"), n, 1);
            }
        }
    }
    out
}

/// Closed-form parameter total for the default options. Biases included.
pub fn param_count(kind: CellKind, dims: CellDims) -> usize {
    param_count_with(kind, dims, CellOptions::default())
}

pub fn param_count_with(kind: CellKind, dims: CellDims, options: CellOptions) -> usize {
    let (v, n, m) = (dims.input, dims.hidden, dims.intermediate);
    // factorized intermediate-state pair, and one gate's input/readout/bias
    let factor = m * v + m * n;
    let gate_plain = n * v + n * n + n;
    let gate_mult = n * v + n * m + n;
    match kind {
        CellKind::Rnn => gate_plain,
        CellKind::Trnn => n * v + v * n * n + n,
        CellKind::Mrnn => gate_mult + factor,
        CellKind::Lstm => 4 * gate_plain,
        CellKind::Mlstm => match options.mlstm_form {
            MlstmForm::Text => factor + 4 * gate_mult,
            MlstmForm::Printed => factor + 3 * (n * n + n * m + n) + gate_mult,
        },
        CellKind::Tmlstm => 4 * (factor + gate_mult),
        CellKind::Gru => 3 * gate_plain,
        CellKind::Mgru => factor + 2 * gate_mult + (m * v + m * m + m),
        CellKind::Tmgru => 3 * (factor + gate_mult),
    }
}

/// Builds a full parameter set for `kind`. Matrices are drawn in layout
/// order, row-major, so a seed fixes the result bitwise.
pub fn init_params(
    kind: CellKind,
    dims: CellDims,
    options: CellOptions,
    rng: &mut Rng,
    scheme: InitScheme,
) -> ParamSet {
    let mut params = ParamSet::new();
    for (name, rows, cols) in layout(kind, dims, options) {
        let value = match scheme {
            InitScheme::Zeros => Matrix::zeros(rows, cols),
            InitScheme::Glorot { forget_bias } => {
                if is_bias(&name) {
                    let fill = if kind.has_memory_cell() && name == "b_f" {
                        forget_bias
                    } else {
                        0.0
                    };
                    Matrix::filled(rows, cols, fill)
                } else {
                    glorot(rows, cols, rng)
                }
            }
        };
        params.insert(name, value);
    }
    params
}

pub(crate) fn is_bias(name: &str) -> bool {
    name == "b" || name.starts_with("b_")
}

pub(crate) fn glorot(rows: usize, cols: usize, rng: &mut Rng) -> Matrix {
    let limit = (6.0 / (rows + cols) as f64).sqrt();
    let data = (0..rows * cols).map(|_| rng.uniform(-limit, limit)).collect();
    Matrix::from_vec(rows, cols, data).expect("sized by construction")
}
