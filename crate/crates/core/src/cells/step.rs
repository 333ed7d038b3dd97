//! One-step transitions for every cell kind.
//!
//! All functions take parameters already bound to the tape, the previous
//! state as tape variables, and an input column block `x` of shape `V x B`.

use super::kind::{CellKind, CellOptions, LstmOutput, MlstmForm};
use crate::error::Result;
use crate::tensor::{Bound, Matrix, Tape, Var};

/// Detached recurrent state carried between windows.
#[derive(Clone, Debug, PartialEq)]
pub struct CellState {
    pub h: Matrix,
    pub c: Option<Matrix>,
}

impl CellState {
    /// All-zero state for `batch` columns.
    pub fn zeros(kind: CellKind, hidden: usize, batch: usize) -> Self {
        CellState {
            h: Matrix::zeros(hidden, batch),
            c: kind.has_memory_cell().then(|| Matrix::zeros(hidden, batch)),
        }
    }

    /// Places the state on the tape as constants (no gradient flows back
    /// past a window boundary).
    pub fn bind(&self, tape: &mut Tape) -> StateVars {
        StateVars {
            h: tape.constant(self.h.clone()),
            c: self.c.as_ref().map(|c| tape.constant(c.clone())),
        }
    }

    pub fn batch(&self) -> usize {
        self.h.cols()
    }
}

/// Recurrent state living on a tape.
#[derive(Clone, Copy, Debug)]
pub struct StateVars {
    pub h: Var,
    pub c: Option<Var>,
}

impl StateVars {
    pub fn detach(&self, tape: &Tape) -> CellState {
        CellState {
            h: tape.value(self.h).clone(),
            c: self.c.map(|c| tape.value(c).clone()),
        }
    }

    fn memory(&self) -> Result<Var> {
        self.c.ok_or_else(|| {
            crate::Error::Contract("LSTM-family step needs a memory cell in the state".into())
        })
    }
}

/// `(W_x x) * (W_h h_prev)`.
pub fn intermediate_state(tape: &mut Tape, w_x: Var, w_h: Var, x: Var, h_prev: Var) -> Result<Var> {
    let a = tape.matmul(w_x, x)?;
    let b = tape.matmul(w_h, h_prev)?;
    tape.hadamard(a, b)
}

/// Sum of `P_k * input_k` over the named terms plus a bias column.
fn affine(tape: &mut Tape, p: &Bound, terms: &[(&str, Var)], bias: &str) -> Result<Var> {
    let mut acc: Option<Var> = None;
    for &(name, input) in terms {
        let term = tape.matmul(p.var(name)?, input)?;
        acc = Some(match acc {
            None => term,
            Some(prev) => tape.add(prev, term)?,
        });
    }
    let acc = acc.expect("at least one term");
    tape.add_bias(acc, p.var(bias)?)
}

fn gate(tape: &mut Tape, p: &Bound, terms: &[(&str, Var)], bias: &str) -> Result<Var> {
    let pre = affine(tape, p, terms, bias)?;
    Ok(tape.sigmoid(pre))
}

/// `c = f*c_prev + i*tanh(cand)`, `h = o * act(c)`.
fn lstm_tail(
    tape: &mut Tape,
    c_prev: Var,
    (i, f, o): (Var, Var, Var),
    candidate: Var,
    output: LstmOutput,
) -> Result<StateVars> {
    let keep = tape.hadamard(f, c_prev)?;
    let squashed = tape.tanh(candidate);
    let write = tape.hadamard(i, squashed)?;
    let c = tape.add(keep, write)?;
    let act = match output {
        LstmOutput::Sigmoid => tape.sigmoid(c),
        LstmOutput::Tanh => tape.tanh(c),
    };
    let h = tape.hadamard(o, act)?;
    Ok(StateVars { h, c: Some(c) })
}

/// `h = (1 - z) * h_prev + z * tanh(cand)`.
fn gru_tail(tape: &mut Tape, h_prev: Var, z: Var, candidate: Var) -> Result<StateVars> {
    let keep_w = tape.one_minus(z);
    let keep = tape.hadamard(keep_w, h_prev)?;
    let squashed = tape.tanh(candidate);
    let write = tape.hadamard(z, squashed)?;
    let h = tape.add(keep, write)?;
    Ok(StateVars { h, c: None })
}

pub fn rnn_step(tape: &mut Tape, p: &Bound, s: &StateVars, x: Var) -> Result<StateVars> {
    let pre = affine(tape, p, &[("U", x), ("W", s.h)], "b")?;
    Ok(StateVars {
        h: tape.tanh(pre),
        c: None,
    })
}

/// Tensor RNN: the input blends the slices `W[i]` into one transition
/// matrix per column, `sum_i x_i W[i]`, which then multiplies `h_prev`.
pub fn trnn_step(tape: &mut Tape, p: &Bound, s: &StateVars, x: Var) -> Result<StateVars> {
    let (vocab, _) = tape.shape(x);
    let (hidden, _) = tape.shape(s.h);
    let ones = tape.constant(Matrix::filled(hidden, 1, 1.0));
    let mut acc = tape.matmul(p.var("U")?, x)?;
    for i in 0..vocab {
        let mut sel = Matrix::zeros(1, vocab);
        sel.set(0, i, 1.0);
        let sel = tape.constant(sel);
        // row i of x, spread over the hidden rows
        let weight_row = tape.matmul(sel, x)?;
        let weight = tape.matmul(ones, weight_row)?;
        let transit = tape.matmul(p.var(&format!("W[{i}]"))?, s.h)?;
        let term = tape.hadamard(weight, transit)?;
        acc = tape.add(acc, term)?;
    }
    let pre = tape.add_bias(acc, p.var("b")?)?;
    Ok(StateVars {
        h: tape.tanh(pre),
        c: None,
    })
}

pub fn mrnn_step(tape: &mut Tape, p: &Bound, s: &StateVars, x: Var) -> Result<StateVars> {
    let m = intermediate_state(tape, p.var("W_x")?, p.var("W_h")?, x, s.h)?;
    let pre = affine(tape, p, &[("U", x), ("V", m)], "b")?;
    Ok(StateVars {
        h: tape.tanh(pre),
        c: None,
    })
}

pub fn lstm_step(
    tape: &mut Tape,
    p: &Bound,
    s: &StateVars,
    x: Var,
    output: LstmOutput,
) -> Result<StateVars> {
    let h = s.h;
    let i = gate(tape, p, &[("U_i", x), ("W_i", h)], "b_i")?;
    let f = gate(tape, p, &[("U_f", x), ("W_f", h)], "b_f")?;
    let o = gate(tape, p, &[("U_o", x), ("W_o", h)], "b_o")?;
    let cand = affine(tape, p, &[("U_h", x), ("W_h", h)], "b_h")?;
    lstm_tail(tape, s.memory()?, (i, f, o), cand, output)
}

pub fn mlstm_step(
    tape: &mut Tape,
    p: &Bound,
    s: &StateVars,
    x: Var,
    options: CellOptions,
) -> Result<StateVars> {
    let m = intermediate_state(tape, p.var("W_x")?, p.var("W_h")?, x, s.h)?;
    let (i, f, o) = match options.mlstm_form {
        MlstmForm::Text => (
            gate(tape, p, &[("U_i", x), ("V_i", m)], "b_i")?,
            gate(tape, p, &[("U_f", x), ("V_f", m)], "b_f")?,
            gate(tape, p, &[("U_o", x), ("V_o", m)], "b_o")?,
        ),
        MlstmForm::Printed => (
            gate(tape, p, &[("W_i", s.h), ("V_i", m)], "b_i")?,
            gate(tape, p, &[("W_f", s.h), ("V_f", m)], "b_f")?,
            gate(tape, p, &[("W_o", s.h), ("V_o", m)], "b_o")?,
        ),
    };
    let cand = affine(tape, p, &[("U_h", x), ("V_h", m)], "b_h")?;
    lstm_tail(tape, s.memory()?, (i, f, o), cand, options.lstm_output)
}

pub fn tmlstm_step(
    tape: &mut Tape,
    p: &Bound,
    s: &StateVars,
    x: Var,
    output: LstmOutput,
) -> Result<StateVars> {
    let mut own = |g: &str| -> Result<Var> {
        intermediate_state(tape, p.var(&format!("W_{g}x"))?, p.var(&format!("W_{g}h"))?, x, s.h)
    };
    let (m_i, m_f, m_o, m_h) = (own("i")?, own("f")?, own("o")?, own("h")?);
    let i = gate(tape, p, &[("U_i", x), ("V_i", m_i)], "b_i")?;
    let f = gate(tape, p, &[("U_f", x), ("V_f", m_f)], "b_f")?;
    let o = gate(tape, p, &[("U_o", x), ("V_o", m_o)], "b_o")?;
    let cand = affine(tape, p, &[("U_h", x), ("V_h", m_h)], "b_h")?;
    lstm_tail(tape, s.memory()?, (i, f, o), cand, output)
}

pub fn gru_step(tape: &mut Tape, p: &Bound, s: &StateVars, x: Var) -> Result<StateVars> {
    let h = s.h;
    let z = gate(tape, p, &[("U_z", x), ("W_z", h)], "b_z")?;
    let r = gate(tape, p, &[("U_r", x), ("W_r", h)], "b_r")?;
    let reset = tape.hadamard(r, h)?;
    let cand = affine(tape, p, &[("U_h", x), ("W_h", reset)], "b_h")?;
    gru_tail(tape, h, z, cand)
}

/// GRU with a separate factorization per gate; the reset gate acts on
/// `h_prev` inside the candidate's intermediate state.
pub fn tmgru_step(tape: &mut Tape, p: &Bound, s: &StateVars, x: Var) -> Result<StateVars> {
    let h = s.h;
    let m_z = intermediate_state(tape, p.var("W_zx")?, p.var("W_zh")?, x, h)?;
    let m_r = intermediate_state(tape, p.var("W_rx")?, p.var("W_rh")?, x, h)?;
    let z = gate(tape, p, &[("U_z", x), ("V_z", m_z)], "b_z")?;
    let r = gate(tape, p, &[("U_r", x), ("V_r", m_r)], "b_r")?;
    let reset = tape.hadamard(r, h)?;
    let m_h = intermediate_state(tape, p.var("W_hx")?, p.var("W_hh")?, x, reset)?;
    let cand = affine(tape, p, &[("U_h", x), ("V_h", m_h)], "b_h")?;
    gru_tail(tape, h, z, cand)
}

/// GRU sharing one intermediate state; the reset gate filters `m`.
pub fn mgru_step(tape: &mut Tape, p: &Bound, s: &StateVars, x: Var) -> Result<StateVars> {
    let h = s.h;
    let m = intermediate_state(tape, p.var("W_x")?, p.var("W_h")?, x, h)?;
    let z = gate(tape, p, &[("U_z", x), ("V_z", m)], "b_z")?;
    let r = gate(tape, p, &[("U_r", x), ("V_r", m)], "b_r")?;
    let filtered = tape.hadamard(r, m)?;
    let cand = affine(tape, p, &[("U_h", x), ("V_h", filtered)], "b_h")?;
    gru_tail(tape, h, z, cand)
}

/// Dispatches to the step function for `kind`.
pub fn step(
    kind: CellKind,
    options: CellOptions,
    tape: &mut Tape,
    p: &Bound,
    s: &StateVars,
    x: Var,
) -> Result<StateVars> {
    match kind {
        CellKind::Rnn => rnn_step(tape, p, s, x),
        CellKind::Trnn => trnn_step(tape, p, s, x),
        CellKind::Mrnn => mrnn_step(tape, p, s, x),
        CellKind::Lstm => lstm_step(tape, p, s, x, options.lstm_output),
        CellKind::Mlstm => mlstm_step(tape, p, s, x, options),
        CellKind::Tmlstm => tmlstm_step(tape, p, s, x, options.lstm_output),
        CellKind::Gru => gru_step(tape, p, s, x),
        CellKind::Mgru => mgru_step(tape, p, s, x),
        CellKind::Tmgru => tmgru_step(tape, p, s, x),
    }
}
