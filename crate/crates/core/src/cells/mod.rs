//! The recurrent cell family: plain, tensor and multiplicative RNNs, and the
//! LSTM/GRU variants with shared or per-gate intermediate states.

mod kind;
mod layout;
mod step;

use serde::{Deserialize, Serialize};

pub use kind::{CellDims, CellKind, CellOptions, LstmOutput, MlstmForm};
pub use layout::{init_params, layout, param_count, param_count_with, InitScheme};
pub(crate) use layout::glorot;
pub use step::{
    gru_step, intermediate_state, lstm_step, mgru_step, mlstm_step, mrnn_step, rnn_step, step,
    tmgru_step, tmlstm_step, trnn_step, CellState, StateVars,
};

use crate::error::{Error, Result};
use crate::tensor::{Bound, Matrix, ParamSet, Rng, Tape, Var};

/// A cell kind fixed to concrete dimensions and options.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cell {
    pub kind: CellKind,
    pub dims: CellDims,
    pub options: CellOptions,
}

impl Cell {
    pub fn new(kind: CellKind, dims: CellDims) -> Self {
        Cell {
            kind,
            dims,
            options: CellOptions::default(),
        }
    }

    pub fn with_options(mut self, options: CellOptions) -> Self {
        self.options = options;
        self
    }

    pub fn layout(&self) -> Vec<(String, usize, usize)> {
        layout(self.kind, self.dims, self.options)
    }

    pub fn param_count(&self) -> usize {
        param_count_with(self.kind, self.dims, self.options)
    }

    pub fn init_params(&self, rng: &mut Rng, scheme: InitScheme) -> ParamSet {
        init_params(self.kind, self.dims, self.options, rng, scheme)
    }

    pub fn zero_state(&self, batch: usize) -> CellState {
        CellState::zeros(self.kind, self.dims.hidden, batch)
    }

    pub fn step(&self, tape: &mut Tape, params: &Bound, state: &StateVars, x: Var) -> Result<StateVars> {
        step(self.kind, self.options, tape, params, state, x)
    }

    /// One step outside of any gradient computation.
    pub fn forward(&self, params: &ParamSet, state: &CellState, x: &Matrix) -> Result<CellState> {
        let mut tape = Tape::new();
        let bound = params.bind(&mut tape);
        let s = state.bind(&mut tape);
        let xv = tape.constant(x.clone());
        Ok(self.step(&mut tape, &bound, &s, xv)?.detach(&tape))
    }

    /// Checks that `params` holds exactly the declared names and shapes.
    pub fn check_params(&self, params: &ParamSet) -> Result<()> {
        let declared = self.layout();
        for (name, rows, cols) in &declared {
            let m = params.require(name)?;
            if m.shape() != (*rows, *cols) {
                return Err(Error::Shape {
                    op: "cell parameter",
                    left: (*rows, *cols),
                    right: m.shape(),
                });
            }
        }
        if params.len() != declared.len() {
            let extra: Vec<&str> = params
                .names()
                .filter(|n| !declared.iter().any(|(d, _, _)| d == n))
                .collect();
            return Err(Error::Contract(format!("unexpected parameters {extra:?}")));
        }
        Ok(())
    }
}
