use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The recurrent architectures this crate knows how to build.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellKind {
    Rnn,
    Trnn,
    Mrnn,
    Lstm,
    Mlstm,
    Tmlstm,
    Gru,
    Mgru,
    Tmgru,
}

impl CellKind {
    pub const ALL: [CellKind; 9] = [
        CellKind::Rnn,
        CellKind::Trnn,
        CellKind::Mrnn,
        CellKind::Lstm,
        CellKind::Mlstm,
        CellKind::Tmlstm,
        CellKind::Gru,
        CellKind::Mgru,
        CellKind::Tmgru,
    ];

    /// The multiplicative kinds compared under an equal parameter budget.
    pub const MULTIPLICATIVE: [CellKind; 5] = [
        CellKind::Mrnn,
        CellKind::Mlstm,
        CellKind::Tmlstm,
        CellKind::Mgru,
        CellKind::Tmgru,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CellKind::Rnn => "rnn",
            CellKind::Trnn => "trnn",
            CellKind::Mrnn => "mrnn",
            CellKind::Lstm => "lstm",
            CellKind::Mlstm => "mlstm",
            CellKind::Tmlstm => "tmlstm",
            CellKind::Gru => "gru",
            CellKind::Mgru => "mgru",
            CellKind::Tmgru => "tmgru",
        }
    }

    /// Kinds that carry a memory cell `c` next to `h`.
    pub fn has_memory_cell(self) -> bool {
        matches!(self, CellKind::Lstm | CellKind::Mlstm | CellKind::Tmlstm)
    }

    /// Kinds whose layout depends on the intermediate dimension.
    pub fn uses_intermediate(self) -> bool {
        matches!(
            self,
            CellKind::Mrnn | CellKind::Mlstm | CellKind::Tmlstm | CellKind::Mgru | CellKind::Tmgru
        )
    }

    pub fn valid_names() -> String {
        CellKind::ALL.map(CellKind::name).join(", ")
    }
}

impl fmt::Display for CellKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CellKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        CellKind::ALL
            .into_iter()
            .find(|k| k.name() == lower)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown cell kind {s:?}; valid kinds: {}",
                    CellKind::valid_names()
                ))
            })
    }
}

/// Input width `V`, hidden width `n`, intermediate width `m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CellDims {
    pub input: usize,
    pub hidden: usize,
    pub intermediate: usize,
}

impl CellDims {
    pub fn new(input: usize, hidden: usize, intermediate: usize) -> Result<Self> {
        let dims = CellDims {
            input,
            hidden,
            intermediate,
        };
        dims.validate()?;
        Ok(dims)
    }

    pub fn validate(&self) -> Result<()> {
        if self.input == 0 || self.hidden == 0 || self.intermediate == 0 {
            return Err(Error::Config(format!(
                "cell dimensions must be positive, got V={} n={} m={}",
                self.input, self.hidden, self.intermediate
            )));
        }
        Ok(())
    }
}

/// Which reading of the mLSTM gate equations to build.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MlstmForm {
    /// Gates read `U_g x + V_g m`; the intermediate state replaces `h_{t-1}`.
    #[default]
    Text,
    /// Gates read `W_g h_{t-1} + V_g m` with full hidden-to-hidden matrices.
    Printed,
}

/// Squashing applied to the memory cell before the output gate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LstmOutput {
    #[default]
    Sigmoid,
    Tanh,
}

impl FromStr for MlstmForm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "text" => Ok(MlstmForm::Text),
            "printed" => Ok(MlstmForm::Printed),
            other => Err(Error::Config(format!(
                "unknown mlstm form {other:?}; expected text or printed"
            ))),
        }
    }
}

impl FromStr for LstmOutput {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "sigmoid" => Ok(LstmOutput::Sigmoid),
            "tanh" => Ok(LstmOutput::Tanh),
            other => Err(Error::Config(format!(
                "unknown lstm output {other:?}; expected sigmoid or tanh"
            ))),
        }
    }
}

impl fmt::Display for MlstmForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MlstmForm::Text => "text",
            MlstmForm::Printed => "printed",
        })
    }
}

impl fmt::Display for LstmOutput {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LstmOutput::Sigmoid => "sigmoid",
            LstmOutput::Tanh => "tanh",
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CellOptions {
    pub mlstm_form: MlstmForm,
    pub lstm_output: LstmOutput,
}
