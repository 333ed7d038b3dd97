//! Dense matrices, a tape-based reverse-mode differentiator, and the
//! finite-difference gradient checker used to validate every cell.

mod gradcheck;
mod matrix;
mod params;
mod rng;
mod tape;

pub use gradcheck::{grad_check, relative_error, GradCheckReport, ParamCheck};
pub use matrix::Matrix;
pub use params::{Bound, ParamSet};
pub use rng::Rng;
pub use tape::{sigmoid, Tape, Var};
