// NaN has to fail range checks, hence `!(x > 0.0)` forms
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod calibration;
pub mod channels;
pub mod circuit;
pub mod codes;
pub mod error;
pub mod matrix;
pub mod simulator;
pub mod transpiler;

pub use error::{Error, Result};
