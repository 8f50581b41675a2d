// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certify;
pub mod cli;
pub mod error;
pub mod grid;
pub mod lp;
pub mod particles;
pub mod potential;
pub mod recovery;
pub mod relaxation;
pub mod spectral;
pub mod sweep;
pub mod threedelta;

pub use error::{Error, Result};
pub use grid::Grid;
