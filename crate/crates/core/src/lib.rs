// `!(x > 0.0)` is used on purpose so that NaN takes the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli_io;
pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod flowmap;
pub mod greens;
pub mod grid;
pub mod quadrature;
pub mod scenarios;
