// Error variants carry exact exponents; they are cold-path values.
#![allow(clippy::result_large_err)]

pub mod cli;
pub mod geometry;
pub mod laurent;
pub mod novikov;
pub mod qmcalc;
pub mod toric;
