// Negated comparisons are used on purpose so that NaN fails range checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod cli;
pub mod distributions;
pub mod error;
pub mod estimators;
pub mod montecarlo;
pub mod quadrature;
