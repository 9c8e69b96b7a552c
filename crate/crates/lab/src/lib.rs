//! Experiment harness for the inexact SOCP interior-point method: file
//! formats, instance sweeps, power-law fits and reports.

// `!(v > 0.0)` style guards deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cdf;
pub mod cli;
pub mod fit;
pub mod format;
pub mod report;
pub mod sweep;
