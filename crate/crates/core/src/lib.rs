//! Inexact primal-dual interior-point method for second-order cone programs.
//!
//! The crate is `no_std` (it only needs `alloc`). Enable the `std` feature to
//! let `nalgebra` use its blocked matrix-multiplication kernels.
//!
//! Layout:
//! * [`jordan`]: Euclidean Jordan algebra over products of Lorentz cones.
//! * [`socp`]: problem instances, iterates, duality gap and central-path distance.
//! * [`newton`]: assembly and (exact or noisy) solution of the Newton system,
//!   plus the condition number and block-encoding normalization of its matrix.
//! * [`ipm`]: the short-step interior-point loop with per-iteration invariant checks.
//! * [`svm`]: soft-margin SVM instances and their reduction to SOCP.
#![cfg_attr(not(feature = "std"), no_std)]
// `!(v > 0.0)` style guards deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

mod error;
pub mod ipm;
pub mod jordan;
pub mod linalg;
pub(crate) mod math;
pub mod newton;
pub mod socp;
pub mod svm;

pub use error::{Error, Result};
pub use ipm::{IpmConfig, IterationRecord, NoiseMode, SolveTrace};
pub use jordan::{BlockVector, ConeMembership, ConeStructure};
pub use newton::{NewtonSystem, SolveReport};
pub use socp::{Iterate, SocpInstance};
pub use svm::{Classifier, SvmDataset};
