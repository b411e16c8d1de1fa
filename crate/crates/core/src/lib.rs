//! Learning a minimum-error measurement for an unlabeled ensemble of qubits
//! drawn from two unknown pure states.
//!
//! The learners only touch the ensemble through destructive projective
//! measurements ([`ensemble::QubitSource`]); the Helstrom oracle and the
//! evaluator see the hidden ground truth.

// `!(x > eps)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bloch;
pub mod classify;
pub mod constz;
pub mod decomposition;
pub mod ensemble;
pub mod equal_prior;
pub mod error;
pub mod experiment;
pub mod helstrom;

pub use bloch::{BlochVec, PlanarAngle, PlaneTag};
pub use ensemble::{Case, EnsembleSpec, Priors, QubitSource, RngStream, TrialStreams};
pub use error::{Error, Result};
