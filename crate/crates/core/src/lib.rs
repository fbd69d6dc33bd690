//! Coupling-based estimators of transport coefficients for perturbed
//! overdamped Langevin dynamics.
//!
//! The reference dynamics `dX = b(X) dt + sqrt(2/β) dW` is perturbed by a
//! non-gradient forcing `η F`. The transport coefficient of an observable `R`
//! is the derivative at `η = 0` of its steady-state average. Three estimator
//! families are provided:
//!
//! - standard NEMD: simulate the perturbed chain alone and divide by `η`;
//! - synchronous coupling: drive the perturbed and reference chains with the
//!   same Gaussian increments and average `(R(X) - R(Y)) / η`;
//! - sticky coupling: a maximal (reflection) coupling of the two
//!   Euler–Maruyama kernels which glues the chains together exactly.
//!
//! A hybrid kernel switches between the last two depending on local
//! contractivity of the drift.

// `!(x > 0.0)` is deliberate: it rejects NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checks;
pub mod coupling;
pub mod dynamics;
pub mod error;
pub mod estimators;
pub mod noise;
pub mod oracles;

pub use coupling::{Branch, CoupledState, CouplingKind, CouplingNoise, StickyStepReport};
pub use dynamics::{Constants, Forcing, ModelSpec, Observable, Potential, SimParams};
pub use error::{Error, Result};
pub use estimators::{ExperimentResult, ReplicaRecord, TrajectoryEstimate};
