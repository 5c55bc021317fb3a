//! Transverse mode shaping by Rydberg excitation in long linear ion chains,
//! and the parallel phase gates it enables.
//!
//! Modules follow the computational pipeline:
//! [`units`] → [`equilibrium`] → [`modes`] → [`gate`] → [`fidelity`],
//! with [`protocol`] composing them into fidelity scans and [`dressing`]
//! covering microwave-dressed Rydberg excitation.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dressing;
pub mod equilibrium;
pub mod error;
pub mod fidelity;
pub mod gate;
pub mod ode;
pub mod protocol;
pub mod scenario;
pub mod units;
pub mod modes;

pub use error::{Error, Result};
