//! Canonical macroscopic QED in one spatial dimension: dispersive,
//! absorbing magnetodielectric media coupled to reservoir oscillators.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod green1d;
pub mod materials;
pub mod modes;
pub mod pvquad;
pub mod tdsim;
pub mod units;
pub mod verify;

pub use units::{UnitsKind, UnitsSystem};
