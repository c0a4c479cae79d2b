//! Scalar Green function of `−∂_z(κ ∂_z g) − (ω²/c²) ε g = δ(z − z′)` for
//! layered media with outgoing-wave boundaries.
//!
//! The field is polarized along `x` and varies along `z`, so the curl-curl
//! operator reduces to `−∂_z(κ ∂_z ·)`. The discrete delta is `1/h` at one
//! node.

mod fields;
mod grid;
mod operator;
mod solve;
mod stack;
pub mod transfer;
mod tridiag;

pub use fields::{field_from_current, magnetic_from_electric, plane_wave_amplitudes, reflection_from_column};
pub use grid::Grid1D;
pub use operator::{DiscreteOperator, Exterior};
pub use solve::{
    homogeneous_green, medium_wavenumber, solve_green, solve_green_column, solve_operator, GreenSolution, SolverInfo,
};
pub use stack::{Layer, LayerStack};
pub use tridiag::TridiagLu;

use crate::materials::MaterialError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GreenError {
    #[error("invalid layer stack: {0}")]
    InvalidStack(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid [{start}, {end}] must place its end nodes inside the half-spaces beyond [{first}, {last}]")]
    GridDoesNotCoverStack { start: f64, end: f64, first: f64, last: f64 },
    #[error("{nodes_per_wavelength:.2} nodes per wavelength, at least {required} required")]
    UnderResolved { nodes_per_wavelength: f64, required: f64 },
    #[error("outgoing branch undefined for k0={k0}, h={h}")]
    BranchAmbiguity { k0: f64, h: f64 },
    #[error("discrete operator is singular (zero pivot at row {row})")]
    SingularOperator { row: usize },
    #[error("expected {expected} grid values, got {got}")]
    GridMismatch { expected: usize, got: usize },
    #[error("frequency must be positive, got {0}")]
    NonPositiveFrequency(f64),
    #[error(transparent)]
    Material(#[from] MaterialError),
}
