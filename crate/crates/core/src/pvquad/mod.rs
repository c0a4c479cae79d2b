//! Frequency quadrature: principal values, the pole split of
//! `1/(ω² − (ω′+i0⁺)²)`, and exact pole-product identities.

mod gauss;
mod grid;
mod identities;
mod principal;
mod split;

pub use gauss::gauss_legendre;
pub use grid::FrequencyGrid;
pub use identities::{pole_identity_a, pole_identity_b, PoleIdentity};
pub use principal::{pv_integral, pv_integral_on_grid, pv_integral_sampled};
pub use split::{sokhotski_split, split_integral, DeltaTerm, PoleSplit};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PvError {
    #[error("invalid frequency grid: {0}")]
    InvalidGrid(String),
    #[error("expected {expected} samples, got {got}")]
    SampleMismatch { expected: usize, got: usize },
    #[error("pole {pole} outside integration interval [{lower}, {upper}]")]
    PoleOutsideInterval { pole: f64, lower: f64, upper: f64 },
    #[error("pole {pole} within one node spacing of the boundary of [{lower}, {upper}]")]
    PoleOnBoundary { pole: f64, lower: f64, upper: f64 },
    #[error("|ω − ω′| = |{omega} − {omega_prime}| below floor {floor}")]
    DegeneratePair { omega: f64, omega_prime: f64, floor: f64 },
}
