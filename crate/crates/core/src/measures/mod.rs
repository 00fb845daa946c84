//! Discrete laws and signed atomic measures over exact support coordinates.
//!
//! Support points are integer vectors over a [`FrequencyBasis`]; rational
//! generators are kept exact so that module membership (`γ ∈ ⟨X⟩`) is decided
//! without tolerances.

mod atomic;
mod basis;
mod law;
mod module;

pub use atomic::{convolve, total_variation, AtomicMeasure, SignedAtomicMeasure};
pub use basis::{Coords, FrequencyBasis, Generator, SupportPoint};
pub use law::{validate_law, DiscreteLaw, LatticeForm, RawLaw, MASS_SUM_TOL};
pub use module::{module_generator, to_lattice_form, ModuleDescription};

pub(crate) use atomic::same_basis;
pub(crate) use module::coordinate_lattice;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MeasureError {
    #[error("law has no atoms")]
    EmptyLaw,
    #[error("negative mass {mass} at {coords:?}")]
    NegativeMass { coords: Coords, mass: f64 },
    #[error("masses sum to {0}, not 1")]
    MassSumNotOne(f64),
    #[error("duplicate atom at {0:?}")]
    DuplicateAtom(Coords),
    #[error("weights must be finite")]
    NonFiniteWeight,
    #[error("coordinate vector has length {found}, basis has {expected} generators")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid basis: {0}")]
    InvalidBasis(&'static str),
    #[error("measures are defined over different bases")]
    BasisMismatch,
    #[error("support is not rational; declare a frequency basis instead")]
    IrrationalSupport,
    #[error("lattice form does not describe the support")]
    LatticeMismatch,
}
