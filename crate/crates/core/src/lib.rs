//! Spectral representation of discrete probability laws.
//!
//! A discrete law whose characteristic function stays away from zero admits the
//! representation
//!
//! ```text
//! f(t) = exp{ itγ + Σ_u λ_u (e^{itu} − 1) }
//! ```
//!
//! where `γ` and every frequency `u` live in the Z-module generated by the
//! support, and `Σ |λ_u| < ∞`. The weights `λ_u` may be negative, in which case
//! the law is quasi-infinitely divisible without being infinitely divisible.
//!
//! The crate is `no_std` (it needs `alloc`) and is organised as:
//!
//! - [`measures`]: exact support coordinates, discrete laws, signed atomic
//!   measures, total variation and convolution.
//! - [`charfn`]: characteristic functions, the torus lift and a branch-and-bound
//!   certificate for separation from zero.
//! - [`spectral`]: distinguished logarithms and extraction of the triplet
//!   `(γ, {λ_u})`, mean motion, `γ_τ` and the spectral function `Λ`.
//! - [`calculus`]: compound exponentials, reconstruction, fractional convolution
//!   powers and the infinite-divisibility test.
//! - [`limits`]: total-variation distances and finite-prefix checkers for the
//!   convergence and compactness criteria.
//! - [`curves`]: plot-ready samples of `f` with a continuous argument.
#![no_std]
#![forbid(unsafe_code)]
// `!(x > 0.0)` style checks are deliberate: they reject NaN too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod calculus;
pub mod charfn;
pub mod curves;
pub mod fft;
pub mod limits;
pub mod measures;
pub mod spectral;

mod math;

pub use num_complex::Complex64;
pub use num_rational::Ratio;

pub use calculus::{
    compound_exp, conv_power, is_infinitely_divisible, reconstruct_law, CalculusError,
    Classification, CompoundExp, ConvPower, ExpSeriesParams, Reconstruction, Shift,
};
pub use charfn::{
    certify_separation, cf_eval, dominant_mass_bound, torus_lift, SeparationCertificate,
    SeparationParams, TorusFunction, Verdict, ZeroKind,
};
pub use curves::{emit_curves, CurveRow};
pub use limits::{
    check_convergence, check_relative_compactness, check_stochastic_compactness,
    eventually_in_ds_probe, tv_distance, ConvergenceVerdict, FamilySpectra, LawSequence,
    LimitsError, TrendParams,
};
pub use measures::{
    convolve, module_generator, to_lattice_form, total_variation, validate_law, AtomicMeasure,
    Coords, DiscreteLaw, FrequencyBasis, Generator, LatticeForm, MeasureError, ModuleDescription,
    RawLaw, SignedAtomicMeasure, SupportPoint,
};
pub use spectral::{
    distinguished_log, gamma_tau, levy_spectral_function, mean_motion, triplet_lattice,
    triplet_multibasis, QuasiTriplet, SpectralError, SpectralFunction, TripletParams,
};
