//! The representation `f(t) = exp{itγ + Σ_u λ_u (e^{itu} − 1)}`.
//!
//! Extraction works on the reduced torus of the law (a circle for lattice
//! laws): sample the trigonometric polynomial on a power-of-two grid, unwrap
//! its phase to get the winding numbers (the integer coordinates of `γ`), and
//! read `λ` off the discrete Fourier coefficients of the periodic remainder of
//! the logarithm. The grid is doubled until the coefficient mass near the
//! Nyquist band and the reconstruction residual are both negligible.

mod extract;
mod unwrap;

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::charfn::SeparationParams;
use crate::math::cis;
use crate::measures::{Coords, DiscreteLaw, FrequencyBasis, MeasureError, RawLaw};

pub use extract::{triplet_lattice, triplet_multibasis};
pub use unwrap::{continuous_arg, distinguished_log, ArgTracker, STEP_GUARD, ZERO_TOL};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpectralError {
    #[error("characteristic function is not separated from zero (minimum {modulus:e})")]
    NotSeparated { modulus: f64 },
    #[error("separation could not be decided (best infimum estimate {best_inf_estimate:e})")]
    SeparationUndecided { best_inf_estimate: f64 },
    #[error("grid refinement did not converge at N = {grid}: aliasing {aliasing:e}, residual {residual:e}")]
    NonConvergent { grid: usize, aliasing: f64, residual: f64 },
    #[error("phase jump {jump} at sample {index} is too large; refine the path")]
    StepTooCoarse { index: usize, jump: f64 },
    #[error("path passes through a zero (|f| = {modulus:e} at sample {index})")]
    ZeroOnPath { index: usize, modulus: f64 },
    #[error("path must start at the value 1")]
    FirstValueNotOne,
    #[error("tau must be positive")]
    NonpositiveTau,
    #[error("law carries no lattice form")]
    MissingLatticeForm,
    #[error("zero frequency cannot carry a spectral weight")]
    ZeroFrequency,
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

/// How a lattice triplet indexes its data: `γ = offset + span·winding`,
/// frequencies `u = span·k`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeIndexing {
    pub offset_coords: Coords,
    pub span_coords: Coords,
    pub offset: f64,
    pub span: f64,
    pub winding: i64,
}

/// Numerical record of a triplet extraction.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtractionDiagnostics {
    /// Grid points per axis of the accepted attempt.
    pub grid: usize,
    /// Dimension of the torus the extraction ran on.
    pub rank: usize,
    pub winding: Vec<i64>,
    pub max_phase_jump: f64,
    /// Coefficient mass in the outer quarter of the frequency window.
    pub aliasing_mass: f64,
    /// Mass of coefficients below the drop threshold.
    pub dropped_mass: f64,
    /// ℓ1 distance between the grid reconstruction and the input masses.
    pub residual: f64,
    /// Largest imaginary part among retained coefficients.
    pub max_imag: f64,
    /// Certified lower bound for `|f|`.
    pub separation_mu: f64,
}

/// The pair `(γ, {λ_u})` over a frequency basis.
#[derive(Debug, Clone, PartialEq)]
pub struct QuasiTriplet {
    pub basis: FrequencyBasis,
    /// Integer coordinates of `γ ∈ ⟨X⟩`.
    pub gamma_coords: Coords,
    /// `λ_u` keyed by the nonzero coordinates of `u`.
    pub lambdas: BTreeMap<Coords, f64>,
    /// Bound on `Σ |λ_u|` over discarded frequencies.
    pub tail_bound: f64,
    /// Sup-norm error `2 Σ_{k>n} p_k` of the input truncation, if any.
    pub input_truncation: f64,
    pub lattice: Option<LatticeIndexing>,
    pub diagnostics: Option<ExtractionDiagnostics>,
}

impl QuasiTriplet {
    pub fn new(
        basis: FrequencyBasis,
        gamma_coords: Coords,
        lambdas: BTreeMap<Coords, f64>,
    ) -> Result<Self, SpectralError> {
        basis.check_coords(&gamma_coords)?;
        for (u, w) in &lambdas {
            basis.check_coords(u)?;
            if u.is_zero() {
                return Err(SpectralError::ZeroFrequency);
            }
            if !w.is_finite() {
                return Err(MeasureError::NonFiniteWeight.into());
            }
        }
        Ok(Self {
            basis,
            gamma_coords,
            lambdas,
            tail_bound: 0.0,
            input_truncation: 0.0,
            lattice: None,
            diagnostics: None,
        })
    }

    /// Convenience for integer-supported triplets: `γ = gamma`, `λ_k` from pairs.
    pub fn on_integers(gamma: i64, lambdas: &[(i64, f64)]) -> Result<Self, SpectralError> {
        let map = lambdas.iter().map(|&(k, w)| (Coords::from([k]), w)).collect();
        Self::new(FrequencyBasis::integers(), Coords::from([gamma]), map)
    }

    pub fn gamma(&self) -> f64 {
        self.basis.value_of(&self.gamma_coords)
    }

    pub fn frequency(&self, u: &Coords) -> f64 {
        self.basis.value_of(u)
    }

    /// `Σ |λ_u|` over stored frequencies.
    pub fn l1_norm(&self) -> f64 {
        self.lambdas.values().map(|w| libm::fabs(*w)).sum()
    }

    /// `Σ λ_u`; the derived weight at zero is its negative.
    pub fn lambda_sum(&self) -> f64 {
        self.lambdas.values().sum()
    }

    pub fn lambda(&self, u: &Coords) -> f64 {
        self.lambdas.get(u).copied().unwrap_or(0.0)
    }

    /// `λ_{span·k}` keyed by `k` for lattice triplets.
    pub fn lattice_lambdas(&self) -> Option<BTreeMap<i64, f64>> {
        let lattice = self.lattice.as_ref()?;
        let probe = crate::measures::LatticeForm {
            offset_coords: Coords::zero(self.basis.dim()),
            span_coords: lattice.span_coords.clone(),
            offset: 0.0,
            span: lattice.span,
        };
        self.lambdas.iter().map(|(u, &w)| probe.index_of(u).map(|k| (k, w))).collect()
    }

    /// The exponent `itγ + Σ λ_u (e^{itu} − 1)`.
    pub fn log_cf(&self, t: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, t * self.gamma());
        for (u, &w) in &self.lambdas {
            acc += (cis(t * self.frequency(u)) - 1.0) * w;
        }
        acc
    }

    pub fn cf(&self, t: f64) -> Complex64 {
        self.log_cf(t).exp()
    }

    /// The exponent with centring `sin(τu)/τ`:
    /// `itγ_τ + Σ λ_u (e^{itu} − 1 − i(t/τ) sin(τu))`.
    pub fn centered_log_cf(&self, t: f64, tau: f64) -> Result<Complex64, SpectralError> {
        let g = gamma_tau(self, tau)?;
        let mut acc = Complex64::new(0.0, t * g);
        for (u, &w) in &self.lambdas {
            let x = self.frequency(u);
            acc += (cis(t * x) - Complex64::new(1.0, t / tau * libm::sin(tau * x))) * w;
        }
        Ok(acc)
    }
}

/// Controls for triplet extraction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TripletParams {
    /// Initial grid points per axis; `None` picks by torus dimension.
    pub n_init: Option<usize>,
    /// Largest grid per axis before giving up; `None` picks by dimension.
    pub n_max: Option<usize>,
    /// Bound on the coefficient mass in the outer quarter of the window.
    pub tol: f64,
    /// Coefficients below this are dropped into the tail bound.
    pub drop_below: f64,
    /// Bound on the ℓ1 grid reconstruction residual.
    pub residual_tol: f64,
    /// Largest admissible phase jump between neighbouring grid points.
    pub accept_jump: f64,
    /// Largest admissible imaginary part of a retained coefficient.
    pub imag_tol: f64,
    pub separation: SeparationParams,
}

impl Default for TripletParams {
    fn default() -> Self {
        Self {
            n_init: None,
            n_max: None,
            tol: 1e-10,
            drop_below: 1e-13,
            residual_tol: 1e-9,
            accept_jump: core::f64::consts::FRAC_PI_2,
            imag_tol: 1e-10,
            separation: SeparationParams::default(),
        }
    }
}

impl TripletParams {
    pub(crate) fn grid_bounds(&self, rank: usize) -> (usize, usize) {
        let (init, max) = match rank {
            0 | 1 => (1024, 1 << 16),
            2 => (1024, 1 << 11),
            3 => (128, 1 << 8),
            _ => (32, 1 << 6),
        };
        let init = self.n_init.unwrap_or(init).next_power_of_two().max(8);
        (init, self.n_max.unwrap_or(max).max(init))
    }
}

/// A finite truncation of a law with the sup-norm error of its characteristic
/// function.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedLaw {
    pub law: DiscreteLaw,
    /// `2 Σ_{k>n} p_k ≥ sup_t |f(t) − f_n(t)|`.
    pub sup_error_bound: f64,
}

/// Keeps the first `n` atoms (in the given order) and renormalises them.
///
/// `atoms` may be a prefix of an infinite law: whatever mass is missing from
/// the list counts as tail.
pub fn truncate_law(basis: FrequencyBasis, atoms: &[(Coords, f64)], n: usize) -> Result<TruncatedLaw, SpectralError> {
    let kept = &atoms[..n.min(atoms.len())];
    let head: f64 = kept.iter().map(|(_, p)| p).sum();
    if head <= 0.0 {
        return Err(MeasureError::EmptyLaw.into());
    }
    let tail = (1.0 - head).max(0.0);
    let law = crate::measures::validate_law(RawLaw {
        basis,
        atoms: kept.iter().map(|(c, p)| (c.clone(), p / head)).collect(),
        lattice: None,
    })?;
    Ok(TruncatedLaw { law, sup_error_bound: 2.0 * tail })
}

/// `γ_τ = γ + (1/τ) Σ λ_u sin(τu)`.
pub fn gamma_tau(triplet: &QuasiTriplet, tau: f64) -> Result<f64, SpectralError> {
    if !(tau > 0.0) {
        return Err(SpectralError::NonpositiveTau);
    }
    let s: f64 = triplet
        .lambdas
        .iter()
        .map(|(u, &w)| w * libm::sin(tau * triplet.frequency(u)))
        .sum();
    Ok(triplet.gamma() + s / tau)
}

/// One point of the empirical mean-motion schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanMotionEstimate {
    pub horizon: f64,
    /// `Arg f(T) / T`.
    pub estimate: f64,
    /// `(Σ|λ_u| + tail) / T`, the admissible deviation from `γ`.
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeanMotion {
    pub exact: f64,
    pub estimates: Vec<MeanMotionEstimate>,
}

/// Default horizons for [`mean_motion`].
pub const MEAN_MOTION_HORIZONS: [f64; 4] = [10.0, 100.0, 1000.0, 10000.0];

/// `γ` from the triplet alongside `Arg f(T)/T` along `horizons` (ascending).
pub fn mean_motion(law: &DiscreteLaw, triplet: &QuasiTriplet, horizons: &[f64]) -> Result<MeanMotion, SpectralError> {
    let args = continuous_arg(law, horizons)?;
    let spread = triplet.l1_norm() + triplet.tail_bound;
    let estimates = horizons
        .iter()
        .zip(args)
        .map(|(&horizon, arg)| MeanMotionEstimate { horizon, estimate: arg / horizon, bound: spread / horizon })
        .collect();
    Ok(MeanMotion { exact: triplet.gamma(), estimates })
}

/// Step function `Λ` with `Λ(u) = Σ_{u_k ≤ u} λ_{u_k}` for `u < 0` and
/// `Λ(u) = −Σ_{u_k > u} λ_{u_k}` for `u > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFunction {
    /// `(u_k, λ_{u_k})` sorted by `u_k`.
    jumps: Vec<(f64, f64)>,
}

impl SpectralFunction {
    pub fn jumps(&self) -> &[(f64, f64)] {
        &self.jumps
    }

    /// `Λ(u)`; undefined at the origin.
    pub fn eval(&self, u: f64) -> Option<f64> {
        if u < 0.0 {
            Some(self.jumps.iter().take_while(|(x, _)| *x <= u).map(|(_, w)| w).sum())
        } else if u > 0.0 {
            Some(-self.jumps.iter().filter(|(x, _)| *x > u).map(|(_, w)| w).sum::<f64>())
        } else {
            None
        }
    }

    /// Total variation of `Λ` on `{|u| ≥ r}`.
    pub fn variation_beyond(&self, r: f64) -> f64 {
        self.jumps.iter().filter(|(x, _)| libm::fabs(*x) >= r).map(|(_, w)| libm::fabs(*w)).sum()
    }
}

pub fn levy_spectral_function(triplet: &QuasiTriplet) -> SpectralFunction {
    let mut jumps: Vec<(f64, f64)> = triplet.lambdas.iter().map(|(u, &w)| (triplet.frequency(u), w)).collect();
    jumps.sort_by(|a, b| a.0.total_cmp(&b.0));
    SpectralFunction { jumps }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn gamma_tau_examples() {
        let empty = QuasiTriplet::on_integers(4, &[]).unwrap();
        assert_eq!(gamma_tau(&empty, 0.3).unwrap(), 4.0);
        let one = QuasiTriplet::on_integers(0, &[(1, 1.0)]).unwrap();
        assert!(gamma_tau(&one, PI).unwrap().abs() < 1e-15);
        assert!((gamma_tau(&one, FRAC_PI_2).unwrap() - 0.636_619_772_367_581_3).abs() < 1e-15);
        assert_eq!(gamma_tau(&one, 0.0), Err(SpectralError::NonpositiveTau));
        assert_eq!(gamma_tau(&one, -1.0), Err(SpectralError::NonpositiveTau));
    }

    #[test]
    fn spectral_function_single_jump() {
        let t = QuasiTriplet::on_integers(0, &[(1, 0.7)]).unwrap();
        let lam = levy_spectral_function(&t);
        assert_eq!(lam.eval(0.5), Some(-0.7));
        assert_eq!(lam.eval(1.5), Some(0.0));
        assert_eq!(lam.eval(-0.5), Some(0.0));
        assert_eq!(lam.eval(0.0), None);
    }

    #[test]
    fn spectral_function_two_sided() {
        let t = QuasiTriplet::on_integers(0, &[(-1, 0.3), (1, 0.4)]).unwrap();
        let lam = levy_spectral_function(&t);
        assert_eq!(lam.eval(-0.5), Some(0.3));
        assert_eq!(lam.eval(-1.0), Some(0.3));
        assert_eq!(lam.eval(-1.5), Some(0.0));
        assert_eq!(lam.eval(0.5), Some(-0.4));
        assert_eq!(lam.eval(1.0), Some(0.0));
        assert!((lam.variation_beyond(0.5) - 0.7).abs() < 1e-15);
        assert_eq!(lam.variation_beyond(2.0), 0.0);
    }

    #[test]
    fn empty_spectral_function_vanishes() {
        let t = QuasiTriplet::on_integers(2, &[]).unwrap();
        let lam = levy_spectral_function(&t);
        for u in [-3.0, -0.1, 0.1, 5.0] {
            assert_eq!(lam.eval(u), Some(0.0));
        }
    }

    #[test]
    fn zero_frequency_rejected() {
        assert_eq!(QuasiTriplet::on_integers(0, &[(0, 1.0)]), Err(SpectralError::ZeroFrequency));
    }

    #[test]
    fn truncation_renormalises() {
        let atoms: Vec<(Coords, f64)> = (0..10).map(|k| (Coords::from([k]), libm::pow(0.5, k as f64 + 1.0))).collect();
        let tr = truncate_law(FrequencyBasis::integers(), &atoms, 5).unwrap();
        let head: f64 = (0..5).map(|k| libm::pow(0.5, k as f64 + 1.0)).sum();
        assert!((tr.sup_error_bound - 2.0 * (1.0 - head)).abs() < 1e-15);
        assert!((tr.law.mass_of(&Coords::from([0])) - 0.5 / head).abs() < 1e-15);
    }

    #[test]
    fn centred_form_matches_plain_exponent() {
        let t = QuasiTriplet::on_integers(1, &[(1, 0.4), (-2, -0.1), (3, 0.05)]).unwrap();
        for (s, tau) in [(0.3, 1.0), (2.2, 0.7), (-4.0, 3.0)] {
            let a = t.centered_log_cf(s, tau).unwrap();
            let b = t.log_cf(s);
            assert!((a - b).norm() < 1e-13);
        }
    }
}
