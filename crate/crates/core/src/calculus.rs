//! Measure-level exponentials: laws back from triplets, fractional convolution
//! powers, and the infinite-divisibility test.
//!
//! `f(t) = exp{itγ + Σ λ_u (e^{itu} − 1)}` is the transform of
//! `δ_γ * e^{−Σλ} Σ_n N^{*n}/n!` with `N = Σ λ_u δ_u`. The series is cut where
//! the factorial tail bound `e^{‖N‖}‖N‖^{M+1}/(M+1)!` drops below the target.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::math::{abs, ln_factorial, round};
use crate::measures::{
    coordinate_lattice, convolve, same_basis, total_variation, validate_law, Coords, DiscreteLaw, FrequencyBasis,
    MeasureError, RawLaw, SignedAtomicMeasure,
};
use crate::spectral::QuasiTriplet;

/// Per-atom threshold separating roundoff from genuinely negative mass.
pub const NEGATIVE_MASS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CalculusError {
    #[error("exponential series needs more than {max_terms} terms (tail bound {bound:e})")]
    Diverged { max_terms: usize, bound: f64 },
    #[error("reconstruction has mass {mass:e} at {coords:?}; the triplet is not that of a probability law")]
    NegativeMassBeyondTolerance { coords: Coords, mass: f64 },
    #[error("convolution power must be finite and nonnegative, got {0}")]
    InvalidPower(f64),
    #[error("series parameters need tol > 0 and max_terms ≥ 1")]
    InvalidParams,
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpSeriesParams {
    /// Target total variation of everything discarded.
    pub tol: f64,
    pub max_terms: usize,
}

impl Default for ExpSeriesParams {
    fn default() -> Self {
        Self { tol: 1e-12, max_terms: 400 }
    }
}

/// Output of [`compound_exp`].
#[derive(Debug, Clone, PartialEq)]
pub struct CompoundExp {
    pub measure: SignedAtomicMeasure,
    /// Number of series terms `M` summed after the constant term.
    pub terms: usize,
    /// Certified bound on the discarded series tail, in total variation.
    pub series_bound: f64,
    /// Total variation of atoms pruned along the way (before propagation).
    pub pruned: f64,
    /// Bound on the total variation between `measure` and the exact exponential.
    pub residual: f64,
}

/// `δ_γ * e^{−Σλ} Σ_n N^{*n}/n!` for the triplet's `γ` and `λ`.
pub fn compound_exp(triplet: &QuasiTriplet, params: &ExpSeriesParams) -> Result<CompoundExp, CalculusError> {
    exponentiate(&triplet.basis, &triplet.lambdas, 1.0, params)
        .map(|out| CompoundExp { measure: out.measure.shifted(&triplet.gamma_coords), ..out })
}

/// `e^{s(N − Σλ)}` without shift.
fn exponentiate(
    basis: &FrequencyBasis,
    lambdas: &BTreeMap<Coords, f64>,
    s: f64,
    params: &ExpSeriesParams,
) -> Result<CompoundExp, CalculusError> {
    if !(params.tol > 0.0) || params.max_terms == 0 {
        return Err(CalculusError::InvalidParams);
    }
    let generator: Vec<(Coords, f64)> =
        lambdas.iter().filter(|(_, w)| **w != 0.0).map(|(c, w)| (c.clone(), s * w)).collect();
    let norm: f64 = generator.iter().map(|(_, w)| abs(*w)).sum();
    let total: f64 = generator.iter().map(|(_, w)| w).sum();
    let scale = libm::exp(-total);
    // ln of e^{−Σλ} e^{‖N‖} ‖N‖^{M+1}/(M+1)!
    let log_tail = |m: usize| -total + norm + (m + 1) as f64 * libm::log(norm) - ln_factorial(m + 1);
    let target = libm::log(params.tol / 2.0);
    let terms = if norm == 0.0 {
        0
    } else {
        (0..=params.max_terms).find(|&m| log_tail(m) <= target).ok_or(CalculusError::Diverged {
            max_terms: params.max_terms,
            bound: libm::exp(log_tail(params.max_terms)),
        })?
    };
    let series_bound = if norm == 0.0 { 0.0 } else { libm::exp(log_tail(terms)) };
    let threshold = params.tol / (10.0 * terms.max(1) as f64);

    let (atoms, pruned) = if basis.dim() == 1 {
        dense_series(&generator, terms, threshold)
    } else {
        sparse_series(&generator, basis.dim(), terms, threshold)
    };
    let mut measure = SignedAtomicMeasure::from_atoms(basis.clone(), atoms)?.scaled(scale);
    measure.prune(f64::MIN_POSITIVE);
    // A unit of mass pruned from term n feeds every later term: at most e^{‖N‖} growth.
    let residual = series_bound + scale * libm::exp(norm) * pruned;
    Ok(CompoundExp { measure, terms, series_bound, pruned, residual })
}

/// `Σ_{n ≤ terms} N^{*n}/n!` on integer coordinates, kept as dense rows.
fn dense_series(generator: &[(Coords, f64)], terms: usize, threshold: f64) -> (Vec<(Coords, f64)>, f64) {
    let gen: Vec<(i64, f64)> = generator.iter().map(|(c, w)| (c.as_slice()[0], *w)).collect();
    let mut sum: BTreeMap<i64, f64> = BTreeMap::new();
    sum.insert(0, 1.0);
    let mut pruned = 0.0;
    if gen.is_empty() {
        return (vec![(Coords::from([0]), 1.0)], 0.0);
    }
    let lo_gen = gen.iter().map(|g| g.0).min().unwrap();
    let hi_gen = gen.iter().map(|g| g.0).max().unwrap();
    // term = Σ_j row[j] δ_{base + j}
    let mut base = 0i64;
    let mut row = vec![1.0f64];
    for n in 1..=terms {
        let width = row.len() + (hi_gen - lo_gen) as usize;
        let mut next = vec![0.0f64; width];
        let inv = 1.0 / n as f64;
        for (j, &r) in row.iter().enumerate() {
            if r == 0.0 {
                continue;
            }
            for &(k, w) in &gen {
                next[j + (k - lo_gen) as usize] += r * w * inv;
            }
        }
        base += lo_gen;
        for x in next.iter_mut() {
            if *x != 0.0 && abs(*x) < threshold {
                pruned += abs(*x);
                *x = 0.0;
            }
        }
        let first = next.iter().position(|&x| x != 0.0);
        let Some(first) = first else {
            break;
        };
        let last = next.iter().rposition(|&x| x != 0.0).unwrap();
        row = next[first..=last].to_vec();
        base += first as i64;
        for (j, &x) in row.iter().enumerate() {
            if x != 0.0 {
                *sum.entry(base + j as i64).or_insert(0.0) += x;
            }
        }
    }
    (sum.into_iter().map(|(k, w)| (Coords::from([k]), w)).collect(), pruned)
}

fn sparse_series(
    generator: &[(Coords, f64)],
    dim: usize,
    terms: usize,
    threshold: f64,
) -> (Vec<(Coords, f64)>, f64) {
    let mut sum: BTreeMap<Coords, f64> = BTreeMap::new();
    sum.insert(Coords::zero(dim), 1.0);
    let mut term: BTreeMap<Coords, f64> = sum.clone();
    let mut pruned = 0.0;
    for n in 1..=terms {
        let mut next: BTreeMap<Coords, f64> = BTreeMap::new();
        let inv = 1.0 / n as f64;
        for (c, &r) in &term {
            for (k, w) in generator {
                *next.entry(c + k).or_insert(0.0) += r * w * inv;
            }
        }
        next.retain(|_, x| {
            let keep = abs(*x) >= threshold;
            if !keep {
                pruned += abs(*x);
            }
            keep
        });
        if next.is_empty() {
            break;
        }
        for (c, &x) in &next {
            *sum.entry(c.clone()).or_insert(0.0) += x;
        }
        term = next;
    }
    (sum.into_iter().collect(), pruned)
}

/// A law rebuilt from a triplet.
#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub law: DiscreteLaw,
    /// Bound on the series and pruning error of the exponential.
    pub series_residual: f64,
    /// Total negative mass removed by clamping.
    pub clamped: f64,
    /// `|Σ m − 1|` of the measure before renormalising.
    pub mass_defect: f64,
}

impl Reconstruction {
    /// Total variation budget of the reconstruction steps.
    pub fn residual(&self) -> f64 {
        self.series_residual + self.clamped + self.mass_defect
    }
}

/// Exponentiates a triplet and checks that the result is a probability law.
pub fn reconstruct_law(triplet: &QuasiTriplet, params: &ExpSeriesParams) -> Result<Reconstruction, CalculusError> {
    let out = compound_exp(triplet, params)?;
    let mut clamped = 0.0;
    let mut atoms = Vec::with_capacity(out.measure.len());
    for (c, &w) in out.measure.iter() {
        if w < -NEGATIVE_MASS_TOL {
            return Err(CalculusError::NegativeMassBeyondTolerance { coords: c.clone(), mass: w });
        }
        if w <= 0.0 {
            clamped -= w;
        } else {
            atoms.push((c.clone(), w));
        }
    }
    let total: f64 = atoms.iter().map(|(_, w)| w).sum();
    for (_, w) in atoms.iter_mut() {
        *w /= total;
    }
    let law = validate_law(RawLaw { basis: triplet.basis.clone(), atoms, lattice: None })?;
    let law = if triplet.lattice.is_some() || law.basis().dim() == 1 {
        let lattice = coordinate_lattice(&law);
        law.with_lattice(lattice)
    } else {
        law
    };
    Ok(Reconstruction {
        law,
        series_residual: out.residual,
        clamped,
        mass_defect: abs(out.measure.total_mass() - 1.0),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    /// Every atom is at least `−1e−9`.
    Probability,
    Signed,
}

/// The shift `sγ` of a convolution power.
#[derive(Debug, Clone, PartialEq)]
pub struct Shift {
    /// The power `s`.
    pub scale: f64,
    /// `s·m` for the integer coordinates `m` of `γ`.
    pub scaled_coords: Vec<f64>,
    /// Numeric value of `sγ`.
    pub gamma: f64,
    /// Integer coordinates of `sγ` when it lies in the module.
    pub exact: Option<Coords>,
}

impl Shift {
    fn from_scaled(basis: &FrequencyBasis, scale: f64, scaled_coords: Vec<f64>) -> Self {
        let gamma = scaled_coords.iter().zip(basis.alphas()).map(|(c, a)| c * a).sum();
        let exact = scaled_coords
            .iter()
            .all(|&c| abs(c - round(c)) <= 1e-9 * c.abs().max(1.0))
            .then(|| Coords::new(scaled_coords.iter().map(|&c| round(c) as i64)));
        Self { scale, scaled_coords, gamma, exact }
    }

    /// Whether the shift lies in the module of the law.
    pub fn in_module(&self) -> bool {
        self.exact.is_some()
    }
}

/// `F^{*s}` as a (possibly signed) measure.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvPower {
    /// The power, translated by `sγ` when that lies in the module. Otherwise
    /// the measure is centred at the origin and `shift.gamma` is a real offset
    /// still to be applied.
    pub measure: SignedAtomicMeasure,
    pub shift: Shift,
    pub classification: Classification,
    /// Total variation error bound.
    pub residual: f64,
}

impl ConvPower {
    fn unshifted(&self) -> SignedAtomicMeasure {
        match &self.shift.exact {
            Some(c) => self.measure.shifted(&-c),
            None => self.measure.clone(),
        }
    }

    /// `F^{*s} * F^{*t} = F^{*(s+t)}`, with the shifts combined before
    /// deciding module membership.
    pub fn convolve(&self, other: &ConvPower) -> Result<ConvPower, CalculusError> {
        same_basis(self.measure.basis(), other.measure.basis())?;
        let product = convolve(&self.unshifted(), &other.unshifted())?;
        let coords = self.shift.scaled_coords.iter().zip(&other.shift.scaled_coords).map(|(a, b)| a + b).collect();
        let shift = Shift::from_scaled(product.basis(), self.shift.scale + other.shift.scale, coords);
        let measure = match &shift.exact {
            Some(c) => product.shifted(c),
            None => product,
        };
        let (na, nb) = (total_variation(&self.measure), total_variation(&other.measure));
        Ok(ConvPower {
            classification: classify(&measure),
            residual: na * other.residual + nb * self.residual + self.residual * other.residual,
            measure,
            shift,
        })
    }
}

fn classify(m: &SignedAtomicMeasure) -> Classification {
    if m.iter().all(|(_, &w)| w >= -NEGATIVE_MASS_TOL) {
        Classification::Probability
    } else {
        Classification::Signed
    }
}

/// `F^{*s}` for the law with the given triplet: `γ ↦ sγ`, `λ ↦ sλ`.
pub fn conv_power(triplet: &QuasiTriplet, s: f64, params: &ExpSeriesParams) -> Result<ConvPower, CalculusError> {
    if !s.is_finite() || s < 0.0 {
        return Err(CalculusError::InvalidPower(s));
    }
    let out = exponentiate(&triplet.basis, &triplet.lambdas, s, params)?;
    let scaled = triplet.gamma_coords.as_slice().iter().map(|&m| s * m as f64).collect();
    let shift = Shift::from_scaled(&triplet.basis, s, scaled);
    let measure = match &shift.exact {
        Some(c) => out.measure.shifted(c),
        None => out.measure,
    };
    Ok(ConvPower { classification: classify(&measure), measure, shift, residual: out.residual })
}

/// Every `λ_u ≥ −tol` and the discarded tail is at most `tol`.
pub fn is_infinitely_divisible(triplet: &QuasiTriplet, tol: f64) -> bool {
    triplet.lambdas.values().all(|&w| w >= -tol) && triplet.tail_bound <= tol
}
