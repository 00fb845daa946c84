//! Total variation and finite-prefix checkers for convergence and compactness
//! in variation.
//!
//! The criteria concern infinite sequences; everything here reads a finite
//! prefix and turns "tends to zero" or "stays bounded" into explicit trend
//! tests controlled by [`TrendParams`]. Reports are evidence about the prefix,
//! not proofs about the sequence.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::charfn::{certify_separation, SeparationParams, Verdict};
use crate::math::abs;
use crate::measures::{same_basis, Coords, DiscreteLaw, FrequencyBasis, MeasureError};
use crate::spectral::{triplet_multibasis, QuasiTriplet, SpectralError, TripletParams};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LimitsError {
    #[error("sequence has no members")]
    EmptySequence,
    #[error("no limit law supplied")]
    MissingLimit,
    #[error("limit law is not certified separated from zero: {0}")]
    LimitNotSeparated(SpectralError),
    #[error("triplet of member {index} failed: {source}")]
    TripletFailed { index: usize, source: SpectralError },
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

/// `‖F − G‖ = Σ |p_F − p_G|` over the union of supports.
pub fn tv_distance(f: &DiscreteLaw, g: &DiscreteLaw) -> Result<f64, MeasureError> {
    same_basis(f.basis(), g.basis())?;
    let mut total = 0.0;
    for (c, p) in f.iter() {
        total += abs(p - g.mass_of(c));
    }
    for (c, q) in g.iter() {
        if f.measure().get(c).is_none() {
            total += q;
        }
    }
    Ok(total)
}

/// A finite prefix `F_1, …, F_n` over one basis, with an optional limit.
#[derive(Debug, Clone, PartialEq)]
pub struct LawSequence {
    laws: Vec<DiscreteLaw>,
    limit: Option<DiscreteLaw>,
}

impl LawSequence {
    pub fn new(laws: Vec<DiscreteLaw>, limit: Option<DiscreteLaw>) -> Result<Self, LimitsError> {
        let first = laws.first().ok_or(LimitsError::EmptySequence)?;
        for law in laws.iter().chain(limit.as_ref()) {
            same_basis(first.basis(), law.basis())?;
        }
        Ok(Self { laws, limit })
    }

    pub fn laws(&self) -> &[DiscreteLaw] {
        &self.laws
    }

    pub fn limit(&self) -> Option<&DiscreteLaw> {
        self.limit.as_ref()
    }

    pub fn len(&self) -> usize {
        self.laws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.laws.is_empty()
    }

    pub fn basis(&self) -> &FrequencyBasis {
        self.laws[0].basis()
    }
}

/// Triplets of every member (and of the limit), computed once and shared by
/// the checkers. Callers that want parallel extraction build this with
/// [`FamilySpectra::from_results`].
#[derive(Debug, Clone, PartialEq)]
pub struct FamilySpectra {
    pub members: Vec<QuasiTriplet>,
    pub limit: Option<QuasiTriplet>,
}

impl FamilySpectra {
    pub fn compute(seq: &LawSequence, params: &TripletParams) -> Result<Self, LimitsError> {
        let members = seq.laws().iter().map(|law| triplet_multibasis(law, params)).collect();
        let limit = seq.limit().map(|law| triplet_multibasis(law, params));
        Self::from_results(members, limit)
    }

    /// Collects per-member extraction results, reporting the first failure.
    pub fn from_results(
        members: Vec<Result<QuasiTriplet, SpectralError>>,
        limit: Option<Result<QuasiTriplet, SpectralError>>,
    ) -> Result<Self, LimitsError> {
        let limit = limit.transpose().map_err(LimitsError::LimitNotSeparated)?;
        let members = members
            .into_iter()
            .enumerate()
            .map(|(i, r)| r.map_err(|source| LimitsError::TripletFailed { index: i + 1, source }))
            .collect::<Result<Vec<_>, _>>()?;
        if members.is_empty() {
            return Err(LimitsError::EmptySequence);
        }
        for t in members.iter().chain(limit.as_ref()) {
            same_basis(&members[0].basis, &t.basis)?;
        }
        Ok(Self { members, limit })
    }

    /// The frequency universe `u_0 = 0, u_1, u_2, …` of all stored triplets,
    /// ordered by `|u|`, then negative before positive, then coordinates.
    pub fn universe(&self) -> Vec<Coords> {
        let basis = &self.members[0].basis;
        let mut set: BTreeSet<Coords> = BTreeSet::new();
        for t in self.members.iter().chain(self.limit.as_ref()) {
            set.extend(t.lambdas.keys().cloned());
        }
        let mut out: Vec<(f64, Coords)> = set.into_iter().map(|c| (basis.value_of(&c), c)).collect();
        out.sort_by(|(x, a), (y, b)| frequency_order(*x, a, *y, b));
        core::iter::once(Coords::zero(basis.dim())).chain(out.into_iter().map(|(_, c)| c)).collect()
    }
}

fn frequency_order(x: f64, a: &Coords, y: f64, b: &Coords) -> Ordering {
    abs(x)
        .total_cmp(&abs(y))
        .then_with(|| (x > 0.0).cmp(&(y > 0.0)))
        .then_with(|| a.cmp(b))
}

/// `Σ_u |a_u − b_u|` with absent frequencies read as zero.
pub fn ell1_distance(a: &BTreeMap<Coords, f64>, b: &BTreeMap<Coords, f64>) -> f64 {
    let mut total: f64 = a.iter().map(|(u, x)| abs(x - b.get(u).copied().unwrap_or(0.0))).sum();
    total += b.iter().filter(|(u, _)| !a.contains_key(*u)).map(|(_, y)| abs(*y)).sum::<f64>();
    total
}

/// Finite readings of "tends to zero" and "stays bounded".
#[derive(Debug, Clone, PartialEq)]
pub struct TrendParams {
    /// "→ 0" needs the final value below this.
    pub zero_threshold: f64,
    /// Allowed increase between neighbours in a monotone stretch.
    pub slack: f64,
    /// Boundedness fails when a value after the reference index exceeds this
    /// multiple of the reference value.
    pub growth_factor: f64,
    /// 1-based reference index for growth and degeneracy tests.
    pub burn_in: usize,
    /// Cut-offs `N` for the tail sums; `None` uses powers of two below `|U|`.
    pub tail_schedule: Option<Vec<usize>>,
}

impl Default for TrendParams {
    fn default() -> Self {
        Self { zero_threshold: 1e-6, slack: 1e-7, growth_factor: 2.0, burn_in: 10, tail_schedule: None }
    }
}

impl TrendParams {
    fn last_third(&self, len: usize) -> usize {
        len - len.div_ceil(3)
    }

    /// Final value below the threshold and non-increasing over the last third.
    pub fn tends_to_zero(&self, xs: &[f64]) -> bool {
        let Some(&last) = xs.last() else {
            return true;
        };
        last < self.zero_threshold && self.non_increasing(&xs[self.last_third(xs.len())..])
    }

    fn non_increasing(&self, xs: &[f64]) -> bool {
        xs.windows(2).all(|w| w[1] <= w[0] + self.slack)
    }

    fn reference(&self, len: usize) -> usize {
        self.burn_in.clamp(1, len) - 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailReason {
    /// `γ_n` differs from the limit's at the end of the prefix.
    GammaUnstable,
    /// The aligned `ℓ1` distances neither vanish nor decrease.
    Ell1NotDecreasing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Criterion {
    /// Conditions hold on the prefix; `gamma_from` is the 1-based `n_0`.
    Holds { gamma_from: usize },
    Fails(FailReason),
    /// Distances are still decreasing but have not reached the threshold, or
    /// are small without being monotone.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceVerdict {
    /// 1-based `n_0` with `γ_n = γ` for all `n ≥ n_0` in the prefix.
    pub gamma_stable_from: Option<usize>,
    pub ell1_distances: Vec<f64>,
    pub tv_distances: Vec<f64>,
    pub verdict: Criterion,
    /// Whether the `ℓ1` trend and the total-variation trend both vanish or both do not.
    pub trend_agreement: bool,
    pub tv_tends_to_zero: bool,
}

/// Convergence criterion: eventually equal `γ` and `ℓ1` distances to zero.
pub fn check_convergence(
    seq: &LawSequence,
    spectra: &FamilySpectra,
    trend: &TrendParams,
) -> Result<ConvergenceVerdict, LimitsError> {
    let limit_law = seq.limit().ok_or(LimitsError::MissingLimit)?;
    let limit = spectra.limit.as_ref().ok_or(LimitsError::MissingLimit)?;
    let gammas_equal: Vec<bool> = spectra.members.iter().map(|t| t.gamma_coords == limit.gamma_coords).collect();
    let gamma_stable_from = gammas_equal
        .iter()
        .rposition(|eq| !eq)
        .map_or(Some(1), |i| (i + 1 < gammas_equal.len()).then_some(i + 2));
    let ell1_distances: Vec<f64> = spectra.members.iter().map(|t| ell1_distance(&t.lambdas, &limit.lambdas)).collect();
    let tv_distances =
        seq.laws().iter().map(|law| tv_distance(law, limit_law)).collect::<Result<Vec<_>, _>>()?;

    let ell1_to_zero = trend.tends_to_zero(&ell1_distances);
    let tv_to_zero = trend.tends_to_zero(&tv_distances);
    let verdict = match gamma_stable_from {
        None => Criterion::Fails(FailReason::GammaUnstable),
        Some(from) if ell1_to_zero => Criterion::Holds { gamma_from: from },
        Some(_) => {
            let tail = &ell1_distances[trend.last_third(ell1_distances.len())..];
            let decreasing = tail.len() > 1 && trend.non_increasing(tail) && tail[tail.len() - 1] < tail[0];
            let small = ell1_distances.last().is_some_and(|&x| x < trend.zero_threshold);
            if decreasing || small {
                Criterion::Inconclusive
            } else {
                Criterion::Fails(FailReason::Ell1NotDecreasing)
            }
        }
    };
    let criterion_holds = matches!(verdict, Criterion::Holds { .. });
    Ok(ConvergenceVerdict {
        gamma_stable_from,
        ell1_distances,
        tv_distances,
        verdict,
        trend_agreement: criterion_holds == tv_to_zero,
        tv_tends_to_zero: tv_to_zero,
    })
}

/// Finite-sample evidence for the three relative-compactness conditions.
#[derive(Debug, Clone, PartialEq)]
pub struct RelativeCompactnessReport {
    /// Distinct `γ_n` in order of first appearance.
    pub gamma_values: Vec<Coords>,
    /// (i): no new `γ` value appears in the last third of the prefix.
    pub gammas_pass: bool,
    pub ell1_norms: Vec<f64>,
    pub running_sup: Vec<f64>,
    /// (ii): no value after the reference index exceeds `growth_factor` times it.
    pub sup_pass: bool,
    pub tail_schedule: Vec<usize>,
    /// `sup_n Σ_{k > N} |λ_{n, u_k}|` for each `N` of the schedule.
    pub tail_sups: Vec<f64>,
    /// (iii): tail sups non-increasing and the last below the threshold.
    pub tails_pass: bool,
    pub passes: bool,
}

pub fn check_relative_compactness(
    spectra: &FamilySpectra,
    trend: &TrendParams,
) -> Result<RelativeCompactnessReport, LimitsError> {
    let members = &spectra.members;
    if members.is_empty() {
        return Err(LimitsError::EmptySequence);
    }
    let len = members.len();

    let mut gamma_values: Vec<Coords> = Vec::new();
    let mut first_seen = Vec::new();
    for (i, t) in members.iter().enumerate() {
        if !gamma_values.contains(&t.gamma_coords) {
            gamma_values.push(t.gamma_coords.clone());
            first_seen.push(i);
        }
    }
    let gammas_pass = len < 3 || first_seen.iter().all(|&i| i < trend.last_third(len));

    let ell1_norms: Vec<f64> = members.iter().map(|t| t.l1_norm()).collect();
    let running_sup = running(&ell1_norms, f64::max);
    let r = trend.reference(len);
    let sup_after = ell1_norms[r..].iter().copied().fold(0.0, f64::max);
    let sup_pass = sup_after <= trend.growth_factor * ell1_norms[r] + trend.zero_threshold;

    let universe = spectra.universe();
    let position: BTreeMap<&Coords, usize> = universe.iter().enumerate().map(|(k, u)| (u, k)).collect();
    let tail_schedule = trend.tail_schedule.clone().unwrap_or_else(|| {
        let mut s = alloc::vec![0];
        let mut n = 1;
        while n < universe.len() {
            s.push(n);
            n *= 2;
        }
        s
    });
    let tail_sups: Vec<f64> = tail_schedule
        .iter()
        .map(|&cut| {
            members
                .iter()
                .map(|t| t.lambdas.iter().filter(|(u, _)| position[u] > cut).map(|(_, w)| abs(*w)).sum::<f64>())
                .fold(0.0, f64::max)
        })
        .collect();
    let tails_pass =
        trend.non_increasing(&tail_sups) && tail_sups.last().is_none_or(|&x| x <= trend.zero_threshold);

    Ok(RelativeCompactnessReport {
        gamma_values,
        gammas_pass,
        ell1_norms,
        running_sup,
        sup_pass,
        tail_schedule,
        tail_sups,
        tails_pass,
        passes: gammas_pass && sup_pass && tails_pass,
    })
}

fn running(xs: &[f64], op: fn(f64, f64) -> f64) -> Vec<f64> {
    let mut acc = None;
    xs.iter()
        .map(|&x| {
            let v = acc.map_or(x, |a| op(a, x));
            acc = Some(v);
            v
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct StochasticCompactnessReport {
    /// The relative-compactness conditions this one builds on.
    pub relative: RelativeCompactnessReport,
    pub running_min: Vec<f64>,
    /// Smallest `Σ|λ_n|` from the reference index on.
    pub tail_min: f64,
    /// Fails when the tail minimum halves relative to the reference value or
    /// drops below the zero threshold.
    pub nondegenerate_pass: bool,
    pub passes: bool,
}

pub fn check_stochastic_compactness(
    spectra: &FamilySpectra,
    trend: &TrendParams,
) -> Result<StochasticCompactnessReport, LimitsError> {
    let relative = check_relative_compactness(spectra, trend)?;
    let norms = &relative.ell1_norms;
    let r = trend.reference(norms.len());
    let tail_min = norms[r..].iter().copied().fold(f64::INFINITY, f64::min);
    let nondegenerate_pass = tail_min >= trend.zero_threshold && tail_min > 0.5 * norms[r];
    Ok(StochasticCompactnessReport {
        running_min: running(norms, f64::min),
        tail_min,
        nondegenerate_pass,
        passes: relative.passes && nondegenerate_pass,
        relative,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MemberSeparation {
    /// 1-based position in the sequence.
    pub index: usize,
    pub verdict: Verdict,
    pub best_inf_estimate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DsProbe {
    pub members: Vec<MemberSeparation>,
    /// First 1-based index from which every member is certified.
    pub certified_from: Option<usize>,
}

impl DsProbe {
    /// Certified lower bounds `μ_n`, `None` where not certified.
    pub fn mus(&self) -> Vec<Option<f64>> {
        self.members
            .iter()
            .map(|m| match m.verdict {
                Verdict::Certified { mu } => Some(mu),
                _ => None,
            })
            .collect()
    }
}

/// Separation certificate of every member.
pub fn eventually_in_ds_probe(seq: &LawSequence, params: &SeparationParams) -> DsProbe {
    let members: Vec<MemberSeparation> = seq
        .laws()
        .iter()
        .enumerate()
        .map(|(i, law)| {
            let cert = certify_separation(law, params);
            MemberSeparation { index: i + 1, verdict: cert.verdict, best_inf_estimate: cert.best_inf_estimate }
        })
        .collect();
    let certified_from = match members.iter().rposition(|m| !matches!(m.verdict, Verdict::Certified { .. })) {
        None => Some(1),
        Some(i) if i + 1 < members.len() => Some(i + 2),
        Some(_) => None,
    };
    DsProbe { members, certified_from }
}
