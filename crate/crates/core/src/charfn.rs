//! Characteristic functions, the torus lift, and certification of the
//! separation condition `inf_t |f(t)| > 0`.
//!
//! A law with support `x_k = Σ_j c_{k,j} α_j` has characteristic function
//! `f(t) = φ̃(tα_1, …, tα_d)` where `φ̃(θ) = Σ_k p_k e^{i⟨c_k, θ⟩}` is a
//! trigonometric polynomial on the torus `[0, 2π)^d`. When the generators are
//! Z-linearly independent the diagonal is dense in the torus, so the infimum of
//! `|f|` over the line equals the minimum of `|φ̃|` over the torus, which is a
//! compact problem solvable by branch and bound.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::math::{cis, wrap_pi};
use crate::measures::{coordinate_lattice, to_lattice_form, Coords, DiscreteLaw, FrequencyBasis, LatticeForm};

/// `f(t) = Σ_k p_k e^{itx_k}`.
pub fn cf_eval(law: &DiscreteLaw, t: f64) -> Complex64 {
    let basis = law.basis();
    law.iter().map(|(c, p)| cis(t * basis.value_of(c)) * p).sum()
}

/// A trigonometric polynomial `Σ_k p_k e^{i⟨c_k, θ⟩}` on the `dim`-torus,
/// together with the frequencies `α` and phase offset that recover `f` on the
/// diagonal: `f(t) = e^{it·offset} φ̃(tα mod 2π)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusFunction {
    dim: usize,
    terms: Vec<(Coords, f64)>,
    alphas: Vec<f64>,
    offset: f64,
}

impl TorusFunction {
    pub fn new(dim: usize, terms: Vec<(Coords, f64)>, alphas: Vec<f64>, offset: f64) -> Self {
        debug_assert!(terms.iter().all(|(c, _)| c.dim() == dim));
        debug_assert_eq!(alphas.len(), dim);
        Self { dim, terms, alphas, offset }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[(Coords, f64)] {
        &self.terms
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn eval(&self, theta: &[f64]) -> Complex64 {
        self.terms
            .iter()
            .map(|(c, p)| {
                let phase: f64 = c.as_slice().iter().zip(theta).map(|(&k, &x)| k as f64 * x).sum();
                cis(phase) * *p
            })
            .sum()
    }

    /// `e^{it·offset} φ̃(tα_1 mod 2π, …, tα_d mod 2π)`.
    pub fn diagonal(&self, t: f64) -> Complex64 {
        let theta: Vec<f64> = self.alphas.iter().map(|a| { let x = t * a; x - TAU * libm::floor(x / TAU) }).collect();
        cis(t * self.offset) * self.eval(&theta)
    }

    /// Per-axis Lipschitz constants `Σ_k p_k |c_{k,j}|`.
    pub fn lipschitz(&self) -> Vec<f64> {
        (0..self.dim)
            .map(|j| self.terms.iter().map(|(c, p)| p * c.as_slice()[j].unsigned_abs() as f64).sum())
            .collect()
    }

    /// The same modulus `|φ̃|` with each axis recentred at its weighted median,
    /// which minimises the per-axis Lipschitz constant.
    fn recentred(&self) -> TorusFunction {
        let medians: Vec<i64> = (0..self.dim)
            .map(|j| {
                let mut col: Vec<(i64, f64)> = self.terms.iter().map(|(c, p)| (c.as_slice()[j], *p)).collect();
                col.sort_by_key(|&(k, _)| k);
                let total: f64 = col.iter().map(|&(_, p)| p).sum();
                let mut acc = 0.0;
                for &(k, p) in &col {
                    acc += p;
                    if acc >= 0.5 * total {
                        return k;
                    }
                }
                0
            })
            .collect();
        let shift = Coords::new(medians);
        let terms = self.terms.iter().map(|(c, p)| (c - &shift, *p)).collect();
        TorusFunction { dim: self.dim, terms, alphas: self.alphas.clone(), offset: self.offset }
    }

    /// Bracket `[lower, upper]` for `min |φ̃|` over the torus with
    /// `upper − lower ≤ abs_tol`, or `None` if the cell budget runs out.
    pub fn infimum_bounds(&self, abs_tol: f64, max_cells: usize) -> Option<(f64, f64)> {
        let params = SeparationParams { max_cells, ..SeparationParams::default() };
        match branch_and_bound(self, &params, Stop::Bracket(abs_tol)) {
            Outcome::Stopped { lower, best, .. } => Some((lower.max(0.0), best)),
            Outcome::Zero { value, .. } => Some((0.0, value)),
            Outcome::Exhausted { .. } => None,
        }
    }
}

/// The torus function `φ̃` of a law over its declared basis.
pub fn torus_lift(law: &DiscreteLaw) -> TorusFunction {
    let basis = law.basis();
    let terms = law.iter().map(|(c, p)| (c.clone(), p)).collect();
    TorusFunction::new(basis.dim(), terms, basis.alphas(), 0.0)
}

/// `2p* − 1` when the largest mass `p*` exceeds one half.
pub fn dominant_mass_bound(law: &DiscreteLaw) -> Option<f64> {
    let p = law.max_mass();
    (p > 0.5).then_some(2.0 * p - 1.0)
}

/// The smallest-dimensional torus carrying `|f|`.
///
/// Support coordinates are written as `offset + V·l` with nonnegative integer
/// index vectors `l`; `V` has one column for lattice laws and is the identity
/// (with `offset` the coordinate-wise minimum) otherwise.
#[derive(Debug, Clone)]
pub(crate) struct Reduced {
    pub basis: FrequencyBasis,
    pub offset_coords: Coords,
    pub directions: Vec<Coords>,
    pub torus: TorusFunction,
    pub lattice: Option<LatticeForm>,
}

impl Reduced {
    pub fn rank(&self) -> usize {
        self.directions.len()
    }

    /// Coordinates `offset·include_offset + V·index` over the law's basis.
    pub fn lift(&self, index: &[i64], include_offset: bool) -> Coords {
        let mut out = if include_offset { self.offset_coords.clone() } else { Coords::zero(self.basis.dim()) };
        for (dir, &k) in self.directions.iter().zip(index) {
            out = &out + &dir.scaled(k);
        }
        out
    }
}

pub(crate) fn reduce(law: &DiscreteLaw) -> Reduced {
    if law.is_degenerate() {
        let (c, _) = law.iter().next().expect("nonempty law");
        return Reduced {
            basis: law.basis().clone(),
            offset_coords: c.clone(),
            directions: Vec::new(),
            torus: TorusFunction::new(0, vec![(Coords::zero(0), 1.0)], Vec::new(), law.basis().value_of(c)),
            lattice: coordinate_lattice(law),
        };
    }
    let lattice = law.lattice_form().cloned().or_else(|| coordinate_lattice(law));
    if let Some(lf) = lattice {
        return lattice_reduction(law, lf);
    }
    if law.basis().is_rational() {
        if let Ok(rebased) = to_lattice_form(law) {
            let lf = rebased.lattice_form().cloned().expect("lattice form filled in");
            return lattice_reduction(&rebased, lf);
        }
    }
    let basis = law.basis();
    let dim = basis.dim();
    let offset_coords = Coords::new((0..dim).map(|j| law.iter().map(|(c, _)| c.as_slice()[j]).min().unwrap_or(0)));
    let terms = law.iter().map(|(c, p)| (c - &offset_coords, p)).collect();
    Reduced {
        basis: basis.clone(),
        directions: (0..dim).map(|j| Coords::unit(dim, j)).collect(),
        torus: TorusFunction::new(dim, terms, basis.alphas(), basis.value_of(&offset_coords)),
        offset_coords,
        lattice: None,
    }
}

fn lattice_reduction(law: &DiscreteLaw, lf: LatticeForm) -> Reduced {
    let terms = law
        .iter()
        .map(|(c, p)| (Coords::from([lf.index_of(c).expect("support lies on the lattice")]), p))
        .collect();
    Reduced {
        basis: law.basis().clone(),
        offset_coords: lf.offset_coords.clone(),
        directions: vec![lf.span_coords.clone()],
        torus: TorusFunction::new(1, terms, vec![lf.span], lf.offset),
        lattice: Some(lf),
    }
}

/// Controls for [`certify_separation`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparationParams {
    /// Maximum number of bisections along any one axis of a cell.
    pub max_depth: u32,
    /// Centre values at or below this count as zeros.
    pub zero_tol: f64,
    /// Certify once every cell bound reaches this fraction of the best value seen.
    pub target_gap: f64,
    /// Total number of cell evaluations allowed.
    pub max_cells: usize,
}

impl Default for SeparationParams {
    fn default() -> Self {
        Self { max_depth: 40, zero_tol: 1e-10, target_gap: 0.9, max_cells: 1 << 20 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZeroKind {
    /// A zero of `f` on the real line (lattice laws).
    RealZero,
    /// The torus function vanishes, so `inf_t |f(t)| = 0` by density even if
    /// `f` itself has no real zero.
    TorusInfimum,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    /// `inf_t |f(t)| ≥ mu`, proved by the cell cover.
    Certified { mu: f64 },
    /// `|φ̃(point)| = modulus ≤ zero_tol`. `t` is a real location when the
    /// reduced torus is a circle.
    ZeroFound { point: Vec<f64>, t: Option<f64>, modulus: f64, kind: ZeroKind },
    /// Neither certificate closed within the budget.
    Undecided { best_inf_estimate: f64, depth: u32 },
}

/// One line of the subdivision trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchStep {
    pub cells: usize,
    pub best_value: f64,
    pub min_lower_bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeparationCertificate {
    pub verdict: Verdict,
    /// Smallest `|φ̃|` seen at any cell centre (an upper bound on the infimum).
    pub best_inf_estimate: f64,
    pub cells: usize,
    /// Dimension of the torus actually searched.
    pub torus_dim: usize,
    /// Whether the basis independence that links torus and line was only
    /// asserted by the caller. Certified bounds are sound either way.
    pub independence_trusted: bool,
    pub search_log: Vec<SearchStep>,
}

impl SeparationCertificate {
    pub fn mu(&self) -> Option<f64> {
        match self.verdict {
            Verdict::Certified { mu } => Some(mu),
            _ => None,
        }
    }

    pub fn is_certified(&self) -> bool {
        matches!(self.verdict, Verdict::Certified { .. })
    }

    pub fn is_zero_found(&self) -> bool {
        matches!(self.verdict, Verdict::ZeroFound { .. })
    }
}

/// Branch and bound for `min |φ̃|` over the (reduced) torus of the law.
pub fn certify_separation(law: &DiscreteLaw, params: &SeparationParams) -> SeparationCertificate {
    let reduced = reduce(law);
    let torus = &reduced.torus;
    let independence_trusted = reduced.rank() >= 2;
    let finish = |verdict, best, cells, log| SeparationCertificate {
        verdict,
        best_inf_estimate: best,
        cells,
        torus_dim: torus.dim(),
        independence_trusted,
        search_log: log,
    };
    match branch_and_bound(torus, params, Stop::Gap(params.target_gap)) {
        Outcome::Stopped { lower, best, cells, log } => finish(Verdict::Certified { mu: lower }, best, cells, log),
        Outcome::Zero { point, value, cells, log } => {
            let (kind, t) = if torus.dim() == 1 {
                let span = torus.alphas()[0];
                (ZeroKind::RealZero, Some(point[0] / span))
            } else {
                (ZeroKind::TorusInfimum, None)
            };
            finish(Verdict::ZeroFound { point, t, modulus: value, kind }, value, cells, log)
        }
        Outcome::Exhausted { best, depth, cells, log } => {
            finish(Verdict::Undecided { best_inf_estimate: best, depth }, best, cells, log)
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Stop {
    /// Stop when the smallest bound reaches `gap × best`.
    Gap(f64),
    /// Stop when `best − smallest bound ≤ tol`.
    Bracket(f64),
}

enum Outcome {
    Stopped { lower: f64, best: f64, cells: usize, log: Vec<SearchStep> },
    Zero { point: Vec<f64>, value: f64, cells: usize, log: Vec<SearchStep> },
    Exhausted { best: f64, depth: u32, cells: usize, log: Vec<SearchStep> },
}

#[derive(Debug, Clone)]
struct Cell {
    center: Vec<f64>,
    half: Vec<f64>,
    level: Vec<u32>,
    lower: f64,
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Cell {}

impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Cell {
    // Reversed so that `BinaryHeap` pops the smallest bound first; ties are
    // broken on the centre for a deterministic search order.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .lower
            .total_cmp(&self.lower)
            .then_with(|| {
                other
                    .center
                    .iter()
                    .zip(&self.center)
                    .map(|(a, b)| a.total_cmp(b))
                    .find(|o| o.is_ne())
                    .unwrap_or(Ordering::Equal)
            })
    }
}

fn branch_and_bound(torus: &TorusFunction, params: &SeparationParams, stop: Stop) -> Outcome {
    let f = torus.recentred();
    let lip = f.lipschitz();
    let dim = f.dim();
    let mut log = Vec::new();
    let mut cells = 0usize;
    let mut best = f64::INFINITY;
    let mut heap = BinaryHeap::new();

    let make = |center: Vec<f64>, half: Vec<f64>, level: Vec<u32>, best: &mut f64, cells: &mut usize| {
        *cells += 1;
        let value = f.eval(&center).norm();
        let spread: f64 = lip.iter().zip(&half).map(|(l, h)| l * h).sum();
        // A few ulps of slack for the evaluation itself.
        let lower = value - spread - 1e-14;
        if value < *best {
            *best = value;
        }
        (Cell { center, half, level, lower }, value)
    };

    let (root, value) = make(vec![PI; dim], vec![PI; dim], vec![0; dim], &mut best, &mut cells);
    if value <= params.zero_tol {
        return Outcome::Zero { point: root.center, value, cells, log };
    }
    heap.push(root);

    while let Some(cell) = heap.pop() {
        if cells.is_power_of_two() || heap.is_empty() {
            log.push(SearchStep { cells, best_value: best, min_lower_bound: cell.lower });
        }
        let done = match stop {
            Stop::Gap(gap) => cell.lower > 0.0 && cell.lower >= gap * best,
            Stop::Bracket(tol) => best - cell.lower <= tol,
        };
        if done {
            return Outcome::Stopped { lower: cell.lower, best, cells, log };
        }
        let depth = cell.level.iter().copied().max().unwrap_or(0);
        if cells >= params.max_cells {
            return Outcome::Exhausted { best, depth, cells, log };
        }
        let axis = (0..dim)
            .filter(|&j| cell.level[j] < params.max_depth)
            .max_by(|&a, &b| (lip[a] * cell.half[a]).total_cmp(&(lip[b] * cell.half[b])).then(b.cmp(&a)));
        let Some(axis) = axis else {
            return Outcome::Exhausted { best, depth, cells, log };
        };
        for side in [-1.0, 1.0] {
            let mut center = cell.center.clone();
            let mut half = cell.half.clone();
            let mut level = cell.level.clone();
            half[axis] *= 0.5;
            center[axis] += side * half[axis];
            level[axis] += 1;
            let (child, value) = make(center, half, level, &mut best, &mut cells);
            if value <= params.zero_tol {
                let point = child.center.iter().map(|&x| wrap_pi(x - PI) + PI).collect();
                return Outcome::Zero { point, value, cells, log };
            }
            heap.push(child);
        }
    }
    // Only reachable for a zero-dimensional torus, which has no cells to split.
    Outcome::Stopped { lower: best, best, cells, log }
}
