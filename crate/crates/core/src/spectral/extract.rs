use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use num_complex::Complex64;

use super::{ExtractionDiagnostics, LatticeIndexing, QuasiTriplet, SpectralError, TripletParams};
use crate::charfn::{certify_separation, reduce, Reduced, Verdict};
use crate::fft::{fft_nd, fold_index, signed_index, Direction};
use crate::measures::{Coords, DiscreteLaw};

/// Triplet of a law carrying a lattice form `a + bZ`.
pub fn triplet_lattice(law: &DiscreteLaw, params: &TripletParams) -> Result<QuasiTriplet, SpectralError> {
    if law.lattice_form().is_none() {
        return Err(SpectralError::MissingLatticeForm);
    }
    triplet_multibasis(law, params)
}

/// Triplet of a law over its declared basis, working on the reduced torus.
///
/// Rational laws over several generators come back over the single generator
/// of their module.
pub fn triplet_multibasis(law: &DiscreteLaw, params: &TripletParams) -> Result<QuasiTriplet, SpectralError> {
    let cert = certify_separation(law, &params.separation);
    let mu = match cert.verdict {
        Verdict::Certified { mu } => mu,
        Verdict::ZeroFound { modulus, .. } => return Err(SpectralError::NotSeparated { modulus }),
        Verdict::Undecided { best_inf_estimate, .. } => {
            return Err(SpectralError::SeparationUndecided { best_inf_estimate })
        }
    };
    let reduced = reduce(law);
    let rank = reduced.rank();
    let terms: Vec<(Vec<i64>, f64)> =
        reduced.torus.terms().iter().map(|(c, p)| (c.as_slice().to_vec(), *p)).collect();

    let (winding, lambdas, diag) = if rank == 0 {
        (Vec::new(), BTreeMap::new(), None)
    } else {
        let (init, max) = params.grid_bounds(rank);
        let reach = terms.iter().flat_map(|(l, _)| l.iter()).map(|k| k.unsigned_abs() as usize).max().unwrap_or(0);
        let mut n = init.max((4 * (reach + 1)).next_power_of_two()).min(max.max(init));
        loop {
            match attempt(&terms, rank, n, params) {
                Attempt::Accepted(out) => {
                    let mut diag = out.diagnostics;
                    diag.separation_mu = mu;
                    break (out.winding, out.lambdas, Some(diag));
                }
                Attempt::Refine { aliasing, residual } => {
                    if n >= max {
                        return Err(SpectralError::NonConvergent { grid: n, aliasing, residual });
                    }
                    n *= 2;
                }
            }
        }
    };
    Ok(assemble(&reduced, winding, lambdas, diag))
}

fn assemble(
    reduced: &Reduced,
    winding: Vec<i64>,
    lambdas: BTreeMap<Vec<i64>, f64>,
    diagnostics: Option<ExtractionDiagnostics>,
) -> QuasiTriplet {
    let gamma_coords = reduced.lift(&winding, true);
    let mut map: BTreeMap<Coords, f64> = BTreeMap::new();
    for (k, w) in lambdas {
        *map.entry(reduced.lift(&k, false)).or_insert(0.0) += w;
    }
    map.retain(|u, w| !u.is_zero() && *w != 0.0);
    let tail_bound = diagnostics.as_ref().map_or(0.0, |d| d.aliasing_mass + d.dropped_mass);
    let lattice = reduced.lattice.as_ref().map(|lf| LatticeIndexing {
        offset_coords: lf.offset_coords.clone(),
        span_coords: lf.span_coords.clone(),
        offset: lf.offset,
        span: lf.span,
        winding: winding.first().copied().unwrap_or(0),
    });
    QuasiTriplet {
        basis: reduced.basis.clone(),
        gamma_coords,
        lambdas: map,
        tail_bound,
        input_truncation: 0.0,
        lattice,
        diagnostics,
    }
}

struct Extracted {
    winding: Vec<i64>,
    lambdas: BTreeMap<Vec<i64>, f64>,
    diagnostics: ExtractionDiagnostics,
}

enum Attempt {
    Accepted(Extracted),
    Refine { aliasing: f64, residual: f64 },
}

/// Grid coordinates of flat index `idx`, axis 0 fastest.
fn unflatten(mut idx: usize, n: usize, rank: usize) -> Vec<usize> {
    (0..rank)
        .map(|_| {
            let j = idx % n;
            idx /= n;
            j
        })
        .collect()
}

fn masses_on_grid(terms: &[(Vec<i64>, f64)], shift: &[i64], n: usize, rank: usize) -> Vec<Complex64> {
    let mut grid = vec![Complex64::new(0.0, 0.0); n.pow(rank as u32)];
    for (l, p) in terms {
        let mut idx = 0;
        let mut stride = 1;
        for a in 0..rank {
            idx += fold_index(l[a] - shift[a], n) * stride;
            stride *= n;
        }
        grid[idx] += *p;
    }
    grid
}

fn attempt(terms: &[(Vec<i64>, f64)], rank: usize, n: usize, params: &TripletParams) -> Attempt {
    let size = n.pow(rank as u32);
    let mut psi = masses_on_grid(terms, &vec![0; rank], n, rank);
    fft_nd(&mut psi, n, rank, Direction::Backward);

    // Unwrap axis by axis: axis `a` is swept from every point already reached,
    // i.e. every point whose coordinates beyond `a` are zero.
    let mut phase = vec![f64::NAN; size];
    phase[0] = psi[0].arg();
    let mut winding = vec![0i64; rank];
    for (a, wind) in winding.iter_mut().enumerate() {
        let stride = n.pow(a as u32);
        for start in 0..stride {
            let mut prev = start;
            for j in 1..n {
                let cur = start + j * stride;
                phase[cur] = phase[prev] + (psi[cur] / psi[prev]).arg();
                prev = cur;
            }
            if start == 0 {
                let closing = phase[prev] + (psi[0] / psi[prev]).arg() - phase[0];
                *wind = crate::math::round(closing / TAU) as i64;
            }
        }
    }

    let step = TAU / n as f64;
    let mut log = vec![Complex64::new(0.0, 0.0); size];
    for (idx, slot) in log.iter_mut().enumerate() {
        let js = unflatten(idx, n, rank);
        let linear: f64 = js.iter().zip(&winding).map(|(&j, &m)| j as f64 * step * m as f64).sum();
        *slot = Complex64::new(libm::log(psi[idx].norm()), phase[idx] - linear);
    }

    // The periodic part must be continuous across every edge, wrap edges
    // included; a large jump means the grid cannot resolve the phase.
    let mut max_jump: f64 = 0.0;
    for idx in 0..size {
        let js = unflatten(idx, n, rank);
        let mut stride = 1;
        for &j in &js {
            let next = if j + 1 == n { idx - j * stride } else { idx + stride };
            max_jump = max_jump.max(libm::fabs(log[next].im - log[idx].im));
            stride *= n;
        }
    }
    if !(max_jump < params.accept_jump) {
        return Attempt::Refine { aliasing: f64::INFINITY, residual: f64::INFINITY };
    }

    fft_nd(&mut log, n, rank, Direction::Forward);
    let norm = size as f64;
    let mut aliasing = 0.0;
    let mut dropped = 0.0;
    let mut max_imag: f64 = 0.0;
    let mut lambdas = BTreeMap::new();
    for (idx, c) in log.iter().enumerate() {
        let c = c / norm;
        let k: Vec<i64> = unflatten(idx, n, rank).into_iter().map(|j| signed_index(j, n)).collect();
        if k.iter().any(|&x| 4 * x.unsigned_abs() as usize >= n) {
            aliasing += c.norm();
            continue;
        }
        if k.iter().all(|&x| x == 0) {
            continue;
        }
        if libm::fabs(c.re) < params.drop_below {
            dropped += c.norm();
            continue;
        }
        max_imag = max_imag.max(libm::fabs(c.im));
        lambdas.insert(k, c.re);
    }
    if aliasing > params.tol || max_imag > params.imag_tol {
        return Attempt::Refine { aliasing, residual: f64::INFINITY };
    }

    let residual = reconstruction_residual(terms, &winding, &lambdas, n, rank);
    if !(residual <= params.residual_tol) {
        return Attempt::Refine { aliasing, residual };
    }
    Attempt::Accepted(Extracted {
        winding: winding.clone(),
        lambdas,
        diagnostics: ExtractionDiagnostics {
            grid: n,
            rank,
            winding,
            max_phase_jump: max_jump,
            aliasing_mass: aliasing,
            dropped_mass: dropped,
            residual,
            max_imag,
            separation_mu: 0.0,
        },
    })
}

/// ℓ1 distance between `exp` of the retained exponent, taken back to
/// coefficients, and the input masses shifted by the winding.
fn reconstruction_residual(
    terms: &[(Vec<i64>, f64)],
    winding: &[i64],
    lambdas: &BTreeMap<Vec<i64>, f64>,
    n: usize,
    rank: usize,
) -> f64 {
    let size = n.pow(rank as u32);
    let mut grid = vec![Complex64::new(0.0, 0.0); size];
    let mut sum = 0.0;
    for (k, &w) in lambdas {
        let mut idx = 0;
        let mut stride = 1;
        for &x in k {
            idx += fold_index(x, n) * stride;
            stride *= n;
        }
        grid[idx] += w;
        sum += w;
    }
    grid[0] -= sum;
    fft_nd(&mut grid, n, rank, Direction::Backward);
    for z in grid.iter_mut() {
        *z = z.exp();
    }
    fft_nd(&mut grid, n, rank, Direction::Forward);
    let expected = masses_on_grid(terms, winding, n, rank);
    grid.iter().zip(&expected).map(|(g, e)| (g / size as f64 - e).norm()).sum()
}
