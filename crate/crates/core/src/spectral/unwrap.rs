//! Distinguished logarithm along sampled paths and along the real line.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use super::SpectralError;
use crate::measures::DiscreteLaw;

/// Default modulus below which a sample counts as a zero.
pub const ZERO_TOL: f64 = 1e-10;

/// Continuous branch of `log` along `values`, starting from `log 1 = 0`.
///
/// `step_guard` bounds the principal phase increment between neighbours;
/// larger increments mean the path is sampled too coarsely to tell branches
/// apart.
pub fn distinguished_log(values: &[Complex64], step_guard: f64) -> Result<Vec<Complex64>, SpectralError> {
    let Some(first) = values.first() else {
        return Ok(Vec::new());
    };
    if (first - 1.0).norm() > 1e-12 {
        return Err(SpectralError::FirstValueNotOne);
    }
    let mut out = Vec::with_capacity(values.len());
    let mut phase = 0.0;
    let mut prev = *first;
    out.push(Complex64::new(0.0, 0.0));
    for (index, &v) in values.iter().enumerate().skip(1) {
        let modulus = v.norm();
        if modulus < ZERO_TOL {
            return Err(SpectralError::ZeroOnPath { index, modulus });
        }
        let jump = (v / prev).arg();
        if libm::fabs(jump) >= step_guard {
            return Err(SpectralError::StepTooCoarse { index, jump });
        }
        phase += jump;
        prev = v;
        out.push(Complex64::new(libm::log(modulus), phase));
    }
    Ok(out)
}

/// Tracks `Arg f(t)` continuously from `t = 0` for a discrete law.
///
/// `f(t) = e^{itc} g(t)` with `c` the weighted median of the support, and the
/// step from `t` is `|g(t)| / (2L)` where `L = Σ p_k |x_k − c|` bounds `|g'|`.
/// On such a step `|g|` stays above `|g(t)|/2`, so the phase of `g` moves by
/// less than one radian and the principal increment is the true one.
#[derive(Debug, Clone)]
pub struct ArgTracker {
    points: Vec<(f64, f64)>,
    center: f64,
    lipschitz: f64,
    t: f64,
    g: Complex64,
    arg_g: f64,
}

impl ArgTracker {
    pub fn new(law: &DiscreteLaw) -> Self {
        let basis = law.basis();
        let mut points: Vec<(f64, f64)> = law.iter().map(|(c, p)| (basis.value_of(c), p)).collect();
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut acc = 0.0;
        let mut center = points[0].0;
        for &(x, p) in &points {
            acc += p;
            if acc >= 0.5 {
                center = x;
                break;
            }
        }
        let lipschitz = points.iter().map(|(x, p)| p * libm::fabs(x - center)).sum();
        let g = Complex64::new(points.iter().map(|(_, p)| p).sum(), 0.0);
        Self { points, center, lipschitz, t: 0.0, g, arg_g: 0.0 }
    }

    fn g_at(&self, t: f64) -> Complex64 {
        self.points
            .iter()
            .map(|&(x, p)| crate::math::cis(t * (x - self.center)) * p)
            .sum()
    }

    /// `Arg f(target)` for `target ≥` the last target requested.
    pub fn advance_to(&mut self, target: f64) -> Result<f64, SpectralError> {
        assert!(target >= self.t, "ArgTracker only moves forward");
        let mut steps = 0usize;
        while self.t < target {
            let modulus = self.g.norm();
            if modulus < ZERO_TOL {
                return Err(SpectralError::ZeroOnPath { index: steps, modulus });
            }
            let h = if self.lipschitz > 0.0 { 0.5 * modulus / self.lipschitz } else { f64::INFINITY };
            let next = if self.t + h >= target { target } else { self.t + h };
            let g_next = self.g_at(next);
            self.arg_g += (g_next / self.g).arg();
            self.g = g_next;
            self.t = next;
            steps += 1;
        }
        Ok(self.t * self.center + self.arg_g)
    }

    pub fn value(&self) -> Complex64 {
        crate::math::cis(self.t * self.center) * self.g
    }
}

/// `Arg f(t)` at each `t` of an ascending, nonnegative schedule.
pub fn continuous_arg(law: &DiscreteLaw, ts: &[f64]) -> Result<Vec<f64>, SpectralError> {
    let mut tracker = ArgTracker::new(law);
    ts.iter().map(|&t| tracker.advance_to(t)).collect()
}

/// Default `step_guard` for [`distinguished_log`].
pub const STEP_GUARD: f64 = 0.9 * PI;
