//! Plot-ready samples of a characteristic function.

use alloc::vec::Vec;

use crate::charfn::cf_eval;
use crate::measures::DiscreteLaw;
use crate::spectral::{ArgTracker, SpectralError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveRow {
    pub t: f64,
    pub re: f64,
    pub im: f64,
    pub modulus: f64,
    /// Continuous argument from `Arg f(0) = 0`, not the principal value.
    pub arg: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CurveError {
    #[error("need at least two samples")]
    TooFewSamples,
    #[error("range must be finite with t_min < t_max")]
    InvalidRange,
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// `samples` equally spaced rows on `[t_min, t_max]`.
pub fn emit_curves(law: &DiscreteLaw, t_min: f64, t_max: f64, samples: usize) -> Result<Vec<CurveRow>, CurveError> {
    if samples < 2 {
        return Err(CurveError::TooFewSamples);
    }
    if !(t_min.is_finite() && t_max.is_finite() && t_min < t_max) {
        return Err(CurveError::InvalidRange);
    }
    let h = (t_max - t_min) / (samples - 1) as f64;
    let ts: Vec<f64> = (0..samples).map(|j| if j + 1 == samples { t_max } else { t_min + h * j as f64 }).collect();

    // Arg f(−t) = −Arg f(t), so negative times are tracked on |t| as well.
    let mut args = alloc::vec![0.0; samples];
    let mut forward = ArgTracker::new(law);
    for (j, &t) in ts.iter().enumerate().filter(|(_, t)| **t >= 0.0) {
        args[j] = forward.advance_to(t)?;
    }
    let mut backward = ArgTracker::new(law);
    for (j, &t) in ts.iter().enumerate().rev().filter(|(_, t)| **t < 0.0) {
        args[j] = -backward.advance_to(-t)?;
    }
    Ok(ts
        .iter()
        .zip(args)
        .map(|(&t, arg)| {
            let z = cf_eval(law, t);
            CurveRow { t, re: z.re, im: z.im, modulus: z.norm(), arg }
        })
        .collect())
}
