use core::f64::consts::{PI, TAU};

use num_complex::Complex64;

#[inline]
pub(crate) fn cis(x: f64) -> Complex64 {
    Complex64::new(libm::cos(x), libm::sin(x))
}

/// Principal representative of `x` in `(−π, π]`.
#[inline]
pub(crate) fn wrap_pi(x: f64) -> f64 {
    let mut y = x - TAU * libm::floor(x / TAU);
    if y > PI {
        y -= TAU;
    }
    y
}

#[inline]
pub(crate) fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

#[inline]
pub(crate) fn round(x: f64) -> f64 {
    libm::round(x)
}

/// `ln Γ(n + 1)` for small integer `n`, accumulated directly.
pub(crate) fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| libm::log(k as f64)).sum()
}
