//! Radix-2 complex FFT on power-of-two grids, in one or several dimensions.
//!
//! Multi-dimensional buffers are flat with axis 0 varying fastest, i.e. the
//! point `(j_0, …, j_{r−1})` lives at `Σ_a j_a · n^a`.

use alloc::vec::Vec;
use core::f64::consts::TAU;

use num_complex::Complex64;

use crate::math::cis;

/// Sign convention of the exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `X_k = Σ_j x_j e^{−2πi jk/n}`
    Forward,
    /// `x_j = Σ_k X_k e^{+2πi jk/n}` (unnormalized)
    Backward,
}

/// In-place FFT of a single line. Panics unless `data.len()` is a power of two.
pub fn fft_in_place(data: &mut [Complex64], direction: Direction) {
    let n = data.len();
    assert!(n.is_power_of_two(), "fft length must be a power of two");
    if n <= 1 {
        return;
    }
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            data.swap(i, j);
        }
    }
    let sign = match direction {
        Direction::Forward => -1.0,
        Direction::Backward => 1.0,
    };
    let mut len = 2;
    while len <= n {
        let half = len / 2;
        // Twiddles are computed directly per index instead of by repeated
        // multiplication; this keeps the error at a few ulps for large n.
        let twiddles: Vec<Complex64> = (0..half)
            .map(|k| cis(sign * TAU * k as f64 / len as f64))
            .collect();
        for start in (0..n).step_by(len) {
            for k in 0..half {
                let a = data[start + k];
                let b = data[start + k + half] * twiddles[k];
                data[start + k] = a + b;
                data[start + k + half] = a - b;
            }
        }
        len <<= 1;
    }
}

/// FFT over every axis of a flat `rank`-dimensional cube with side `n`.
pub fn fft_nd(data: &mut [Complex64], n: usize, rank: usize, direction: Direction) {
    assert_eq!(data.len(), n.pow(rank as u32), "buffer does not match grid shape");
    let mut line = alloc::vec![Complex64::new(0.0, 0.0); n];
    for axis in 0..rank {
        let stride = n.pow(axis as u32);
        let block = stride * n;
        for outer in (0..data.len()).step_by(block) {
            for inner in 0..stride {
                let base = outer + inner;
                if stride == 1 {
                    fft_in_place(&mut data[base..base + n], direction);
                    continue;
                }
                for (j, slot) in line.iter_mut().enumerate() {
                    *slot = data[base + j * stride];
                }
                fft_in_place(&mut line, direction);
                for (j, value) in line.iter().enumerate() {
                    data[base + j * stride] = *value;
                }
            }
        }
    }
}

/// Signed frequency represented by grid index `j` on an axis of length `n`.
#[inline]
pub fn signed_index(j: usize, n: usize) -> i64 {
    if j < n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

/// Grid index of the (possibly negative) integer `k` modulo `n`.
#[inline]
pub fn fold_index(k: i64, n: usize) -> usize {
    k.rem_euclid(n as i64) as usize
}
