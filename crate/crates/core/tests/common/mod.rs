#![allow(dead_code)]

use qlevy_core::{Coords, DiscreteLaw};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Random law on `offset + {0, …, width − 1}` with one atom of mass at least `dominant`.
pub fn dominant_lattice_law(rng: &mut ChaCha8Rng, max_width: usize, dominant: f64) -> DiscreteLaw {
    let width = rng.gen_range(1..=max_width);
    let offset = rng.gen_range(-5..=5);
    let top = rng.gen_range(0..width);
    let top_mass = if width == 1 { 1.0 } else { rng.gen_range(dominant..0.95) };
    let mut rest: Vec<f64> = (0..width).map(|_| rng.gen_range(0.0..1.0)).collect();
    rest[top] = 0.0;
    let total: f64 = rest.iter().sum();
    let mut masses: Vec<f64> = if total > 0.0 {
        rest.iter().map(|r| r / total * (1.0 - top_mass)).collect()
    } else {
        vec![0.0; width]
    };
    masses[top] = top_mass;
    let sum: f64 = masses.iter().sum();
    masses.iter_mut().for_each(|m| *m /= sum);
    DiscreteLaw::on_integers(offset, &masses).unwrap()
}

/// `(1 − p) p^k` for `k ≤ last`.
pub fn geometric_masses(p: f64, last: usize) -> Vec<f64> {
    (0..=last).map(|k| (1.0 - p) * p.powi(k as i32)).collect()
}

pub fn g_n(n: usize) -> DiscreteLaw {
    let e = 1.0 / (2.0 + n as f64);
    DiscreteLaw::on_integers(0, &[0.5 + e, 0.5 - e]).unwrap()
}

pub fn coords(k: i64) -> Coords {
    Coords::from([k])
}

pub fn report(id: u32, pass: bool, detail: &str) {
    println!("criterion {id:02}: {} ({detail})", if pass { "PASS" } else { "FAIL" });
}
