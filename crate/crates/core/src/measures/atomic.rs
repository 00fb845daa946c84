use alloc::collections::BTreeMap;
use core::ops::{Add, Mul, Neg};

use num_traits::{Signed, Zero};

use super::{Coords, FrequencyBasis, MeasureError};

/// A finitely supported atomic measure over a [`FrequencyBasis`] with weights
/// of type `W`. Exact zeros are never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomicMeasure<W> {
    basis: FrequencyBasis,
    atoms: BTreeMap<Coords, W>,
}

/// Real-weighted atomic measure: logs, differences and fractional powers land here.
pub type SignedAtomicMeasure = AtomicMeasure<f64>;

impl<W> AtomicMeasure<W> {
    pub fn zero(basis: FrequencyBasis) -> Self {
        Self { basis, atoms: BTreeMap::new() }
    }

    pub fn basis(&self) -> &FrequencyBasis {
        &self.basis
    }

    pub fn atoms(&self) -> &BTreeMap<Coords, W> {
        &self.atoms
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Coords, &W)> {
        self.atoms.iter()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn get(&self, coords: &Coords) -> Option<&W> {
        self.atoms.get(coords)
    }

    pub(crate) fn into_parts(self) -> (FrequencyBasis, BTreeMap<Coords, W>) {
        (self.basis, self.atoms)
    }
}

impl<W: Clone + Zero> AtomicMeasure<W> {
    /// Builds a measure; repeated coordinates accumulate.
    pub fn from_atoms(
        basis: FrequencyBasis,
        atoms: impl IntoIterator<Item = (Coords, W)>,
    ) -> Result<Self, MeasureError> {
        let mut m = Self::zero(basis);
        for (c, w) in atoms {
            m.basis.check_coords(&c)?;
            m.add_at(c, w);
        }
        Ok(m)
    }

    /// Unit point mass `δ_c`.
    pub fn dirac(basis: FrequencyBasis, coords: Coords) -> Result<Self, MeasureError>
    where
        W: num_traits::One,
    {
        Self::from_atoms(basis, [(coords, W::one())])
    }

    pub(crate) fn from_map_unchecked(basis: FrequencyBasis, atoms: BTreeMap<Coords, W>) -> Self {
        let atoms = atoms.into_iter().filter(|(_, w)| !w.is_zero()).collect();
        Self { basis, atoms }
    }

    pub(crate) fn add_at(&mut self, coords: Coords, w: W) {
        use alloc::collections::btree_map::Entry;
        match self.atoms.entry(coords) {
            Entry::Vacant(e) => {
                if !w.is_zero() {
                    e.insert(w);
                }
            }
            Entry::Occupied(mut e) => {
                let sum = e.get().clone() + w;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    /// Pointwise sum; bases must coincide element-wise.
    pub fn plus(&self, other: &Self) -> Result<Self, MeasureError> {
        same_basis(&self.basis, &other.basis)?;
        let mut out = self.clone();
        for (c, w) in &other.atoms {
            out.add_at(c.clone(), w.clone());
        }
        Ok(out)
    }

    /// Pointwise difference `self − other`.
    pub fn minus(&self, other: &Self) -> Result<Self, MeasureError>
    where
        W: Neg<Output = W>,
    {
        same_basis(&self.basis, &other.basis)?;
        let mut out = self.clone();
        for (c, w) in &other.atoms {
            out.add_at(c.clone(), -w.clone());
        }
        Ok(out)
    }

    /// Translation by `shift` (convolution with `δ_shift`).
    pub fn shifted(&self, shift: &Coords) -> Self {
        let atoms = self.atoms.iter().map(|(c, w)| (c + shift, w.clone())).collect();
        Self { basis: self.basis.clone(), atoms }
    }

    /// Sum of all weights.
    pub fn total_mass(&self) -> W {
        self.atoms.values().fold(W::zero(), |acc, w| acc + w.clone())
    }
}

impl AtomicMeasure<f64> {
    pub fn scaled(&self, k: f64) -> Self {
        let atoms = self.atoms.iter().map(|(c, w)| (c.clone(), w * k)).collect();
        Self::from_map_unchecked(self.basis.clone(), atoms)
    }

    /// Drops atoms with `|w| < threshold`; returns the discarded total variation.
    pub fn prune(&mut self, threshold: f64) -> f64 {
        let mut dropped = 0.0;
        self.atoms.retain(|_, w| {
            if libm::fabs(*w) < threshold {
                dropped += libm::fabs(*w);
                false
            } else {
                true
            }
        });
        dropped
    }
}

pub(crate) fn same_basis(a: &FrequencyBasis, b: &FrequencyBasis) -> Result<(), MeasureError> {
    if a == b {
        Ok(())
    } else {
        Err(MeasureError::BasisMismatch)
    }
}

/// `‖m‖ = Σ |w|`.
pub fn total_variation<W: Signed + Clone>(m: &AtomicMeasure<W>) -> W {
    m.atoms.values().fold(W::zero(), |acc, w| acc + w.abs())
}

/// Convolution `m1 * m2`: atoms add coordinate-wise and weights multiply.
///
/// Bases must be identical element-wise; no merging is attempted.
pub fn convolve<W>(m1: &AtomicMeasure<W>, m2: &AtomicMeasure<W>) -> Result<AtomicMeasure<W>, MeasureError>
where
    W: Clone + Zero + Add<Output = W> + Mul<Output = W>,
{
    same_basis(&m1.basis, &m2.basis)?;
    let mut out = AtomicMeasure::zero(m1.basis.clone());
    for (c1, w1) in &m1.atoms {
        for (c2, w2) in &m2.atoms {
            out.add_at(c1 + c2, w1.clone() * w2.clone());
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn on_z(atoms: &[(i64, f64)]) -> SignedAtomicMeasure {
        AtomicMeasure::from_atoms(
            FrequencyBasis::integers(),
            atoms.iter().map(|&(c, w)| (Coords::from([c]), w)),
        )
        .unwrap()
    }

    #[test]
    fn total_variation_examples() {
        assert_eq!(total_variation(&SignedAtomicMeasure::zero(FrequencyBasis::integers())), 0.0);
        assert_eq!(total_variation(&on_z(&[(0, 0.3), (4, 0.7)])), 1.0);
        // G_2 − G on {0, 1}
        let diff = on_z(&[(0, 0.75), (1, 0.25)]).minus(&on_z(&[(0, 0.5), (1, 0.5)])).unwrap();
        assert!((total_variation(&diff) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn convolution_examples() {
        let m = on_z(&[(-2, 0.25), (1, -0.5), (7, 1.25)]);
        let delta0 = on_z(&[(0, 1.0)]);
        assert_eq!(convolve(&delta0, &m).unwrap(), m);

        let da = on_z(&[(3, 1.0)]);
        let db = on_z(&[(-5, 1.0)]);
        assert_eq!(convolve(&da, &db).unwrap(), on_z(&[(-2, 1.0)]));

        let bern = on_z(&[(0, 0.5), (1, 0.5)]);
        assert_eq!(convolve(&bern, &bern).unwrap(), on_z(&[(0, 0.25), (1, 0.5), (2, 0.25)]));
    }

    #[test]
    fn convolution_rejects_different_bases() {
        let a = on_z(&[(0, 1.0)]);
        let b = AtomicMeasure::from_atoms(FrequencyBasis::reals(&[2.0]).unwrap(), vec![(Coords::from([0]), 1.0)])
            .unwrap();
        assert_eq!(convolve(&a, &b), Err(MeasureError::BasisMismatch));
    }

    #[test]
    fn zero_weights_are_not_stored() {
        let m = on_z(&[(0, 1.0), (0, -1.0), (2, 0.0)]);
        assert!(m.is_empty());
    }
}
