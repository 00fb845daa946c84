use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Neg, Sub};

use num_rational::Ratio;
use smallvec::SmallVec;

use super::MeasureError;

/// Integer coordinates of a point of the module `⟨X⟩` with respect to a
/// [`FrequencyBasis`].
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Coords(SmallVec<[i64; 4]>);

impl Coords {
    pub fn new(values: impl IntoIterator<Item = i64>) -> Self {
        Self(values.into_iter().collect())
    }

    pub fn zero(dim: usize) -> Self {
        Self(smallvec::smallvec![0; dim])
    }

    /// The `axis`-th unit vector of `Z^dim`.
    pub fn unit(dim: usize, axis: usize) -> Self {
        let mut c = Self::zero(dim);
        c.0[axis] = 1;
        c
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[i64] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn scaled(&self, k: i64) -> Self {
        Self(self.0.iter().map(|&c| c * k).collect())
    }

    /// `‖c‖_1`
    pub fn l1(&self) -> u64 {
        self.0.iter().map(|c| c.unsigned_abs()).sum()
    }
}

impl fmt::Debug for Coords {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0.as_slice())
    }
}

impl From<Vec<i64>> for Coords {
    fn from(v: Vec<i64>) -> Self {
        Self::new(v)
    }
}

impl<const N: usize> From<[i64; N]> for Coords {
    fn from(v: [i64; N]) -> Self {
        Self::new(v)
    }
}

impl Add for &Coords {
    type Output = Coords;

    fn add(self, rhs: &Coords) -> Coords {
        debug_assert_eq!(self.dim(), rhs.dim());
        Coords(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &Coords {
    type Output = Coords;

    fn sub(self, rhs: &Coords) -> Coords {
        debug_assert_eq!(self.dim(), rhs.dim());
        Coords(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &Coords {
    type Output = Coords;

    fn neg(self) -> Coords {
        Coords(self.0.iter().map(|a| -a).collect())
    }
}

/// One generator `α_j` of a frequency basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Generator {
    Rational(Ratio<i64>),
    Real(f64),
}

impl Generator {
    pub fn value(&self) -> f64 {
        match *self {
            Generator::Rational(r) => *r.numer() as f64 / *r.denom() as f64,
            Generator::Real(x) => x,
        }
    }

    pub fn as_rational(&self) -> Option<Ratio<i64>> {
        match *self {
            Generator::Rational(r) => Some(r),
            Generator::Real(_) => None,
        }
    }
}

impl From<i64> for Generator {
    fn from(n: i64) -> Self {
        Generator::Rational(Ratio::from_integer(n))
    }
}

/// Generators `α_1, …, α_d` through which every support point is written with
/// integer coordinates.
///
/// Z-linear independence is user-asserted (`declared_independent`) and never
/// verified; rational generators are exact.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyBasis {
    generators: Vec<Generator>,
    declared_independent: bool,
}

impl FrequencyBasis {
    pub fn new(
        generators: Vec<Generator>,
        declared_independent: bool,
    ) -> Result<Self, MeasureError> {
        if generators.is_empty() {
            return Err(MeasureError::InvalidBasis("basis must have at least one generator"));
        }
        for g in &generators {
            if let Generator::Rational(r) = g {
                if *r.denom() == 0 {
                    return Err(MeasureError::InvalidBasis("rational generator with zero denominator"));
                }
            }
            if !g.value().is_finite() {
                return Err(MeasureError::InvalidBasis("generators must be finite"));
            }
        }
        let trivial = generators.len() == 1 && generators[0].value() == 0.0;
        if !trivial {
            for (i, g) in generators.iter().enumerate() {
                if g.value() == 0.0 {
                    return Err(MeasureError::InvalidBasis("generators must be nonzero"));
                }
                if generators[..i].iter().any(|h| h == g || h.value() == g.value()) {
                    return Err(MeasureError::InvalidBasis("generators must be distinct"));
                }
            }
        }
        Ok(Self { generators, declared_independent })
    }

    /// The basis `{1}`: support coordinates are the integers themselves.
    pub fn integers() -> Self {
        Self { generators: alloc::vec![Generator::from(1)], declared_independent: true }
    }

    /// A single rational generator.
    pub fn rational(r: Ratio<i64>) -> Result<Self, MeasureError> {
        Self::new(alloc::vec![Generator::Rational(r)], true)
    }

    /// Real generators declared Z-linearly independent.
    pub fn reals(alphas: &[f64]) -> Result<Self, MeasureError> {
        Self::new(alphas.iter().map(|&a| Generator::Real(a)).collect(), true)
    }

    /// The trivial basis `{0}` of a law degenerate at the origin.
    pub fn trivial() -> Self {
        Self { generators: alloc::vec![Generator::from(0)], declared_independent: true }
    }

    pub fn dim(&self) -> usize {
        self.generators.len()
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn declared_independent(&self) -> bool {
        self.declared_independent
    }

    pub fn alphas(&self) -> Vec<f64> {
        self.generators.iter().map(Generator::value).collect()
    }

    pub fn is_trivial(&self) -> bool {
        self.generators.len() == 1 && self.generators[0].value() == 0.0
    }

    pub fn is_rational(&self) -> bool {
        self.generators.iter().all(|g| g.as_rational().is_some())
    }

    /// `Σ_j c_j α_j` in floating point (exact first when all generators are rational).
    pub fn value_of(&self, coords: &Coords) -> f64 {
        if let Some(r) = self.rational_value_of(coords) {
            return *r.numer() as f64 / *r.denom() as f64;
        }
        coords
            .as_slice()
            .iter()
            .zip(&self.generators)
            .map(|(&c, g)| c as f64 * g.value())
            .sum()
    }

    /// Exact `Σ_j c_j α_j` when every generator is rational.
    pub fn rational_value_of(&self, coords: &Coords) -> Option<Ratio<i64>> {
        let mut acc = Ratio::from_integer(0);
        for (&c, g) in coords.as_slice().iter().zip(&self.generators) {
            acc += g.as_rational()? * Ratio::from_integer(c);
        }
        Some(acc)
    }

    pub(crate) fn check_coords(&self, coords: &Coords) -> Result<(), MeasureError> {
        if coords.dim() != self.dim() {
            return Err(MeasureError::DimensionMismatch {
                expected: self.dim(),
                found: coords.dim(),
            });
        }
        Ok(())
    }
}

/// A support point: exact coordinates together with the derived real value.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportPoint {
    pub coords: Coords,
    pub value: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_validation() {
        assert!(FrequencyBasis::reals(&[]).is_err());
        assert!(FrequencyBasis::reals(&[1.0, 1.0]).is_err());
        assert!(FrequencyBasis::reals(&[1.0, 0.0]).is_err());
        assert!(FrequencyBasis::reals(&[f64::NAN]).is_err());
        assert!(FrequencyBasis::reals(&[0.0]).is_ok());
        assert!(FrequencyBasis::reals(&[1.0, core::f64::consts::SQRT_2]).is_ok());
    }

    #[test]
    fn values_are_pure_functions_of_coords() {
        let b = FrequencyBasis::new(
            alloc::vec![Generator::Rational(Ratio::new(2, 3)), Generator::Rational(Ratio::new(1, 2))],
            false,
        )
        .unwrap();
        let c = Coords::from([3, -1]);
        assert_eq!(b.rational_value_of(&c), Some(Ratio::new(3, 2)));
        assert_eq!(b.value_of(&c), 1.5);

        let r = FrequencyBasis::reals(&[1.0, core::f64::consts::SQRT_2]).unwrap();
        let v = r.value_of(&Coords::from([2, 3]));
        assert!((v - (2.0 + 3.0 * core::f64::consts::SQRT_2)).abs() <= 4.0 * f64::EPSILON * v);
        assert!(r.rational_value_of(&Coords::from([1, 0])).is_none());
    }

    #[test]
    fn coords_arithmetic() {
        let a = Coords::from([1, 2]);
        let b = Coords::from([3, -5]);
        assert_eq!(&a + &b, Coords::from([4, -3]));
        assert_eq!(&a - &b, Coords::from([-2, 7]));
        assert_eq!(a.scaled(-2), Coords::from([-2, -4]));
        assert_eq!(b.l1(), 8);
        assert!(Coords::zero(3).is_zero());
    }
}
