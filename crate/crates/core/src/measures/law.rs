use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::{AtomicMeasure, Coords, FrequencyBasis, MeasureError, SignedAtomicMeasure, SupportPoint};

/// Tolerance on `|Σ p − 1|` for input laws.
pub const MASS_SUM_TOL: f64 = 1e-12;

/// Lattice description `X ⊂ a + bZ` of a law, in coordinates and in values.
///
/// Support coordinates are `offset_coords + l · span_coords` for integers `l`,
/// with `offset = value(offset_coords)` and `span = value(span_coords) > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeForm {
    pub offset_coords: Coords,
    pub span_coords: Coords,
    pub offset: f64,
    pub span: f64,
}

impl LatticeForm {
    /// The integer `l` with `coords = offset_coords + l · span_coords`.
    pub fn index_of(&self, coords: &Coords) -> Option<i64> {
        let diff = coords - &self.offset_coords;
        let axis = self.span_coords.as_slice().iter().position(|&s| s != 0);
        let l = match axis {
            Some(i) => {
                let (num, den) = (diff.as_slice()[i], self.span_coords.as_slice()[i]);
                if num % den != 0 {
                    return None;
                }
                num / den
            }
            None => 0,
        };
        (self.span_coords.scaled(l) == diff).then_some(l)
    }

    /// Coordinates of the lattice point with index `l`.
    pub fn coords_at(&self, l: i64) -> Coords {
        &self.offset_coords + &self.span_coords.scaled(l)
    }
}

/// Unvalidated input for [`validate_law`].
#[derive(Debug, Clone, PartialEq)]
pub struct RawLaw {
    pub basis: FrequencyBasis,
    pub atoms: Vec<(Coords, f64)>,
    pub lattice: Option<LatticeForm>,
}

/// A finitely supported probability law with exact support coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteLaw {
    measure: SignedAtomicMeasure,
    lattice: Option<LatticeForm>,
}

/// Checks the law invariants and drops zero-mass atoms.
pub fn validate_law(raw: RawLaw) -> Result<DiscreteLaw, MeasureError> {
    if raw.atoms.is_empty() {
        return Err(MeasureError::EmptyLaw);
    }
    let mut atoms = BTreeMap::new();
    let mut sum = 0.0;
    for (coords, mass) in raw.atoms {
        raw.basis.check_coords(&coords)?;
        if !mass.is_finite() {
            return Err(MeasureError::NonFiniteWeight);
        }
        if mass < 0.0 {
            return Err(MeasureError::NegativeMass { coords, mass });
        }
        if atoms.contains_key(&coords) {
            return Err(MeasureError::DuplicateAtom(coords));
        }
        sum += mass;
        atoms.insert(coords, mass);
    }
    if libm::fabs(sum - 1.0) > MASS_SUM_TOL {
        return Err(MeasureError::MassSumNotOne(sum));
    }
    let measure = AtomicMeasure::from_map_unchecked(raw.basis, atoms);
    if measure.is_empty() {
        return Err(MeasureError::EmptyLaw);
    }
    if let Some(lattice) = &raw.lattice {
        let basis = measure.basis();
        let consistent = lattice.offset_coords.dim() == basis.dim()
            && lattice.span_coords.dim() == basis.dim()
            && lattice.span > 0.0
            && measure.iter().all(|(c, _)| lattice.index_of(c).is_some());
        if !consistent {
            return Err(MeasureError::LatticeMismatch);
        }
    }
    Ok(DiscreteLaw { measure, lattice: raw.lattice })
}

impl DiscreteLaw {
    /// Law on `offset + {0, 1, …}` over the integer basis with the given masses.
    pub fn on_integers(offset: i64, masses: &[f64]) -> Result<Self, MeasureError> {
        let atoms = masses
            .iter()
            .enumerate()
            .map(|(l, &p)| (Coords::from([offset + l as i64]), p))
            .collect();
        let law = validate_law(RawLaw { basis: FrequencyBasis::integers(), atoms, lattice: None })?;
        super::to_lattice_form(&law)
    }

    /// Point mass at `coords`.
    pub fn dirac(basis: FrequencyBasis, coords: Coords) -> Result<Self, MeasureError> {
        validate_law(RawLaw { basis, atoms: alloc::vec![(coords, 1.0)], lattice: None })
    }

    pub fn basis(&self) -> &FrequencyBasis {
        self.measure.basis()
    }

    pub fn measure(&self) -> &SignedAtomicMeasure {
        &self.measure
    }

    pub fn into_measure(self) -> SignedAtomicMeasure {
        self.measure
    }

    pub fn lattice_form(&self) -> Option<&LatticeForm> {
        self.lattice.as_ref()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Coords, f64)> {
        self.measure.iter().map(|(c, &p)| (c, p))
    }

    pub fn len(&self) -> usize {
        self.measure.len()
    }

    pub fn is_empty(&self) -> bool {
        self.measure.is_empty()
    }

    pub fn mass_of(&self, coords: &Coords) -> f64 {
        self.measure.get(coords).copied().unwrap_or(0.0)
    }

    pub fn max_mass(&self) -> f64 {
        self.iter().map(|(_, p)| p).fold(0.0, f64::max)
    }

    pub fn is_degenerate(&self) -> bool {
        self.len() == 1
    }

    /// Support points with their real values, in coordinate order.
    pub fn support_points(&self) -> Vec<SupportPoint> {
        self.iter()
            .map(|(c, _)| SupportPoint { coords: c.clone(), value: self.basis().value_of(c) })
            .collect()
    }

    pub fn to_raw(&self) -> RawLaw {
        RawLaw {
            basis: self.basis().clone(),
            atoms: self.iter().map(|(c, p)| (c.clone(), p)).collect(),
            lattice: self.lattice.clone(),
        }
    }

    /// Reinterprets a nonnegative measure of total mass one as a law.
    pub fn from_measure(measure: SignedAtomicMeasure) -> Result<Self, MeasureError> {
        let (basis, atoms) = measure.into_parts();
        validate_law(RawLaw { basis, atoms: atoms.into_iter().collect(), lattice: None })
    }

    pub(crate) fn with_lattice(mut self, lattice: Option<LatticeForm>) -> Self {
        self.lattice = lattice;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw(atoms: &[(i64, f64)]) -> RawLaw {
        RawLaw {
            basis: FrequencyBasis::integers(),
            atoms: atoms.iter().map(|&(c, p)| (Coords::from([c]), p)).collect(),
            lattice: None,
        }
    }

    #[test]
    fn degenerate_law_is_valid() {
        let law = validate_law(raw(&[(0, 1.0)])).unwrap();
        assert!(law.is_degenerate());
        assert_eq!(law.mass_of(&Coords::from([0])), 1.0);
    }

    #[test]
    fn zero_mass_atoms_are_dropped() {
        let law = validate_law(raw(&[(0, 0.5), (1, 0.5), (2, 0.0)])).unwrap();
        assert_eq!(law.len(), 2);
    }

    #[test]
    fn mass_sum_must_be_one() {
        assert!(matches!(validate_law(raw(&[(0, 0.6), (1, 0.5)])), Err(MeasureError::MassSumNotOne(_))));
        assert!(validate_law(raw(&[(0, 0.5), (1, 0.5 + 5e-13)])).is_ok());
    }

    #[test]
    fn other_errors() {
        assert_eq!(validate_law(raw(&[])), Err(MeasureError::EmptyLaw));
        assert!(matches!(
            validate_law(raw(&[(0, 1.5), (1, -0.5)])),
            Err(MeasureError::NegativeMass { .. })
        ));
        assert!(matches!(
            validate_law(raw(&[(0, 0.5), (0, 0.5)])),
            Err(MeasureError::DuplicateAtom(_))
        ));
        let mut bad_dim = raw(&[(0, 1.0)]);
        bad_dim.atoms[0].0 = Coords::from([0, 0]);
        assert!(matches!(validate_law(bad_dim), Err(MeasureError::DimensionMismatch { .. })));
        assert_eq!(validate_law(raw(&[(0, f64::NAN)])), Err(MeasureError::NonFiniteWeight));
    }

    #[test]
    fn lattice_form_must_cover_support() {
        let mut r = raw(&[(0, 0.5), (3, 0.5)]);
        r.lattice = Some(LatticeForm {
            offset_coords: Coords::from([0]),
            span_coords: Coords::from([2]),
            offset: 0.0,
            span: 2.0,
        });
        assert_eq!(validate_law(r.clone()), Err(MeasureError::LatticeMismatch));
        r.lattice.as_mut().unwrap().span_coords = Coords::from([3]);
        r.lattice.as_mut().unwrap().span = 3.0;
        assert!(validate_law(r).is_ok());
    }

    #[test]
    fn lattice_index_round_trip() {
        let lf = LatticeForm {
            offset_coords: Coords::from([1, 0]),
            span_coords: Coords::from([0, 2]),
            offset: 0.3,
            span: 2.0,
        };
        assert_eq!(lf.index_of(&Coords::from([1, 6])), Some(3));
        assert_eq!(lf.index_of(&Coords::from([1, 5])), None);
        assert_eq!(lf.index_of(&Coords::from([2, 6])), None);
        assert_eq!(lf.coords_at(-2), Coords::from([1, -4]));
    }
}
