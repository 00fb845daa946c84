use alloc::vec::Vec;

use num_integer::Integer;
use num_rational::Ratio;

use super::{Coords, DiscreteLaw, FrequencyBasis, Generator, LatticeForm, MeasureError, RawLaw};

/// The module `⟨X⟩ = cZ` of a law with rational support.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModuleDescription {
    /// `c ≥ 0`; zero only for the law degenerate at the origin.
    pub generator: Ratio<i64>,
}

impl ModuleDescription {
    pub fn contains(&self, x: Ratio<i64>) -> bool {
        if self.generator == Ratio::from_integer(0) {
            return x == Ratio::from_integer(0);
        }
        (x / self.generator).is_integer()
    }
}

fn rational_gcd(a: Ratio<i64>, b: Ratio<i64>) -> Ratio<i64> {
    // gcd(p/q, r/s) = gcd(p·s, r·q) / (q·s), then reduced.
    let num = (a.numer() * b.denom()).gcd(&(b.numer() * a.denom()));
    Ratio::new(num, a.denom() * b.denom())
}

/// Generator `c` of the module spanned by a rationally supported law.
pub fn module_generator(law: &DiscreteLaw) -> Result<ModuleDescription, MeasureError> {
    let basis = law.basis();
    let mut c = Ratio::from_integer(0);
    for (coords, _) in law.iter() {
        let x = basis.rational_value_of(coords).ok_or(MeasureError::IrrationalSupport)?;
        c = rational_gcd(c, x);
    }
    Ok(ModuleDescription { generator: c })
}

/// Fills in the lattice form `a + bZ` with `a` the smallest support value.
///
/// Laws over a single generator keep their basis. Rational laws over several
/// generators are rewritten over the single generator of `⟨X⟩`.
pub fn to_lattice_form(law: &DiscreteLaw) -> Result<DiscreteLaw, MeasureError> {
    if law.basis().dim() == 1 {
        let lattice = coordinate_lattice(law).ok_or(MeasureError::IrrationalSupport)?;
        return Ok(law.clone().with_lattice(Some(lattice)));
    }
    if !law.basis().is_rational() {
        return Err(MeasureError::IrrationalSupport);
    }
    let module = module_generator(law)?;
    let rebased = if module.generator == Ratio::from_integer(0) {
        let atoms = law.iter().map(|(_, p)| (Coords::from([0]), p)).collect();
        super::validate_law(RawLaw { basis: FrequencyBasis::trivial(), atoms, lattice: None })?
    } else {
        let basis = FrequencyBasis::new(
            alloc::vec![Generator::Rational(module.generator)],
            law.basis().declared_independent(),
        )?;
        let atoms = law
            .iter()
            .map(|(c, p)| {
                let x = law.basis().rational_value_of(c).expect("rational basis");
                let k = x / module.generator;
                debug_assert!(k.is_integer());
                (Coords::from([k.to_integer()]), p)
            })
            .collect();
        super::validate_law(RawLaw { basis, atoms, lattice: None })?
    };
    to_lattice_form(&rebased)
}

/// Detects support coordinates of the form `o + l·v` (a rank-one coordinate
/// lattice) with `value(v) > 0` and every index `l ≥ 0`.
///
/// Returns `None` when the coordinate differences span more than one
/// dimension or when the direction has zero value under the basis.
pub(crate) fn coordinate_lattice(law: &DiscreteLaw) -> Option<LatticeForm> {
    let basis = law.basis();
    let dim = basis.dim();
    let points = law.support_points();
    let lowest = points
        .iter()
        .min_by(|a, b| a.value.total_cmp(&b.value).then_with(|| a.coords.cmp(&b.coords)))?;
    let offset_coords = lowest.coords.clone();
    let offset = lowest.value;

    let diffs: Vec<Coords> = points.iter().map(|p| &p.coords - &offset_coords).collect();
    let first = match diffs.iter().find(|d| !d.is_zero()) {
        Some(d) => d.clone(),
        None => {
            // Single atom: any unit direction with nonzero value describes it.
            let alphas = basis.alphas();
            let axis = alphas.iter().position(|&a| a != 0.0);
            let (span_coords, span) = match axis {
                Some(j) => {
                    let sign = if alphas[j] > 0.0 { 1 } else { -1 };
                    (Coords::unit(dim, j).scaled(sign), libm::fabs(alphas[j]))
                }
                None => (Coords::unit(dim, 0), 1.0),
            };
            return Some(LatticeForm { offset_coords, span_coords, offset, span });
        }
    };
    let content = first.as_slice().iter().fold(0i64, |g, &c| g.gcd(&c));
    let primitive = Coords::new(first.as_slice().iter().map(|&c| c / content));
    let pivot = primitive.as_slice().iter().position(|&c| c != 0)?;

    let mut g = 0i64;
    let mut indices = Vec::with_capacity(diffs.len());
    for d in &diffs {
        let t = d.as_slice()[pivot] / primitive.as_slice()[pivot];
        if primitive.scaled(t) != *d {
            return None;
        }
        g = g.gcd(&t);
        indices.push(t);
    }
    let mut span_coords = primitive.scaled(g);
    let mut span = basis.value_of(&span_coords);
    if span == 0.0 || !span.is_finite() {
        return None;
    }
    if span < 0.0 {
        span_coords = span_coords.scaled(-1);
        span = -span;
    }
    let lattice = LatticeForm { offset_coords, span_coords, offset, span };
    // Ties in value under a dependent basis could leave negative indices.
    law.iter()
        .all(|(c, _)| lattice.index_of(c).is_some_and(|l| l >= 0))
        .then_some(lattice)
}
