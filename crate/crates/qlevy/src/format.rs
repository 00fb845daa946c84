//! JSON file formats for laws, signed measures and triplets, plus the float
//! formatting shared by every writer.
//!
//! A law is either explicit,
//!
//! ```json
//! {"basis": {"generators": [1, {"num": 1, "den": 3}, 1.4142135623730951], "independent": true},
//!  "atoms": [{"coords": [0, 0, 1], "mass": 0.25}, ...]}
//! ```
//!
//! (an absent basis means the integers), or a lattice shorthand
//! `{"lattice": {"offset": a, "span": b, "masses": [q_0, q_1, ...]}}` for the
//! support `a + b·{0, 1, ...}`. Integers and `{num, den}` pairs are exact
//! rationals; any other number is a real generator.

use std::collections::BTreeMap;
use std::io;

use anyhow::{bail, Context, Result};
use qlevy_core::calculus::{ConvPower, Shift};
use qlevy_core::spectral::{ExtractionDiagnostics, LatticeIndexing};
use qlevy_core::{
    to_lattice_form, validate_law, Coords, DiscreteLaw, FrequencyBasis, Generator, LatticeForm, QuasiTriplet, Ratio,
    RawLaw, SignedAtomicMeasure,
};
use serde::{Deserialize, Serialize};
use serde_json::ser::Formatter;

/// Writes every float with 17 significant digits.
#[derive(Debug, Default, Clone, Copy)]
pub struct ExactFloats;

impl Formatter for ExactFloats {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(fmt_f64(value).as_bytes())
    }
}

/// `{:.16e}` for finite values, `null` otherwise (JSON has no infinities).
pub fn fmt_f64(value: f64) -> String {
    if value.is_finite() {
        format!("{value:.16e}")
    } else {
        "null".to_owned()
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, ExactFloats);
    value.serialize(&mut ser)?;
    out.push(b'\n');
    Ok(String::from_utf8(out)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NumberDoc {
    Integer(i64),
    Fraction { num: i64, den: i64 },
    Real(f64),
}

impl NumberDoc {
    fn from_generator(g: &Generator) -> Self {
        match g {
            Generator::Rational(r) if *r.denom() == 1 => NumberDoc::Integer(*r.numer()),
            Generator::Rational(r) => NumberDoc::Fraction { num: *r.numer(), den: *r.denom() },
            Generator::Real(x) => NumberDoc::Real(*x),
        }
    }

    fn to_generator(&self) -> Result<Generator> {
        Ok(match *self {
            NumberDoc::Integer(n) => Generator::Rational(Ratio::from_integer(n)),
            NumberDoc::Fraction { num, den } => {
                if den == 0 {
                    bail!("fraction with zero denominator");
                }
                Generator::Rational(Ratio::new(num, den))
            }
            NumberDoc::Real(x) => Generator::Real(x),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisDoc {
    pub generators: Vec<NumberDoc>,
    /// Defaults to true for a single generator, false otherwise.
    #[serde(default)]
    pub independent: Option<bool>,
}

impl BasisDoc {
    pub fn from_basis(b: &FrequencyBasis) -> Self {
        Self {
            generators: b.generators().iter().map(NumberDoc::from_generator).collect(),
            independent: Some(b.declared_independent()),
        }
    }

    pub fn to_basis(&self) -> Result<FrequencyBasis> {
        let generators = self.generators.iter().map(NumberDoc::to_generator).collect::<Result<Vec<_>>>()?;
        let independent = self.independent.unwrap_or(generators.len() == 1);
        Ok(FrequencyBasis::new(generators, independent)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomDoc {
    pub coords: Vec<i64>,
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeFormDoc {
    pub offset_coords: Vec<i64>,
    pub span_coords: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShorthandDoc {
    pub offset: NumberDoc,
    pub span: NumberDoc,
    pub masses: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LawDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<BasisDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atoms: Option<Vec<AtomDoc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice_form: Option<LatticeFormDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice: Option<ShorthandDoc>,
}

fn atoms_doc<'a>(atoms: impl Iterator<Item = (&'a Coords, f64)>) -> Vec<AtomDoc> {
    atoms.map(|(c, m)| AtomDoc { coords: c.as_slice().to_vec(), mass: m }).collect()
}

impl LawDoc {
    pub fn from_law(law: &DiscreteLaw) -> Self {
        Self {
            basis: Some(BasisDoc::from_basis(law.basis())),
            atoms: Some(atoms_doc(law.iter())),
            lattice_form: law.lattice_form().map(|lf| LatticeFormDoc {
                offset_coords: lf.offset_coords.as_slice().to_vec(),
                span_coords: lf.span_coords.as_slice().to_vec(),
            }),
            lattice: None,
        }
    }

    pub fn to_law(&self) -> Result<DiscreteLaw> {
        match (&self.atoms, &self.lattice) {
            (Some(atoms), None) => {
                let basis = match &self.basis {
                    Some(b) => b.to_basis()?,
                    None => FrequencyBasis::integers(),
                };
                let lattice = self.lattice_form.as_ref().map(|lf| {
                    let offset_coords = Coords::from(lf.offset_coords.clone());
                    let span_coords = Coords::from(lf.span_coords.clone());
                    LatticeForm {
                        offset: basis.value_of(&offset_coords),
                        span: basis.value_of(&span_coords),
                        offset_coords,
                        span_coords,
                    }
                });
                let atoms = atoms.iter().map(|a| (Coords::from(a.coords.clone()), a.mass)).collect();
                let law = validate_law(RawLaw { basis, atoms, lattice: lattice.clone() })?;
                if lattice.is_none() && law.basis().dim() == 1 {
                    if let Ok(with_form) = to_lattice_form(&law) {
                        return Ok(with_form);
                    }
                }
                Ok(law)
            }
            (None, Some(short)) => shorthand_law(short),
            (Some(_), Some(_)) => bail!("law gives both \"atoms\" and \"lattice\""),
            (None, None) => bail!("law needs \"atoms\" or \"lattice\""),
        }
    }
}

fn shorthand_law(short: &ShorthandDoc) -> Result<DiscreteLaw> {
    let offset = short.offset.to_generator()?;
    let span = short.span.to_generator()?;
    if span.value() <= 0.0 {
        bail!("lattice span must be positive");
    }
    let n = short.masses.len() as i64;
    match (offset.as_rational(), span.as_rational()) {
        (Some(a), Some(b)) => {
            // Common generator c with a = i·c and b = j·c.
            let c = if a == Ratio::from_integer(0) { b } else { rational_gcd(a, b) };
            let (i, j) = ((a / c).to_integer(), (b / c).to_integer());
            let basis = FrequencyBasis::rational(c)?;
            let atoms = (0..n).map(|l| (Coords::from([i + l * j]), short.masses[l as usize])).collect();
            Ok(to_lattice_form(&validate_law(RawLaw { basis, atoms, lattice: None })?)?)
        }
        _ if offset.value() == 0.0 => {
            let basis = FrequencyBasis::new(vec![span], true)?;
            let atoms = (0..n).map(|l| (Coords::from([l]), short.masses[l as usize])).collect();
            Ok(to_lattice_form(&validate_law(RawLaw { basis, atoms, lattice: None })?)?)
        }
        _ => {
            // Support a + bZ written over {a, b}: coordinates (1, l).
            let basis = FrequencyBasis::new(vec![offset, span], false)?;
            let lattice = LatticeForm {
                offset_coords: Coords::from([1, 0]),
                span_coords: Coords::from([0, 1]),
                offset: basis.value_of(&Coords::from([1, 0])),
                span: basis.value_of(&Coords::from([0, 1])),
            };
            let atoms = (0..n).map(|l| (Coords::from([1, l]), short.masses[l as usize])).collect();
            Ok(validate_law(RawLaw { basis, atoms, lattice: Some(lattice) })?)
        }
    }
}

fn rational_gcd(a: Ratio<i64>, b: Ratio<i64>) -> Ratio<i64> {
    fn gcd(mut x: i64, mut y: i64) -> i64 {
        while y != 0 {
            (x, y) = (y, x % y);
        }
        x.abs()
    }
    Ratio::new(gcd(a.numer() * b.denom(), b.numer() * a.denom()), a.denom() * b.denom())
}

/// A signed measure: same layout as an explicit law, without validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureDoc {
    pub basis: BasisDoc,
    pub atoms: Vec<AtomDoc>,
}

impl MeasureDoc {
    pub fn from_measure(m: &SignedAtomicMeasure) -> Self {
        Self { basis: BasisDoc::from_basis(m.basis()), atoms: atoms_doc(m.iter().map(|(c, w)| (c, *w))) }
    }

    pub fn to_measure(&self) -> Result<SignedAtomicMeasure> {
        let atoms = self.atoms.iter().map(|a| (Coords::from(a.coords.clone()), a.mass));
        Ok(SignedAtomicMeasure::from_atoms(self.basis.to_basis()?, atoms)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaDoc {
    pub freq: Vec<i64>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeIndexingDoc {
    pub offset_coords: Vec<i64>,
    pub span_coords: Vec<i64>,
    pub offset: f64,
    pub span: f64,
    pub winding: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsDoc {
    pub grid: usize,
    pub rank: usize,
    pub winding: Vec<i64>,
    pub max_phase_jump: f64,
    pub aliasing_mass: f64,
    pub dropped_mass: f64,
    pub residual: f64,
    pub max_imag: f64,
    pub separation_mu: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripletDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<BasisDoc>,
    pub gamma_coords: Vec<i64>,
    /// Informational; recomputed from the coordinates on input.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    pub lambdas: Vec<LambdaDoc>,
    #[serde(default)]
    pub tail_bound: f64,
    #[serde(default)]
    pub input_truncation: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice: Option<LatticeIndexingDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<DiagnosticsDoc>,
}

impl TripletDoc {
    pub fn from_triplet(t: &QuasiTriplet) -> Self {
        Self {
            basis: Some(BasisDoc::from_basis(&t.basis)),
            gamma_coords: t.gamma_coords.as_slice().to_vec(),
            gamma: Some(t.gamma()),
            lambdas: t.lambdas.iter().map(|(u, &w)| LambdaDoc { freq: u.as_slice().to_vec(), value: w }).collect(),
            tail_bound: t.tail_bound,
            input_truncation: t.input_truncation,
            lattice: t.lattice.as_ref().map(|l| LatticeIndexingDoc {
                offset_coords: l.offset_coords.as_slice().to_vec(),
                span_coords: l.span_coords.as_slice().to_vec(),
                offset: l.offset,
                span: l.span,
                winding: l.winding,
            }),
            diagnostics: t.diagnostics.as_ref().map(|d| DiagnosticsDoc {
                grid: d.grid,
                rank: d.rank,
                winding: d.winding.clone(),
                max_phase_jump: d.max_phase_jump,
                aliasing_mass: d.aliasing_mass,
                dropped_mass: d.dropped_mass,
                residual: d.residual,
                max_imag: d.max_imag,
                separation_mu: d.separation_mu,
            }),
        }
    }

    pub fn to_triplet(&self) -> Result<QuasiTriplet> {
        let basis = match &self.basis {
            Some(b) => b.to_basis()?,
            None => FrequencyBasis::integers(),
        };
        let mut lambdas = BTreeMap::new();
        for l in &self.lambdas {
            if lambdas.insert(Coords::from(l.freq.clone()), l.value).is_some() {
                bail!("frequency {:?} listed twice", l.freq);
            }
        }
        let mut t = QuasiTriplet::new(basis, Coords::from(self.gamma_coords.clone()), lambdas)?;
        if !(self.tail_bound >= 0.0 && self.input_truncation >= 0.0) {
            bail!("tail bounds must be nonnegative");
        }
        t.tail_bound = self.tail_bound;
        t.input_truncation = self.input_truncation;
        t.lattice = self.lattice.as_ref().map(|l| LatticeIndexing {
            offset_coords: Coords::from(l.offset_coords.clone()),
            span_coords: Coords::from(l.span_coords.clone()),
            offset: l.offset,
            span: l.span,
            winding: l.winding,
        });
        t.diagnostics = self.diagnostics.as_ref().map(|d| ExtractionDiagnostics {
            grid: d.grid,
            rank: d.rank,
            winding: d.winding.clone(),
            max_phase_jump: d.max_phase_jump,
            aliasing_mass: d.aliasing_mass,
            dropped_mass: d.dropped_mass,
            residual: d.residual,
            max_imag: d.max_imag,
            separation_mu: d.separation_mu,
        });
        Ok(t)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftDoc {
    pub scale: f64,
    pub scaled_coords: Vec<f64>,
    pub gamma: f64,
    pub exact: Option<Vec<i64>>,
    pub in_module: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerDoc {
    pub measure: MeasureDoc,
    pub shift: ShiftDoc,
    pub classification: String,
    pub residual: f64,
}

impl PowerDoc {
    pub fn from_power(p: &ConvPower) -> Self {
        let Shift { scale, scaled_coords, gamma, exact } = &p.shift;
        Self {
            measure: MeasureDoc::from_measure(&p.measure),
            shift: ShiftDoc {
                scale: *scale,
                scaled_coords: scaled_coords.clone(),
                gamma: *gamma,
                exact: exact.as_ref().map(|c| c.as_slice().to_vec()),
                in_module: exact.is_some(),
            },
            classification: format!("{:?}", p.classification),
            residual: p.residual,
        }
    }
}

/// Anything the commands accept as input.
pub enum Input {
    Law(DiscreteLaw),
    Triplet(QuasiTriplet),
}

pub fn parse_input(text: &str) -> Result<Input> {
    let value: serde_json::Value = serde_json::from_str(text).context("input is not valid JSON")?;
    if value.get("gamma_coords").is_some() {
        let doc: TripletDoc = serde_json::from_value(value).context("triplet does not match the schema")?;
        Ok(Input::Triplet(doc.to_triplet()?))
    } else {
        let doc: LawDoc = serde_json::from_value(value).context("law does not match the schema")?;
        Ok(Input::Law(doc.to_law()?))
    }
}

pub fn parse_law(text: &str) -> Result<DiscreteLaw> {
    match parse_input(text)? {
        Input::Law(law) => Ok(law),
        Input::Triplet(_) => bail!("expected a law, found a triplet"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_keep_seventeen_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(-0.0), "-0.0000000000000000e0");
        assert_eq!(fmt_f64(f64::NAN), "null");
        let x = std::f64::consts::PI / 7.0;
        assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn law_round_trip() {
        let text = r#"{"atoms": [{"coords": [0], "mass": 0.3}, {"coords": [2], "mass": 0.7}]}"#;
        let law = parse_law(text).unwrap();
        assert!(law.lattice_form().is_some());
        let again = parse_law(&to_json(&LawDoc::from_law(&law)).unwrap()).unwrap();
        assert_eq!(again, law);
    }

    #[test]
    fn shorthand_rational() {
        let text = r#"{"lattice": {"offset": {"num": 1, "den": 2}, "span": {"num": 2, "den": 3}, "masses": [0.5, 0.5]}}"#;
        let law = parse_law(text).unwrap();
        let lf = law.lattice_form().unwrap();
        assert!((lf.offset - 0.5).abs() < 1e-15 && (lf.span - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(law.basis().generators(), &[Generator::Rational(Ratio::new(1, 6))]);
    }

    #[test]
    fn shorthand_irrational_offset() {
        let text = r#"{"lattice": {"offset": 1.4142135623730951, "span": 1, "masses": [0.6, 0.4]}}"#;
        let law = parse_law(text).unwrap();
        assert_eq!(law.basis().dim(), 2);
        assert_eq!(law.lattice_form().unwrap().span_coords, Coords::from([0, 1]));
        let again = parse_law(&to_json(&LawDoc::from_law(&law)).unwrap()).unwrap();
        assert_eq!(again, law);
    }

    #[test]
    fn triplet_round_trip() {
        let t = QuasiTriplet::on_integers(2, &[(1, 0.1), (-3, -0.02)]).unwrap();
        let text = to_json(&TripletDoc::from_triplet(&t)).unwrap();
        let Input::Triplet(back) = parse_input(&text).unwrap() else { panic!("not a triplet") };
        assert_eq!(back, t);
    }

    #[test]
    fn measure_round_trip() {
        let m = SignedAtomicMeasure::from_atoms(
            FrequencyBasis::integers(),
            [(Coords::from([0]), 0.9), (Coords::from([1]), -0.1 / 3.0)],
        )
        .unwrap();
        let text = to_json(&MeasureDoc::from_measure(&m)).unwrap();
        let back: MeasureDoc = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_measure().unwrap(), m);
    }

    #[test]
    fn schema_errors() {
        assert!(parse_law("{").is_err());
        assert!(parse_law("{}").is_err());
        assert!(parse_law(r#"{"atoms": [{"coords": [0], "mass": 0.5}]}"#).is_err());
        assert!(parse_law(r#"{"lattice": {"offset": 0, "span": -1, "masses": [1.0]}}"#).is_err());
    }
}
