use std::collections::BTreeMap;

use proptest::prelude::*;
use qlevy::format::{parse_input, parse_law, to_json, Input, LawDoc, MeasureDoc, TripletDoc};
use qlevy_core::{
    validate_law, Coords, DiscreteLaw, FrequencyBasis, Generator, QuasiTriplet, Ratio, RawLaw, SignedAtomicMeasure,
};

fn basis() -> impl Strategy<Value = FrequencyBasis> {
    prop_oneof![
        Just(FrequencyBasis::integers()),
        (1i64..12, 1i64..12).prop_map(|(n, d)| FrequencyBasis::rational(Ratio::new(n, d)).unwrap()),
        (0.1f64..5.0, 0.1f64..5.0, any::<bool>()).prop_filter_map("distinct", |(a, b, ind)| {
            FrequencyBasis::new(vec![Generator::Real(a), Generator::Real(b)], ind).ok()
        }),
        (1i64..5, 0.1f64..5.0).prop_filter_map("distinct", |(n, b)| {
            FrequencyBasis::new(vec![Generator::from(n), Generator::Real(b)], true).ok()
        }),
    ]
}

fn atoms(dim: usize) -> impl Strategy<Value = BTreeMap<Coords, f64>> {
    prop::collection::btree_map(prop::collection::vec(-20i64..20, dim).prop_map(Coords::from), 1e-6f64..1.0, 1..10)
}

fn law() -> impl Strategy<Value = DiscreteLaw> {
    basis().prop_flat_map(|b| {
        let dim = b.dim();
        atoms(dim).prop_map(move |m| {
            let total: f64 = m.values().sum();
            let atoms = m.into_iter().map(|(c, w)| (c, w / total)).collect();
            validate_law(RawLaw { basis: b.clone(), atoms, lattice: None }).unwrap()
        })
    })
}

fn triplet() -> impl Strategy<Value = QuasiTriplet> {
    basis().prop_flat_map(|b| {
        let dim = b.dim();
        (prop::collection::vec(-5i64..5, dim), atoms(dim), 0.0f64..1e-6).prop_map(move |(g, m, tail)| {
            let lambdas = m.into_iter().filter(|(c, _)| !c.is_zero()).map(|(c, w)| (c, w - 0.5)).collect();
            let mut t = QuasiTriplet::new(b.clone(), Coords::from(g), lambdas).unwrap();
            t.tail_bound = tail;
            t
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn laws_round_trip(law in law()) {
        let text = to_json(&LawDoc::from_law(&law)).unwrap();
        let back = parse_law(&text).unwrap();
        // Single-generator laws gain their lattice form on input.
        prop_assert_eq!(back.measure(), law.measure());
        let again = to_json(&LawDoc::from_law(&back)).unwrap();
        prop_assert_eq!(parse_law(&again).unwrap(), back);
    }

    #[test]
    fn triplets_round_trip(t in triplet()) {
        let text = to_json(&TripletDoc::from_triplet(&t)).unwrap();
        let Input::Triplet(back) = parse_input(&text).unwrap() else { panic!("not a triplet") };
        prop_assert_eq!(back, t);
    }

    #[test]
    fn measures_round_trip(b in basis(), m in atoms(2), flip in any::<u64>()) {
        let dim = b.dim();
        let weights = m.into_iter().enumerate().map(|(i, (c, w))| {
            let c = Coords::from(c.as_slice()[..dim].to_vec());
            (c, if flip >> (i % 64) & 1 == 1 { -w } else { w })
        });
        let measure = SignedAtomicMeasure::from_atoms(b, weights).unwrap();
        let text = to_json(&MeasureDoc::from_measure(&measure)).unwrap();
        let back: MeasureDoc = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back.to_measure().unwrap(), measure);
    }
}
