use proptest::prelude::*;

use zhat_core::catalog::{dimension2, parse_catalog, serialize_catalog, zclass_pairs};
use zhat_core::cohomology::{default_modulus, h1_mod, h2_lattice};
use zhat_core::conjugacy::{conjugate_over_zpi, ConjugacyProblem, ConjugacyVerdict};
use zhat_core::groups::PointGroup;
use zhat_core::linalg::{IntMatrix, PrimeSet};
use zhat_core::pipeline::{separate_pair, verify_zclass, PipelineOptions, SeparationOutcome, Stage};

/// Products of elementary matrices, so always in GL(2, ℤ).
fn unimodular() -> impl Strategy<Value = IntMatrix> {
    prop::collection::vec((0usize..4, -2i64..=2), 1..5).prop_map(|steps| {
        steps.into_iter().fold(IntMatrix::identity(2), |acc, (kind, c)| {
            let e = match kind {
                0 => IntMatrix::from_rows(&[[1, c], [0, 1]]),
                1 => IntMatrix::from_rows(&[[1, 0], [c, 1]]),
                2 => IntMatrix::from_rows(&[[0, 1], [1, 0]]),
                _ => IntMatrix::diag(&[-1, 1]),
            };
            &acc * &e
        })
    })
}

fn conjugated(g: &PointGroup, x: &IntMatrix) -> PointGroup {
    let inv = x.inverse_unimodular().expect("unimodular");
    let gens = g.generators().iter().map(|a| &(&inv * a) * x).collect();
    PointGroup::new(g.dim(), gens, g.relators().to_vec(), 1000).unwrap()
}

#[test]
fn catalog_survives_serialization() {
    let c = dimension2();
    assert_eq!(parse_catalog(&serialize_catalog(&c)).unwrap(), c);
}

#[test]
fn pipeline_items_agree_with_the_full_run() {
    let c = dimension2();
    let options = PipelineOptions::default();
    for (a, b) in zclass_pairs(&c) {
        let r = separate_pair(a, b, &options);
        assert!(matches!(r.outcome, SeparationOutcome::Separated(_)), "{} {}", a.label, b.label);
    }
    let p2mm = c.entries().find(|e| e.label == "p2mm").unwrap();
    assert_eq!(verify_zclass(p2mm, &options).stage, Stage::Four);
    let p4 = c.entries().find(|e| e.label == "p4").unwrap();
    assert_eq!(verify_zclass(p4, &options).stage, Stage::One);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn cohomology_orders_are_basis_independent(index in 0usize..13, x in unimodular()) {
        let c = dimension2();
        let entry = c.entries().nth(index).unwrap();
        let g = entry.point_group(1000).unwrap();
        let h = conjugated(&g, &x);
        let q = default_modulus(&g);
        prop_assert_eq!(h1_mod(&g, q).unwrap().invariant_factors().to_vec(), h1_mod(&h, q).unwrap().invariant_factors().to_vec());
        prop_assert_eq!(h2_lattice(&g, q).unwrap().invariant_factors().to_vec(), h2_lattice(&h, q).unwrap().invariant_factors().to_vec());
    }

    #[test]
    fn integrally_conjugate_tuples_are_locally_conjugate(index in 0usize..13, x in unimodular(), p in prop_oneof![Just(2u64), Just(3u64)]) {
        let c = dimension2();
        let entry = c.entries().nth(index).unwrap();
        let g = entry.point_group(1000).unwrap();
        let h = conjugated(&g, &x);
        let problem = ConjugacyProblem::new(g.generators().to_vec(), h.generators().to_vec(), PrimeSet::single(p)).unwrap();
        match conjugate_over_zpi(&problem).unwrap() {
            ConjugacyVerdict::Conjugate(w) => prop_assert!(w.verify(&problem)),
            other => prop_assert!(false, "{:?}", other),
        }
    }
}
