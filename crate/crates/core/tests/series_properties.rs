//! Property tests for the series kernel over exact Gaussian rationals:
//! ring axioms at fixed truncation order, truncation as a ring morphism,
//! conjugation as an involutive automorphism, substitution composition,
//! and realification against conjugation.

use std::sync::Arc;

use crjet_core::{
    BindingSet, CoeffMode, Coefficient, MultiIndex, TruncatedSeries, VariableSpace,
};
use num::rational::BigRational;
use num::BigInt;
use proptest::collection::vec;
use proptest::prelude::*;

const ORDER: u32 = 6;

fn rational(num: i64, den: u64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn coeff_strategy() -> impl Strategy<Value = Coefficient> {
    (-9i64..=9, 1u64..=6, -9i64..=9, 1u64..=6)
        .prop_map(|(nr, dr, ni, di)| Coefficient::from_rationals(rational(nr, dr), rational(ni, di)))
}

/// Random exact series over `space` at order `ORDER`; terms past the order
/// are dropped by `from_terms`, which is the truncation semantics anyway.
fn series_strategy(space: Arc<VariableSpace>) -> impl Strategy<Value = TruncatedSeries> {
    let nvars = space.len();
    vec((vec(0u32..=3, nvars), coeff_strategy()), 0..8).prop_map(move |raw| {
        let terms = raw
            .into_iter()
            .map(|(exps, c)| (MultiIndex::new(&exps).unwrap(), c));
        TruncatedSeries::from_terms(&space, ORDER, CoeffMode::Exact, terms).unwrap()
    })
}

/// Same, but without a constant term, as substitution bindings demand.
fn binding_strategy(space: Arc<VariableSpace>) -> impl Strategy<Value = TruncatedSeries> {
    series_strategy(Arc::clone(&space)).prop_map(move |s| {
        let terms = s
            .terms()
            .filter(|(idx, _)| !idx.is_zero_index())
            .map(|(idx, c)| (idx.clone(), c.clone()));
        TruncatedSeries::from_terms(&space, ORDER, CoeffMode::Exact, terms).unwrap()
    })
}

fn doubled() -> Arc<VariableSpace> {
    VariableSpace::doubled(1, 1)
}

fn graph() -> Arc<VariableSpace> {
    VariableSpace::graph_coords(1, 1)
}

/// Binds every variable of `space` to the given series, in order.
fn bind_all(space: &Arc<VariableSpace>, images: &[TruncatedSeries]) -> BindingSet {
    let mut b = BindingSet::new(space, ORDER, CoeffMode::Exact).unwrap();
    for (i, s) in images.iter().enumerate() {
        b.bind(space.name(i), s.clone()).unwrap();
    }
    b
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn addition_and_multiplication_commute(
        a in series_strategy(doubled()),
        b in series_strategy(doubled()),
    ) {
        prop_assert_eq!(a.add(&b).unwrap(), b.add(&a).unwrap());
        prop_assert_eq!(a.mul(&b).unwrap(), b.mul(&a).unwrap());
    }

    #[test]
    fn multiplication_associates_and_distributes(
        a in series_strategy(doubled()),
        b in series_strategy(doubled()),
        c in series_strategy(doubled()),
    ) {
        let ab_c = a.mul(&b).unwrap().mul(&c).unwrap();
        let a_bc = a.mul(&b.mul(&c).unwrap()).unwrap();
        prop_assert_eq!(ab_c, a_bc);

        let lhs = a.mul(&b.add(&c).unwrap()).unwrap();
        let rhs = a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn truncation_is_a_ring_morphism(
        a in series_strategy(doubled()),
        b in series_strategy(doubled()),
        k in 2u32..=5,
    ) {
        let product_then_cut = a.mul(&b).unwrap().truncate(k).unwrap();
        let cut_then_product = a.truncate(k).unwrap().mul(&b.truncate(k).unwrap()).unwrap();
        prop_assert_eq!(product_then_cut, cut_then_product);

        let sum_then_cut = a.add(&b).unwrap().truncate(k).unwrap();
        let cut_then_sum = a.truncate(k).unwrap().add(&b.truncate(k).unwrap()).unwrap();
        prop_assert_eq!(sum_then_cut, cut_then_sum);
    }

    #[test]
    fn conjugation_is_an_involutive_automorphism(
        a in series_strategy(doubled()),
        b in series_strategy(doubled()),
    ) {
        prop_assert_eq!(a.conjugate().unwrap().conjugate().unwrap(), a.clone());

        let sum = a.add(&b).unwrap().conjugate().unwrap();
        prop_assert_eq!(sum, a.conjugate().unwrap().add(&b.conjugate().unwrap()).unwrap());

        let product = a.mul(&b).unwrap().conjugate().unwrap();
        prop_assert_eq!(product, a.conjugate().unwrap().mul(&b.conjugate().unwrap()).unwrap());
    }

    #[test]
    fn substitution_respects_composition(
        s in series_strategy(graph()),
        first in vec(binding_strategy(graph()), 3),
        second in vec(binding_strategy(graph()), 3),
    ) {
        let space = graph();
        let b1 = bind_all(&space, &first);
        let b2 = bind_all(&space, &second);

        let step_by_step = s.substitute(&b1).unwrap().substitute(&b2).unwrap();

        let composed_images: Vec<_> = first
            .iter()
            .map(|img| img.substitute(&b2).unwrap())
            .collect();
        let b12 = bind_all(&space, &composed_images);
        prop_assert_eq!(step_by_step, s.substitute(&b12).unwrap());
    }

    #[test]
    fn realify_commutes_with_conjugation(a in series_strategy(doubled())) {
        let conj_then_real = a.conjugate().unwrap().realify().unwrap();
        let real_then_conj = a.realify().unwrap().conjugate().unwrap();
        prop_assert_eq!(conj_then_real, real_then_conj);

        // A conjugation-fixed series realifies to exactly real coefficients.
        let symmetric = a.add(&a.conjugate().unwrap()).unwrap();
        for (_, c) in symmetric.realify().unwrap().terms() {
            prop_assert!(c.is_real());
        }
    }

    #[test]
    fn exact_results_ignore_term_processing_order(
        raw in vec((vec(0u32..=3, 4), coeff_strategy()), 0..10),
        b in series_strategy(doubled()),
    ) {
        let space = doubled();
        let build = |items: &[(Vec<u32>, Coefficient)]| {
            let terms = items
                .iter()
                .map(|(exps, c)| (MultiIndex::new(exps).unwrap(), c.clone()));
            TruncatedSeries::from_terms(&space, ORDER, CoeffMode::Exact, terms).unwrap()
        };
        let forward = build(&raw);
        let mut shuffled = raw.clone();
        shuffled.reverse();
        let backward = build(&shuffled);
        prop_assert_eq!(&forward, &backward);

        let once = forward.mul(&b).unwrap();
        let again = backward.mul(&b).unwrap();
        prop_assert_eq!(once.to_text(), again.to_text());
        prop_assert_eq!(once, again);
    }
}
