mod common;

use common::*;
use proptest::prelude::*;
use simulbid_core::sketch::{objective_binary, objective_general, sketch_local_search};
use simulbid_core::welfare::{sw_star_n, sw_star_xos_pair};
use simulbid_core::{Clause, Instance, ItemSet, Rational64, SketchParams, Valuation};
use std::collections::BTreeSet;

fn binary_valuation(m: usize) -> impl Strategy<Value = Valuation> {
    prop::collection::vec(prop::collection::vec(any::<bool>(), m), 1..6).prop_map(move |rows| {
        let sets: Vec<Vec<usize>> = rows
            .iter()
            .map(|r| (0..r.len()).filter(|&i| r[i]).collect())
            .collect();
        let refs: Vec<&[usize]> = sets.iter().map(Vec::as_slice).collect();
        Valuation::binary(m, &refs).unwrap()
    })
}

fn general_valuation(m: usize) -> impl Strategy<Value = Valuation> {
    prop::collection::vec(prop::collection::vec(0u8..4, m), 1..5).prop_map(|rows| {
        Valuation::general(
            rows.into_iter()
                .map(|r| r.into_iter().map(f64::from).collect())
                .collect(),
        )
        .unwrap()
    })
}

fn pair(m: usize) -> impl Strategy<Value = (Valuation, Valuation)> {
    (binary_valuation(m), general_valuation(m))
}

proptest! {
    #[test]
    fn set_operations_match_btreeset(a in prop::collection::btree_set(0usize..130, 0..40),
                                     b in prop::collection::btree_set(0usize..130, 0..40)) {
        let sa = ItemSet::from_indices(130, a.iter().copied()).unwrap();
        let sb = ItemSet::from_indices(130, b.iter().copied()).unwrap();
        let u: BTreeSet<usize> = a.union(&b).copied().collect();
        let i: BTreeSet<usize> = a.intersection(&b).copied().collect();
        prop_assert_eq!(sa.union(&sb).to_vec(), u.iter().copied().collect::<Vec<_>>());
        prop_assert_eq!(sa.intersection(&sb).to_vec(), i.iter().copied().collect::<Vec<_>>());
        prop_assert_eq!(sa.union_len(&sb), u.len());
        prop_assert_eq!(sa.intersection_len(&sb), i.len());
        prop_assert_eq!(sa.complement().len(), 130 - a.len());
        prop_assert_eq!(sa.is_subset(&sa.union(&sb)), true);
    }

    #[test]
    fn pair_welfare_bounds((v, w) in (2usize..7).prop_flat_map(pair)) {
        let opt = sw_star_xos_pair(&v, &w).unwrap();
        prop_assert_eq!(opt.value, brute_force_sw(&[v.clone(), w.clone()]));
        prop_assert!(opt.value <= v.grand_value() + w.grand_value());
        prop_assert!(opt.value >= v.grand_value().max(w.grand_value()));
    }

    #[test]
    fn adding_a_clause_never_lowers_welfare((v, w) in (2usize..7).prop_flat_map(pair),
                                            extra in prop::collection::vec(0u8..4, 7)) {
        let m = v.m();
        let before = sw_star_n(&[v.clone(), w.clone()], 1_000_000).unwrap().value;
        let mut clauses = w.clauses().to_vec();
        clauses.push(Clause::new(extra[..m].iter().map(|&x| f64::from(x)).collect()).unwrap());
        let w2 = Valuation::new(m, clauses).unwrap();
        let after = sw_star_n(&[v, w2], 1_000_000).unwrap().value;
        prop_assert!(after >= before);
    }

    #[test]
    fn binary_objective_forms_agree(v in (2usize..9).prop_flat_map(binary_valuation),
                                    k in 1usize..5, picks in prop::collection::vec(0usize..100, 4),
                                    a in 0i64..=3) {
        let alpha = Rational64::new(a, 6);
        let idx: Vec<usize> = picks[..k].iter().map(|p| p % v.len()).collect();
        let exact = objective_binary(&v, &idx, alpha).unwrap();
        prop_assert_eq!(exact, binary_objective(&v, &idx, alpha));
        let f = objective_general(&v, &idx, alpha).unwrap();
        prop_assert!((f - *exact.numer() as f64 / *exact.denom() as f64).abs() < 1e-9);
    }

    #[test]
    fn general_objective_scales_linearly(v in (2usize..7).prop_flat_map(general_valuation),
                                         k in 1usize..4, c in 1u8..5) {
        let idx: Vec<usize> = (0..k).map(|j| j % v.len()).collect();
        let alpha = Rational64::new(1, 2);
        let base = objective_general(&v, &idx, alpha).unwrap();
        let scaled = Valuation::new(
            v.m(),
            v.clauses()
                .iter()
                .map(|cl| Clause::new(cl.values().iter().map(|x| x * f64::from(c)).collect()).unwrap())
                .collect(),
        )
        .unwrap();
        let got = objective_general(&scaled, &idx, alpha).unwrap();
        prop_assert!((got - f64::from(c) * base).abs() < 1e-9 * (1.0 + got.abs()));
    }

    #[test]
    fn coverage_levels_are_multiples_of_one_over_k(v in (2usize..9).prop_flat_map(binary_valuation),
                                                   k in 1usize..6) {
        let sk = sketch_local_search(&v, SketchParams::new(k, Rational64::new(1, 2)).unwrap());
        prop_assert_eq!(sk.indices.len(), k);
        prop_assert!(sk.indices.windows(2).all(|w| w[0] <= w[1]));
        for x in sk.coverage(&v).unwrap() {
            prop_assert!(x >= 0.into() && x <= 1.into());
            prop_assert_eq!(*(x * k as i128).denom(), 1);
        }
    }

    #[test]
    fn instances_round_trip((v, w) in (1usize..9).prop_flat_map(pair)) {
        let inst = Instance::new(vec![v, w]).unwrap();
        let text = inst.to_json();
        let back = Instance::from_json(&text).unwrap();
        prop_assert_eq!(&back, &inst);
        prop_assert_eq!(back.to_json(), text);
    }
}
