mod common;

use std::sync::Arc;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use zloch::flows::{
    certify_basis, flow_add, flow_basis, flow_combination, flow_neg, is_flow, Flow, Lambda,
    OrientedWeight,
};
use zloch::homology::intmat::{hermite_normal_form, to_i64};
use zloch::homology::IntMatrix;

fn graph_strategy() -> impl Strategy<Value = (u64, usize, usize)> {
    (any::<u64>(), 1usize..=6, 0usize..=12)
}

fn lambda_of(gens: &[Vec<i64>]) -> Lambda {
    let h = hermite_normal_form(&IntMatrix::from_rows(gens));
    let hnf = (0..h.rows())
        .map(|i| h.row(i).iter().map(|x| to_i64(x).unwrap()).collect())
        .collect();
    Lambda {
        ambient_rank: 3,
        generators: gens.to_vec(),
        hnf,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rank_is_cyclomatic((seed, v, e) in graph_strategy()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = Arc::new(common::random_graph(&mut rng, v, e));
        let basis = flow_basis(&g);
        let c = common::components(&g) as i64;
        prop_assert_eq!(basis.len() as i64, e as i64 - v as i64 + c);
        prop_assert!(certify_basis(&g, &basis));
        for f in &basis.flows {
            prop_assert!(is_flow(&g, f.theta()).unwrap());
        }
    }

    #[test]
    fn group_axioms((seed, v, e) in graph_strategy()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = Arc::new(common::random_graph(&mut rng, v, e));
        let basis = flow_basis(&g);
        let mut draw = || {
            let c: Vec<i64> = (0..basis.len()).map(|_| rng.gen_range(-2..=2)).collect();
            flow_combination(&g, &basis.flows, &c).unwrap()
        };
        let (a, b, c) = (draw(), draw(), draw());
        let zero = Flow::zero(g.clone());
        let add = |x: &Flow, y: &Flow| flow_add(x, y).unwrap();
        prop_assert_eq!(add(&add(&a, &b), &c), add(&a, &add(&b, &c)));
        prop_assert_eq!(add(&a, &b), add(&b, &a));
        prop_assert_eq!(add(&a, &zero), a.clone());
        prop_assert!(add(&a, &flow_neg(&a)).is_zero());
        prop_assert!(is_flow(&g, add(&a, &b).theta()).unwrap());
    }

    #[test]
    fn coordinates_recover_combination((seed, v, e) in graph_strategy()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = Arc::new(common::random_graph(&mut rng, v, e));
        let basis = flow_basis(&g);
        let c: Vec<i64> = (0..basis.len()).map(|_| rng.gen_range(-5..=5)).collect();
        let f = flow_combination(&g, &basis.flows, &c).unwrap();
        prop_assert_eq!(basis.coordinates(&f), c);
    }

    #[test]
    fn case_split_view_matches_signed(x in -50i64..=50, y in -50i64..=50) {
        let (a, b) = (OrientedWeight::from_signed(x), OrientedWeight::from_signed(y));
        prop_assert_eq!(a.signed(), x);
        prop_assert_eq!(OrientedWeight::case_sum(a, b).signed(), x + y);
        prop_assert_eq!(OrientedWeight::case_sum(a, b), OrientedWeight::from_signed(x + y));
    }

    #[test]
    fn json_round_trip((seed, v, e) in graph_strategy()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = Arc::new(common::random_graph(&mut rng, v, e));
        let basis = flow_basis(&g);
        let c: Vec<i64> = (0..basis.len()).map(|_| rng.gen_range(-3..=3)).collect();
        let f = flow_combination(&g, &basis.flows, &c).unwrap();
        prop_assert_eq!(Flow::from_json(g.clone(), &f.to_json()).unwrap(), f);
    }

    #[test]
    fn membership_matches_enumeration(
        gens in prop::collection::vec(prop::collection::vec(-2i64..=2, 3), 1..=3),
        target in prop::collection::vec(-3i64..=3, 3),
    ) {
        let lam = lambda_of(&gens);
        let brute = common::in_span_brute(&gens, &target, 40);
        prop_assert_eq!(lam.contains(&target), brute);
        prop_assert_eq!(lam.reduce(&target).iter().all(|&x| x == 0), brute);
    }
}

#[test]
fn loops_do_not_break_conservation() {
    let g = zloch::flows::Graph::from_triples(&["a", "b"], &[("l", "a", "a"), ("p", "a", "b")])
        .unwrap();
    let theta = [("l".to_string(), 7), ("p".to_string(), 0)]
        .into_iter()
        .collect();
    assert!(is_flow(&g, &theta).unwrap());
    let bad = [("p".to_string(), 1)].into_iter().collect();
    assert!(!is_flow(&g, &bad).unwrap());
}
