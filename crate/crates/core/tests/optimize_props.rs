mod common;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use proptest::prelude::*;

use zloch::homology::LatticeManifold;
use zloch::optimize::{hausdorff_lower_bound, shortest_flow, FlowProgram, ShortestFlow};

fn int(x: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

/// Dims with at most 64 links.
fn small_dims() -> impl Strategy<Value = [usize; 3]> {
    [1usize..=3, 1usize..=3, 1usize..=3]
        .prop_filter("≤ 64 links", |d| 3 * d.iter().product::<usize>() <= 64)
}

fn instance() -> impl Strategy<Value = ([usize; 3], Vec<i64>)> {
    small_dims().prop_flat_map(|d| {
        let links = 3 * d.iter().product::<usize>();
        (Just(d), prop::collection::vec(1i64..=4, links))
    })
}

fn class() -> impl Strategy<Value = [i64; 3]> {
    [-2i64..=2, -2i64..=2, -2i64..=2]
}

fn solve(dims: [usize; 3], lengths: &[i64], a: [i64; 3]) -> ShortestFlow {
    let m = LatticeManifold::torus(dims).unwrap();
    let p = FlowProgram::new(&m, &a)
        .unwrap()
        .with_lengths(lengths.iter().map(|&x| int(x)).collect())
        .unwrap();
    let r = shortest_flow(&p).unwrap();
    assert!(r.optimal);
    r
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn matches_exhaustive_oracle((dims, lengths) in instance(), a in class()) {
        let oracle = common::CoverOracle::new(dims, &lengths, 3);
        prop_assert_eq!(solve(dims, &lengths, a).value, int(oracle.value(a)));
    }

    #[test]
    fn witness_is_valid((dims, lengths) in instance(), a in class()) {
        let m = LatticeManifold::torus(dims).unwrap();
        let r = solve(dims, &lengths, a);
        let total: i64 = r.witness.iter().map(|(&l, &t)| lengths[l] * t.abs()).sum();
        prop_assert_eq!(int(total), r.value.clone());
        prop_assert!(m.complex().apply_boundary(1, &r.witness).is_empty());
        prop_assert_eq!(m.cycle_class(&r.witness).unwrap().free, a.to_vec());
    }

    #[test]
    fn symmetric_and_subadditive((dims, lengths) in instance(), a in class(), b in class()) {
        let neg = a.map(|x| -x);
        prop_assert_eq!(solve(dims, &lengths, a).value, solve(dims, &lengths, neg).value);
        let sum = [a[0] + b[0], a[1] + b[1], a[2] + b[2]];
        let lhs = solve(dims, &lengths, sum).value;
        let rhs = solve(dims, &lengths, a).value + solve(dims, &lengths, b).value;
        prop_assert!(lhs <= rhs, "{lhs} > {rhs}");
    }

    #[test]
    fn refinement_does_not_increase_length(d in [1usize..=2, 1usize..=2, 1usize..=2], a in class()) {
        let coarse = LatticeManifold::torus(d).unwrap();
        let fine = LatticeManifold::torus(d.map(|x| 2 * x)).unwrap();
        let h = int(1);
        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        let lc = hausdorff_lower_bound(&a, &coarse, &h).unwrap();
        let lf = hausdorff_lower_bound(&a, &fine, &half).unwrap();
        prop_assert!(lf <= lc);
        prop_assert_eq!(lc.is_zero(), a == [0, 0, 0]);
    }
}
