mod common;

use std::f64::consts::{PI, TAU};

use num_complex::Complex64 as C;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use zloch::bundle::{
    constant_flux_bundle, random_gauge, random_valid_section, RandomSectionOptions, U1Bundle,
};
use zloch::flows::{gamma_class, Embedding};
use zloch::homology::{Grid, LatticeManifold};
use zloch::zerolocus::{chain_to_graph, extract_vortex_chain, winding_number};

const N: usize = 12;

fn class() -> impl Strategy<Value = [i64; 3]> {
    [-1i64..=1, -1i64..=1, -1i64..=1]
}

fn gauged_bundle(k: [i64; 3], rng: &mut ChaCha8Rng) -> U1Bundle {
    let grid = Grid::torus([N; 3]);
    constant_flux_bundle(grid, k)
        .unwrap()
        .gauge_transform(&random_gauge(&grid, rng))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn extraction_is_gauge_invariant(k in class(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = gauged_bundle(k, &mut rng);
        let (s, _) = random_valid_section(&b, &mut rng, &RandomSectionOptions::default()).unwrap();
        let g = random_gauge(b.grid(), &mut rng);
        let (b2, s2) = (b.gauge_transform(&g), s.gauge_transform(&g));
        prop_assert_eq!(b2.chern_coordinates().unwrap(), k);
        prop_assert_eq!(extract_vortex_chain(&s2, &b2).unwrap(), extract_vortex_chain(&s, &b).unwrap());
    }

    #[test]
    fn smooth_flux_telescopes(k in class(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = gauged_bundle(k, &mut rng);
        for v in 0..b.grid().vertex_count() {
            prop_assert!(b.cube_flux(v).abs() < 1e-9);
        }
    }

    #[test]
    fn cube_flux_counts_monopoles(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let grid = Grid::torus([4, 4, 4]);
        let phases = (0..3 * grid.vertex_count()).map(|_| rng.gen_range(-PI..PI)).collect();
        let b = U1Bundle::from_phases(grid, phases).unwrap();
        let mut net = 0.0;
        for v in 0..grid.vertex_count() {
            let x = b.cube_flux(v) / TAU;
            prop_assert!((x - x.round()).abs() < 1e-9);
            net += x.round();
        }
        prop_assert_eq!(net, 0.0);
    }

    #[test]
    fn graph_keeps_class_and_length(k in class(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = gauged_bundle(k, &mut rng);
        let (s, _) = random_valid_section(&b, &mut rng, &RandomSectionOptions::default()).unwrap();
        let chain = extract_vortex_chain(&s, &b).unwrap();
        let m = LatticeManifold::torus([N; 3]).unwrap();
        let egf = chain_to_graph(&chain).unwrap();
        prop_assert_eq!(gamma_class(&egf, &m).unwrap(), m.dual_cycle_class(chain.coeffs()).unwrap());
        let Embedding::Polyline(lines) = &egf.embedding else {
            return Err(TestCaseError::fail("expected polylines"));
        };
        let length: u64 = egf
            .flow
            .theta()
            .iter()
            .map(|(id, th)| {
                let segs: f64 = lines[id].windows(2).map(|w| (0..3).map(|i| (w[1][i] - w[0][i]).abs()).sum::<f64>()).sum();
                th.unsigned_abs() * segs as u64
            })
            .sum();
        prop_assert_eq!(length, chain.weighted_length());
        prop_assert!(egf.flow.theta().values().all(|&t| t > 0));
    }

    #[test]
    fn winding_of_powers(n in -5i64..=5, extra in 0usize..100, offset in 0.0f64..TAU, r in 0.1f64..10.0) {
        let samples = 4 * n.unsigned_abs() as usize + 1 + extra;
        let z: Vec<C> = (0..samples)
            .map(|i| C::from_polar(r, offset + TAU * i as f64 / samples as f64).powi(n as i32))
            .collect();
        prop_assert_eq!(winding_number(&z).unwrap(), n);
    }
}

#[test]
fn constant_flux_round_trip() {
    let grid = Grid::torus([16; 3]);
    for a in -3..=3 {
        for b in -3..=3 {
            for c in -3..=3 {
                let k = [a, b, c];
                assert_eq!(
                    constant_flux_bundle(grid, k)
                        .unwrap()
                        .chern_coordinates()
                        .unwrap(),
                    k
                );
            }
        }
    }
}
