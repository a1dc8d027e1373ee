//! Lattice U(1) bundles on the cubical 3-torus.
//!
//! A bundle is a phase `θ_ℓ ∈ (−π, π]` on every oriented link (reversal is
//! `−θ_ℓ`). Plaquette curvature is the oriented link sum reduced to
//! `(−π, π]`; the Chern coordinate `c_i` is the total curvature through the
//! coordinate torus normal to `e_i`, divided by 2π.

mod section;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::homology::Grid;

pub use section::{
    covariant_link_delta, random_valid_section, vortex_section, RandomSectionOptions,
    SampledSection, SectionSampler, Seed, ZERO_SAMPLE_THRESHOLD,
};

/// Integrality tolerance for Chern coordinates.
pub const CHERN_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BundleError {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("undersampled bundle: {0}")]
    Undersampled(String),
    #[error("non-integral flux through coordinate torus {normal}: residual {residual:.3e}")]
    NonIntegralFlux { normal: usize, residual: f64 },
    #[error("flux mismatch: {0}")]
    FluxMismatch(String),
    #[error("zero sample at vertex {0:?}")]
    ZeroSample([usize; 3]),
    #[error(
        "undersampled section at link {link} (dir {dir}, base {base:?}): |delta| = {delta:.6}"
    )]
    UndersampledSection {
        link: usize,
        dir: usize,
        base: [usize; 3],
        delta: f64,
    },
}

/// Reduces an angle to `(−π, π]`.
pub fn wrap(a: f64) -> f64 {
    if a > -PI && a <= PI {
        return a;
    }
    let mut r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r -= 2.0 * PI;
    }
    r
}

#[derive(Clone, Debug, PartialEq)]
pub struct U1Bundle {
    grid: Grid,
    /// indexed by link id
    phases: Vec<f64>,
}

impl U1Bundle {
    pub fn trivial(grid: Grid) -> Self {
        assert!(grid.periodic, "bundles live on the periodic lattice");
        U1Bundle {
            phases: vec![0.0; 3 * grid.vertex_count()],
            grid,
        }
    }

    pub fn from_phases(grid: Grid, phases: Vec<f64>) -> Result<Self, BundleError> {
        if !grid.periodic {
            return Err(BundleError::Input(
                "bundles live on the periodic lattice".into(),
            ));
        }
        if phases.len() != 3 * grid.vertex_count() {
            return Err(BundleError::Input(format!(
                "{} link phases for {} links",
                phases.len(),
                3 * grid.vertex_count()
            )));
        }
        if let Some(i) = phases.iter().position(|p| !p.is_finite()) {
            return Err(BundleError::Input(format!(
                "link {i} has a non-finite phase"
            )));
        }
        Ok(U1Bundle {
            phases: phases.into_iter().map(wrap).collect(),
            grid,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn link_phase(&self, link: usize) -> f64 {
        self.phases[link]
    }

    pub fn set_link_phase(&mut self, link: usize, phase: f64) {
        self.phases[link] = wrap(phase);
    }

    /// Oriented curvature of a plaquette, in `(−π, π]`.
    pub fn curvature(&self, plaquette: usize) -> f64 {
        let links = self
            .grid
            .plaquette_links(plaquette)
            .expect("periodic plaquette");
        wrap(links.iter().map(|&(l, s)| s as f64 * self.phases[l]).sum())
    }

    pub fn curvatures(&self) -> Vec<f64> {
        (0..3 * self.grid.vertex_count())
            .map(|p| self.curvature(p))
            .collect()
    }

    /// Total curvature through the boundary of the cube at `v` (2π × the
    /// number of lattice monopoles inside; zero for smooth data).
    pub fn cube_flux(&self, v: usize) -> f64 {
        let faces = self.grid.cube_faces(v).expect("periodic cube");
        faces
            .iter()
            .map(|&(p, s)| s as f64 * self.curvature(p))
            .sum()
    }

    /// Gauge transform by vertex angles `g`: `θ_ℓ ↦ θ_ℓ + g(head) − g(tail)`.
    pub fn gauge_transform(&self, g: &[f64]) -> U1Bundle {
        assert_eq!(g.len(), self.grid.vertex_count());
        let phases = (0..self.phases.len())
            .map(|l| {
                let (t, h) = self.grid.link_ends(l).expect("periodic link");
                wrap(self.phases[l] + g[h] - g[t])
            })
            .collect();
        U1Bundle {
            grid: self.grid,
            phases,
        }
    }

    /// Chern coordinates with their integrality residual.
    pub fn chern_report(&self) -> ChernReport {
        let curv = self.curvatures();
        let mut raw = [0.0; 3];
        for (normal, slot) in raw.iter_mut().enumerate() {
            let n = self.grid.dims[normal];
            let mut total = 0.0;
            for slice in 0..n {
                let s: f64 = self
                    .grid
                    .coordinate_torus(normal, slice)
                    .keys()
                    .map(|&p| curv[p])
                    .sum();
                total += s;
            }
            *slot = total / (2.0 * PI * n as f64);
        }
        let coords = raw.map(|x| x.round() as i64);
        let residuals = [0, 1, 2].map(|i| (raw[i] - coords[i] as f64).abs());
        ChernReport {
            coords,
            raw,
            residuals,
        }
    }

    /// `(1/2π) Σ F` over each coordinate torus, averaged over parallel slices
    /// and rounded.
    pub fn chern_coordinates(&self) -> Result<[i64; 3], BundleError> {
        let r = self.chern_report();
        for normal in 0..3 {
            if r.residuals[normal] > CHERN_TOLERANCE {
                return Err(BundleError::NonIntegralFlux {
                    normal,
                    residual: r.residuals[normal],
                });
            }
        }
        Ok(r.coords)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let nv = self.grid.vertex_count();
        serde_json::to_value(BundleJson {
            dims: self.grid.dims,
            link_phases: LinkPhases {
                x: self.phases[0..nv].to_vec(),
                y: self.phases[nv..2 * nv].to_vec(),
                z: self.phases[2 * nv..].to_vec(),
            },
        })
        .expect("serializable bundle")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self, BundleError> {
        let raw: BundleJson = serde_json::from_value(v.clone())
            .map_err(|e| BundleError::Input(format!("bundle.json: {e}")))?;
        if raw.dims.iter().any(|&n| n == 0) {
            return Err(BundleError::Input(
                "bundle.json: dims must be positive".into(),
            ));
        }
        let grid = Grid::torus(raw.dims);
        let nv = grid.vertex_count();
        let lp = raw.link_phases;
        for (name, arr) in [("x", &lp.x), ("y", &lp.y), ("z", &lp.z)] {
            if arr.len() != nv {
                return Err(BundleError::Input(format!(
                    "bundle.json: link_phases.{name} has {} entries, expected {nv}",
                    arr.len()
                )));
            }
        }
        let mut phases = lp.x;
        phases.extend(lp.y);
        phases.extend(lp.z);
        U1Bundle::from_phases(grid, phases)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChernReport {
    pub coords: [i64; 3],
    pub raw: [f64; 3],
    pub residuals: [f64; 3],
}

#[derive(Serialize, Deserialize)]
struct LinkPhases {
    x: Vec<f64>,
    y: Vec<f64>,
    z: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct BundleJson {
    dims: [usize; 3],
    link_phases: LinkPhases,
}

/// Landau-gauge phase contributed by the flux `k` through the torus normal to
/// `normal`, on the link `(dir, coords)`. The flux enters uniformly on the
/// plaquettes, with the single seam at the last `j`-column.
pub(crate) fn landau_phase(
    dims: [usize; 3],
    normal: usize,
    k: i64,
    dir: usize,
    c: [usize; 3],
) -> f64 {
    let (j, kd) = Grid::plane_dirs(normal);
    let (nj, nk) = (dims[j] as f64, dims[kd] as f64);
    let k = k as f64;
    if dir == kd {
        2.0 * PI * k * c[j] as f64 / (nj * nk)
    } else if dir == j && c[j] == dims[j] - 1 {
        -2.0 * PI * k * c[kd] as f64 / nk
    } else {
        0.0
    }
}

/// Bundle with uniform flux `k_i` through the coordinate tori normal to `e_i`.
///
/// Each plaquette normal to `e_i` carries `2π k_i / (N_j N_k)`; this must stay
/// below π in magnitude, i.e. `2|k_i| < N_j N_k`.
pub fn constant_flux_bundle(grid: Grid, k: [i64; 3]) -> Result<U1Bundle, BundleError> {
    if !grid.periodic {
        return Err(BundleError::Input(
            "bundles live on the periodic lattice".into(),
        ));
    }
    for normal in 0..3 {
        let (j, kd) = Grid::plane_dirs(normal);
        let area = (grid.dims[j] * grid.dims[kd]) as i64;
        if 2 * k[normal].abs() >= area {
            return Err(BundleError::Undersampled(format!(
                "flux {} through a {}-plaquette torus exceeds half a turn per plaquette",
                k[normal], area
            )));
        }
    }
    let nv = grid.vertex_count();
    let mut phases = vec![0.0; 3 * nv];
    for (l, ph) in phases.iter_mut().enumerate() {
        let (dir, v) = grid.link(l);
        let c = grid.coords(v);
        *ph = (0..3)
            .map(|n| landau_phase(grid.dims, n, k[n], dir, c))
            .sum();
    }
    U1Bundle::from_phases(grid, phases)
}

/// Random vertex gauge angles in `(−π, π]`.
pub fn random_gauge<R: rand::Rng>(grid: &Grid, rng: &mut R) -> Vec<f64> {
    (0..grid.vertex_count())
        .map(|_| rng.gen_range(-PI..PI))
        .collect()
}

pub(crate) fn phase_of(z: Complex64) -> f64 {
    z.im.atan2(z.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn wrap_range() {
        assert_eq!(wrap(PI), PI);
        assert!((wrap(-PI) - PI).abs() < 1e-15);
        assert!((wrap(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn trivial_bundle_has_no_flux() {
        let b = constant_flux_bundle(Grid::torus([4, 4, 4]), [0, 0, 0]).unwrap();
        assert!(b.phases().iter().all(|&p| p == 0.0));
        assert_eq!(b.chern_coordinates().unwrap(), [0, 0, 0]);
    }

    #[test]
    fn flux_round_trip() {
        let g = Grid::torus([16, 16, 16]);
        for k in [[0, 0, 1], [-2, 1, 3], [3, -3, 0]] {
            let b = constant_flux_bundle(g, k).unwrap();
            assert_eq!(b.chern_coordinates().unwrap(), k);
            let target = 2.0 * PI * k[2] as f64 / 256.0;
            for p in 2 * g.vertex_count()..3 * g.vertex_count() {
                assert!((b.curvature(p) - target).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn gauge_invariance_of_chern() {
        let g = Grid::torus([6, 5, 4]);
        let b = constant_flux_bundle(g, [1, -2, 3]).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let bg = b.gauge_transform(&random_gauge(&g, &mut rng));
        assert_eq!(bg.chern_coordinates().unwrap(), [1, -2, 3]);
        for v in 0..g.vertex_count() {
            assert!(bg.cube_flux(v).abs() < 1e-9);
        }
    }

    #[test]
    fn too_much_flux_is_rejected() {
        assert!(matches!(
            constant_flux_bundle(Grid::torus([2, 2, 2]), [0, 0, 2]),
            Err(BundleError::Undersampled(_))
        ));
    }

    #[test]
    fn corrupted_link_breaks_integrality() {
        let g = Grid::torus([4, 4, 4]);
        let mut b = U1Bundle::trivial(g);
        b.set_link_phase(g.link_id(0, 5), PI);
        assert!(matches!(
            b.chern_coordinates(),
            Err(BundleError::NonIntegralFlux { .. })
        ));
    }

    #[test]
    fn json_round_trip() {
        let b = constant_flux_bundle(Grid::torus([3, 4, 5]), [1, 0, -1]).unwrap();
        let back = U1Bundle::from_json(&b.to_json()).unwrap();
        assert_eq!(back, b);
        assert!(U1Bundle::from_json(&serde_json::json!({"dims": [2, 2, 2]})).is_err());
    }
}
