//! The zero locus of a sampled section, read off as plaquette vorticity.
//!
//! The coefficient on the dual edge through plaquette `p` is
//! `n_p = (Σ_{∂p} δ_ℓ + q F_p) / 2π`, with `δ_ℓ` the covariant link deltas.
//! Nothing here thresholds `|s|`.

mod cone;
mod graph;

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bundle::{self, BundleError, SampledSection, U1Bundle, ZERO_SAMPLE_THRESHOLD};
use crate::flows::FlowError;
use crate::homology::{Grid, HomologyError};

pub use cone::{
    collapse_ball, collapse_tube, tangent_cone, ChiProfile, ConeResult, Ray, TangentCone,
};
pub use graph::chain_to_graph;

/// Default margin below π for covariant deltas.
pub const UNDERSAMPLE_TOLERANCE: f64 = 1e-3;
/// Default integrality tolerance for plaquette vorticity.
pub const INTEGRALITY_TOLERANCE: f64 = 1e-6;
/// Largest phase step a winding-number loop may take.
pub const WINDING_STEP_GUARD: f64 = PI / 2.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ZeroLocusError {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("zero sample at vertex {0:?}")]
    ZeroSample([usize; 3]),
    #[error(
        "undersampled section at link {link} (dir {dir}, base {base:?}): |delta| = {delta:.6}"
    )]
    Undersampled {
        link: usize,
        dir: usize,
        base: [usize; 3],
        delta: f64,
    },
    #[error("undersampled loop: step {index} has phase jump {jump:.6}")]
    UndersampledLoop { index: usize, jump: f64 },
    #[error("non-integral vorticity at plaquette {plaquette}: residual {residual:.3e}")]
    NonIntegral { plaquette: usize, residual: f64 },
    #[error("chain is not closed at dual vertices {0:?}")]
    NotClosed(Vec<[usize; 3]>),
    #[error(transparent)]
    Bundle(#[from] BundleError),
    #[error(transparent)]
    Homology(#[from] HomologyError),
    #[error(transparent)]
    Flow(#[from] FlowError),
}

/// Integer coefficients on dual edges, keyed by the plaquette each crosses;
/// positive means the `+e_normal` direction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedChain1 {
    grid: Grid,
    coeffs: BTreeMap<usize, i64>,
}

impl WeightedChain1 {
    pub fn new(grid: Grid, coeffs: BTreeMap<usize, i64>) -> Result<Self, ZeroLocusError> {
        for &p in coeffs.keys() {
            if p >= 3 * grid.vertex_count() || !grid.has_plaquette(p) {
                return Err(ZeroLocusError::Input(format!("no plaquette {p}")));
            }
        }
        Ok(WeightedChain1 {
            grid,
            coeffs: coeffs.into_iter().filter(|(_, c)| *c != 0).collect(),
        })
    }

    pub fn empty(grid: Grid) -> Self {
        WeightedChain1 {
            grid,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &BTreeMap<usize, i64> {
        &self.coeffs
    }

    pub fn coeff(&self, plaquette: usize) -> i64 {
        self.coeffs.get(&plaquette).copied().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn support_size(&self) -> usize {
        self.coeffs.len()
    }

    /// Σ |coefficient| × (unit edge length).
    pub fn weighted_length(&self) -> u64 {
        self.coeffs.values().map(|c| c.unsigned_abs()).sum()
    }

    /// Net inflow at each dual vertex (cube) present in the lattice.
    pub fn divergence(&self) -> BTreeMap<usize, i64> {
        let mut ends: Vec<(usize, i64)> = Vec::with_capacity(2 * self.coeffs.len());
        for (&p, &c) in &self.coeffs {
            let (n, v) = self.grid.plaquette(p);
            if self.grid.has_cube(v) {
                ends.push((v, c));
            }
            if let Some(t) = self.grid.shift(v, n, -1) {
                if self.grid.has_cube(t) {
                    ends.push((t, -c));
                }
            }
        }
        ends.sort_unstable_by_key(|e| e.0);
        let mut div = BTreeMap::new();
        for run in ends.chunk_by(|a, b| a.0 == b.0) {
            let total: i64 = run.iter().map(|e| e.1).sum();
            if total != 0 {
                div.insert(run[0].0, total);
            }
        }
        div
    }

    pub fn is_closed(&self) -> bool {
        self.divergence().is_empty()
    }

    pub(crate) fn require_closed(&self) -> Result<(), ZeroLocusError> {
        let div = self.divergence();
        if div.is_empty() {
            Ok(())
        } else {
            Err(ZeroLocusError::NotClosed(
                div.keys().map(|&v| self.grid.coords(v)).collect(),
            ))
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let edges: Vec<DualEdgeJson> = self
            .coeffs
            .iter()
            .map(|(&plaquette_id, &coeff)| DualEdgeJson {
                plaquette_id,
                coeff,
            })
            .collect();
        serde_json::json!({ "dims": self.grid.dims, "dual_edges": edges })
    }

    /// Parses chain.json; `dims` may come from the file or the caller.
    pub fn from_json(
        v: &serde_json::Value,
        dims: Option<[usize; 3]>,
    ) -> Result<Self, ZeroLocusError> {
        #[derive(Deserialize)]
        struct Raw {
            dims: Option<[usize; 3]>,
            dual_edges: Vec<DualEdgeJson>,
        }
        let raw: Raw = serde_json::from_value(v.clone())
            .map_err(|e| ZeroLocusError::Input(format!("chain.json: {e}")))?;
        let dims = raw
            .dims
            .or(dims)
            .ok_or_else(|| ZeroLocusError::Input("chain.json: lattice dims unknown".into()))?;
        let mut coeffs = BTreeMap::new();
        for e in raw.dual_edges {
            *coeffs.entry(e.plaquette_id).or_insert(0) += e.coeff;
        }
        WeightedChain1::new(Grid::torus(dims), coeffs)
    }
}

#[derive(Serialize, Deserialize)]
struct DualEdgeJson {
    plaquette_id: usize,
    coeff: i64,
}

/// Degree of a closed loop of nonzero samples, with the default step guard.
pub fn winding_number(samples: &[Complex64]) -> Result<i64, ZeroLocusError> {
    winding_number_with_guard(samples, WINDING_STEP_GUARD)
}

/// Degree of a closed loop; any wrapped phase step of magnitude `>= guard`
/// is reported as undersampling.
pub fn winding_number_with_guard(samples: &[Complex64], guard: f64) -> Result<i64, ZeroLocusError> {
    if samples.is_empty() {
        return Ok(0);
    }
    if let Some(i) = samples
        .iter()
        .position(|z| z.norm() < ZERO_SAMPLE_THRESHOLD)
    {
        return Err(ZeroLocusError::Input(format!("loop sample {i} is zero")));
    }
    let mut total = 0.0;
    for i in 0..samples.len() {
        let a = samples[i];
        let b = samples[(i + 1) % samples.len()];
        let step = bundle::wrap(bundle::phase_of(b) - bundle::phase_of(a));
        if step.abs() >= guard {
            return Err(ZeroLocusError::UndersampledLoop {
                index: i,
                jump: step,
            });
        }
        total += step;
    }
    Ok((total / (2.0 * PI)).round() as i64)
}

#[derive(Clone, Copy, Debug)]
pub struct ExtractOptions {
    pub undersample_tolerance: f64,
    pub integrality_tolerance: f64,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        ExtractOptions {
            undersample_tolerance: UNDERSAMPLE_TOLERANCE,
            integrality_tolerance: INTEGRALITY_TOLERANCE,
        }
    }
}

pub fn extract_vortex_chain(
    s: &SampledSection,
    b: &U1Bundle,
) -> Result<WeightedChain1, ZeroLocusError> {
    extract_vortex_chain_with(s, b, ExtractOptions::default())
}

pub fn extract_vortex_chain_with(
    s: &SampledSection,
    b: &U1Bundle,
    opts: ExtractOptions,
) -> Result<WeightedChain1, ZeroLocusError> {
    if s.grid() != b.grid() {
        return Err(ZeroLocusError::Input(format!(
            "section dims {:?} differ from bundle dims {:?}",
            s.grid().dims,
            b.grid().dims
        )));
    }
    let q = s.charge() as f64;
    extract(
        b.grid(),
        s.values(),
        q,
        |l| b.link_phase(l),
        |p| b.curvature(p),
        opts,
    )
}

/// Vorticity of samples on an open coordinate box with the trivial bundle.
pub fn extract_chart_chain(
    grid: &Grid,
    values: &[Complex64],
) -> Result<WeightedChain1, ZeroLocusError> {
    if values.len() != grid.vertex_count() {
        return Err(ZeroLocusError::Input(
            "one sample per vertex required".into(),
        ));
    }
    extract(
        grid,
        values,
        1.0,
        |_| 0.0,
        |_| 0.0,
        ExtractOptions::default(),
    )
}

/// Samples `f` at the vertices of `grid`, with vertex `c` placed at `c − origin`.
pub fn sample_on_chart<F: Fn([f64; 3]) -> Complex64 + Sync>(
    grid: &Grid,
    origin: [f64; 3],
    f: F,
) -> Vec<Complex64> {
    (0..grid.vertex_count())
        .into_par_iter()
        .map(|v| {
            let c = grid.coords(v);
            f([0, 1, 2].map(|i| c[i] as f64 - origin[i]))
        })
        .collect()
}

fn extract<P, F>(
    grid: &Grid,
    values: &[Complex64],
    q: f64,
    link_phase: P,
    curvature: F,
    opts: ExtractOptions,
) -> Result<WeightedChain1, ZeroLocusError>
where
    P: Fn(usize) -> f64 + Sync,
    F: Fn(usize) -> f64 + Sync,
{
    if let Some(v) = values.iter().position(|z| z.norm() < ZERO_SAMPLE_THRESHOLD) {
        return Err(ZeroLocusError::ZeroSample(grid.coords(v)));
    }
    let phases: Vec<f64> = values.par_iter().map(|&z| bundle::phase_of(z)).collect();
    let nl = 3 * grid.vertex_count();
    let limit = PI - opts.undersample_tolerance;
    let deltas: Vec<Option<f64>> = (0..nl)
        .into_par_iter()
        .map(|l| {
            grid.link_ends(l)
                .map(|(t, h)| bundle::wrap(phases[h] - phases[t] - q * link_phase(l)))
        })
        .collect();
    if let Some((l, d)) = deltas
        .iter()
        .enumerate()
        .find_map(|(l, d)| d.filter(|x| x.abs() >= limit).map(|x| (l, x)))
    {
        let (dir, v) = grid.link(l);
        return Err(ZeroLocusError::Undersampled {
            link: l,
            dir,
            base: grid.coords(v),
            delta: d,
        });
    }
    let ns: Vec<Result<i64, ZeroLocusError>> = (0..nl)
        .into_par_iter()
        .map(|p| {
            let Some(links) = grid.plaquette_links(p) else {
                return Ok(0);
            };
            let circ: f64 = links
                .iter()
                .map(|&(l, s)| s as f64 * deltas[l].expect("plaquette link"))
                .sum();
            let x = (circ + q * curvature(p)) / (2.0 * PI);
            let n = x.round();
            let residual = (x - n).abs();
            if residual > opts.integrality_tolerance {
                return Err(ZeroLocusError::NonIntegral {
                    plaquette: p,
                    residual,
                });
            }
            Ok(n as i64)
        })
        .collect();
    let mut coeffs = BTreeMap::new();
    for (p, n) in ns.into_iter().enumerate() {
        let n = n?;
        if n != 0 {
            coeffs.insert(p, n);
        }
    }
    Ok(WeightedChain1 {
        grid: *grid,
        coeffs,
    })
}

/// Signed crossings of the chain through a closed primal surface that bounds.
pub fn surface_flow_test(
    chain: &WeightedChain1,
    surface: &BTreeMap<usize, i64>,
) -> Result<i64, ZeroLocusError> {
    let grid = chain.grid();
    let mut bd: BTreeMap<usize, i64> = BTreeMap::new();
    for (&p, &c) in surface {
        let links = grid
            .plaquette_links(p)
            .ok_or_else(|| ZeroLocusError::Input(format!("no plaquette {p}")))?;
        for (l, s) in links {
            *bd.entry(l).or_insert(0) += c * s;
        }
    }
    bd.retain(|_, x| *x != 0);
    if !bd.is_empty() {
        return Err(ZeroLocusError::Input(format!(
            "surface is not closed ({} boundary links)",
            bd.len()
        )));
    }
    if grid.periodic {
        for dir in 0..3 {
            let circle = grid.dual_coordinate_circle(dir, 0);
            let pairing: i64 = circle
                .iter()
                .map(|(p, c)| c * surface.get(p).copied().unwrap_or(0))
                .sum();
            if pairing != 0 {
                return Err(ZeroLocusError::Input(
                    "surface does not bound: it wraps a coordinate direction".into(),
                ));
            }
        }
    }
    Ok(surface.iter().map(|(p, c)| c * chain.coeff(*p)).sum())
}

/// Oriented boundary of a set of cubes, as a primal 2-chain.
pub fn cube_cluster_boundary(grid: &Grid, cubes: &[usize]) -> BTreeMap<usize, i64> {
    let mut out = BTreeMap::new();
    for &v in cubes {
        if let Some(faces) = grid.cube_faces(v) {
            for (p, s) in faces {
                *out.entry(p).or_insert(0) += s;
            }
        }
    }
    out.retain(|_, x| *x != 0);
    out
}

/// `Σ_e Θ(e) (f(head) − f(tail))` for `f` on dual vertices (cubes), summed as
/// `Σ_v f(v) · div(v)`, so it is exactly zero on closed chains.
pub fn boundary_pairing(chain: &WeightedChain1, f: &[f64]) -> Result<f64, ZeroLocusError> {
    Ok(boundary_pairings(chain, &[f])?[0])
}

/// [`boundary_pairing`] against several functions, sharing one divergence.
pub fn boundary_pairings<F: AsRef<[f64]>>(
    chain: &WeightedChain1,
    fs: &[F],
) -> Result<Vec<f64>, ZeroLocusError> {
    let nv = chain.grid.vertex_count();
    if let Some(f) = fs.iter().find(|f| f.as_ref().len() != nv) {
        return Err(ZeroLocusError::Input(format!(
            "{} function values for {nv} dual vertices",
            f.as_ref().len()
        )));
    }
    let div = chain.divergence();
    Ok(fs
        .iter()
        .map(|f| {
            let f = f.as_ref();
            div.iter().map(|(&v, &d)| f[v] * d as f64).sum()
        })
        .collect())
}
