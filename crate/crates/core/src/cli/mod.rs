//! Command implementations behind the `zloch` binary. Every command builds a
//! JSON report; the text summary is rendered from that JSON.

mod report;

use std::collections::BTreeMap;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::bundle::{
    constant_flux_bundle, random_gauge, random_valid_section, vortex_section, BundleError,
    RandomSectionOptions, SampledSection, Seed, U1Bundle,
};
use crate::flows::{lambda_image, EmbeddedGraphFlow, FlowError};
use crate::homology::{Grid, HomologyError, LatticeManifold};
use crate::optimize::{parse_rational, shortest_flow, FlowProgram, OptimizeError};
use crate::spinor::model::{axis_winding, lattice_model_section, PHI0_RADII, PHI0_TOLERANCE};
use crate::spinor::{
    dirac_residual, is_mu_null, model_harmonic_spinor, mu, mu_norm, pair_tuple,
    phi0_extension_check, SpinorError,
};
use crate::zerolocus::{
    boundary_pairing, chain_to_graph, cube_cluster_boundary, extract_chart_chain,
    extract_vortex_chain_with, surface_flow_test, tangent_cone, ConeResult, ExtractOptions,
    WeightedChain1, ZeroLocusError,
};

pub use report::summary;

/// Process exit codes.
pub const EXIT_VERIFIED: i32 = 0;
pub const EXIT_FALSIFIED: i32 = 1;
pub const EXIT_INVALID: i32 = 2;

/// Invalid input; maps to exit code 2.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Bundle(#[from] BundleError),
    #[error(transparent)]
    ZeroLocus(#[from] ZeroLocusError),
    #[error(transparent)]
    Homology(#[from] HomologyError),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Optimize(#[from] OptimizeError),
    #[error(transparent)]
    Spinor(#[from] SpinorError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub report: Value,
    pub exit_code: i32,
}

impl Outcome {
    fn new<T: Serialize>(report: &T, verified: bool) -> Self {
        Outcome {
            report: serde_json::to_value(report).expect("serializable report"),
            exit_code: if verified {
                EXIT_VERIFIED
            } else {
                EXIT_FALSIFIED
            },
        }
    }

    /// Adds a `timing_ms` entry.
    pub fn with_timing(mut self, start: Instant) -> Self {
        if let Value::Object(m) = &mut self.report {
            m.insert(
                "timing_ms".into(),
                json!(start.elapsed().as_secs_f64() * 1e3),
            );
        }
        self
    }
}

/// Parses `a,b,c` into integers.
pub fn parse_ints<T: std::str::FromStr>(
    s: &str,
    len: usize,
    what: &str,
) -> Result<Vec<T>, CliError> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != len {
        return Err(CliError::Input(format!(
            "{what} needs {len} comma-separated integers, got {s:?}"
        )));
    }
    parts
        .iter()
        .map(|p| {
            p.parse()
                .map_err(|_| CliError::Input(format!("{what}: {p:?} is not an integer")))
        })
        .collect()
}

pub fn parse_dims(s: &str) -> Result<[usize; 3], CliError> {
    let v: Vec<usize> = parse_ints(s, 3, "--dims")?;
    if v.iter().any(|&n| n == 0) {
        return Err(CliError::Input("--dims entries must be positive".into()));
    }
    Ok([v[0], v[1], v[2]])
}

pub fn parse_class(s: &str) -> Result<[i64; 3], CliError> {
    let v: Vec<i64> = parse_ints(s, 3, "--class")?;
    Ok([v[0], v[1], v[2]])
}

// ---------------------------------------------------------------- analyze

#[derive(Clone, Copy, Debug)]
pub struct AnalyzeOptions {
    pub integrality_tolerance: f64,
    pub seed: u64,
    pub pairing_functions: usize,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        AnalyzeOptions {
            integrality_tolerance: crate::zerolocus::INTEGRALITY_TOLERANCE,
            seed: 0,
            pairing_functions: 100,
        }
    }
}

#[derive(Serialize)]
struct ChainSummary {
    support_size: usize,
    weighted_length: u64,
    branch_vertices: usize,
    graph_vertices: usize,
    graph_edges: usize,
}

#[derive(Serialize)]
struct Conservation {
    closed: bool,
    cube_surfaces_tested: usize,
    cube_surfaces_nonzero: usize,
    pairing_functions: usize,
    max_abs_pairing: f64,
    passed: bool,
}

#[derive(Serialize)]
struct AnalyzeReport {
    command: &'static str,
    dims: [usize; 3],
    chern_coordinates: [i64; 3],
    chain: ChainSummary,
    class: Vec<i64>,
    pd_c1: Vec<i64>,
    class_equals_pd: bool,
    conservation: Conservation,
    lambda_contains_pd: bool,
    verdict: bool,
}

/// Dual vertices where the support does not pass straight through (incidence ≠ 0, 2).
fn branch_vertices(chain: &WeightedChain1) -> usize {
    let g = chain.grid();
    let mut inc: BTreeMap<usize, usize> = BTreeMap::new();
    for &p in chain.coeffs().keys() {
        let (n, v) = g.plaquette(p);
        *inc.entry(v).or_insert(0) += 1;
        if let Some(t) = g.shift(v, n, -1) {
            *inc.entry(t).or_insert(0) += 1;
        }
    }
    inc.values().filter(|&&k| k != 2).count()
}

fn conservation(
    chain: &WeightedChain1,
    seed: u64,
    functions: usize,
) -> Result<Conservation, CliError> {
    let g = chain.grid();
    let nv = g.vertex_count();
    let closed = chain.is_closed();
    let mut nonzero = 0;
    for v in 0..nv {
        let s = cube_cluster_boundary(g, &[v]);
        if surface_flow_test(chain, &s)? != 0 {
            nonzero += 1;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..functions {
        let f: Vec<f64> = (0..nv).map(|_| rng.gen_range(-1.0..1.0)).collect();
        worst = worst.max(boundary_pairing(chain, &f)?.abs());
    }
    Ok(Conservation {
        closed,
        cube_surfaces_tested: nv,
        cube_surfaces_nonzero: nonzero,
        pairing_functions: functions,
        max_abs_pairing: worst,
        passed: closed && nonzero == 0 && worst == 0.0,
    })
}

/// Extracts the vortex chain of the section and compares its class with the
/// Poincaré dual of the bundle's Chern coordinates.
pub fn analyze(section: &Value, bundle: &Value, opts: AnalyzeOptions) -> Result<Outcome, CliError> {
    let b = U1Bundle::from_json(bundle)?;
    let c1 = b.chern_coordinates()?;
    let s = SampledSection::from_json(section)?;
    let grid = *b.grid();
    let m = LatticeManifold::torus(grid.dims)?;
    let eo = ExtractOptions {
        integrality_tolerance: opts.integrality_tolerance,
        ..ExtractOptions::default()
    };
    let chain = extract_vortex_chain_with(&s, &b, eo)?;
    let cons = conservation(&chain, opts.seed, opts.pairing_functions)?;
    let pd = m.poincare_dual(&c1)?;
    let (class, graph, lambda_ok) = if cons.closed {
        let class = m.dual_cycle_class(chain.coeffs())?;
        let egf = chain_to_graph(&chain)?;
        let lambda = lambda_image(&egf, &m)?;
        let ok = lambda.contains(&pd.free);
        (
            class.free,
            (egf.graph.vertices().len(), egf.graph.edges().len()),
            ok,
        )
    } else {
        (Vec::new(), (0, 0), false)
    };
    let equal = cons.closed && class == pd.free;
    let report = AnalyzeReport {
        command: "analyze",
        dims: grid.dims,
        chern_coordinates: c1,
        chain: ChainSummary {
            support_size: chain.support_size(),
            weighted_length: chain.weighted_length(),
            branch_vertices: branch_vertices(&chain),
            graph_vertices: graph.0,
            graph_edges: graph.1,
        },
        class,
        pd_c1: pd.free.clone(),
        class_equals_pd: equal,
        lambda_contains_pd: lambda_ok,
        verdict: equal && cons.passed,
        conservation: cons,
    };
    let verdict = report.verdict;
    Ok(Outcome::new(&report, verdict))
}

// ------------------------------------------------------------- obstruction

#[derive(Serialize)]
struct ObstructionReport {
    command: &'static str,
    dims: [usize; 3],
    c1: [i64; 3],
    pd_c1: Vec<i64>,
    flow_basis_size: usize,
    lambda_generators: Vec<Vec<i64>>,
    lambda_hnf: Vec<Vec<i64>>,
    member: bool,
    /// PD(c₁) reduced modulo Λ; zero iff member.
    residue: Vec<i64>,
}

/// Tests whether `PD(c₁)` lies in `Λ(Z) = Γ(Flow(Z))`.
pub fn obstruction(graph: &Value, dims: [usize; 3], c1: [i64; 3]) -> Result<Outcome, CliError> {
    let egf = EmbeddedGraphFlow::from_json(graph, None)?;
    let m = LatticeManifold::torus(dims)?;
    let lambda = lambda_image(&egf, &m)?;
    let pd = m.poincare_dual(&c1)?;
    let member = lambda.contains(&pd.free);
    let report = ObstructionReport {
        command: "obstruction",
        dims,
        c1,
        residue: lambda.reduce(&pd.free),
        pd_c1: pd.free,
        flow_basis_size: lambda.generators.len(),
        lambda_generators: lambda.generators.clone(),
        lambda_hnf: lambda.hnf.clone(),
        member,
    };
    Ok(Outcome::new(&report, member))
}

// ----------------------------------------------------------- shortest-flow

#[derive(Serialize)]
struct ShortestReport {
    command: &'static str,
    dims: [usize; 3],
    class: [i64; 3],
    spacing: String,
    /// Exact lattice length (edge count for unit lengths).
    length: String,
    /// `length × spacing`, the Hausdorff lower bound.
    bound: String,
    bound_f64: f64,
    optimal: bool,
    nodes: usize,
    witness: Value,
}

fn witness_json(dims: [usize; 3], w: &BTreeMap<usize, i64>) -> Value {
    let coeffs: BTreeMap<String, i64> = w.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    json!({"dims": dims, "cells": "primal_links", "coeffs": coeffs})
}

pub fn shortest(
    dims: [usize; 3],
    class: [i64; 3],
    spacing: &str,
    node_limit: usize,
) -> Result<Outcome, CliError> {
    use num_traits::ToPrimitive;
    let h = parse_rational(spacing)?;
    if h <= num_rational::BigRational::from_integer(0.into()) {
        return Err(CliError::Input("--spacing must be positive".into()));
    }
    let m = LatticeManifold::torus(dims)?;
    let mut p = FlowProgram::new(&m, &class)?;
    p.node_limit = node_limit;
    let (r, optimal) = match shortest_flow(&p) {
        Ok(r) => (r, true),
        Err(OptimizeError::BoundExceeded { best: Some(b), .. }) => (*b, false),
        Err(OptimizeError::BoundExceeded { best: None, nodes }) => {
            return Err(CliError::Input(format!(
                "search bound exceeded after {nodes} nodes without a feasible cycle"
            )))
        }
        Err(e) => return Err(e.into()),
    };
    let bound = &r.value * &h;
    let report = ShortestReport {
        command: "shortest-flow",
        dims,
        class,
        spacing: h.to_string(),
        length: r.value.to_string(),
        bound_f64: bound.to_f64().unwrap_or(f64::NAN),
        bound: bound.to_string(),
        optimal,
        nodes: r.nodes,
        witness: witness_json(dims, &r.witness),
    };
    Ok(Outcome::new(&report, optimal))
}

// ---------------------------------------------------------------- mu-check

#[derive(Serialize)]
struct MuReport {
    command: &'static str,
    samples: usize,
    spinors: usize,
    seed: u64,
    max_mu: f64,
    tolerance: f64,
    all_null: bool,
    passed: bool,
}

/// `μ(ψ₁, Jψ₁, …)` on random tuples.
pub fn mu_check(samples: usize, spinors: usize, seed: u64, tol: f64) -> Result<Outcome, CliError> {
    if spinors == 0 {
        return Err(CliError::Input("--spinors must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let mut all_null = true;
    for _ in 0..samples {
        let psis: Vec<[Complex64; 2]> = (0..spinors)
            .map(|_| {
                [0; 2].map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            })
            .collect();
        let b = pair_tuple(&psis);
        worst = worst.max(mu_norm(&mu(&b)));
        all_null &= is_mu_null(&b);
    }
    let report = MuReport {
        command: "mu-check",
        samples,
        spinors,
        seed,
        max_mu: worst,
        tolerance: tol,
        all_null,
        passed: worst <= tol && all_null,
    };
    let ok = report.passed;
    Ok(Outcome::new(&report, ok))
}

// --------------------------------------------------------------- model-lab

#[derive(Serialize)]
struct ModelReport {
    command: &'static str,
    exponent: u32,
    dirac_residual: f64,
    winding: i64,
    lattice_size: usize,
    lattice_multiplicity: i64,
    tangent_cone: ConeResult,
    single_line: bool,
    phi0_exponents: Vec<u32>,
    phi0: Value,
    passed: bool,
}

/// Local model checks for `(w^N, 0)`.
pub fn model_lab(
    n: u32,
    lattice: usize,
    phi0_exponents: &[u32],
    seed: u64,
) -> Result<Outcome, CliError> {
    if n == 0 {
        return Err(CliError::Input("--n must be positive".into()));
    }
    if lattice < 20 {
        return Err(CliError::Input("--lattice must be at least 20".into()));
    }
    let psi = model_harmonic_spinor(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<[f64; 3]> = (0..100)
        .map(|_| [0; 3].map(|_| rng.gen_range(-2.0..2.0)))
        .collect();
    let residual = dirac_residual(&psi, &pts);
    let winding = axis_winding(&psi, 0.5, 64)?;

    let (grid, values, base) = lattice_model_section(n, lattice);
    let chain = extract_chart_chain(&grid, &values)?;
    let multiplicity = transverse_flux(&chain, 2, base[2]);
    let r0 = lattice / 2 - 2;
    let radii = [r0, (r0 + 6) / 2, 6];
    let cone = tangent_cone(&chain, base, &radii)?;
    let single = matches!(&cone, ConeResult::Stable(c) if c.is_single_line());

    let phi0 = if phi0_exponents.is_empty() {
        Value::Null
    } else {
        let psis: Vec<_> = phi0_exponents
            .iter()
            .map(|&k| model_harmonic_spinor(k))
            .collect();
        serde_json::to_value(phi0_extension_check(&psis, &PHI0_RADII, PHI0_TOLERANCE)?)
            .expect("serializable")
    };
    let phi0_ok = phi0
        .get("converged")
        .and_then(Value::as_bool)
        .unwrap_or(true);
    let report = ModelReport {
        command: "model-lab",
        exponent: n,
        dirac_residual: residual,
        winding,
        lattice_size: lattice,
        lattice_multiplicity: multiplicity,
        tangent_cone: cone,
        single_line: single,
        phi0_exponents: phi0_exponents.to_vec(),
        phi0,
        passed: residual == 0.0
            && winding == n as i64
            && multiplicity == n as i64
            && single
            && phi0_ok,
    };
    let ok = report.passed;
    Ok(Outcome::new(&report, ok))
}

/// Net weight crossing the plane `x_axis = level + ½` of dual edges.
pub fn transverse_flux(chain: &WeightedChain1, axis: usize, level: usize) -> i64 {
    let g = chain.grid();
    chain
        .coeffs()
        .iter()
        .filter(|(&p, _)| {
            let (n, v) = g.plaquette(p);
            n == axis && g.coords(v)[axis] == level + 1
        })
        .map(|(_, &c)| c)
        .sum()
}

// ------------------------------------------------------------- generators

/// Constant-flux bundle, optionally in a random gauge and optionally with
/// one link phase replaced by π (which breaks flux integrality).
pub fn gen_bundle(
    dims: [usize; 3],
    k: [i64; 3],
    gauge_seed: Option<u64>,
    corrupt: bool,
) -> Result<Value, CliError> {
    let grid = Grid::torus(dims);
    let mut b = constant_flux_bundle(grid, k)?;
    if let Some(seed) = gauge_seed {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        b = b.gauge_transform(&random_gauge(&grid, &mut rng));
    }
    if corrupt {
        b.set_link_phase(0, std::f64::consts::PI);
    }
    Ok(b.to_json())
}

/// Parses `axis:x:y:m`.
pub fn parse_seed(s: &str) -> Result<Seed, CliError> {
    let v: Vec<i64> = parse_ints(&s.replace(':', ","), 4, "--vortex")?;
    if !(0..3).contains(&v[0]) || v[1] < 0 || v[2] < 0 {
        return Err(CliError::Input(format!(
            "--vortex {s:?}: expected axis:x:y:multiplicity"
        )));
    }
    Ok(Seed {
        axis: v[0] as usize,
        at: [v[1] as usize, v[2] as usize],
        multiplicity: v[3],
    })
}

/// A vortex section with the given seeds, or a random valid section.
pub fn gen_section(bundle: &Value, seeds: Option<&[Seed]>, seed: u64) -> Result<Value, CliError> {
    let b = U1Bundle::from_json(bundle)?;
    let s = match seeds {
        Some(list) => vortex_section(&b, list)?,
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            random_valid_section(&b, &mut rng, &RandomSectionOptions::default())?.0
        }
    };
    Ok(s.to_json())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn analyze_trivial() {
        let grid = Grid::torus([4, 4, 4]);
        let b = U1Bundle::trivial(grid).to_json();
        let s = SampledSection::constant(grid, Complex64::new(1.0, 0.0)).to_json();
        let out = analyze(&s, &b, AnalyzeOptions::default()).unwrap();
        assert_eq!(out.exit_code, EXIT_VERIFIED);
        assert_eq!(out.report["chain"]["support_size"], 0);
        assert_eq!(out.report["class"], json!([0, 0, 0]));
    }

    #[test]
    fn analyze_vortex() {
        let b = gen_bundle([8, 8, 8], [0, 0, 1], Some(3), false).unwrap();
        let s = gen_section(&b, None, 5).unwrap();
        let out = analyze(&s, &b, AnalyzeOptions::default()).unwrap();
        assert_eq!(out.exit_code, EXIT_VERIFIED, "{}", out.report);
        assert_eq!(out.report["class"], json!([0, 0, 1]));
    }

    #[test]
    fn corrupted_bundle_is_invalid() {
        let b = gen_bundle([6, 6, 6], [0, 0, 1], None, true).unwrap();
        let s =
            SampledSection::constant(Grid::torus([6, 6, 6]), Complex64::new(1.0, 0.0)).to_json();
        let err = analyze(&s, &b, AnalyzeOptions::default()).unwrap_err();
        assert!(err.to_string().contains("non-integral flux"), "{err}");
    }

    #[test]
    fn obstruction_vertical_circle() {
        let g = json!({"vertices":["a"],"edges":[{"id":"e","tail":"a","head":"a",
            "polyline":[[1,1,0],[1,1,4]]}]});
        assert_eq!(
            obstruction(&g, [4, 4, 4], [0, 0, 2]).unwrap().exit_code,
            EXIT_VERIFIED
        );
        let out = obstruction(&g, [4, 4, 4], [1, 0, 0]).unwrap();
        assert_eq!(out.exit_code, EXIT_FALSIFIED);
        assert_eq!(out.report["residue"], json!([1, 0, 0]));
        let empty = json!({"vertices":[],"edges":[]});
        assert_eq!(
            obstruction(&empty, [4, 4, 4], [0, 0, 0]).unwrap().exit_code,
            EXIT_VERIFIED
        );
    }

    #[test]
    fn shortest_flow_command() {
        let out = shortest([4, 4, 4], [0, 0, 1], "1", 1000).unwrap();
        assert_eq!(out.report["length"], "4");
        let out = shortest([4, 4, 4], [0, 0, 1], "0.25", 1000).unwrap();
        assert_eq!(out.report["bound"], "1");
    }

    #[test]
    fn mu_and_model() {
        let out = mu_check(1000, 3, 1, 1e-12).unwrap();
        assert_eq!(out.exit_code, EXIT_VERIFIED);
        let out = model_lab(2, 24, &[1, 2], 0).unwrap();
        assert_eq!(out.exit_code, EXIT_VERIFIED, "{}", out.report);
        assert_eq!(out.report["winding"], 2);
        assert_eq!(out.report["dirac_residual"], 0.0);
    }

    #[test]
    fn argument_parsing() {
        assert_eq!(parse_dims("4,5,6").unwrap(), [4, 5, 6]);
        assert!(parse_dims("4,0,6").is_err());
        assert!(parse_class("1,2").is_err());
        let s = parse_seed("2:3:4:-1").unwrap();
        assert_eq!((s.axis, s.at, s.multiplicity), (2, [3, 4], -1));
        assert!(parse_seed("5:1:1:1").is_err());
    }
}
