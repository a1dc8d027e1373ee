use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{constant_flux_bundle, phase_of, wrap, BundleError, U1Bundle};
use crate::homology::Grid;

/// Samples with modulus below this count as zeros.
pub const ZERO_SAMPLE_THRESHOLD: f64 = 1e-12;

/// One complex value per lattice vertex, in the gauge of its bundle.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledSection {
    grid: Grid,
    values: Vec<Complex64>,
    charge: i64,
}

impl SampledSection {
    pub fn new(grid: Grid, values: Vec<Complex64>, charge: i64) -> Result<Self, BundleError> {
        if values.len() != grid.vertex_count() {
            return Err(BundleError::Input(format!(
                "{} samples for {} vertices",
                values.len(),
                grid.vertex_count()
            )));
        }
        if let Some(i) = values
            .iter()
            .position(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(BundleError::Input(format!(
                "non-finite sample at vertex {:?}",
                grid.coords(i)
            )));
        }
        Ok(SampledSection {
            grid,
            values,
            charge,
        })
    }

    pub fn constant(grid: Grid, z: Complex64) -> Self {
        SampledSection {
            values: vec![z; grid.vertex_count()],
            grid,
            charge: 1,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn charge(&self) -> i64 {
        self.charge
    }

    /// First vertex whose sample is (numerically) zero.
    pub fn first_zero(&self) -> Option<usize> {
        self.values
            .iter()
            .position(|z| z.norm() < ZERO_SAMPLE_THRESHOLD)
    }

    /// `s(v) ↦ e^{i q g(v)} s(v)`, the partner of [`U1Bundle::gauge_transform`].
    pub fn gauge_transform(&self, g: &[f64]) -> SampledSection {
        assert_eq!(g.len(), self.values.len());
        let q = self.charge as f64;
        SampledSection {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(g)
                .map(|(z, &a)| z * Complex64::from_polar(1.0, q * a))
                .collect(),
            charge: self.charge,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(SectionJson {
            dims: self.grid.dims,
            values: self.values.iter().map(|z| [z.re, z.im]).collect(),
            charge: self.charge,
        })
        .expect("serializable section")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self, BundleError> {
        let raw: SectionJson = serde_json::from_value(v.clone())
            .map_err(|e| BundleError::Input(format!("section.json: {e}")))?;
        if raw.dims.iter().any(|&n| n == 0) {
            return Err(BundleError::Input(
                "section.json: dims must be positive".into(),
            ));
        }
        SampledSection::new(
            Grid::torus(raw.dims),
            raw.values
                .into_iter()
                .map(|[a, b]| Complex64::new(a, b))
                .collect(),
            raw.charge,
        )
    }
}

fn default_charge() -> i64 {
    1
}

#[derive(Serialize, Deserialize)]
struct SectionJson {
    dims: [usize; 3],
    values: Vec<[f64; 2]>,
    #[serde(default = "default_charge")]
    charge: i64,
}

/// `wrap(arg s_head − arg s_tail − q θ_ℓ)`.
pub fn covariant_link_delta(
    s: &SampledSection,
    b: &U1Bundle,
    link: usize,
) -> Result<f64, BundleError> {
    let grid = b.grid();
    let (t, h) = grid
        .link_ends(link)
        .ok_or_else(|| BundleError::Input(format!("no link {link}")))?;
    for v in [t, h] {
        if s.values[v].norm() < ZERO_SAMPLE_THRESHOLD {
            return Err(BundleError::ZeroSample(grid.coords(v)));
        }
    }
    Ok(wrap(
        phase_of(s.values[h]) - phase_of(s.values[t]) - s.charge as f64 * b.link_phase(link),
    ))
}

/// A prescribed vortex line: the dual line through the plaquettes normal to
/// `axis` whose base vertex has in-plane coordinates `at` (ordered as the
/// plane directions `(axis+1, axis+2) mod 3`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Seed {
    pub axis: usize,
    pub at: [usize; 2],
    pub multiplicity: i64,
}

/// Zero-mean lattice Green's function of `4 − (sum of the four neighbours)` on
/// an `n1 × n2` torus, row-major in `(dx, dy)`.
fn green(n1: usize, n2: usize) -> Arc<Vec<f64>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<Vec<f64>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(g) = cache.lock().unwrap().get(&(n1, n2)) {
        return g.clone();
    }
    let area = (n1 * n2) as f64;
    let mut g = vec![0.0; n1 * n2];
    let cx: Vec<(f64, f64)> = (0..n1)
        .map(|a| {
            let t = 2.0 * PI * a as f64 / n1 as f64;
            (t.cos(), t.sin())
        })
        .collect();
    let cy: Vec<(f64, f64)> = (0..n2)
        .map(|b| {
            let t = 2.0 * PI * b as f64 / n2 as f64;
            (t.cos(), t.sin())
        })
        .collect();
    for a in 0..n1 {
        for b in 0..n2 {
            if a == 0 && b == 0 {
                continue;
            }
            let lambda = 4.0 - 2.0 * cx[a].0 - 2.0 * cy[b].0;
            let w = 1.0 / (area * lambda);
            for dx in 0..n1 {
                let (c1, s1) = cx[(a * dx) % n1];
                for dy in 0..n2 {
                    let (c2, s2) = cy[(b * dy) % n2];
                    g[dx * n2 + dy] += w * (c1 * c2 - s1 * s2);
                }
            }
        }
    }
    let g = Arc::new(g);
    cache.lock().unwrap().insert((n1, n2), g.clone());
    g
}

/// Phases and amplitudes on an `n1 × n2` torus carrying Landau flux `k` with
/// unit vortices at the given plaquettes; row-major in `(x, y)`.
fn planar_vortices(
    n1: usize,
    n2: usize,
    k: i64,
    vortices: &[(usize, usize, i64)],
) -> (Vec<f64>, Vec<f64>) {
    let g = green(n1, n2);
    let idx = |x: usize, y: usize| x * n2 + y;
    let mut psi = vec![0.0; n1 * n2];
    for &(vx, vy, sign) in vortices {
        for x in 0..n1 {
            let dx = (x + n1 - vx) % n1;
            for y in 0..n2 {
                let dy = (y + n2 - vy) % n2;
                psi[idx(x, y)] += 2.0 * PI * sign as f64 * g[dx * n2 + dy];
            }
        }
    }
    let kf = k as f64;
    let theta_x = |x: usize, y: usize| {
        if x == n1 - 1 {
            -2.0 * PI * kf * y as f64 / n2 as f64
        } else {
            0.0
        }
    };
    let theta_y = |x: usize, _y: usize| 2.0 * PI * kf * x as f64 / (n1 * n2) as f64;
    let delta_x = |x: usize, y: usize| psi[idx(x, y)] - psi[idx(x, (y + n2 - 1) % n2)];
    let delta_y = |x: usize, y: usize| psi[idx((x + n1 - 1) % n1, y)] - psi[idx(x, y)];

    let hol_x: f64 = (0..n1).map(|x| delta_x(x, 0) + theta_x(x, 0)).sum();
    let hol_y: f64 = (0..n2).map(|y| delta_y(0, y) + theta_y(0, y)).sum();
    let h_x = -wrap(hol_x) / n1 as f64;
    let h_y = -wrap(hol_y) / n2 as f64;

    let mut alpha = vec![0.0; n1 * n2];
    for x in 1..n1 {
        alpha[idx(x, 0)] = alpha[idx(x - 1, 0)] + delta_x(x - 1, 0) + theta_x(x - 1, 0) + h_x;
    }
    for x in 0..n1 {
        for y in 1..n2 {
            alpha[idx(x, y)] = alpha[idx(x, y - 1)] + delta_y(x, y - 1) + theta_y(x, y - 1) + h_y;
        }
    }

    let amp = (0..n1 * n2)
        .map(|i| {
            let (x, y) = (i / n2, i % n2);
            let d = vortices
                .iter()
                .map(|&(vx, vy, _)| {
                    let ddx = periodic_gap(x as f64, vx as f64 + 0.5, n1 as f64);
                    let ddy = periodic_gap(y as f64, vy as f64 + 0.5, n2 as f64);
                    (ddx * ddx + ddy * ddy).sqrt()
                })
                .fold(f64::INFINITY, f64::min);
            if d.is_finite() {
                d.tanh()
            } else {
                1.0
            }
        })
        .collect();
    (alpha, amp)
}

fn periodic_gap(a: f64, b: f64, n: f64) -> f64 {
    let d = (a - b).rem_euclid(n);
    d.min(n - d)
}

/// Vertex angles `g` with `θ = θ_L + dg`, where `θ_L` is the constant-flux
/// bundle with the same Chern coordinates.
fn gauge_to_landau(b: &U1Bundle) -> Result<(U1Bundle, Vec<f64>, [i64; 3]), BundleError> {
    let grid = *b.grid();
    let k = b.chern_coordinates()?;
    let landau = constant_flux_bundle(grid, k)?;
    let diff = |l: usize| wrap(b.link_phase(l) - landau.link_phase(l));
    let nv = grid.vertex_count();
    let mut g = vec![0.0; nv];
    // tree: along x on the first row, then y, then z
    for v in 0..nv {
        let c = grid.coords(v);
        let (dir, prev) = if c[2] > 0 {
            (2, grid.shift(v, 2, -1).unwrap())
        } else if c[1] > 0 {
            (1, grid.shift(v, 1, -1).unwrap())
        } else if c[0] > 0 {
            (0, grid.shift(v, 0, -1).unwrap())
        } else {
            continue;
        };
        g[v] = g[prev] + diff(grid.link_id(dir, prev));
    }
    for l in 0..3 * nv {
        let (t, h) = grid.link_ends(l).unwrap();
        if wrap(g[h] - g[t] - diff(l)).abs() > 1e-9 {
            return Err(BundleError::Input(
                "vortex sections need a constant-flux bundle up to gauge".into(),
            ));
        }
    }
    Ok((landau, g, k))
}

/// A section of `b` whose vorticity is the prescribed set of straight dual
/// lines. Each line of multiplicity `m` is realised as `|m|` adjacent
/// unit lines, since a single plaquette cannot resolve more than one turn.
pub fn vortex_section(b: &U1Bundle, seeds: &[Seed]) -> Result<SampledSection, BundleError> {
    let grid = *b.grid();
    let (_, g, k) = gauge_to_landau(b)?;
    let mut per_axis: [Vec<(usize, usize, i64)>; 3] = Default::default();
    let mut totals = [0i64; 3];
    for s in seeds {
        if s.axis > 2 {
            return Err(BundleError::Input(format!(
                "seed axis {} out of range",
                s.axis
            )));
        }
        let (j, kd) = Grid::plane_dirs(s.axis);
        if s.at[0] >= grid.dims[j] || s.at[1] >= grid.dims[kd] {
            return Err(BundleError::Input(format!(
                "seed {:?} outside the lattice",
                s.at
            )));
        }
        totals[s.axis] += s.multiplicity;
        let sign = s.multiplicity.signum();
        for i in 0..s.multiplicity.unsigned_abs() as usize {
            per_axis[s.axis].push(((s.at[0] + i) % grid.dims[j], s.at[1], sign));
        }
    }
    for a in 0..3 {
        if totals[a] != k[a] {
            return Err(BundleError::FluxMismatch(format!(
                "seeds along axis {a} carry total multiplicity {}, bundle flux is {}",
                totals[a], k[a]
            )));
        }
    }
    for a in 0..3 {
        let axis_seeds: Vec<&Seed> = seeds.iter().filter(|s| s.axis == a).collect();
        let (j, kd) = Grid::plane_dirs(a);
        for (i, s) in axis_seeds.iter().enumerate() {
            for t in &axis_seeds[i + 1..] {
                let dx = periodic_gap(s.at[0] as f64, t.at[0] as f64, grid.dims[j] as f64);
                let dy = periodic_gap(s.at[1] as f64, t.at[1] as f64, grid.dims[kd] as f64);
                if dx.max(dy) < 3.0 {
                    return Err(BundleError::Input(format!(
                        "seeds {:?} and {:?} are closer than 3 lattice units",
                        s.at, t.at
                    )));
                }
            }
        }
    }
    let values = assemble(&grid, k, &per_axis);
    let s = SampledSection::new(grid, values, 1)?;
    Ok(s.gauge_transform(&g))
}

/// Product over axes of the planar vortex sections, in the Landau gauge.
fn assemble(grid: &Grid, k: [i64; 3], per_axis: &[Vec<(usize, usize, i64)>; 3]) -> Vec<Complex64> {
    let planes: Vec<(Vec<f64>, Vec<f64>)> = (0..3)
        .map(|a| {
            let (j, kd) = Grid::plane_dirs(a);
            planar_vortices(grid.dims[j], grid.dims[kd], k[a], &per_axis[a])
        })
        .collect();
    (0..grid.vertex_count())
        .map(|v| {
            let c = grid.coords(v);
            let mut phase = 0.0;
            let mut amp = 1.0;
            for (a, (alpha, am)) in planes.iter().enumerate() {
                let (j, kd) = Grid::plane_dirs(a);
                let i = c[j] * grid.dims[kd] + c[kd];
                phase += alpha[i];
                amp *= am[i];
            }
            Complex64::from_polar(amp, phase)
        })
        .collect()
}

/// Knobs for [`random_valid_section`].
#[derive(Clone, Debug)]
pub struct RandomSectionOptions {
    /// Up to this many vortex/antivortex pairs per axis.
    pub max_pairs: usize,
    /// Amplitude of the smooth random phase perturbation (radians).
    pub phase_noise: f64,
    /// Accept only sections whose covariant link deltas stay below this.
    pub max_delta: f64,
    pub max_attempts: usize,
}

impl Default for RandomSectionOptions {
    fn default() -> Self {
        RandomSectionOptions {
            max_pairs: 2,
            phase_noise: 0.6,
            max_delta: 2.5,
            max_attempts: 200,
        }
    }
}

/// A random section of `b` with smooth zero lines: the required net vortices
/// plus random vortex/antivortex pairs, a smooth random phase and a smooth
/// random amplitude, resampled until every link is well resolved. Returns the
/// unit seeds used.
pub fn random_valid_section<R: Rng>(
    b: &U1Bundle,
    rng: &mut R,
    opts: &RandomSectionOptions,
) -> Result<(SampledSection, Vec<Seed>), BundleError> {
    SectionSampler::new(b)?.sample(rng, opts)
}

/// Draws many random sections of one bundle; the gauge relating the bundle
/// to its constant-flux representative is computed once.
pub struct SectionSampler {
    grid: Grid,
    k: [i64; 3],
    g: Vec<f64>,
    link_phases: Vec<f64>,
    /// `e^{2πi c/N}` per axis and coordinate.
    roots: [Vec<Complex64>; 3],
}

impl SectionSampler {
    pub fn new(b: &U1Bundle) -> Result<Self, BundleError> {
        let grid = *b.grid();
        let (_, g, k) = gauge_to_landau(b)?;
        let roots = [0, 1, 2].map(|i| {
            (0..grid.dims[i])
                .map(|c| Complex64::from_polar(1.0, 2.0 * PI * c as f64 / grid.dims[i] as f64))
                .collect()
        });
        Ok(SectionSampler {
            grid,
            k,
            g,
            link_phases: b.phases().to_vec(),
            roots,
        })
    }

    pub fn sample<R: Rng>(
        &self,
        rng: &mut R,
        opts: &RandomSectionOptions,
    ) -> Result<(SampledSection, Vec<Seed>), BundleError> {
        let grid = self.grid;
        let k = self.k;
        for _ in 0..opts.max_attempts {
            let Some((per_axis, seeds)) = self.place_seeds(rng, opts) else {
                continue;
            };
            let mut values = assemble(&grid, k, &per_axis);
            let modes: Vec<([i32; 3], Complex64, f64, f64)> = (0..4)
                .map(|_| {
                    let wave = [0, 1, 2].map(|_| rng.gen_range(-1i32..=1));
                    (
                        wave,
                        Complex64::from_polar(1.0, rng.gen_range(0.0..2.0 * PI)),
                        rng.gen_range(-1.0..1.0),
                        rng.gen_range(-0.4..0.4),
                    )
                })
                .collect();
            let nm = modes.len() as f64;
            for (v, z) in values.iter_mut().enumerate() {
                let c = grid.coords(v);
                let mut phase = 0.0;
                let mut amp = 1.0;
                for (wave, shift, ph, am) in &modes {
                    let mut e = *shift;
                    for i in 0..3 {
                        let r = self.roots[i][c[i]];
                        match wave[i] {
                            1 => e *= r,
                            -1 => e *= r.conj(),
                            _ => {}
                        }
                    }
                    phase += opts.phase_noise * ph * e.im / nm;
                    amp *= 1.0 + am * e.re / nm;
                }
                *z *= Complex64::from_polar(amp, phase);
            }
            let s = SampledSection::new(grid, values, 1)?.gauge_transform(&self.g);
            if self.resolved(&s, opts.max_delta) {
                return Ok((s, seeds));
            }
        }
        Err(BundleError::Input(
            "no well-resolved random section found; enlarge the lattice".into(),
        ))
    }

    #[allow(clippy::type_complexity)]
    fn place_seeds<R: Rng>(
        &self,
        rng: &mut R,
        opts: &RandomSectionOptions,
    ) -> Option<([Vec<(usize, usize, i64)>; 3], Vec<Seed>)> {
        let grid = self.grid;
        let mut seeds = Vec::new();
        let mut per_axis: [Vec<(usize, usize, i64)>; 3] = Default::default();
        // fixed coordinates of every placed line, to keep crossing lines apart
        let mut lines: Vec<(usize, [usize; 3])> = Vec::new();
        for a in 0..3 {
            let (j, kd) = Grid::plane_dirs(a);
            let (n1, n2) = (grid.dims[j], grid.dims[kd]);
            let at = |p: (usize, usize)| {
                let mut c = [0; 3];
                c[j] = p.0;
                c[kd] = p.1;
                c
            };
            let pairs = rng.gen_range(0..=opts.max_pairs);
            let mut signs: Vec<i64> = vec![self.k[a].signum(); self.k[a].unsigned_abs() as usize];
            for _ in 0..pairs {
                signs.push(1);
                signs.push(-1);
            }
            let mut placed: Vec<(usize, usize, i64)> = Vec::new();
            for sign in signs {
                let spot = (0..100)
                    .map(|_| (rng.gen_range(0..n1), rng.gen_range(0..n2)))
                    .find(|p| {
                        placed.iter().all(|&(x, y, _)| {
                            periodic_gap(x as f64, p.0 as f64, n1 as f64)
                                .max(periodic_gap(y as f64, p.1 as f64, n2 as f64))
                                >= 3.0
                        }) && lines.iter().filter(|l| l.0 != a).all(|&(b, c)| {
                            let d = 3 - a - b;
                            periodic_gap(c[d] as f64, at(*p)[d] as f64, grid.dims[d] as f64) >= 2.0
                        })
                    })?;
                placed.push((spot.0, spot.1, sign));
                lines.push((a, at(spot)));
            }
            for &(x, y, s) in &placed {
                seeds.push(Seed {
                    axis: a,
                    at: [x, y],
                    multiplicity: s,
                });
            }
            per_axis[a] = placed;
        }
        Some((per_axis, seeds))
    }

    /// Every covariant link delta below `max_delta`, stopping at the first miss.
    fn resolved(&self, s: &SampledSection, max_delta: f64) -> bool {
        let phases: Vec<f64> = s.values.iter().map(|&z| phase_of(z)).collect();
        (0..3 * self.grid.vertex_count()).all(|l| {
            let (t, h) = self.grid.link_ends(l).expect("periodic link");
            wrap(phases[h] - phases[t] - self.link_phases[l]).abs() < max_delta
        })
    }
}

#[cfg(test)]
/// Largest covariant link delta in magnitude.
pub(crate) fn max_abs_delta(s: &SampledSection, b: &U1Bundle) -> Result<f64, BundleError> {
    let mut m: f64 = 0.0;
    for l in 0..3 * b.grid().vertex_count() {
        m = m.max(covariant_link_delta(s, b, l)?.abs());
    }
    Ok(m)
}
