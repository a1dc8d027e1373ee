use serde::Serialize;

use super::{WeightedChain1, ZeroLocusError};

/// Angular threshold for merging shell crossings into one ray.
pub const CLUSTER_ANGLE_DEG: f64 = 15.0;
/// Minimum number of radii a cone must be stable across.
pub const MIN_RADII: usize = 3;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Ray {
    pub direction: [f64; 3],
    pub multiplicity: u64,
    /// +1 if the flow runs outwards along the ray, −1 if inwards.
    pub orientation: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TangentCone {
    /// Dual-lattice coordinates of the base point.
    pub base: [usize; 3],
    pub radii: Vec<usize>,
    pub rays: Vec<Ray>,
}

impl TangentCone {
    /// One straight line through the base point: two opposite rays with equal
    /// multiplicity, flow entering along one and leaving along the other.
    pub fn is_single_line(&self) -> bool {
        if self.rays.len() != 2 {
            return false;
        }
        let (a, b) = (&self.rays[0], &self.rays[1]);
        let cos: f64 = (0..3).map(|i| a.direction[i] * b.direction[i]).sum();
        a.multiplicity == b.multiplicity
            && a.orientation == -b.orientation
            && cos < -(CLUSTER_ANGLE_DEG.to_radians().cos())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ConeResult {
    Stable(TangentCone),
    Unstable {
        radii: Vec<usize>,
        per_radius: Vec<Vec<Ray>>,
    },
}

/// Rays of the chain through the cube shell of Chebyshev radius `r` around
/// the base dual vertex.
fn shell_rays(chain: &WeightedChain1, base: usize, r: usize) -> Vec<Ray> {
    let grid = chain.grid();
    let bc = grid.coords(base);
    let disp = |v: usize| -> [f64; 3] {
        let c = grid.coords(v);
        [0, 1, 2].map(|i| {
            let mut d = c[i] as i64 - bc[i] as i64;
            if grid.periodic {
                let n = grid.dims[i] as i64;
                d = d.rem_euclid(n);
                if d > n / 2 {
                    d -= n;
                }
            }
            d as f64
        })
    };
    let cheb = |d: [f64; 3]| d.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let r = r as f64;
    // (direction, signed outward flow)
    let mut crossings: Vec<([f64; 3], i64)> = Vec::new();
    for (&p, &c) in chain.coeffs() {
        let (n, head) = grid.plaquette(p);
        let Some(tail) = grid.shift(head, n, -1) else {
            continue;
        };
        let (dt, dh) = (disp(tail), disp(head));
        let (ct, ch) = (cheb(dt), cheb(dh));
        let outward = if ct == r - 1.0 && ch == r {
            c
        } else if ch == r - 1.0 && ct == r {
            -c
        } else {
            continue;
        };
        let mid = [0, 1, 2].map(|i| 0.5 * (dt[i] + dh[i]));
        let norm = mid.iter().map(|x| x * x).sum::<f64>().sqrt();
        crossings.push((mid.map(|x| x / norm), outward));
    }
    cluster(&crossings)
}

/// Single-linkage clustering by angle; each cluster's net outward flow gives
/// the ray's multiplicity and orientation.
fn cluster(crossings: &[([f64; 3], i64)]) -> Vec<Ray> {
    let cos_t = CLUSTER_ANGLE_DEG.to_radians().cos();
    let n = crossings.len();
    let mut label: Vec<usize> = (0..n).collect();
    fn find(label: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while label[r] != r {
            r = label[r];
        }
        label[i] = r;
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            let dot: f64 = (0..3).map(|k| crossings[i].0[k] * crossings[j].0[k]).sum();
            if dot >= cos_t {
                let (a, b) = (find(&mut label, i), find(&mut label, j));
                if a != b {
                    label[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let r = find(&mut label, i);
        groups.entry(r).or_default().push(i);
    }
    let mut rays = Vec::new();
    for members in groups.values() {
        let net: i64 = members.iter().map(|&i| crossings[i].1).sum();
        if net == 0 {
            continue;
        }
        let mut dir = [0.0; 3];
        for &i in members {
            let w = crossings[i].1.unsigned_abs() as f64;
            for k in 0..3 {
                dir[k] += w * crossings[i].0[k];
            }
        }
        let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
        rays.push(Ray {
            direction: dir.map(|x| x / norm),
            multiplicity: net.unsigned_abs(),
            orientation: net.signum(),
        });
    }
    rays.sort_by(|a, b| {
        a.direction
            .partial_cmp(&b.direction)
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    rays
}

fn same_rays(a: &[Ray], b: &[Ray]) -> bool {
    let cos_t = CLUSTER_ANGLE_DEG.to_radians().cos();
    if a.len() != b.len() {
        return false;
    }
    let mut taken = vec![false; b.len()];
    for ra in a {
        let hit = b.iter().enumerate().position(|(j, rb)| {
            !taken[j]
                && ra.multiplicity == rb.multiplicity
                && ra.orientation == rb.orientation
                && (0..3)
                    .map(|k| ra.direction[k] * rb.direction[k])
                    .sum::<f64>()
                    >= cos_t
        });
        match hit {
            Some(j) => taken[j] = true,
            None => return false,
        }
    }
    true
}

/// Estimates the rescaling limit at a dual vertex on the chain's support by
/// clustering shell crossings at each radius (largest first). The cone is
/// reported, from the smallest radius, only if all radii agree.
pub fn tangent_cone(
    chain: &WeightedChain1,
    point: [usize; 3],
    radii: &[usize],
) -> Result<ConeResult, ZeroLocusError> {
    let grid = chain.grid();
    if (0..3).any(|i| point[i] >= grid.dims[i]) {
        return Err(ZeroLocusError::Input(format!(
            "point {point:?} outside the lattice"
        )));
    }
    let base = grid.vertex(point);
    let on_support = chain.coeffs().keys().any(|&p| {
        let (n, head) = grid.plaquette(p);
        head == base || grid.shift(head, n, -1) == Some(base)
    });
    if !on_support {
        return Err(ZeroLocusError::Input(format!(
            "point {point:?} is not on the chain"
        )));
    }
    if radii.len() < MIN_RADII {
        return Err(ZeroLocusError::Input(format!(
            "need at least {MIN_RADII} radii"
        )));
    }
    if radii.windows(2).any(|w| w[1] >= w[0]) || radii.iter().any(|&r| r == 0) {
        return Err(ZeroLocusError::Input(
            "radii must be positive and strictly decreasing".into(),
        ));
    }
    for i in 0..3 {
        let fits = if grid.periodic {
            2 * radii[0] < grid.dims[i]
        } else {
            point[i] >= radii[0] && point[i] + radii[0] < grid.dims[i]
        };
        if !fits {
            return Err(ZeroLocusError::Input(format!(
                "radius {} does not fit in the lattice around {point:?}",
                radii[0]
            )));
        }
    }
    let per_radius: Vec<Vec<Ray>> = radii.iter().map(|&r| shell_rays(chain, base, r)).collect();
    let stable = per_radius.windows(2).all(|w| same_rays(&w[0], &w[1]));
    if stable {
        Ok(ConeResult::Stable(TangentCone {
            base: point,
            radii: radii.to_vec(),
            rays: per_radius.last().cloned().unwrap_or_default(),
        }))
    } else {
        Ok(ConeResult::Unstable {
            radii: radii.to_vec(),
            per_radius,
        })
    }
}

/// Smooth monotone step from 0 (at `inner` and below) to 1 (at `outer` and
/// above), built from `e^{-1/t}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChiProfile {
    pub inner: f64,
    pub outer: f64,
}

impl ChiProfile {
    pub fn new(inner: f64, outer: f64) -> Result<Self, ZeroLocusError> {
        if !(inner.is_finite() && outer.is_finite() && 0.0 <= inner && inner < outer) {
            return Err(ZeroLocusError::Input(format!(
                "cut-off needs 0 <= inner < outer, got ({inner}, {outer})"
            )));
        }
        Ok(ChiProfile { inner, outer })
    }

    pub fn eval(&self, t: f64) -> f64 {
        let u = (t - self.inner) / (self.outer - self.inner);
        if u <= 0.0 {
            0.0
        } else if u >= 1.0 {
            1.0
        } else {
            let f = |x: f64| (-1.0 / x).exp();
            f(u) / (f(u) + f(1.0 - u))
        }
    }
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Collapses the tube `(−λ, λ) × D_{λ/2}` around the line through `origin`
/// along `axis` onto that line, keeping the axial coordinate. The cut-off is
/// `χ = 1 − (1 − χ_1(|x_1|))(1 − χ_2(r))` with `χ_1` rising over `[λ, outer]`
/// and `χ_2` over `[λ/2, outer]`, so the map is the identity outside the cube
/// of half-side `outer`.
pub fn collapse_tube(
    x: [f64; 3],
    origin: [f64; 3],
    axis: [f64; 3],
    lambda: f64,
    outer: f64,
) -> Result<[f64; 3], ZeroLocusError> {
    let len = dot(axis, axis).sqrt();
    if !(len.is_finite() && len > 0.0) {
        return Err(ZeroLocusError::Input(
            "tube axis must be a nonzero vector".into(),
        ));
    }
    if !(lambda > 0.0) {
        return Err(ZeroLocusError::Input("tube scale must be positive".into()));
    }
    let chi1 = ChiProfile::new(lambda, outer)?;
    let chi2 = ChiProfile::new(lambda / 2.0, outer)?;
    let e = axis.map(|a| a / len);
    let d = sub(x, origin);
    let x1 = dot(d, e);
    let perp = [d[0] - x1 * e[0], d[1] - x1 * e[1], d[2] - x1 * e[2]];
    let r = dot(perp, perp).sqrt();
    let chi = 1.0 - (1.0 - chi1.eval(x1.abs())) * (1.0 - chi2.eval(r));
    Ok([0, 1, 2].map(|i| origin[i] + x1 * e[i] + chi * perp[i]))
}

/// `x ↦ center + χ(|x − center|/R)(x − center)` inside the ball of radius R,
/// identity outside; χ vanishes on `[0, 1 − 2ε]` and equals 1 on `[1 − ε, 1]`.
pub fn collapse_ball(
    x: [f64; 3],
    center: [f64; 3],
    radius: f64,
    eps: f64,
) -> Result<[f64; 3], ZeroLocusError> {
    if !(radius > 0.0) || !(eps > 0.0 && eps < 0.5) {
        return Err(ZeroLocusError::Input(format!(
            "ball collapse needs radius > 0 and 0 < eps < 1/2, got ({radius}, {eps})"
        )));
    }
    let chi = ChiProfile::new(1.0 - 2.0 * eps, 1.0 - eps)?;
    let d = sub(x, center);
    let t = dot(d, d).sqrt() / radius;
    if t >= 1.0 {
        return Ok(x);
    }
    let c = chi.eval(t);
    Ok([0, 1, 2].map(|i| center[i] + c * d[i]))
}
