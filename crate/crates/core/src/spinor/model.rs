use std::collections::BTreeMap;
use std::f64::consts::TAU;

use serde::Serialize;

use super::{
    grassmann_distance, kernel_frame, pair_tuple, GrassFrame, SpinorError, SpinorValue, C,
};
use crate::homology::Grid;
use crate::zerolocus::{sample_on_chart, winding_number, ZeroLocusError};

/// Default oscillation tolerance (radians) of [`phi0_extension_check`].
pub const PHI0_TOLERANCE: f64 = 1e-4;
/// Default radii of [`phi0_extension_check`].
pub const PHI0_RADII: [f64; 3] = [1e-5, 1e-6, 1e-7];
/// Angles sampled on each circle.
const PHI0_ANGLES: usize = 12;

/// Complex polynomial in `w = x₁+ix₂`, `w̄` and `x₃`; the key holds the
/// three exponents.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Polynomial {
    terms: BTreeMap<[u32; 3], C>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn monomial(coeff: C, w: u32, wbar: u32, x3: u32) -> Self {
        let mut p = Self::zero();
        p.add_term([w, wbar, x3], coeff);
        p
    }

    fn add_term(&mut self, k: [u32; 3], c: C) {
        let e = self.terms.entry(k).or_insert(C::new(0.0, 0.0));
        *e += c;
        if *e == C::new(0.0, 0.0) {
            self.terms.remove(&k);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (&k, &c) in &other.terms {
            out.add_term(k, c);
        }
        out
    }

    pub fn scale(&self, s: C) -> Polynomial {
        let mut out = Polynomial::zero();
        for (&k, &c) in &self.terms {
            out.add_term(k, c * s);
        }
        out
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero();
        for (a, &ca) in &self.terms {
            for (b, &cb) in &other.terms {
                out.add_term([a[0] + b[0], a[1] + b[1], a[2] + b[2]], ca * cb);
            }
        }
        out
    }

    /// Pointwise complex conjugate.
    pub fn conj(&self) -> Polynomial {
        let mut out = Polynomial::zero();
        for (&[a, b, c], &z) in &self.terms {
            out.add_term([b, a, c], z.conj());
        }
        out
    }

    fn partial(&self, slot: usize) -> Polynomial {
        let mut out = Polynomial::zero();
        for (&k, &c) in &self.terms {
            if k[slot] > 0 {
                let mut k2 = k;
                k2[slot] -= 1;
                out.add_term(k2, c * k[slot] as f64);
            }
        }
        out
    }

    /// `∂/∂x₁ = ∂_w + ∂_w̄`.
    pub fn d1(&self) -> Polynomial {
        self.partial(0).add(&self.partial(1))
    }

    /// `∂/∂x₂ = i(∂_w − ∂_w̄)`.
    pub fn d2(&self) -> Polynomial {
        self.partial(0)
            .add(&self.partial(1).scale(C::new(-1.0, 0.0)))
            .scale(C::i())
    }

    pub fn d3(&self) -> Polynomial {
        self.partial(2)
    }

    pub fn eval(&self, x: [f64; 3]) -> C {
        let w = C::new(x[0], x[1]);
        self.terms
            .iter()
            .map(|(&[a, b, c], &z)| z * w.powu(a) * w.conj().powu(b) * x[2].powi(c as i32))
            .sum()
    }
}

/// A ℂ²-valued polynomial field on a flat chart.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PolySpinor(pub [Polynomial; 2]);

impl PolySpinor {
    pub fn eval(&self, x: [f64; 3]) -> SpinorValue {
        [self.0[0].eval(x), self.0[1].eval(x)]
    }

    /// `J(u,v) = (−v̄, ū)`, applied pointwise.
    pub fn j(&self) -> PolySpinor {
        PolySpinor([self.0[1].conj().scale(C::new(-1.0, 0.0)), self.0[0].conj()])
    }

    /// `σ₁∂₁ψ + σ₂∂₂ψ + σ₃∂₃ψ` with the standard Pauli matrices.
    pub fn dirac(&self) -> PolySpinor {
        let [u, v] = &self.0;
        let i = C::i();
        // σ₁(a,b) = (b,a), σ₂(a,b) = (−ib, ia), σ₃(a,b) = (a,−b)
        let top = v.d1().add(&v.d2().scale(-i)).add(&u.d3());
        let bottom = u
            .d1()
            .add(&u.d2().scale(i))
            .add(&v.d3().scale(C::new(-1.0, 0.0)));
        PolySpinor([top, bottom])
    }
}

/// `(w^N, 0)`.
pub fn model_harmonic_spinor(n: u32) -> PolySpinor {
    PolySpinor([
        Polynomial::monomial(C::new(1.0, 0.0), n, 0, 0),
        Polynomial::zero(),
    ])
}

/// Largest `|Dψ|` over the points. The operator is applied symbolically, so a
/// harmonic polynomial gives exactly zero.
pub fn dirac_residual(field: &PolySpinor, points: &[[f64; 3]]) -> f64 {
    let d = field.dirac();
    if d.0.iter().all(Polynomial::is_zero) {
        return 0.0;
    }
    points
        .iter()
        .map(|&x| {
            let v = d.eval(x);
            (v[0].norm_sqr() + v[1].norm_sqr()).sqrt()
        })
        .fold(0.0, f64::max)
}

/// Winding of the first component along the circle of the given radius
/// about the `x₃`-axis at height `x₃ = 0`.
pub fn axis_winding(
    field: &PolySpinor,
    radius: f64,
    samples: usize,
) -> Result<i64, ZeroLocusError> {
    let vals: Vec<C> = (0..samples)
        .map(|k| {
            let t = TAU * k as f64 / samples as f64;
            field.0[0].eval([radius * t.cos(), radius * t.sin(), 0.0])
        })
        .collect();
    winding_number(&vals)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Phi0Check {
    pub converged: bool,
    /// Largest principal angle between any two sampled kernels.
    pub oscillation: f64,
    pub tolerance: f64,
    pub radii: Vec<f64>,
    /// Kernel at the smallest radius, angle zero.
    pub limit: GrassFrame,
}

/// Samples `Φ₀ = ker Ψ` for `Ψ = (ψ₁, Jψ₁, …)` on circles of shrinking radius
/// around the `x₃`-axis and tests whether the kernels settle down.
pub fn phi0_extension_check(
    psis: &[PolySpinor],
    radii: &[f64],
    tol: f64,
) -> Result<Phi0Check, SpinorError> {
    if psis.is_empty() {
        return Err(SpinorError::Input("need at least one spinor".into()));
    }
    if radii.is_empty() || radii.iter().any(|&r| !(r > 0.0)) {
        return Err(SpinorError::Input("radii must be positive".into()));
    }
    let mut frames: Vec<GrassFrame> = Vec::new();
    for &r in radii {
        for k in 0..PHI0_ANGLES {
            let t = TAU * k as f64 / PHI0_ANGLES as f64;
            let x = [r * t.cos(), r * t.sin(), 0.0];
            let vals: Vec<SpinorValue> = psis.iter().map(|p| p.eval(x)).collect();
            frames.push(kernel_frame(&pair_tuple(&vals), super::RANK_TOLERANCE)?);
        }
    }
    let mut oscillation: f64 = 0.0;
    for i in 0..frames.len() {
        for j in i + 1..frames.len() {
            oscillation = oscillation.max(grassmann_distance(&frames[i], &frames[j])?);
        }
    }
    let smallest = radii
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).expect("finite radius"))
        .map(|(i, _)| i)
        .expect("nonempty radii");
    Ok(Phi0Check {
        converged: oscillation < tol,
        oscillation,
        tolerance: tol,
        radii: radii.to_vec(),
        limit: frames[smallest * PHI0_ANGLES].clone(),
    })
}

/// Roots of the lattice stand-in for `w^N`: `N` simple zeros on the
/// `x₁`-axis at consecutive integers, the middle (or left-middle) one at 0.
pub fn split_roots(n: u32) -> Vec<C> {
    let shift = (n as i64 - 1) / 2;
    (0..n as i64)
        .map(|j| C::new((j - shift) as f64, 0.0))
        .collect()
}

/// Samples `Π (w − rⱼ)` over the split roots on an open `m³` box whose
/// central dual column sits on the `x₃`-axis. Returns the grid, the values
/// and the dual vertex at the centre of the box on the line through the root 0.
pub fn lattice_model_section(n: u32, m: usize) -> (Grid, Vec<C>, [usize; 3]) {
    let grid = Grid::open([m, m, m]);
    let c = (m / 2) as f64 - 0.5;
    let roots = split_roots(n);
    let values = sample_on_chart(&grid, [c, c, 0.0], |x| {
        let w = C::new(x[0], x[1]);
        roots.iter().map(|r| w - r).product()
    });
    let base = [m / 2 - 1, m / 2 - 1, m / 2 - 1];
    (grid, values, base)
}
