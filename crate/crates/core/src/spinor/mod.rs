//! Moment map, quaternionic structure and kernel frames for tuples of
//! ℂ²-valued spinors.
//!
//! Conventions: `J(z₁,z₂) = (−z̄₂, z̄₁)`, standard Pauli matrices, and the
//! Hermitian product `⟨u,v⟩ = Σ ūᵢvᵢ` (conjugate-linear in the first slot).

pub mod chern;
pub mod model;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

pub use chern::{obstruction_a, pullback_det_s_chern, sphere_frame_field, FrameField};
pub use model::{
    dirac_residual, model_harmonic_spinor, phi0_extension_check, Phi0Check, PolySpinor, Polynomial,
};

pub type C = Complex64;
pub type SpinorValue = [C; 2];
pub type MuValue = [[C; 2]; 2];

/// Default tolerance of [`is_mu_null`].
pub const MU_NULL_TOLERANCE: f64 = 1e-10;
/// Default relative rank tolerance of [`kernel_frame`].
pub const RANK_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpinorError {
    #[error("invalid input: {0}")]
    Input(String),
    #[error(
        "homomorphism is not surjective (second singular direction {residual:e} below tolerance)"
    )]
    NotSurjective { residual: f64 },
    #[error("frame field too rough: overlap determinant vanishes on plaquette {plaquette:?}")]
    TooRough { plaquette: [usize; 2] },
    #[error("flux sum {value} is not within {tolerance:e} of an integer")]
    NonIntegral { value: f64, tolerance: f64 },
}

/// A 2×n complex matrix stored by columns.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinorHom {
    pub cols: Vec<SpinorValue>,
}

impl SpinorHom {
    pub fn from_rows(r0: &[C], r1: &[C]) -> Result<Self, SpinorError> {
        if r0.len() != r1.len() {
            return Err(SpinorError::Input("rows of unequal length".into()));
        }
        Ok(SpinorHom {
            cols: r0.iter().zip(r1).map(|(&a, &b)| [a, b]).collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.cols.len()
    }

    pub fn row(&self, i: usize) -> Vec<C> {
        self.cols.iter().map(|c| c[i]).collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.cols
            .iter()
            .map(|c| c[0].norm_sqr() + c[1].norm_sqr())
            .sum()
    }

    /// `g·B` for a 2×2 matrix `g`.
    pub fn left_mul(&self, g: &[[C; 2]; 2]) -> SpinorHom {
        SpinorHom {
            cols: self
                .cols
                .iter()
                .map(|c| {
                    [
                        g[0][0] * c[0] + g[0][1] * c[1],
                        g[1][0] * c[0] + g[1][1] * c[1],
                    ]
                })
                .collect(),
        }
    }

    /// `B·A*` for an n×n matrix `A` given by rows.
    pub fn right_mul_adjoint(&self, a: &[Vec<C>]) -> SpinorHom {
        let n = self.n();
        SpinorHom {
            cols: (0..n)
                .map(|j| {
                    let mut out = [C::new(0.0, 0.0); 2];
                    for k in 0..n {
                        let akj = a[j][k].conj();
                        out[0] += self.cols[k][0] * akj;
                        out[1] += self.cols[k][1] * akj;
                    }
                    out
                })
                .collect(),
        }
    }
}

pub fn mu(b: &SpinorHom) -> MuValue {
    let mut m = [[C::new(0.0, 0.0); 2]; 2];
    for c in &b.cols {
        for i in 0..2 {
            for j in 0..2 {
                m[i][j] += c[i] * c[j].conj();
            }
        }
    }
    let half = 0.5 * b.norm_sqr();
    m[0][0] -= half;
    m[1][1] -= half;
    m
}

/// Largest entry modulus.
pub fn mu_norm(m: &MuValue) -> f64 {
    m.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn is_mu_null(b: &SpinorHom) -> bool {
    is_mu_null_with(b, MU_NULL_TOLERANCE)
}

pub fn is_mu_null_with(b: &SpinorHom, tol: f64) -> bool {
    mu_norm(&mu(b)) <= tol
}

pub fn hermitian_product(u: &[C], v: &[C]) -> C {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

pub fn quaternionic_j(v: SpinorValue) -> SpinorValue {
    [-v[1].conj(), v[0].conj()]
}

/// Columns `ψ₁, Jψ₁, ψ₂, Jψ₂, …`.
pub fn pair_tuple(psis: &[SpinorValue]) -> SpinorHom {
    SpinorHom {
        cols: psis.iter().flat_map(|&p| [p, quaternionic_j(p)]).collect(),
    }
}

/// An n×k matrix with orthonormal columns; a point of `Gr_k(ℂⁿ)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrassFrame {
    pub n: usize,
    #[serde(serialize_with = "ser_cols")]
    pub cols: Vec<Vec<C>>,
}

fn ser_cols<S: serde::Serializer>(cols: &[Vec<C>], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(cols.len()))?;
    for c in cols {
        let v: Vec<[f64; 2]> = c.iter().map(|z| [z.re, z.im]).collect();
        seq.serialize_element(&v)?;
    }
    seq.end()
}

impl GrassFrame {
    pub fn new(n: usize, cols: Vec<Vec<C>>) -> Result<Self, SpinorError> {
        if cols.iter().any(|c| c.len() != n) {
            return Err(SpinorError::Input("frame column of wrong length".into()));
        }
        let f = GrassFrame { n, cols };
        let err = f.orthonormality_defect();
        if err > 1e-10 {
            return Err(SpinorError::Input(format!(
                "frame columns not orthonormal (defect {err:e})"
            )));
        }
        Ok(f)
    }

    pub fn rank(&self) -> usize {
        self.cols.len()
    }

    /// Spanned by the standard basis vectors with the given indices.
    pub fn coordinate(n: usize, idx: &[usize]) -> GrassFrame {
        let cols = idx
            .iter()
            .map(|&i| {
                (0..n)
                    .map(|j| C::new(if i == j { 1.0 } else { 0.0 }, 0.0))
                    .collect()
            })
            .collect();
        GrassFrame { n, cols }
    }

    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, a) in self.cols.iter().enumerate() {
            for (j, b) in self.cols.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((hermitian_product(a, b) - target).norm());
            }
        }
        worst
    }

    /// The k×k matrix `F*G`.
    pub fn overlap(&self, other: &GrassFrame) -> Vec<Vec<C>> {
        self.cols
            .iter()
            .map(|a| other.cols.iter().map(|b| hermitian_product(a, b)).collect())
            .collect()
    }

    /// Right action by a k×k unitary (given by rows).
    pub fn gauge(&self, u: &[Vec<C>]) -> GrassFrame {
        let k = self.rank();
        let cols = (0..k)
            .map(|j| {
                (0..self.n)
                    .map(|r| (0..k).map(|i| self.cols[i][r] * u[i][j]).sum())
                    .collect()
            })
            .collect();
        GrassFrame { n: self.n, cols }
    }
}

/// Principal angles (radians, ascending) between two subspaces of equal rank.
pub fn principal_angles(a: &GrassFrame, b: &GrassFrame) -> Result<Vec<f64>, SpinorError> {
    if a.n != b.n || a.rank() != b.rank() {
        return Err(SpinorError::Input("subspaces of different shape".into()));
    }
    let k = a.rank();
    if k == 0 {
        return Ok(Vec::new());
    }
    // sines from the part of `b` orthogonal to `a`, accurate for small angles
    let resid: Vec<Vec<C>> = b.cols.iter().map(|v| project_out(v, &a.cols)).collect();
    let m = DMatrix::from_fn(a.n, k, |i, j| resid[j][i]);
    let mut angles: Vec<f64> = m
        .singular_values()
        .iter()
        .map(|s| s.clamp(0.0, 1.0).asin())
        .collect();
    angles.sort_by(|x, y| x.partial_cmp(y).expect("finite angle"));
    Ok(angles)
}

/// Largest principal angle.
pub fn grassmann_distance(a: &GrassFrame, b: &GrassFrame) -> Result<f64, SpinorError> {
    Ok(principal_angles(a, b)?.last().copied().unwrap_or(0.0))
}

/// Orthonormal basis of `ker B`, `n − 2` columns.
///
/// The complement of the conjugated row space is filled by Gram–Schmidt on
/// standard basis vectors, always taking the candidate with the largest
/// residual (lowest index on ties). `tol` is relative to the largest row norm.
pub fn kernel_frame(b: &SpinorHom, tol: f64) -> Result<GrassFrame, SpinorError> {
    let n = b.n();
    if n < 2 {
        return Err(SpinorError::NotSurjective { residual: 0.0 });
    }
    let rows: Vec<Vec<C>> = (0..2)
        .map(|i| b.row(i).iter().map(|z| z.conj()).collect())
        .collect();
    let scale = rows.iter().map(|r| norm(r)).fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(SpinorError::NotSurjective { residual: 0.0 });
    }
    let mut basis: Vec<Vec<C>> = Vec::new();
    for r in rows {
        let v = project_out(&r, &basis);
        let nv = norm(&v);
        if nv <= tol * scale {
            return Err(SpinorError::NotSurjective {
                residual: nv / scale,
            });
        }
        basis.push(v.iter().map(|z| z / nv).collect());
    }
    let mut kernel = Vec::new();
    let mut used = vec![false; n];
    for _ in 0..n - 2 {
        let mut best: Option<(usize, Vec<C>, f64)> = None;
        for j in 0..n {
            if used[j] {
                continue;
            }
            let mut e = vec![C::new(0.0, 0.0); n];
            e[j] = C::new(1.0, 0.0);
            let v = project_out(&e, &basis);
            let nv = norm(&v);
            if best.as_ref().map_or(true, |(_, _, bn)| nv > *bn) {
                best = Some((j, v, nv));
            }
        }
        let (j, v, nv) = best.expect("candidate remains");
        used[j] = true;
        let u: Vec<C> = v.iter().map(|z| z / nv).collect();
        basis.push(u.clone());
        kernel.push(u);
    }
    Ok(GrassFrame { n, cols: kernel })
}

fn norm(v: &[C]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Removes the components along an orthonormal set, twice for stability.
fn project_out(v: &[C], basis: &[Vec<C>]) -> Vec<C> {
    let mut out = v.to_vec();
    for _ in 0..2 {
        for b in basis {
            let c = hermitian_product(b, &out);
            for (o, bi) in out.iter_mut().zip(b) {
                *o -= c * bi;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    #[test]
    fn mu_examples() {
        let id = SpinorHom::from_rows(&[c(1., 0.), c(0., 0.)], &[c(0., 0.), c(1., 0.)]).unwrap();
        assert_eq!(mu_norm(&mu(&id)), 0.0);
        let d = SpinorHom::from_rows(&[c(1., 0.), c(0., 0.)], &[c(0., 0.), c(0., 0.)]).unwrap();
        let m = mu(&d);
        assert_eq!(m[0][0], c(0.5, 0.0));
        assert_eq!(m[1][1], c(-0.5, 0.0));
        let z = c(0., 0.);
        let proj = SpinorHom::from_rows(&[c(1., 0.), z, z, z], &[z, c(1., 0.), z, z]).unwrap();
        assert!(is_mu_null(&proj));
        let par = SpinorHom::from_rows(&[c(1., 0.), z], &[c(1., 0.), z]).unwrap();
        assert!(!is_mu_null(&par));
    }

    #[test]
    fn j_examples() {
        assert_eq!(
            quaternionic_j([c(1., 0.), c(0., 0.)]),
            [c(0., 0.), c(1., 0.)]
        );
        let v = [c(0.3, -1.2), c(2.0, 0.7)];
        let jj = quaternionic_j(quaternionic_j(v));
        assert_eq!(jj, [-v[0], -v[1]]);
        assert!(hermitian_product(&v, &quaternionic_j(v)).norm() < 1e-15);
    }

    #[test]
    fn pairing_single() {
        let b = pair_tuple(&[[c(1., 0.), c(0., 0.)]]);
        assert_eq!(b.cols, vec![[c(1., 0.), c(0., 0.)], [c(0., 0.), c(1., 0.)]]);
        assert_eq!(mu_norm(&mu(&b)), 0.0);
        let zero = pair_tuple(&[[c(0., 0.); 2]; 3]);
        assert_eq!(mu_norm(&mu(&zero)), 0.0);
    }

    #[test]
    fn kernel_examples() {
        let z = c(0., 0.);
        let o = c(1., 0.);
        let b = SpinorHom::from_rows(&[o, z, z], &[z, o, z]).unwrap();
        let f = kernel_frame(&b, RANK_TOLERANCE).unwrap();
        assert!(grassmann_distance(&f, &GrassFrame::coordinate(3, &[2])).unwrap() < 1e-12);
        let b2 = pair_tuple(&[[c(0.4, 0.1), c(-1., 2.)]]);
        assert_eq!(kernel_frame(&b2, RANK_TOLERANCE).unwrap().rank(), 0);
        let flat = SpinorHom::from_rows(&[o, o, z], &[o, o, z]).unwrap();
        assert!(matches!(
            kernel_frame(&flat, RANK_TOLERANCE),
            Err(SpinorError::NotSurjective { .. })
        ));
    }

    #[test]
    fn kernel_of_w_w2_tuple() {
        let w = c(0.3, -0.4);
        let b = pair_tuple(&[[w, c(0., 0.)], [w * w, c(0., 0.)]]);
        let f = kernel_frame(&b, RANK_TOLERANCE).unwrap();
        assert!(f.orthonormality_defect() < 1e-12);
        let z = c(0., 0.);
        let o = c(1., 0.);
        let v1 = vec![-w, z, o, z];
        let v2 = vec![z, -w.conj(), z, o];
        let expect = GrassFrame {
            n: 4,
            cols: [v1, v2]
                .into_iter()
                .map(|v| {
                    let nv = norm(&v);
                    v.into_iter().map(|x| x / nv).collect()
                })
                .collect(),
        };
        assert!(grassmann_distance(&f, &expect).unwrap() < 1e-12);
    }

    #[test]
    fn angles_of_coordinate_planes() {
        let a = GrassFrame::coordinate(4, &[0, 1]);
        let b = GrassFrame::coordinate(4, &[1, 2]);
        let ang = principal_angles(&a, &b).unwrap();
        assert!(ang[0].abs() < 1e-12);
        assert!((ang[1] - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    }
}
