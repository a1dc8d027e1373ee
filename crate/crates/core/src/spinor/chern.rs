use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;
use serde_json::{json, Value};

use super::{GrassFrame, SpinorError, C};
use crate::bundle::wrap;

/// Smallest overlap determinant modulus accepted on a link.
pub const OVERLAP_THRESHOLD: f64 = 1e-8;
/// Integrality tolerance of the plaquette sum.
pub const FRAME_CHERN_TOLERANCE: f64 = 1e-6;

/// Frames at the vertices of a periodic P×Q mesh of a closed surface;
/// vertex `(i, j)` is stored at `i + P·j`, and `(i, j) → (i+1, j) → (i+1, j+1)`
/// is positively oriented.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameField {
    pub dims: [usize; 2],
    pub frames: Vec<GrassFrame>,
}

impl FrameField {
    pub fn new(dims: [usize; 2], frames: Vec<GrassFrame>) -> Result<Self, SpinorError> {
        if dims[0] == 0 || dims[1] == 0 || frames.len() != dims[0] * dims[1] {
            return Err(SpinorError::Input(format!(
                "{} frames for a {}×{} mesh",
                frames.len(),
                dims[0],
                dims[1]
            )));
        }
        let (n, k) = (frames[0].n, frames[0].rank());
        if frames.iter().any(|f| f.n != n || f.rank() != k) {
            return Err(SpinorError::Input("frames of mixed shape".into()));
        }
        Ok(FrameField { dims, frames })
    }

    pub fn constant(dims: [usize; 2], f: GrassFrame) -> Self {
        FrameField {
            dims,
            frames: vec![f; dims[0] * dims[1]],
        }
    }

    pub fn at(&self, i: usize, j: usize) -> &GrassFrame {
        let [p, q] = self.dims;
        &self.frames[i % p + p * (j % q)]
    }

    pub fn to_json(&self) -> Value {
        let frames: Vec<Vec<[f64; 2]>> = self
            .frames
            .iter()
            .map(|f| f.cols.iter().flatten().map(|z| [z.re, z.im]).collect())
            .collect();
        json!({
            "surface_dims": self.dims,
            "ambient_dim": self.frames[0].n,
            "frames": frames,
        })
    }

    /// Parses `{"surface_dims":[P,Q],"ambient_dim":n,"frames":[[[re,im],…],…]}`
    /// with each frame flattened column by column. Without `ambient_dim` the
    /// frames are taken to be single vectors.
    pub fn from_json(v: &Value) -> Result<Self, SpinorError> {
        let bad = |m: &str| SpinorError::Input(m.to_string());
        let dims = v
            .get("surface_dims")
            .and_then(Value::as_array)
            .filter(|a| a.len() == 2)
            .ok_or_else(|| bad("surface_dims must be [P,Q]"))?;
        let dims = [0, 1].map(|i| dims[i].as_u64().unwrap_or(0) as usize);
        let raw = v
            .get("frames")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("frames must be an array"))?;
        let mut frames = Vec::with_capacity(raw.len());
        for (idx, f) in raw.iter().enumerate() {
            let entries = f
                .as_array()
                .ok_or_else(|| bad("each frame must be an array of [re,im] pairs"))?;
            let mut zs = Vec::with_capacity(entries.len());
            for e in entries {
                let pair = e.as_array().filter(|p| p.len() == 2);
                let re = pair.and_then(|p| p[0].as_f64());
                let im = pair.and_then(|p| p[1].as_f64());
                match (re, im) {
                    (Some(re), Some(im)) => zs.push(C::new(re, im)),
                    _ => {
                        return Err(SpinorError::Input(format!(
                            "frame {idx}: entries must be [re,im]"
                        )))
                    }
                }
            }
            let n = match v.get("ambient_dim") {
                Some(n) => n
                    .as_u64()
                    .ok_or_else(|| bad("ambient_dim must be a positive integer"))?
                    as usize,
                None => zs.len(),
            };
            if n == 0 || zs.len() % n != 0 {
                return Err(SpinorError::Input(format!(
                    "frame {idx}: {} entries is not a multiple of {n}",
                    zs.len()
                )));
            }
            let cols = zs.chunks(n).map(|c| c.to_vec()).collect();
            frames.push(
                GrassFrame::new(n, cols)
                    .map_err(|e| SpinorError::Input(format!("frame {idx}: {e}")))?,
            );
        }
        FrameField::new(dims, frames)
    }
}

fn overlap_det(a: &GrassFrame, b: &GrassFrame) -> C {
    let k = a.rank();
    if k == 0 {
        return C::new(1.0, 0.0);
    }
    let o = a.overlap(b);
    DMatrix::from_fn(k, k, |i, j| o[i][j]).determinant()
}

/// Chern number of the pulled-back `det S`, `S` the tautological bundle.
///
/// Around each positively oriented plaquette the overlap determinants
/// multiply to `exp(−i·flux)`, so the result is minus the summed wrapped
/// phase over `2π`.
pub fn pullback_det_s_chern(field: &FrameField) -> Result<i64, SpinorError> {
    let [p, q] = field.dims;
    let mut total = 0.0;
    for j in 0..q {
        for i in 0..p {
            let corners = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
            let mut prod = C::new(1.0, 0.0);
            for s in 0..4 {
                let (a, b) = (corners[s], corners[(s + 1) % 4]);
                let d = overlap_det(field.at(a.0, a.1), field.at(b.0, b.1));
                if d.norm() < OVERLAP_THRESHOLD {
                    return Err(SpinorError::TooRough { plaquette: [i, j] });
                }
                prod *= d / d.norm();
            }
            total += wrap(prod.arg());
        }
    }
    let value = -total / TAU;
    let rounded = value.round();
    if (value - rounded).abs() > FRAME_CHERN_TOLERANCE {
        return Err(SpinorError::NonIntegral {
            value,
            tolerance: FRAME_CHERN_TOLERANCE,
        });
    }
    Ok(rounded as i64)
}

/// `Σ aᵢ²`.
pub fn obstruction_a(degrees: &[i64]) -> i64 {
    degrees.iter().map(|a| a * a).sum()
}

/// A degree-one map from the P×Q torus to `ℂP¹ = Gr₁(ℂ²)`: the square
/// `[−1,1]²` is sent to the line through `(cos πρ/2, e^{iφ} sin πρ/2)` with
/// `ρ = max(|x|,|y|)` and `φ = arg(x+iy)`, so its boundary collapses to one point.
pub fn sphere_frame_field(p: usize, q: usize) -> FrameField {
    let mut frames = Vec::with_capacity(p * q);
    for j in 0..q {
        for i in 0..p {
            let x = -1.0 + 2.0 * i as f64 / p as f64;
            let y = -1.0 + 2.0 * j as f64 / q as f64;
            let rho = x.abs().max(y.abs());
            let phi = if x == 0.0 && y == 0.0 {
                0.0
            } else {
                y.atan2(x)
            };
            let h = PI * rho / 2.0;
            let col = vec![C::new(h.cos(), 0.0), C::from_polar(h.sin(), phi)];
            frames.push(GrassFrame {
                n: 2,
                cols: vec![col],
            });
        }
    }
    FrameField {
        dims: [p, q],
        frames,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_field_is_flat() {
        let f = FrameField::constant([8, 8], GrassFrame::coordinate(4, &[1, 3]));
        assert_eq!(pullback_det_s_chern(&f).unwrap(), 0);
    }

    #[test]
    fn rank_zero_is_trivial() {
        let f = FrameField::constant([5, 7], GrassFrame { n: 2, cols: vec![] });
        assert_eq!(pullback_det_s_chern(&f).unwrap(), 0);
    }

    #[test]
    fn sphere_has_degree_minus_one() {
        for m in [16, 64, 128] {
            assert_eq!(
                pullback_det_s_chern(&sphere_frame_field(m, m)).unwrap(),
                -1,
                "mesh {m}"
            );
        }
    }

    #[test]
    fn orthogonal_neighbours_are_too_rough() {
        let mut f = FrameField::constant([4, 4], GrassFrame::coordinate(2, &[0]));
        f.frames[5] = GrassFrame::coordinate(2, &[1]);
        assert!(matches!(
            pullback_det_s_chern(&f),
            Err(SpinorError::TooRough { .. })
        ));
    }

    #[test]
    fn obstruction_arithmetic() {
        assert_eq!(obstruction_a(&[0, 0, 0]), 0);
        assert_eq!(obstruction_a(&[2]), 4);
        assert_eq!(obstruction_a(&[1, -1]), 2);
    }

    #[test]
    fn json_round_trip() {
        let f = sphere_frame_field(4, 3);
        let back = FrameField::from_json(&f.to_json()).unwrap();
        assert_eq!(back, f);
        assert!(FrameField::from_json(&json!({"surface_dims":[2,2],"frames":[]})).is_err());
    }
}
