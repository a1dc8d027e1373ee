//! Cubical lattices and the concrete closed 3-manifolds built from them.
//!
//! Cell ids on a [`Grid`] with `V` vertices:
//! vertex `v = x + N0*(y + N1*z)`, link `(dir, v) -> dir*V + v` (from `v` to
//! `v + e_dir`), plaquette `(normal, v) -> normal*V + v` spanning the two
//! directions `(normal+1, normal+2) mod 3` in that order, cube `v`.
//!
//! Orientation convention: the basis `e_0, e_1, e_2` is right-handed and a
//! plaquette normal to `i` is oriented by `e_{i+1} ∧ e_{i+2}`, so a segment
//! crossing it in the `+e_i` direction counts `+1`. The dual lattice has the
//! same shape, shifted by half a step: dual vertex = cube, dual edge through
//! plaquette `(n, v)` runs from cube `v - e_n` to cube `v`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use super::complex::{ChainComplex, ProductLayout, SparseBoundary};
use super::reduce::Reduction;
use super::{intmat, FirstHomology, HomologyClass, HomologyError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Grid {
    pub dims: [usize; 3],
    pub periodic: bool,
}

impl Grid {
    pub fn torus(dims: [usize; 3]) -> Self {
        assert!(
            dims.iter().all(|&n| n >= 1),
            "lattice dims must be positive"
        );
        Grid {
            dims,
            periodic: true,
        }
    }

    /// Open box with `dims` vertices per axis (a coordinate chart).
    pub fn open(dims: [usize; 3]) -> Self {
        assert!(
            dims.iter().all(|&n| n >= 1),
            "lattice dims must be positive"
        );
        Grid {
            dims,
            periodic: false,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn vertex(&self, c: [usize; 3]) -> usize {
        c[0] + self.dims[0] * (c[1] + self.dims[1] * c[2])
    }

    /// Vertex at integer coordinates reduced periodically (periodic grids only).
    pub fn vertex_wrapped(&self, c: [i64; 3]) -> usize {
        let r = |i: usize| c[i].rem_euclid(self.dims[i] as i64) as usize;
        self.vertex([r(0), r(1), r(2)])
    }

    pub fn coords(&self, v: usize) -> [usize; 3] {
        let x = v % self.dims[0];
        let y = (v / self.dims[0]) % self.dims[1];
        let z = v / (self.dims[0] * self.dims[1]);
        [x, y, z]
    }

    /// `v + step * e_dir`, or `None` when it leaves an open grid.
    pub fn shift(&self, v: usize, dir: usize, step: i64) -> Option<usize> {
        let stride = match dir {
            0 => 1,
            1 => self.dims[0],
            _ => self.dims[0] * self.dims[1],
        };
        let n = self.dims[dir] as i64;
        let c = ((v / stride) % self.dims[dir]) as i64;
        let t = c + step;
        let t = if self.periodic {
            t.rem_euclid(n)
        } else if (0..n).contains(&t) {
            t
        } else {
            return None;
        };
        Some((v as i64 + (t - c) * stride as i64) as usize)
    }

    pub fn link_id(&self, dir: usize, v: usize) -> usize {
        dir * self.vertex_count() + v
    }

    /// (dir, base vertex) of a link id.
    pub fn link(&self, id: usize) -> (usize, usize) {
        (id / self.vertex_count(), id % self.vertex_count())
    }

    pub fn has_link(&self, dir: usize, v: usize) -> bool {
        self.shift(v, dir, 1).is_some()
    }

    pub fn link_ends(&self, id: usize) -> Option<(usize, usize)> {
        let (dir, v) = self.link(id);
        self.shift(v, dir, 1).map(|h| (v, h))
    }

    pub fn plaquette_id(&self, normal: usize, v: usize) -> usize {
        normal * self.vertex_count() + v
    }

    /// (normal, base vertex) of a plaquette id.
    pub fn plaquette(&self, id: usize) -> (usize, usize) {
        (id / self.vertex_count(), id % self.vertex_count())
    }

    pub fn plane_dirs(normal: usize) -> (usize, usize) {
        ((normal + 1) % 3, (normal + 2) % 3)
    }

    /// Oriented boundary links of a plaquette: `(link id, ±1)`; `None` if the
    /// plaquette does not exist on an open grid.
    pub fn plaquette_links(&self, id: usize) -> Option<[(usize, i64); 4]> {
        let (n, v) = self.plaquette(id);
        let (j, k) = Self::plane_dirs(n);
        let vj = self.shift(v, j, 1)?;
        let vk = self.shift(v, k, 1)?;
        self.shift(vj, k, 1)?;
        Some([
            (self.link_id(j, v), 1),
            (self.link_id(k, vj), 1),
            (self.link_id(j, vk), -1),
            (self.link_id(k, v), -1),
        ])
    }

    /// Oriented boundary plaquettes of the cube based at `v`.
    pub fn cube_faces(&self, v: usize) -> Option<[(usize, i64); 6]> {
        let mut out = [(0, 0); 6];
        for i in 0..3 {
            let vi = self.shift(v, i, 1)?;
            out[2 * i] = (self.plaquette_id(i, vi), 1);
            out[2 * i + 1] = (self.plaquette_id(i, v), -1);
        }
        // the far corner must exist too
        let far = self
            .shift(v, 0, 1)
            .and_then(|a| self.shift(a, 1, 1))
            .and_then(|a| self.shift(a, 2, 1));
        far.map(|_| out)
    }

    pub fn has_plaquette(&self, id: usize) -> bool {
        self.plaquette_links(id).is_some()
    }

    pub fn has_cube(&self, v: usize) -> bool {
        self.cube_faces(v).is_some()
    }

    /// Dual edge through plaquette `id`, as a link id of the dual grid.
    pub fn dual_edge_of_plaquette(&self, id: usize) -> Option<usize> {
        let (n, v) = self.plaquette(id);
        self.shift(v, n, -1).map(|t| self.link_id(n, t))
    }

    /// Inverse of [`Grid::dual_edge_of_plaquette`].
    pub fn plaquette_of_dual_edge(&self, link: usize) -> Option<usize> {
        let (n, t) = self.link(link);
        self.shift(t, n, 1).map(|v| self.plaquette_id(n, v))
    }

    /// Dual 2-cell of a primal link, as a plaquette id of the dual grid.
    pub fn dual_face_of_link(&self, link: usize) -> Option<usize> {
        let (i, v) = self.link(link);
        let (j, k) = Self::plane_dirs(i);
        let w = self.shift(v, j, -1)?;
        let w = self.shift(w, k, -1)?;
        Some(self.plaquette_id(i, w))
    }

    /// Tail and head cubes (dual vertices) of the dual edge through a plaquette.
    pub fn dual_edge_ends(&self, plaquette: usize) -> Option<(usize, usize)> {
        let (n, v) = self.plaquette(plaquette);
        let t = self.shift(v, n, -1)?;
        if self.has_cube(t) && self.has_cube(v) {
            Some((t, v))
        } else {
            None
        }
    }

    /// Cubical chain complex of the periodic lattice (the 3-torus).
    pub fn torus_complex(&self) -> ChainComplex {
        assert!(
            self.periodic,
            "only periodic grids close up into a manifold"
        );
        let nv = self.vertex_count();
        let edges = (0..3 * nv)
            .map(|id| {
                let (t, h) = self.link_ends(id).expect("periodic link");
                if t == h {
                    Vec::new()
                } else {
                    vec![(h, 1), (t, -1)]
                }
            })
            .collect();
        let faces = (0..3 * nv)
            .map(|id| {
                self.plaquette_links(id)
                    .expect("periodic plaquette")
                    .to_vec()
            })
            .collect();
        let cubes = (0..nv)
            .map(|v| self.cube_faces(v).expect("periodic cube").to_vec())
            .collect();
        ChainComplex::new(
            vec![nv, 3 * nv, 3 * nv, nv],
            vec![
                SparseBoundary {
                    faces: nv,
                    columns: edges,
                },
                SparseBoundary {
                    faces: 3 * nv,
                    columns: faces,
                },
                SparseBoundary {
                    faces: 3 * nv,
                    columns: cubes,
                },
            ],
        )
        .expect("well-formed torus complex")
    }

    /// The coordinate circle in direction `dir` through vertex 0, on links.
    pub fn coordinate_circle(&self, dir: usize) -> BTreeMap<usize, i64> {
        let mut out = BTreeMap::new();
        let mut v = 0;
        for _ in 0..self.dims[dir] {
            *out.entry(self.link_id(dir, v)).or_insert(0) += 1;
            v = self.shift(v, dir, 1).expect("periodic");
        }
        out
    }

    /// The coordinate 2-torus normal to `normal` at slice `slice`, on plaquettes.
    pub fn coordinate_torus(&self, normal: usize, slice: usize) -> BTreeMap<usize, i64> {
        let (j, k) = Self::plane_dirs(normal);
        let mut out = BTreeMap::new();
        for a in 0..self.dims[j] {
            for b in 0..self.dims[k] {
                let mut c = [0; 3];
                c[normal] = slice;
                c[j] = a;
                c[k] = b;
                out.insert(self.plaquette_id(normal, self.vertex(c)), 1);
            }
        }
        out
    }

    /// Dual circle in direction `dir` passing through the plaquettes based at
    /// the vertices `base + t e_dir` (a chain on plaquette ids).
    pub fn dual_coordinate_circle(&self, dir: usize, base: usize) -> BTreeMap<usize, i64> {
        let mut out = BTreeMap::new();
        let mut v = base;
        for _ in 0..self.dims[dir] {
            *out.entry(self.plaquette_id(dir, v)).or_insert(0) += 1;
            v = self.shift(v, dir, 1).expect("periodic");
        }
        out
    }
}

/// The supported closed manifolds.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    /// Cubical 3-torus.
    Torus3 { dims: [usize; 3] },
    /// Genus-g polygon mesh (each side split into `subdivisions` segments,
    /// fan-triangulated from a centre vertex) times a circle of `circle` edges.
    SurfaceTimesCircle {
        genus: usize,
        subdivisions: usize,
        circle: usize,
    },
}

/// Which kind of lattice chain is handed to [`LatticeManifold::intersection_number`].
#[derive(Clone, Debug, PartialEq)]
pub enum LatticeChain {
    /// Coefficients on primal links.
    PrimalEdges(BTreeMap<usize, i64>),
    /// Coefficients on dual edges, indexed by the plaquette they cross.
    DualEdges(BTreeMap<usize, i64>),
    /// Coefficients on primal plaquettes.
    PrimalFaces(BTreeMap<usize, i64>),
    /// Coefficients on dual 2-cells, indexed by the primal link they cross.
    DualFaces(BTreeMap<usize, i64>),
}

#[derive(Clone, Debug)]
pub struct LatticeManifold {
    family: Family,
    complex: ChainComplex,
    reduction: Reduction,
    h1: FirstHomology,
    grid: Option<Grid>,
    sigma: Option<SurfaceMesh>,
}

impl LatticeManifold {
    pub fn torus(dims: [usize; 3]) -> Result<Self, HomologyError> {
        if dims.iter().any(|&n| n == 0) {
            return Err(HomologyError::Input("torus dims must be positive".into()));
        }
        let grid = Grid::torus(dims);
        let complex = grid.torus_complex();
        let reduction = Reduction::new(&complex);
        let gens: Vec<_> = (0..3).map(|d| grid.coordinate_circle(d)).collect();
        let h1 = FirstHomology::new(&complex, &reduction, Some(&gens))?;
        Ok(LatticeManifold {
            family: Family::Torus3 { dims },
            complex,
            reduction,
            h1,
            grid: Some(grid),
            sigma: None,
        })
    }

    /// Σ_g × S¹ with published H_1 basis (a_1, b_1, …, a_g, b_g, fibre).
    pub fn surface_times_circle(
        genus: usize,
        subdivisions: usize,
        circle: usize,
    ) -> Result<Self, HomologyError> {
        if genus == 0 || subdivisions == 0 || circle == 0 {
            return Err(HomologyError::Input(
                "genus, subdivisions and circle length must be positive".into(),
            ));
        }
        let sigma = SurfaceMesh::new(genus, subdivisions);
        let s1 = ChainComplex::cycle(circle);
        let complex = ChainComplex::product(&sigma.complex, &s1);
        let layout = ProductLayout::new(&sigma.complex, &s1);
        let mut gens = Vec::new();
        for class in 0..2 * genus {
            let mut g = BTreeMap::new();
            for t in 0..subdivisions {
                g.insert(layout.index(1, 0, sigma.side_segment(class, t), 0), 1);
            }
            gens.push(g);
        }
        gens.push(
            (0..circle)
                .map(|t| (layout.index(0, 1, SurfaceMesh::CORNER, t), 1))
                .collect(),
        );
        let reduction = Reduction::new(&complex);
        let h1 = FirstHomology::new(&complex, &reduction, Some(&gens))?;
        Ok(LatticeManifold {
            family: Family::SurfaceTimesCircle {
                genus,
                subdivisions,
                circle,
            },
            complex,
            reduction,
            h1,
            grid: None,
            sigma: Some(sigma),
        })
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn complex(&self) -> &ChainComplex {
        &self.complex
    }

    pub fn reduction(&self) -> &Reduction {
        &self.reduction
    }

    pub fn grid(&self) -> Option<&Grid> {
        self.grid.as_ref()
    }

    pub fn h1_rank(&self) -> usize {
        self.h1.rank()
    }

    /// Class of a closed chain on the manifold's 1-cells.
    pub fn cycle_class(
        &self,
        chain: &BTreeMap<usize, i64>,
    ) -> Result<HomologyClass, HomologyError> {
        super::cycle_class(&self.complex, &self.h1, chain)
    }

    /// Class of a closed dual 1-chain (indexed by plaquettes) on a 3-torus.
    /// The dual lattice is a translate of the primal one, so coordinates are
    /// taken in the same basis.
    pub fn dual_cycle_class(
        &self,
        chain: &BTreeMap<usize, i64>,
    ) -> Result<HomologyClass, HomologyError> {
        let grid = self.require_torus()?;
        let mut edges = BTreeMap::new();
        for (&p, &c) in chain {
            if c == 0 {
                continue;
            }
            let e = grid
                .dual_edge_of_plaquette(p)
                .ok_or_else(|| HomologyError::Input(format!("plaquette {p} out of range")))?;
            *edges.entry(e).or_insert(0) += c;
        }
        edges.retain(|_, c| *c != 0);
        self.cycle_class(&edges)
    }

    /// The 1-cycle {vertex} × S¹ of a surface-times-circle manifold.
    pub fn fibre_circle(
        &self,
        surface_vertex: usize,
    ) -> Result<BTreeMap<usize, i64>, HomologyError> {
        let (Family::SurfaceTimesCircle { circle, .. }, Some(sigma)) = (&self.family, &self.sigma)
        else {
            return Err(HomologyError::Unsupported("fibre circles need Σ×S¹".into()));
        };
        if surface_vertex >= sigma.complex.count(0) {
            return Err(HomologyError::Input(format!(
                "no surface vertex {surface_vertex}"
            )));
        }
        let layout = ProductLayout::new(&sigma.complex, &ChainComplex::cycle(*circle));
        Ok((0..*circle)
            .map(|t| (layout.index(0, 1, surface_vertex, t), 1))
            .collect())
    }

    /// Number of vertices in the surface factor of Σ×S¹.
    pub fn surface_vertex_count(&self) -> Option<usize> {
        self.sigma.as_ref().map(|s| s.complex.count(0))
    }

    fn require_torus(&self) -> Result<&Grid, HomologyError> {
        match (&self.family, &self.grid) {
            (Family::Torus3 { .. }, Some(g)) => Ok(g),
            _ => Err(HomologyError::Unsupported(format!("{:?}", self.family))),
        }
    }

    /// Signed intersection number of a 1-cycle with a closed 2-chain.
    ///
    /// Transversality is cubical: a dual 1-cycle against a primal surface, or
    /// a primal 1-cycle against a dual surface.
    pub fn intersection_number(
        &self,
        cycle: &LatticeChain,
        surface: &LatticeChain,
    ) -> Result<i64, HomologyError> {
        let grid = *self.require_torus()?;
        let dual_complex = &self.complex;
        match (cycle, surface) {
            (LatticeChain::DualEdges(a), LatticeChain::PrimalFaces(b)) => {
                self.dual_cycle_class(a)?;
                let bd = self.complex.apply_boundary(2, b);
                if !bd.is_empty() {
                    return Err(HomologyError::ChainHasBoundary(
                        bd.keys().copied().collect(),
                    ));
                }
                Ok(pair(a, b))
            }
            (LatticeChain::PrimalEdges(a), LatticeChain::DualFaces(b)) => {
                self.cycle_class(a)?;
                let mut faces = BTreeMap::new();
                for (&l, &c) in b {
                    let f = grid
                        .dual_face_of_link(l)
                        .ok_or_else(|| HomologyError::Input(format!("link {l} out of range")))?;
                    *faces.entry(f).or_insert(0) += c;
                }
                let bd = dual_complex.apply_boundary(2, &faces);
                if !bd.is_empty() {
                    return Err(HomologyError::ChainHasBoundary(
                        bd.keys().copied().collect(),
                    ));
                }
                Ok(pair(a, b))
            }
            _ => Err(HomologyError::NonTransverse(
                "both chains live on the same lattice; shift one of them by half a \
                 lattice step (use its dual-lattice version)"
                    .into(),
            )),
        }
    }

    /// Poincaré dual of a Chern/flux vector `k` (fluxes through the coordinate
    /// tori normal to e_0, e_1, e_2): the H_1 class whose intersection with the
    /// i-th coordinate torus is `k_i`.
    pub fn poincare_dual(&self, flux: &[i64]) -> Result<HomologyClass, HomologyError> {
        let grid = *self.require_torus()?;
        if flux.len() != 3 {
            return Err(HomologyError::Input(format!(
                "flux vector has {} entries, expected 3",
                flux.len()
            )));
        }
        // Pairing of the published generators against the coordinate tori,
        // measured with dual representatives of each generator.
        let mut pairing = intmat::IntMatrix::zeros(3, 3);
        for j in 0..3 {
            let circle = grid.dual_coordinate_circle(j, 0);
            let cls = self.dual_cycle_class(&circle)?;
            debug_assert_eq!(cls.free.iter().filter(|&&x| x != 0).count(), 1);
            for i in 0..3 {
                let torus = grid.coordinate_torus(i, 0);
                let n = self.intersection_number(
                    &LatticeChain::DualEdges(circle.clone()),
                    &LatticeChain::PrimalFaces(torus),
                )?;
                // express the pairing in terms of the class coordinates of the circle
                let coord = cls.free[j];
                pairing.set(i, j, BigInt::from(n * coord));
            }
        }
        let rhs: Vec<BigInt> = flux.iter().map(|&x| BigInt::from(x)).collect();
        let sol = intmat::solve_integer(&pairing, &rhs).ok_or_else(|| {
            HomologyError::Input("flux vector has no integral Poincaré dual".into())
        })?;
        let free = sol
            .iter()
            .map(|x| intmat::to_i64(x).ok_or_else(|| HomologyError::Overflow(x.to_string())))
            .collect::<Result<_, _>>()?;
        Ok(HomologyClass::free(free))
    }
}

fn pair(a: &BTreeMap<usize, i64>, b: &BTreeMap<usize, i64>) -> i64 {
    a.iter().filter_map(|(k, x)| b.get(k).map(|y| x * y)).sum()
}

/// Genus-g surface as a 4g-gon `a1 b1 a1⁻¹ b1⁻¹ …` with subdivided sides,
/// fan-triangulated from a centre vertex.
#[derive(Clone, Debug)]
struct SurfaceMesh {
    genus: usize,
    subdivisions: usize,
    complex: ChainComplex,
}

impl SurfaceMesh {
    const CORNER: usize = 0;
    const CENTRE: usize = 1;

    fn new(genus: usize, m: usize) -> Self {
        let classes = 2 * genus;
        let positions = 4 * genus * m;
        let nv = 2 + classes * (m - 1);
        let mut mesh = SurfaceMesh {
            genus,
            subdivisions: m,
            complex: ChainComplex::cycle(1),
        };

        let mut edges = Vec::new();
        for c in 0..classes {
            for t in 0..m {
                let a = mesh.class_point(c, t);
                let b = mesh.class_point(c, t + 1);
                edges.push(if a == b {
                    Vec::new()
                } else {
                    vec![(b, 1), (a, -1)]
                });
            }
        }
        for i in 0..positions {
            let p = mesh.position_vertex(i);
            edges.push(vec![(p, 1), (Self::CENTRE, -1)]);
        }
        let spoke = |i: usize| classes * m + (i % positions);
        let mut triangles = Vec::new();
        for i in 0..positions {
            let (seg, sign) = mesh.position_segment(i);
            triangles.push(vec![(spoke(i), 1), (seg, sign), (spoke(i + 1), -1)]);
        }
        mesh.complex = ChainComplex::new(
            vec![nv, edges.len(), triangles.len()],
            vec![
                SparseBoundary {
                    faces: nv,
                    columns: edges,
                },
                SparseBoundary {
                    faces: classes * m + positions,
                    columns: triangles,
                },
            ],
        )
        .expect("well-formed surface mesh");
        mesh
    }

    /// Vertex id of point `t in 0..=m` along side class `c`.
    fn class_point(&self, c: usize, t: usize) -> usize {
        if t == 0 || t == self.subdivisions {
            Self::CORNER
        } else {
            2 + c * (self.subdivisions - 1) + (t - 1)
        }
    }

    fn side_segment(&self, c: usize, t: usize) -> usize {
        c * self.subdivisions + t
    }

    /// Side `s` of the polygon: (class, traversed forward?).
    fn side(&self, s: usize) -> (usize, bool) {
        let pair = s / 4;
        match s % 4 {
            0 => (2 * pair, true),
            1 => (2 * pair + 1, true),
            2 => (2 * pair, false),
            _ => (2 * pair + 1, false),
        }
    }

    fn position_vertex(&self, i: usize) -> usize {
        let m = self.subdivisions;
        let (c, fwd) = self.side(i / m);
        let t = i % m;
        if fwd {
            self.class_point(c, t)
        } else {
            self.class_point(c, m - t)
        }
    }

    /// Segment from position i to i+1 with its sign.
    fn position_segment(&self, i: usize) -> (usize, i64) {
        let m = self.subdivisions;
        let (c, fwd) = self.side(i / m);
        let t = i % m;
        if fwd {
            (self.side_segment(c, t), 1)
        } else {
            (self.side_segment(c, m - 1 - t), -1)
        }
    }

    #[allow(dead_code)]
    fn genus(&self) -> usize {
        self.genus
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homology::homology;

    #[test]
    fn torus_complex_is_a_complex() {
        for dims in [[1, 1, 1], [2, 3, 2], [3, 3, 3]] {
            assert!(Grid::torus(dims)
                .torus_complex()
                .boundary_squared_vanishes());
        }
    }

    #[test]
    fn torus_betti_numbers() {
        let c = Grid::torus([3, 3, 3]).torus_complex();
        let b: Vec<usize> = (0..=3).map(|k| homology(&c, k).unwrap().betti).collect();
        assert_eq!(b, vec![1, 3, 3, 1]);
    }

    #[test]
    fn surface_mesh_has_expected_homology() {
        let s = SurfaceMesh::new(2, 3);
        assert!(s.complex.boundary_squared_vanishes());
        let b: Vec<usize> = (0..=2)
            .map(|k| homology(&s.complex, k).unwrap().betti)
            .collect();
        assert_eq!(b, vec![1, 4, 1]);
    }

    #[test]
    fn dual_maps_are_inverse() {
        let g = Grid::torus([3, 4, 5]);
        for p in 0..3 * g.vertex_count() {
            let e = g.dual_edge_of_plaquette(p).unwrap();
            assert_eq!(g.plaquette_of_dual_edge(e), Some(p));
        }
    }

    #[test]
    fn open_grid_drops_boundary_cells() {
        let g = Grid::open([2, 2, 2]);
        assert!(g.has_link(0, g.vertex([0, 0, 0])));
        assert!(!g.has_link(0, g.vertex([1, 0, 0])));
        assert!(g.has_cube(0));
        assert!(!g.has_cube(1));
    }

    #[test]
    fn coordinate_circles_have_unit_classes() {
        let m = LatticeManifold::torus([3, 4, 2]).unwrap();
        let g = *m.grid().unwrap();
        for d in 0..3 {
            let mut want = vec![0; 3];
            want[d] = 1;
            assert_eq!(m.cycle_class(&g.coordinate_circle(d)).unwrap().free, want);
            let dual = g.dual_coordinate_circle(d, g.vertex([1, 1, 1]));
            assert_eq!(m.dual_cycle_class(&dual).unwrap().free, want);
        }
    }

    #[test]
    fn diagonal_staircase_class() {
        let m = LatticeManifold::torus([3, 3, 3]).unwrap();
        let g = *m.grid().unwrap();
        let mut chain = BTreeMap::new();
        let mut v = 0;
        for _ in 0..3 {
            for d in 0..2 {
                chain.insert(g.link_id(d, v), 1);
                v = g.shift(v, d, 1).unwrap();
            }
        }
        assert_eq!(m.cycle_class(&chain).unwrap().free, vec![1, 1, 0]);
    }

    #[test]
    fn intersection_is_position_independent() {
        let m = LatticeManifold::torus([3, 3, 3]).unwrap();
        let g = *m.grid().unwrap();
        for base in [0, g.vertex([2, 1, 0]), g.vertex([1, 2, 2])] {
            for slice in 0..3 {
                let n = m
                    .intersection_number(
                        &LatticeChain::DualEdges(g.dual_coordinate_circle(2, base)),
                        &LatticeChain::PrimalFaces(g.coordinate_torus(2, slice)),
                    )
                    .unwrap();
                assert_eq!(n, 1);
                let n = m
                    .intersection_number(
                        &LatticeChain::DualEdges(g.dual_coordinate_circle(0, base)),
                        &LatticeChain::PrimalFaces(g.coordinate_torus(2, slice)),
                    )
                    .unwrap();
                assert_eq!(n, 0);
            }
        }
    }

    #[test]
    fn non_transverse_pair_is_rejected() {
        let m = LatticeManifold::torus([2, 2, 2]).unwrap();
        let g = *m.grid().unwrap();
        let err = m
            .intersection_number(
                &LatticeChain::PrimalEdges(g.coordinate_circle(0)),
                &LatticeChain::PrimalFaces(g.coordinate_torus(0, 0)),
            )
            .unwrap_err();
        assert!(matches!(err, HomologyError::NonTransverse(_)));
    }

    #[test]
    fn poincare_dual_on_torus() {
        let m = LatticeManifold::torus([2, 3, 4]).unwrap();
        assert_eq!(m.poincare_dual(&[2, -1, 5]).unwrap().free, vec![2, -1, 5]);
        let s = LatticeManifold::surface_times_circle(1, 1, 2).unwrap();
        assert!(matches!(
            s.poincare_dual(&[1, 0, 0]),
            Err(HomologyError::Unsupported(_))
        ));
    }

    #[test]
    fn surface_times_circle_generators() {
        let m = LatticeManifold::surface_times_circle(2, 2, 3).unwrap();
        assert_eq!(m.h1_rank(), 5);
        let fib = m.fibre_circle(1).unwrap();
        assert_eq!(m.cycle_class(&fib).unwrap().free, vec![0, 0, 0, 0, 1]);
        let b: Vec<usize> = (0..=3)
            .map(|k| homology(m.complex(), k).unwrap().betti)
            .collect();
        assert_eq!(b, vec![1, 5, 5, 1]);
    }
}
