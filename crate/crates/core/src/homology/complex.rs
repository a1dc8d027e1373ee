use std::collections::BTreeMap;

use super::intmat::IntMatrix;
use super::HomologyError;

/// Boundary map `C_k -> C_{k-1}` stored column-wise: for each k-cell, the
/// faces it hits with their incidence coefficients.
#[derive(Clone, Debug, Default)]
pub struct SparseBoundary {
    pub faces: usize,
    pub columns: Vec<Vec<(usize, i64)>>,
}

impl SparseBoundary {
    pub fn to_dense(&self) -> IntMatrix {
        let mut m = IntMatrix::zeros(self.faces, self.columns.len());
        for (j, col) in self.columns.iter().enumerate() {
            for &(i, c) in col {
                let v = m.get(i, j) + c;
                m.set(i, j, v);
            }
        }
        m
    }
}

/// A finite chain complex of free abelian groups with integer boundary maps.
#[derive(Clone, Debug)]
pub struct ChainComplex {
    counts: Vec<usize>,
    // boundaries[k - 1] is the map out of dimension k
    boundaries: Vec<SparseBoundary>,
}

impl ChainComplex {
    pub fn new(counts: Vec<usize>, boundaries: Vec<SparseBoundary>) -> Result<Self, HomologyError> {
        if counts.is_empty() || boundaries.len() + 1 != counts.len() {
            return Err(HomologyError::Input(
                "need one boundary map per positive dimension".into(),
            ));
        }
        for (k, b) in boundaries.iter().enumerate() {
            let dim = k + 1;
            if b.columns.len() != counts[dim] || b.faces != counts[dim - 1] {
                return Err(HomologyError::Input(format!(
                    "boundary map of dimension {dim} has the wrong shape"
                )));
            }
            if b.columns.iter().flatten().any(|&(f, _)| f >= b.faces) {
                return Err(HomologyError::Input(format!(
                    "boundary map of dimension {dim} references a missing face"
                )));
            }
        }
        Ok(ChainComplex { counts, boundaries })
    }

    /// Top dimension.
    pub fn dim(&self) -> usize {
        self.counts.len() - 1
    }

    pub fn count(&self, k: usize) -> usize {
        self.counts.get(k).copied().unwrap_or(0)
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// Boundary map out of dimension `k >= 1`.
    pub fn boundary(&self, k: usize) -> Option<&SparseBoundary> {
        if k == 0 {
            None
        } else {
            self.boundaries.get(k - 1)
        }
    }

    /// Applies the boundary to a sparse k-chain; zero coefficients are dropped.
    pub fn apply_boundary(&self, k: usize, chain: &BTreeMap<usize, i64>) -> BTreeMap<usize, i64> {
        let mut out = BTreeMap::new();
        let Some(b) = self.boundary(k) else {
            return out;
        };
        for (&cell, &coef) in chain {
            if coef == 0 {
                continue;
            }
            for &(f, c) in &b.columns[cell] {
                *out.entry(f).or_insert(0) += coef * c;
            }
        }
        out.retain(|_, v| *v != 0);
        out
    }

    /// True iff every composite `∂_{k-1} ∘ ∂_k` vanishes.
    pub fn boundary_squared_vanishes(&self) -> bool {
        for k in 2..=self.dim() {
            for cell in 0..self.count(k) {
                let single = BTreeMap::from([(cell, 1i64)]);
                let once = self.apply_boundary(k, &single);
                if !self.apply_boundary(k - 1, &once).is_empty() {
                    return false;
                }
            }
        }
        true
    }

    /// Cellular circle with `n >= 1` vertices and `n` edges, edge i: i -> i+1.
    pub fn cycle(n: usize) -> Self {
        assert!(n >= 1);
        let columns = (0..n)
            .map(|i| {
                let j = (i + 1) % n;
                if i == j {
                    Vec::new()
                } else {
                    vec![(j, 1), (i, -1)]
                }
            })
            .collect();
        ChainComplex {
            counts: vec![n, n],
            boundaries: vec![SparseBoundary { faces: n, columns }],
        }
    }

    /// Cellular product, with `∂(σ×τ) = ∂σ×τ + (-1)^{dim σ} σ×∂τ`.
    pub fn product(a: &ChainComplex, b: &ChainComplex) -> ChainComplex {
        let layout = ProductLayout::new(a, b);
        let top = a.dim() + b.dim();
        let mut boundaries = Vec::with_capacity(top);
        for d in 1..=top {
            let mut columns = Vec::with_capacity(layout.count(d));
            for p in layout.parts(d) {
                let q = d - p;
                for i in 0..a.count(p) {
                    for j in 0..b.count(q) {
                        let mut col = Vec::new();
                        if let Some(ba) = a.boundary(p) {
                            for &(f, c) in &ba.columns[i] {
                                col.push((layout.index(p - 1, q, f, j), c));
                            }
                        }
                        if let Some(bb) = b.boundary(q) {
                            let sign = if p % 2 == 0 { 1 } else { -1 };
                            for &(g, c) in &bb.columns[j] {
                                col.push((layout.index(p, q - 1, i, g), sign * c));
                            }
                        }
                        columns.push(col);
                    }
                }
            }
            boundaries.push(SparseBoundary {
                faces: layout.count(d - 1),
                columns,
            });
        }
        ChainComplex {
            counts: (0..=top).map(|d| layout.count(d)).collect(),
            boundaries,
        }
    }
}

/// Indexing of cells in a product complex: dimension-d cells are ordered by
/// the split `p + q = d` (increasing p), then by (i, j) row-major.
#[derive(Clone, Debug)]
pub struct ProductLayout {
    a_counts: Vec<usize>,
    b_counts: Vec<usize>,
}

impl ProductLayout {
    pub fn new(a: &ChainComplex, b: &ChainComplex) -> Self {
        ProductLayout {
            a_counts: a.counts().to_vec(),
            b_counts: b.counts().to_vec(),
        }
    }

    fn parts(&self, d: usize) -> impl Iterator<Item = usize> + '_ {
        let da = self.a_counts.len() - 1;
        let db = self.b_counts.len() - 1;
        (0..=d.min(da)).filter(move |&p| d - p <= db)
    }

    pub fn count(&self, d: usize) -> usize {
        self.parts(d)
            .map(|p| self.a_counts[p] * self.b_counts[d - p])
            .sum()
    }

    /// Index of the cell `σ_i × τ_j` with dim σ = p, dim τ = q.
    pub fn index(&self, p: usize, q: usize, i: usize, j: usize) -> usize {
        let d = p + q;
        let offset: usize = self
            .parts(d)
            .take_while(|&pp| pp < p)
            .map(|pp| self.a_counts[pp] * self.b_counts[d - pp])
            .sum();
        offset + i * self.b_counts[q] + j
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_boundary() {
        let c = ChainComplex::cycle(4);
        let all = (0..4).map(|e| (e, 1)).collect();
        assert!(c.apply_boundary(1, &all).is_empty());
        assert!(c.boundary_squared_vanishes());
    }

    #[test]
    fn product_of_circles_squares_to_zero() {
        let c = ChainComplex::product(&ChainComplex::cycle(3), &ChainComplex::cycle(2));
        assert_eq!(c.counts(), &[6, 12, 6]);
        assert!(c.boundary_squared_vanishes());
        let c3 = ChainComplex::product(&c, &ChainComplex::cycle(2));
        assert!(c3.boundary_squared_vanishes());
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let bad = SparseBoundary {
            faces: 2,
            columns: vec![vec![(5, 1)]],
        };
        assert!(ChainComplex::new(vec![2, 1], vec![bad]).is_err());
    }
}
