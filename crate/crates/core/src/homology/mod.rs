//! Integer homology of cell complexes: Smith normal form, H_k with torsion,
//! class coordinates of 1-cycles, intersection numbers and Poincaré duality
//! on the supported lattice manifolds.

pub mod complex;
pub mod intmat;
pub mod lattice;
pub mod reduce;

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use complex::{ChainComplex, SparseBoundary};
pub use intmat::{smith_normal_form, IntMatrix, Smith};
pub use lattice::{Family, Grid, LatticeManifold};
pub use reduce::Reduction;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HomologyError {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("chain has boundary at cells {0:?}")]
    ChainHasBoundary(Vec<usize>),
    #[error("cycle and surface are not transverse: {0}")]
    NonTransverse(String),
    #[error("unsupported manifold family: {0}")]
    Unsupported(String),
    #[error("integer overflow converting {0}")]
    Overflow(String),
}

/// A class in H_1 written in the manifold's published basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
pub struct HomologyClass {
    pub free: Vec<i64>,
    /// (residue, modulus) pairs with 0 <= residue < modulus.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub torsion: Vec<(i64, i64)>,
}

impl HomologyClass {
    pub fn free(coords: Vec<i64>) -> Self {
        HomologyClass {
            free: coords,
            torsion: Vec::new(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.free.iter().all(|&x| x == 0) && self.torsion.iter().all(|&(r, _)| r == 0)
    }

    pub fn add(&self, other: &HomologyClass) -> HomologyClass {
        assert_eq!(self.free.len(), other.free.len());
        HomologyClass {
            free: self
                .free
                .iter()
                .zip(&other.free)
                .map(|(a, b)| a + b)
                .collect(),
            torsion: self
                .torsion
                .iter()
                .zip(&other.torsion)
                .map(|(&(a, m), &(b, _))| ((a + b).rem_euclid(m), m))
                .collect(),
        }
    }

    pub fn neg(&self) -> HomologyClass {
        HomologyClass {
            free: self.free.iter().map(|a| -a).collect(),
            torsion: self
                .torsion
                .iter()
                .map(|&(a, m)| ((-a).rem_euclid(m), m))
                .collect(),
        }
    }
}

/// Rank and torsion coefficients of one homology group.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HomologyGroup {
    pub betti: usize,
    pub torsion: Vec<BigInt>,
}

/// H_k of a complex, computed on its algebraic reduction.
pub fn homology(c: &ChainComplex, k: usize) -> Result<HomologyGroup, HomologyError> {
    homology_of_reduction(&Reduction::new(c), c.dim(), k)
}

pub fn homology_of_reduction(
    r: &Reduction,
    top: usize,
    k: usize,
) -> Result<HomologyGroup, HomologyError> {
    if k > top {
        return Err(HomologyError::Input(format!(
            "dimension {k} out of range 0..={top}"
        )));
    }
    let n_k = r.survivors[k].len();
    let rank_out = if k == 0 {
        0
    } else {
        r.boundaries[k - 1].rank()
    };
    let (rank_in, torsion) = if k == top {
        (0, Vec::new())
    } else {
        let s = smith_normal_form(&r.boundaries[k]);
        let f = s.invariant_factors();
        let t = f.iter().filter(|d| !d.is_one()).cloned().collect();
        (f.len(), t)
    };
    Ok(HomologyGroup {
        betti: n_k - rank_out - rank_in,
        torsion,
    })
}

/// Linear functionals on original 1-cells computing H_1 coordinates.
#[derive(Clone, Debug)]
pub struct FirstHomology {
    free: Vec<Vec<BigInt>>,
    torsion: Vec<(Vec<BigInt>, BigInt)>,
}

impl FirstHomology {
    /// Builds the coordinate functionals. When `published` is given, the free
    /// coordinates are re-expressed in that basis of 1-cycles, which must be a
    /// Z-basis of the free part.
    pub fn new(
        c: &ChainComplex,
        r: &Reduction,
        published: Option<&[BTreeMap<usize, i64>]>,
    ) -> Result<Self, HomologyError> {
        if c.dim() < 1 {
            return Err(HomologyError::Input("complex has no 1-cells".into()));
        }
        let a = &r.boundaries[0];
        let n1 = r.survivors[1].len();
        let b = if c.dim() >= 2 {
            r.boundaries[1].clone()
        } else {
            IntMatrix::zeros(n1, 0)
        };
        let sa = smith_normal_form(a);
        let ra = sa.rank();
        let va_inv = intmat::inverse_unimodular(&sa.v).expect("SNF transform is unimodular");
        let kt = va_inv.select_rows(&(ra..n1).collect::<Vec<_>>());
        let bk = kt.mul(&b);
        let sb = smith_normal_form(&bk);
        let factors = sb.invariant_factors();
        let p = sb.u.mul(&kt);

        let mut free = Vec::new();
        let mut torsion = Vec::new();
        for i in 0..p.rows() {
            let row = r.pull_back_edge_functional(p.row(i));
            match factors.get(i) {
                Some(d) if d.is_one() => {}
                Some(d) => torsion.push((row, d.clone())),
                None => free.push(row),
            }
        }

        if let Some(gens) = published {
            if gens.len() != free.len() {
                return Err(HomologyError::Input(format!(
                    "{} published generators for a free part of rank {}",
                    gens.len(),
                    free.len()
                )));
            }
            let cols: Vec<Vec<BigInt>> = gens.iter().map(|g| eval_rows(&free, g)).collect();
            let g = IntMatrix::from_columns(free.len(), &cols);
            let g_inv = intmat::inverse_unimodular(&g).ok_or_else(|| {
                HomologyError::Input("published generators are not a basis of H_1".into())
            })?;
            let old = free;
            free = (0..g_inv.rows())
                .map(|i| {
                    let mut row = vec![BigInt::zero(); c.count(1)];
                    for (j, phi) in old.iter().enumerate() {
                        let coef = g_inv.get(i, j);
                        if coef.is_zero() {
                            continue;
                        }
                        for (e, x) in phi.iter().enumerate() {
                            if !x.is_zero() {
                                row[e] += coef * x;
                            }
                        }
                    }
                    row
                })
                .collect();
        }
        Ok(FirstHomology { free, torsion })
    }

    pub fn rank(&self) -> usize {
        self.free.len()
    }

    pub fn torsion_moduli(&self) -> Vec<BigInt> {
        self.torsion.iter().map(|(_, d)| d.clone()).collect()
    }

    /// Coordinates of a closed 1-chain; the caller checks closedness.
    pub fn coordinates(
        &self,
        chain: &BTreeMap<usize, i64>,
    ) -> Result<HomologyClass, HomologyError> {
        let free = eval_rows(&self.free, chain)
            .iter()
            .map(|x| {
                x.to_i64()
                    .ok_or_else(|| HomologyError::Overflow(x.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let torsion = self
            .torsion
            .iter()
            .map(|(row, d)| {
                let v = eval_rows(std::slice::from_ref(row), chain).remove(0);
                let r = v.mod_floor(d);
                match (r.to_i64(), d.to_i64()) {
                    (Some(r), Some(d)) => Ok((r, d)),
                    _ => Err(HomologyError::Overflow(d.to_string())),
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(HomologyClass { free, torsion })
    }
}

fn eval_rows(rows: &[Vec<BigInt>], chain: &BTreeMap<usize, i64>) -> Vec<BigInt> {
    rows.iter()
        .map(|phi| {
            chain
                .iter()
                .filter(|(_, &c)| c != 0)
                .map(|(&e, &c)| &phi[e] * c)
                .sum()
        })
        .collect()
}

/// Class of a 1-chain in a complex with precomputed functionals.
pub fn cycle_class(
    c: &ChainComplex,
    h1: &FirstHomology,
    chain: &BTreeMap<usize, i64>,
) -> Result<HomologyClass, HomologyError> {
    let bd = c.apply_boundary(1, chain);
    if !bd.is_empty() {
        return Err(HomologyError::ChainHasBoundary(
            bd.keys().copied().collect(),
        ));
    }
    h1.coordinates(chain)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_has_rank_one() {
        let c = ChainComplex::cycle(6);
        let h = homology(&c, 1).unwrap();
        assert_eq!(h.betti, 1);
        assert!(h.torsion.is_empty());
        assert_eq!(homology(&c, 0).unwrap().betti, 1);
        assert!(homology(&c, 2).is_err());
    }

    #[test]
    fn torsion_is_detected() {
        // one vertex, one loop, one disc glued along twice the loop: RP^2 skeleton
        let e = SparseBoundary {
            faces: 1,
            columns: vec![vec![]],
        };
        let f = SparseBoundary {
            faces: 1,
            columns: vec![vec![(0, 2)]],
        };
        let c = ChainComplex::new(vec![1, 1, 1], vec![e, f]).unwrap();
        let h = homology(&c, 1).unwrap();
        assert_eq!(h.betti, 0);
        assert_eq!(h.torsion, vec![BigInt::from(2)]);
        let r = Reduction::new(&c);
        let h1 = FirstHomology::new(&c, &r, None).unwrap();
        let cls = cycle_class(&c, &h1, &BTreeMap::from([(0, 3)])).unwrap();
        assert_eq!(cls.torsion, vec![(1, 2)]);
    }

    #[test]
    fn open_chain_reports_boundary() {
        let c = ChainComplex::cycle(4);
        let r = Reduction::new(&c);
        let h1 = FirstHomology::new(&c, &r, None).unwrap();
        let err = cycle_class(&c, &h1, &BTreeMap::from([(0, 1)])).unwrap_err();
        assert_eq!(err, HomologyError::ChainHasBoundary(vec![0, 1]));
    }
}
