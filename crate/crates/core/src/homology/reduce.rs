//! Algebraic reduction of a chain complex by eliminating unit-coefficient
//! pairs (a ∈ C_{k-1}, b ∈ C_k). Each elimination is a chain homotopy
//! equivalence; the steps touching 1-chains are recorded so that cohomology
//! functionals on the small reduced complex can be pulled back to the
//! original cells.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::complex::ChainComplex;
use super::intmat::IntMatrix;

#[derive(Clone, Debug)]
enum Step {
    /// Edge `b` paired with a vertex: dropped from 1-chains.
    DropEdge { b: usize },
    /// Edge `a` paired with 2-cell whose boundary (at elimination time) is `v`;
    /// `c <- c - c[a] * u * v`.
    Slide {
        a: usize,
        u: BigInt,
        v: Vec<(usize, BigInt)>,
    },
}

/// The reduced complex together with the bookkeeping needed to map 1-chains.
#[derive(Clone, Debug)]
pub struct Reduction {
    /// Original ids of surviving cells, per dimension (ascending).
    pub survivors: Vec<Vec<usize>>,
    /// Dense reduced boundary maps; `boundaries[k - 1]` is out of dimension k,
    /// indexed by positions in `survivors`.
    pub boundaries: Vec<IntMatrix>,
    steps: Vec<Step>,
    edge_count: usize,
}

struct Work {
    bd: Vec<Vec<Option<BTreeMap<usize, BigInt>>>>,
    cob: Vec<Vec<BTreeSet<usize>>>,
    alive: Vec<Vec<bool>>,
}

impl Work {
    fn new(c: &ChainComplex) -> Self {
        let top = c.dim();
        let mut bd: Vec<Vec<Option<BTreeMap<usize, BigInt>>>> = vec![Vec::new(); top + 1];
        let mut cob: Vec<Vec<BTreeSet<usize>>> = (0..=top)
            .map(|k| vec![BTreeSet::new(); c.count(k)])
            .collect();
        bd[0] = vec![Some(BTreeMap::new()); c.count(0)];
        for k in 1..=top {
            let b = c.boundary(k).expect("boundary present");
            bd[k] = b
                .columns
                .iter()
                .enumerate()
                .map(|(cell, col)| {
                    let mut m: BTreeMap<usize, BigInt> = BTreeMap::new();
                    for &(f, x) in col {
                        *m.entry(f).or_insert_with(BigInt::zero) += x;
                    }
                    m.retain(|_, v| !v.is_zero());
                    for &f in m.keys() {
                        cob[k - 1][f].insert(cell);
                    }
                    Some(m)
                })
                .collect();
        }
        let alive = (0..=top).map(|k| vec![true; c.count(k)]).collect();
        Work { bd, cob, alive }
    }

    /// Eliminates the pair (a in dim k-1, b in dim k).
    fn eliminate(&mut self, k: usize, a: usize, b: usize, steps: &mut Vec<Step>) {
        let vb = self.bd[k][b].take().expect("live cell");
        let u = vb[&a].clone();
        debug_assert!(u.abs().is_one());

        for &f in vb.keys() {
            self.cob[k - 1][f].remove(&b);
        }
        let others: Vec<usize> = self.cob[k - 1][a].iter().copied().collect();
        for x in others {
            let bx = self.bd[k][x].as_mut().expect("live coface");
            let q = &bx[&a] * &u;
            for (f, coef) in &vb {
                let entry = bx.entry(*f).or_insert_with(BigInt::zero);
                let was_zero = entry.is_zero();
                *entry -= &q * coef;
                if entry.is_zero() {
                    bx.remove(f);
                    if !was_zero {
                        self.cob[k - 1][*f].remove(&x);
                    }
                } else if was_zero {
                    self.cob[k - 1][*f].insert(x);
                }
            }
        }
        debug_assert!(self.cob[k - 1][a].is_empty());

        // Retire a: detach it from its own faces.
        if let Some(ba) = self.bd[k - 1][a].take() {
            if k >= 2 {
                for g in ba.keys() {
                    self.cob[k - 2][*g].remove(&a);
                }
            }
        }
        self.alive[k - 1][a] = false;

        // Retire b: remove it from the boundaries of higher cells.
        let ups: Vec<usize> = std::mem::take(&mut self.cob[k][b]).into_iter().collect();
        for y in ups {
            if let Some(by) = self.bd[k + 1][y].as_mut() {
                by.remove(&b);
            }
        }
        self.alive[k][b] = false;

        match k {
            1 => steps.push(Step::DropEdge { b }),
            2 => steps.push(Step::Slide {
                a,
                u,
                v: vb.into_iter().collect(),
            }),
            _ => {}
        }
    }

    /// Unit-coefficient face of b with the fewest cofaces (ties: smallest id).
    fn pick_face(&self, k: usize, b: usize) -> Option<usize> {
        let bb = self.bd[k][b].as_ref()?;
        bb.iter()
            .filter(|(_, c)| c.abs().is_one())
            .min_by_key(|(f, _)| (self.cob[k - 1][**f].len(), **f))
            .map(|(f, _)| *f)
    }
}

impl Reduction {
    pub fn new(c: &ChainComplex) -> Self {
        let top = c.dim();
        let mut w = Work::new(c);
        let mut steps = Vec::new();
        for k in (1..=top).rev() {
            loop {
                let mut changed = false;
                for b in 0..c.count(k) {
                    if !w.alive[k][b] {
                        continue;
                    }
                    if let Some(a) = w.pick_face(k, b) {
                        w.eliminate(k, a, b, &mut steps);
                        changed = true;
                    }
                }
                if !changed {
                    break;
                }
            }
        }

        let survivors: Vec<Vec<usize>> = w
            .alive
            .iter()
            .map(|v| {
                v.iter()
                    .enumerate()
                    .filter(|(_, &a)| a)
                    .map(|(i, _)| i)
                    .collect()
            })
            .collect();
        let mut boundaries = Vec::with_capacity(top);
        for k in 1..=top {
            let rows = &survivors[k - 1];
            let pos: BTreeMap<usize, usize> =
                rows.iter().enumerate().map(|(i, &id)| (id, i)).collect();
            let mut m = IntMatrix::zeros(rows.len(), survivors[k].len());
            for (j, &cell) in survivors[k].iter().enumerate() {
                for (f, x) in w.bd[k][cell].as_ref().expect("survivor") {
                    m.set(pos[f], j, x.clone());
                }
            }
            boundaries.push(m);
        }
        Reduction {
            survivors,
            boundaries,
            steps,
            edge_count: c.count(1),
        }
    }

    /// Pulls a functional on surviving 1-cells (given in `survivors[1]` order)
    /// back to a functional on all original 1-cells.
    pub fn pull_back_edge_functional(&self, reduced: &[BigInt]) -> Vec<BigInt> {
        let mut phi = vec![BigInt::zero(); self.edge_count];
        for (pos, &id) in self.survivors[1].iter().enumerate() {
            phi[id] = reduced[pos].clone();
        }
        for step in self.steps.iter().rev() {
            match step {
                Step::DropEdge { b } => phi[*b] = BigInt::zero(),
                Step::Slide { a, u, v } => {
                    let dot: BigInt = v
                        .iter()
                        .filter(|(e, _)| !phi[*e].is_zero())
                        .map(|(e, c)| &phi[*e] * c)
                        .sum();
                    phi[*a] = -(u * dot);
                }
            }
        }
        phi
    }

    /// Maps an original 1-chain onto the surviving 1-cells.
    pub fn push_forward_edge_chain(&self, chain: &BTreeMap<usize, BigInt>) -> Vec<BigInt> {
        let mut c: BTreeMap<usize, BigInt> = chain.clone();
        for step in &self.steps {
            match step {
                Step::DropEdge { b } => {
                    c.remove(b);
                }
                Step::Slide { a, u, v } => {
                    let Some(ca) = c.get(a).cloned() else {
                        continue;
                    };
                    let q = ca * u;
                    for (e, x) in v {
                        let entry = c.entry(*e).or_insert_with(BigInt::zero);
                        *entry -= &q * x;
                        if entry.is_zero() {
                            c.remove(e);
                        }
                    }
                }
            }
        }
        self.survivors[1]
            .iter()
            .map(|id| c.get(id).cloned().unwrap_or_else(BigInt::zero))
            .collect()
    }
}
