//! Dense two-phase primal simplex over exact rationals for
//! `min cᵀx  s.t.  A x = b, x >= 0`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Q = BigRational;

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<Q>, value: Q },
    Infeasible,
    Unbounded,
}

/// Degenerate pivots tolerated before switching from Dantzig to Bland pricing.
const DEGENERATE_LIMIT: usize = 50;

struct Tableau {
    /// m constraint rows, each with `cols + 1` entries (last is the rhs)
    rows: Vec<Vec<Q>>,
    /// reduced-cost row (last entry is −objective)
    cost: Vec<Q>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        if !p.is_one() {
            for x in self.rows[r].iter_mut() {
                if !x.is_zero() {
                    *x /= &p;
                }
            }
        }
        let nz: Vec<usize> = (0..=self.cols)
            .filter(|&j| !self.rows[r][j].is_zero())
            .collect();
        let prow: Vec<(usize, Q)> = nz.iter().map(|&j| (j, self.rows[r][j].clone())).collect();
        for i in 0..self.rows.len() {
            if i == r || self.rows[i][c].is_zero() {
                continue;
            }
            let f = self.rows[i][c].clone();
            for (j, v) in &prow {
                let d = &f * v;
                self.rows[i][*j] -= d;
            }
        }
        if !self.cost[c].is_zero() {
            let f = self.cost[c].clone();
            for (j, v) in &prow {
                let d = &f * v;
                self.cost[*j] -= d;
            }
        }
        self.basis[r] = c;
    }

    /// Runs pivots until optimal; `allowed` masks entering columns.
    /// Returns false if unbounded.
    fn optimize(&mut self, allowed: &[bool]) -> bool {
        let mut degenerate = 0usize;
        loop {
            let bland = degenerate >= DEGENERATE_LIMIT;
            let mut enter: Option<usize> = None;
            for j in 0..self.cols {
                if !allowed[j] || !self.cost[j].is_negative() {
                    continue;
                }
                match enter {
                    None => enter = Some(j),
                    Some(e) if !bland && self.cost[j] < self.cost[e] => enter = Some(j),
                    _ => {}
                }
                if bland {
                    break;
                }
            }
            let Some(c) = enter else { return true };
            let mut leave: Option<(usize, Q)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][c];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.rows[i][self.cols] / a;
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => {
                        ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            let Some((r, ratio)) = leave else {
                return false;
            };
            if ratio.is_zero() {
                degenerate += 1;
            } else if !bland {
                degenerate = 0;
            }
            self.pivot(r, c);
        }
    }
}

/// Solves `min cᵀx, A x = b, x >= 0` exactly.
pub fn solve(a: &[Vec<Q>], b: &[Q], c: &[Q]) -> LpOutcome {
    let m = a.len();
    let n = c.len();
    let cols = n + m;
    let mut rows = Vec::with_capacity(m);
    for i in 0..m {
        let flip = b[i].is_negative();
        let mut row = Vec::with_capacity(cols + 1);
        for j in 0..n {
            row.push(if flip {
                -a[i][j].clone()
            } else {
                a[i][j].clone()
            });
        }
        for k in 0..m {
            row.push(if k == i { Q::one() } else { Q::zero() });
        }
        row.push(if flip { -b[i].clone() } else { b[i].clone() });
        rows.push(row);
    }
    // phase one: minimise the sum of artificials
    let mut cost = vec![Q::zero(); cols + 1];
    for row in &rows {
        for j in 0..n {
            cost[j] -= &row[j];
        }
        cost[cols] -= &row[cols];
    }
    let mut t = Tableau {
        rows,
        cost,
        basis: (n..n + m).collect(),
        cols,
    };
    let all = vec![true; cols];
    t.optimize(&all);
    if !t.cost[cols].is_zero() {
        return LpOutcome::Infeasible;
    }
    // drive artificials out of the basis; drop redundant rows
    let mut i = 0;
    while i < t.rows.len() {
        if t.basis[i] >= n {
            if let Some(j) = (0..n).find(|&j| !t.rows[i][j].is_zero()) {
                t.pivot(i, j);
                i += 1;
            } else {
                t.rows.remove(i);
                t.basis.remove(i);
            }
        } else {
            i += 1;
        }
    }
    // phase two
    let mut cost = vec![Q::zero(); cols + 1];
    cost[..n].clone_from_slice(c);
    for (r, &bv) in t.basis.iter().enumerate() {
        if !cost[bv].is_zero() {
            let f = cost[bv].clone();
            for j in 0..=cols {
                if !t.rows[r][j].is_zero() {
                    let d = &f * &t.rows[r][j];
                    cost[j] -= d;
                }
            }
        }
    }
    t.cost = cost;
    let allowed: Vec<bool> = (0..cols).map(|j| j < n).collect();
    if !t.optimize(&allowed) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![Q::zero(); n];
    for (r, &bv) in t.basis.iter().enumerate() {
        if bv < n {
            x[bv] = t.rows[r][cols].clone();
        }
    }
    let value = -t.cost[cols].clone();
    LpOutcome::Optimal { x, value }
}

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}
