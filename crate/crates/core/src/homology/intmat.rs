//! Dense matrices over arbitrary-precision integers.
//!
//! Everything that ends up in a homology computation goes through here:
//! Smith normal form with unimodular certificates, Hermite normal form of a
//! generated lattice, and exact solving of `A x = b` over the integers.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

#[derive(Clone, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "IntMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = self.row(r).iter().map(|x| x.to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = BigInt::one();
        }
        m
    }

    pub fn from_rows<T: Into<BigInt> + Copy>(rows: &[Vec<T>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let mut m = Self::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged matrix rows");
            for (j, &x) in row.iter().enumerate() {
                m.data[i * c + j] = x.into();
            }
        }
        m
    }

    /// Builds a matrix whose columns are the given vectors (all of length `rows`).
    pub fn from_columns(rows: usize, columns: &[Vec<BigInt>]) -> Self {
        let mut m = Self::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows);
            for (i, x) in col.iter().enumerate() {
                m.data[i * columns.len() + j] = x.clone();
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &BigInt {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: BigInt) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[BigInt] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<BigInt> {
        (0..self.rows).map(|r| self.get(r, c).clone()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.data[c * self.rows + r] = self.get(r, c).clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch in product");
        let mut out = IntMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        out.data[i * other.cols + j] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// Submatrix of the listed rows (in order), all columns.
    pub fn select_rows(&self, rows: &[usize]) -> IntMatrix {
        let mut m = IntMatrix::zeros(rows.len(), self.cols);
        for (i, &r) in rows.iter().enumerate() {
            for c in 0..self.cols {
                m.data[i * self.cols + c] = self.get(r, c).clone();
            }
        }
        m
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for r in 0..self.rows {
            self.data.swap(r * self.cols + a, r * self.cols + b);
        }
    }

    /// row[dst] += q * row[src]
    fn add_row_multiple(&mut self, dst: usize, src: usize, q: &BigInt) {
        if q.is_zero() {
            return;
        }
        for c in 0..self.cols {
            let s = self.data[src * self.cols + c].clone();
            if !s.is_zero() {
                self.data[dst * self.cols + c] += q * s;
            }
        }
    }

    /// col[dst] += q * col[src]
    fn add_col_multiple(&mut self, dst: usize, src: usize, q: &BigInt) {
        if q.is_zero() {
            return;
        }
        for r in 0..self.rows {
            let s = self.data[r * self.cols + src].clone();
            if !s.is_zero() {
                self.data[r * self.cols + dst] += q * s;
            }
        }
    }

    fn negate_row(&mut self, r: usize) {
        for c in 0..self.cols {
            let v = std::mem::take(&mut self.data[r * self.cols + c]);
            self.data[r * self.cols + c] = -v;
        }
    }

    /// Exact determinant by fraction-free (Bareiss) elimination.
    pub fn det(&self) -> BigInt {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut a = self.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a.get(k, k).is_zero() {
                match (k + 1..n).find(|&i| !a.get(i, k).is_zero()) {
                    Some(i) => {
                        a.swap_rows(k, i);
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (a.get(i, j) * a.get(k, k) - a.get(i, k) * a.get(k, j)) / &prev;
                    a.set(i, j, v);
                }
            }
            prev = a.get(k, k).clone();
        }
        sign * a.get(n - 1, n - 1)
    }

    /// Rank over the rationals, read off the Smith form.
    pub fn rank(&self) -> usize {
        smith_normal_form(self).rank()
    }
}

/// Result of a Smith normal form computation: `u * m * v == d`.
#[derive(Clone, Debug)]
pub struct Smith {
    pub u: IntMatrix,
    pub d: IntMatrix,
    pub v: IntMatrix,
}

impl Smith {
    /// Nonzero diagonal entries d_1 | d_2 | ... (all positive).
    pub fn invariant_factors(&self) -> Vec<BigInt> {
        let k = self.d.rows().min(self.d.cols());
        (0..k)
            .map(|i| self.d.get(i, i).clone())
            .take_while(|x| !x.is_zero())
            .collect()
    }

    pub fn rank(&self) -> usize {
        self.invariant_factors().len()
    }
}

/// Smallest nonzero |entry| in the trailing block starting at (t, t); ties
/// broken by row-major position.
fn min_pivot(a: &IntMatrix, t: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for i in t..a.rows() {
        for j in t..a.cols() {
            let x = a.get(i, j);
            if x.is_zero() {
                continue;
            }
            match best {
                Some((bi, bj)) if a.get(bi, bj).abs() <= x.abs() => {}
                _ => best = Some((i, j)),
            }
        }
    }
    best
}

/// Smith normal form with unimodular transforms, `U M V = D`.
///
/// The pivot rule is fixed (smallest absolute value, row-major tie-break), so
/// the transforms are reproducible for identical input.
pub fn smith_normal_form(m: &IntMatrix) -> Smith {
    let (nr, nc) = (m.rows(), m.cols());
    let mut a = m.clone();
    let mut u = IntMatrix::identity(nr);
    let mut v = IntMatrix::identity(nc);

    for t in 0..nr.min(nc) {
        let Some((pi, pj)) = min_pivot(&a, t) else {
            break;
        };
        a.swap_rows(t, pi);
        u.swap_rows(t, pi);
        a.swap_cols(t, pj);
        v.swap_cols(t, pj);

        loop {
            let mut dirty = false;
            // Clear column t below the pivot.
            for i in t + 1..nr {
                if a.get(i, t).is_zero() {
                    continue;
                }
                let q = a.get(i, t).div_floor(a.get(t, t));
                let neg = -q;
                a.add_row_multiple(i, t, &neg);
                u.add_row_multiple(i, t, &neg);
                if !a.get(i, t).is_zero() {
                    dirty = true;
                }
            }
            // Clear row t right of the pivot.
            for j in t + 1..nc {
                if a.get(t, j).is_zero() {
                    continue;
                }
                let q = a.get(t, j).div_floor(a.get(t, t));
                let neg = -q;
                a.add_col_multiple(j, t, &neg);
                v.add_col_multiple(j, t, &neg);
                if !a.get(t, j).is_zero() {
                    dirty = true;
                }
            }
            if dirty {
                // A smaller remainder survived; move it onto the diagonal.
                let (bi, bj) = min_pivot_cross(&a, t);
                a.swap_rows(t, bi);
                u.swap_rows(t, bi);
                a.swap_cols(t, bj);
                v.swap_cols(t, bj);
                continue;
            }
            // Divisibility: every remaining entry must be a multiple of the pivot.
            let p = a.get(t, t).clone();
            let bad = (t + 1..nr)
                .flat_map(|i| (t + 1..nc).map(move |j| (i, j)))
                .find(|&(i, j)| !a.get(i, j).is_multiple_of(&p));
            match bad {
                Some((i, _)) => {
                    let one = BigInt::one();
                    a.add_row_multiple(t, i, &one);
                    u.add_row_multiple(t, i, &one);
                }
                None => break,
            }
        }
        if a.get(t, t).is_negative() {
            a.negate_row(t);
            u.negate_row(t);
        }
    }
    Smith { u, d: a, v }
}

/// Smallest nonzero entry on row t / column t (the pivot cross).
fn min_pivot_cross(a: &IntMatrix, t: usize) -> (usize, usize) {
    let mut best = (t, t);
    let mut best_abs = a.get(t, t).abs();
    for i in t + 1..a.rows() {
        let x = a.get(i, t).abs();
        if !x.is_zero() && (best_abs.is_zero() || x < best_abs) {
            best = (i, t);
            best_abs = x;
        }
    }
    for j in t + 1..a.cols() {
        let x = a.get(t, j).abs();
        if !x.is_zero() && (best_abs.is_zero() || x < best_abs) {
            best = (t, j);
            best_abs = x;
        }
    }
    best
}

/// Inverse of a unimodular matrix; `None` when |det| != 1.
pub fn inverse_unimodular(m: &IntMatrix) -> Option<IntMatrix> {
    if m.rows() != m.cols() {
        return None;
    }
    let s = smith_normal_form(m);
    let n = m.rows();
    if s.rank() != n || s.invariant_factors().iter().any(|d| !d.is_one()) {
        return None;
    }
    // U M V = I  =>  M^{-1} = V U
    Some(s.v.mul(&s.u))
}

/// Solves `m x = b` over the integers. Returns `None` if no integer solution.
pub fn solve_integer(m: &IntMatrix, b: &[BigInt]) -> Option<Vec<BigInt>> {
    assert_eq!(m.rows(), b.len());
    let s = smith_normal_form(m);
    let ub = s.u.mul_vec(b);
    let factors = s.invariant_factors();
    let mut y = vec![BigInt::zero(); m.cols()];
    for (i, rhs) in ub.iter().enumerate() {
        match factors.get(i) {
            Some(d) => {
                if !rhs.is_multiple_of(d) {
                    return None;
                }
                y[i] = rhs / d;
            }
            None => {
                if !rhs.is_zero() {
                    return None;
                }
            }
        }
    }
    Some(s.v.mul_vec(&y))
}

/// Row-style Hermite normal form of the lattice spanned by the rows of `m`.
///
/// Returns only the nonzero rows: upper echelon, positive pivots, entries
/// above each pivot reduced into `[0, pivot)`. Canonical for the lattice.
pub fn hermite_normal_form(m: &IntMatrix) -> IntMatrix {
    let mut a = m.clone();
    let (nr, nc) = (a.rows(), a.cols());
    let mut prow = 0;
    let mut pivots = Vec::new();
    for c in 0..nc {
        if prow == nr {
            break;
        }
        // Euclid down the column until a single nonzero remains at prow.
        loop {
            let mut best: Option<usize> = None;
            for r in prow..nr {
                if a.get(r, c).is_zero() {
                    continue;
                }
                match best {
                    Some(b) if a.get(b, c).abs() <= a.get(r, c).abs() => {}
                    _ => best = Some(r),
                }
            }
            let Some(b) = best else { break };
            a.swap_rows(prow, b);
            let mut done = true;
            for r in prow + 1..nr {
                if a.get(r, c).is_zero() {
                    continue;
                }
                let q = -a.get(r, c).div_floor(a.get(prow, c));
                a.add_row_multiple(r, prow, &q);
                if !a.get(r, c).is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if a.get(prow, c).is_zero() {
            continue;
        }
        if a.get(prow, c).is_negative() {
            a.negate_row(prow);
        }
        for r in 0..prow {
            let q = -a.get(r, c).div_floor(a.get(prow, c));
            a.add_row_multiple(r, prow, &q);
        }
        pivots.push(prow);
        prow += 1;
    }
    a.select_rows(&pivots)
}

/// Converts a BigInt to i64, panicking only on genuinely huge values.
pub fn to_i64(x: &BigInt) -> Option<i64> {
    x.to_i64()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_certificate(m: &IntMatrix, s: &Smith) {
        assert_eq!(s.u.mul(m).mul(&s.v), s.d);
        assert!(s.u.det().abs().is_one());
        assert!(s.v.det().abs().is_one());
        let f = s.invariant_factors();
        for w in f.windows(2) {
            assert!(w[1].is_multiple_of(&w[0]));
        }
        for i in 0..s.d.rows() {
            for j in 0..s.d.cols() {
                if i != j {
                    assert!(s.d.get(i, j).is_zero());
                }
            }
        }
    }

    #[test]
    fn identity_is_its_own_smith_form() {
        let m = IntMatrix::identity(3);
        let s = smith_normal_form(&m);
        assert_eq!(s.d, m);
        check_certificate(&m, &s);
    }

    #[test]
    fn two_by_two_example() {
        // gcd of entries 2, |det| = 8  =>  factors 2, 4
        let m = IntMatrix::from_rows(&[vec![2, 4], vec![6, 8]]);
        let s = smith_normal_form(&m);
        check_certificate(&m, &s);
        assert_eq!(
            s.invariant_factors(),
            vec![BigInt::from(2), BigInt::from(4)]
        );
    }

    #[test]
    fn zero_matrix_keeps_identity_transforms() {
        let m = IntMatrix::zeros(2, 3);
        let s = smith_normal_form(&m);
        assert!(s.d.is_zero());
        assert_eq!(s.u, IntMatrix::identity(2));
        assert_eq!(s.v, IntMatrix::identity(3));
    }

    #[test]
    fn torsion_factor_shows_up() {
        let m = IntMatrix::from_rows(&[vec![2, 0], vec![0, 3]]);
        let s = smith_normal_form(&m);
        check_certificate(&m, &s);
        assert_eq!(
            s.invariant_factors(),
            vec![BigInt::from(1), BigInt::from(6)]
        );
    }

    #[test]
    fn bareiss_determinant() {
        let m = IntMatrix::from_rows(&[vec![2, -1, 0], vec![-1, 2, -1], vec![0, -1, 2]]);
        assert_eq!(m.det(), BigInt::from(4));
    }

    #[test]
    fn integer_solve_and_membership() {
        let m = IntMatrix::from_rows(&[vec![0], vec![0], vec![1]]);
        let b: Vec<BigInt> = vec![0.into(), 0.into(), 3.into()];
        assert_eq!(solve_integer(&m, &b), Some(vec![BigInt::from(3)]));
        let b: Vec<BigInt> = vec![1.into(), 0.into(), 0.into()];
        assert_eq!(solve_integer(&m, &b), None);
        let m = IntMatrix::from_rows(&[vec![2]]);
        assert_eq!(solve_integer(&m, &[BigInt::from(3)]), None);
    }

    #[test]
    fn hermite_form_of_parallel_generators() {
        let m = IntMatrix::from_rows(&[vec![0, 0, 1], vec![0, 0, 1], vec![0, 0, 0]]);
        let h = hermite_normal_form(&m);
        assert_eq!(h, IntMatrix::from_rows(&[vec![0, 0, 1]]));
        let m = IntMatrix::from_rows(&[vec![4, 6], vec![2, 2]]);
        let h = hermite_normal_form(&m);
        assert_eq!(h, IntMatrix::from_rows(&[vec![2, 0], vec![0, 2]]));
    }

    #[test]
    fn unimodular_inverse() {
        let m = IntMatrix::from_rows(&[vec![1, 2], vec![1, 3]]);
        let inv = inverse_unimodular(&m).unwrap();
        assert_eq!(m.mul(&inv), IntMatrix::identity(2));
        assert!(inverse_unimodular(&IntMatrix::from_rows(&[vec![2]])).is_none());
    }
}
