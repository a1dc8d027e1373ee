//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashMap};

use num_complex::Complex64;
use rand::Rng;
use zloch::bundle::Seed;
use zloch::flows::Graph;
use zloch::homology::Grid;

// ------------------------------------------------------------ shortest flow

/// Minimal total length of an integer cycle in class `a` on the cubical
/// torus with integer link lengths, by Dijkstra in the universal cover.
///
/// A minimal cycle splits into closed walks; a closed walk of class `c`
/// lifts to a path from `p` to `p + (c₁N₁, c₂N₂, c₃N₃)`. So the answer is the
/// min-plus closure of the single-walk distances `d(c)` over decompositions
/// `a = Σ cⱼ`, taken over classes in the box `|cᵢ| ≤ radius`.
pub struct CoverOracle {
    radius: i64,
    best: HashMap<[i64; 3], i64>,
}

impl CoverOracle {
    pub fn new(dims: [usize; 3], lengths: &[i64], radius: i64) -> Self {
        let grid = Grid::torus(dims);
        let n = dims.map(|x| x as i64);
        let nv = grid.vertex_count();
        let margin = radius + 1;
        let lo = n.map(|k| -k * margin);
        let hi = n.map(|k| k * margin);
        let mut single: HashMap<[i64; 3], i64> = HashMap::new();
        for p in 0..nv {
            let pc = grid.coords(p).map(|x| x as i64);
            let dist = cover_dijkstra(&grid, lengths, pc, lo, hi);
            for c0 in -radius..=radius {
                for c1 in -radius..=radius {
                    for c2 in -radius..=radius {
                        let c = [c0, c1, c2];
                        if c == [0, 0, 0] {
                            continue;
                        }
                        let target = [0, 1, 2].map(|i| c[i] * n[i]);
                        if let Some(&d) = dist.get(&target) {
                            let e = single.entry(c).or_insert(i64::MAX);
                            *e = (*e).min(d);
                        }
                    }
                }
            }
        }
        let mut best = single;
        best.insert([0, 0, 0], 0);
        let keys: Vec<[i64; 3]> = best.keys().copied().collect();
        loop {
            let mut changed = false;
            for &a in &keys {
                for &b in &keys {
                    let c = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
                    let (Some(&db), Some(&dc)) = (best.get(&b), best.get(&c)) else {
                        continue;
                    };
                    if db == i64::MAX || dc == i64::MAX {
                        continue;
                    }
                    let cur = best.get(&a).copied().unwrap_or(i64::MAX);
                    if db + dc < cur {
                        best.insert(a, db + dc);
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        CoverOracle { radius, best }
    }

    pub fn value(&self, a: [i64; 3]) -> i64 {
        assert!(a.iter().all(|x| x.abs() <= self.radius));
        self.best[&a]
    }
}

/// Distances from `start` to displacements within `[lo, hi]` in the cover.
fn cover_dijkstra(
    grid: &Grid,
    lengths: &[i64],
    start: [i64; 3],
    lo: [i64; 3],
    hi: [i64; 3],
) -> HashMap<[i64; 3], i64> {
    let n = grid.dims.map(|x| x as i64);
    let mut dist: HashMap<[i64; 3], i64> = HashMap::new();
    let mut heap = BinaryHeap::new();
    dist.insert([0, 0, 0], 0);
    heap.push(Reverse((0i64, [0i64; 3])));
    while let Some(Reverse((d, off))) = heap.pop() {
        if dist.get(&off).is_some_and(|&x| x < d) {
            continue;
        }
        let here = [0, 1, 2].map(|i| (start[i] + off[i]).rem_euclid(n[i]) as usize);
        let v = grid.vertex(here);
        for dir in 0..3 {
            for step in [1i64, -1] {
                let link_base = if step == 1 {
                    v
                } else {
                    grid.shift(v, dir, -1).unwrap()
                };
                let len = lengths[grid.link_id(dir, link_base)];
                let mut o = off;
                o[dir] += step;
                if o[dir] < lo[dir] || o[dir] > hi[dir] {
                    continue;
                }
                let nd = d + len;
                if dist.get(&o).map_or(true, |&x| nd < x) {
                    dist.insert(o, nd);
                    heap.push(Reverse((nd, o)));
                }
            }
        }
    }
    dist
}

// -------------------------------------------------------------------- SNF

/// Invariant factors from determinantal divisors: `sₖ = dₖ / dₖ₋₁`, with
/// `dₖ` the gcd of all k×k minors.
pub fn invariant_factors_by_minors(m: &[Vec<i64>]) -> Vec<i128> {
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    let mut out = Vec::new();
    let mut prev: i128 = 1;
    for k in 1..=rows.min(cols) {
        let mut g: i128 = 0;
        for rs in subsets(rows, k) {
            for cs in subsets(cols, k) {
                let sub: Vec<Vec<i128>> = rs
                    .iter()
                    .map(|&r| cs.iter().map(|&c| m[r][c] as i128).collect())
                    .collect();
                g = gcd(g, det(sub));
            }
        }
        if g == 0 {
            break;
        }
        out.push(g / prev);
        prev = g;
    }
    out
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for last in k - 1..n {
        for mut s in subsets(last, k - 1) {
            s.push(last);
            out.push(s);
        }
    }
    out
}

fn gcd(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Bareiss fraction-free determinant.
pub fn det(mut a: Vec<Vec<i128>>) -> i128 {
    let n = a.len();
    if n == 0 {
        return 1;
    }
    let mut sign = 1;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if a[k][k] == 0 {
            let Some(r) = (k + 1..n).find(|&r| a[r][k] != 0) else {
                return 0;
            };
            a.swap(k, r);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    sign * a[n - 1][n - 1]
}

// ----------------------------------------------------------------- graphs

/// Random graph with `v` vertices and `e` edges; loops and parallel edges allowed.
pub fn random_graph<R: Rng>(rng: &mut R, v: usize, e: usize) -> Graph {
    let vertices: Vec<String> = (0..v).map(|i| format!("v{i}")).collect();
    let edges: Vec<(String, String, String)> = (0..e)
        .map(|i| {
            (
                format!("e{i}"),
                format!("v{}", rng.gen_range(0..v)),
                format!("v{}", rng.gen_range(0..v)),
            )
        })
        .collect();
    let triples: Vec<(&str, String, String)> = edges
        .iter()
        .map(|(a, b, c)| (a.as_str(), b.clone(), c.clone()))
        .collect();
    Graph::from_triples(&vertices, &triples).expect("valid random graph")
}

/// Components by union-find, independent of the library.
pub fn components(g: &Graph) -> usize {
    let ids: BTreeMap<&str, usize> = g
        .vertices()
        .iter()
        .enumerate()
        .map(|(i, v)| (v.as_str(), i))
        .collect();
    let mut parent: Vec<usize> = (0..ids.len()).collect();
    fn find(p: &mut Vec<usize>, x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    for e in g.edges() {
        let (a, b) = (ids[e.tail.as_str()], ids[e.head.as_str()]);
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        parent[ra] = rb;
    }
    (0..ids.len())
        .filter(|&i| find(&mut parent, i) == i)
        .count()
}

/// Membership in the span of `gens` by enumerating coefficients in `[−b, b]`.
pub fn in_span_brute(gens: &[Vec<i64>], target: &[i64], b: i64) -> bool {
    fn rec(gens: &[Vec<i64>], acc: &mut Vec<i64>, target: &[i64], b: i64) -> bool {
        let Some((g, rest)) = gens.split_first() else {
            return acc.as_slice() == target;
        };
        for c in -b..=b {
            for (x, y) in acc.iter_mut().zip(g) {
                *x += c * y;
            }
            let hit = rec(rest, acc, target, b);
            for (x, y) in acc.iter_mut().zip(g) {
                *x -= c * y;
            }
            if hit {
                return true;
            }
        }
        false
    }
    rec(gens, &mut vec![0; target.len()], target, b)
}

// ------------------------------------------------------------ zero locus

/// Class of a dual 1-chain from its net crossings of one slice of each
/// primal coordinate torus.
pub fn class_by_crossings(grid: &Grid, coeffs: &BTreeMap<usize, i64>) -> [i64; 3] {
    let mut out = [0; 3];
    for (&p, &c) in coeffs {
        let (n, v) = grid.plaquette(p);
        if grid.coords(v)[n] == 0 {
            out[n] += c;
        }
    }
    out
}

/// Class of a set of straight vortex lines.
pub fn class_of_seeds(seeds: &[Seed]) -> [i64; 3] {
    let mut out = [0; 3];
    for s in seeds {
        out[s.axis] += s.multiplicity;
    }
    out
}

// ---------------------------------------------------------------- unitary

pub fn random_complex<R: Rng>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// Random n×n unitary (rows) by Gram–Schmidt.
pub fn random_unitary<R: Rng>(rng: &mut R, n: usize) -> Vec<Vec<Complex64>> {
    let mut rows: Vec<Vec<Complex64>> = Vec::new();
    while rows.len() < n {
        let mut v: Vec<Complex64> = (0..n).map(|_| random_complex(rng)).collect();
        for r in &rows {
            let c: Complex64 = r.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (x, y) in v.iter_mut().zip(r) {
                *x -= c * y;
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-3 {
            rows.push(v.into_iter().map(|z| z / norm).collect());
        }
    }
    rows
}

/// Random element of SU(2).
pub fn random_su2<R: Rng>(rng: &mut R) -> [[Complex64; 2]; 2] {
    let q: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let n = q.iter().map(|x| x * x).sum::<f64>().sqrt();
    let a = Complex64::new(q[0] / n, q[1] / n);
    let b = Complex64::new(q[2] / n, q[3] / n);
    [[a, -b.conj()], [b, a.conj()]]
}
