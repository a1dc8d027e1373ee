//! Shortest integer 1-cycle in a prescribed H_1 class of the cubical 3-torus:
//! an exact linear relaxation plus branch-and-bound.
//!
//! Variables are `x⁺_e, x⁻_e >= 0` per link (`Θ_e = x⁺_e − x⁻_e`). Rows are
//! vertex conservation and, for each direction `i`, the net number of
//! direction-`i` links crossing the seam `x_i = N_i − 1 → 0`, which equals the
//! `i`-th class coordinate of a closed chain.

pub mod simplex;

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::homology::{Family, Grid, LatticeManifold};
use simplex::{q, LpOutcome, Q};

/// Default branch-and-bound node budget.
pub const DEFAULT_NODE_LIMIT: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptimizeError {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("class is not realisable by an integer cycle")]
    Infeasible,
    #[error("search bound exceeded after {nodes} nodes")]
    BoundExceeded {
        nodes: usize,
        best: Option<Box<ShortestFlow>>,
    },
}

#[derive(Clone, Debug)]
pub struct FlowProgram {
    pub grid: Grid,
    /// Positive length per link id; `None` means unit lengths.
    pub lengths: Option<Vec<BigRational>>,
    pub target: Vec<i64>,
    pub node_limit: usize,
}

impl FlowProgram {
    pub fn new(m: &LatticeManifold, target: &[i64]) -> Result<Self, OptimizeError> {
        let Family::Torus3 { .. } = m.family() else {
            return Err(OptimizeError::Input(format!(
                "shortest flows are supported on the 3-torus only, not {:?}",
                m.family()
            )));
        };
        if target.len() != 3 {
            return Err(OptimizeError::Input(format!(
                "class has {} coordinates, expected 3",
                target.len()
            )));
        }
        Ok(FlowProgram {
            grid: *m.grid().expect("torus grid"),
            lengths: None,
            target: target.to_vec(),
            node_limit: DEFAULT_NODE_LIMIT,
        })
    }

    pub fn with_lengths(mut self, lengths: Vec<BigRational>) -> Result<Self, OptimizeError> {
        if lengths.len() != 3 * self.grid.vertex_count() {
            return Err(OptimizeError::Input("one length per link required".into()));
        }
        if lengths.iter().any(|l| !l.is_positive()) {
            return Err(OptimizeError::Input("edge lengths must be positive".into()));
        }
        self.lengths = Some(lengths);
        Ok(self)
    }

    fn length(&self, e: usize) -> Q {
        match &self.lengths {
            Some(l) => l[e].clone(),
            None => q(1),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShortestFlow {
    /// Exact minimal total length, as a reduced fraction string.
    #[serde(serialize_with = "ser_rational")]
    pub value: BigRational,
    /// Θ per link id.
    pub witness: BTreeMap<usize, i64>,
    pub nodes: usize,
    pub optimal: bool,
}

fn ser_rational<S: serde::Serializer>(v: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

struct Bound {
    var: usize,
    upper: bool,
    value: BigInt,
}

fn build_lp(p: &FlowProgram, bounds: &[Bound]) -> (Vec<Vec<Q>>, Vec<Q>, Vec<Q>) {
    let g = &p.grid;
    let nv = g.vertex_count();
    let ne = 3 * nv;
    let nvar = 2 * ne + bounds.len();
    let mut a = Vec::new();
    let mut b = Vec::new();
    let mut vrows = vec![vec![Q::zero(); nvar]; nv];
    for e in 0..ne {
        let (t, h) = g.link_ends(e).expect("periodic link");
        if t != h {
            vrows[h][e] += q(1);
            vrows[h][ne + e] -= q(1);
            vrows[t][e] -= q(1);
            vrows[t][ne + e] += q(1);
        }
    }
    for r in vrows {
        a.push(r);
        b.push(q(0));
    }
    for i in 0..3 {
        let mut r = vec![Q::zero(); nvar];
        for v in 0..nv {
            if g.coords(v)[i] == g.dims[i] - 1 {
                let e = g.link_id(i, v);
                r[e] = q(1);
                r[ne + e] = q(-1);
            }
        }
        a.push(r);
        b.push(q(p.target[i]));
    }
    for (k, bd) in bounds.iter().enumerate() {
        let mut r = vec![Q::zero(); nvar];
        r[bd.var] = q(1);
        r[2 * ne + k] = if bd.upper { q(1) } else { q(-1) };
        a.push(r);
        b.push(Q::from_integer(bd.value.clone()));
    }
    let mut c = vec![Q::zero(); nvar];
    for e in 0..ne {
        let l = p.length(e);
        c[e] = l.clone();
        c[ne + e] = l;
    }
    (a, b, c)
}

/// Minimal `Σ length·|Θ|` over integer 1-cycles in the target class, with a
/// witness. Branch-and-bound runs depth first on the first fractional
/// variable, exploring the rounded-down branch first.
pub fn shortest_flow(p: &FlowProgram) -> Result<ShortestFlow, OptimizeError> {
    let ne = 3 * p.grid.vertex_count();
    if p.target.iter().all(|&x| x == 0) {
        return Ok(ShortestFlow {
            value: Q::zero(),
            witness: BTreeMap::new(),
            nodes: 0,
            optimal: true,
        });
    }
    let mut best: Option<(Q, Vec<Q>)> = None;
    let mut nodes = 0usize;
    let mut stack: Vec<Vec<Bound>> = vec![Vec::new()];
    let mut exceeded = false;
    while let Some(bounds) = stack.pop() {
        if nodes >= p.node_limit {
            exceeded = true;
            break;
        }
        nodes += 1;
        let (a, b, c) = build_lp(p, &bounds);
        let (x, value) = match simplex::solve(&a, &b, &c) {
            LpOutcome::Optimal { x, value } => (x, value),
            LpOutcome::Infeasible => continue,
            LpOutcome::Unbounded => unreachable!("lengths are positive"),
        };
        if let Some((bv, _)) = &best {
            if value >= *bv {
                continue;
            }
        }
        match (0..2 * ne).find(|&j| !x[j].is_integer()) {
            None => best = Some((value, x)),
            Some(j) => {
                let fl = x[j].floor().to_integer();
                let mut up = bounds_clone(&bounds);
                up.push(Bound {
                    var: j,
                    upper: false,
                    value: &fl + 1,
                });
                let mut down = bounds;
                down.push(Bound {
                    var: j,
                    upper: true,
                    value: fl,
                });
                stack.push(up);
                stack.push(down);
            }
        }
    }
    let result = best.map(|(value, x)| {
        let mut witness = BTreeMap::new();
        for e in 0..ne {
            let t = (&x[e] - &x[ne + e])
                .to_integer()
                .to_i64()
                .expect("small coefficient");
            if t != 0 {
                witness.insert(e, t);
            }
        }
        ShortestFlow {
            value,
            witness,
            nodes,
            optimal: !exceeded,
        }
    });
    match (result, exceeded) {
        (Some(r), false) => Ok(r),
        (best, true) => Err(OptimizeError::BoundExceeded {
            nodes,
            best: best.map(Box::new),
        }),
        (None, false) => Err(OptimizeError::Infeasible),
    }
}

fn bounds_clone(b: &[Bound]) -> Vec<Bound> {
    b.iter()
        .map(|x| Bound {
            var: x.var,
            upper: x.upper,
            value: x.value.clone(),
        })
        .collect()
}

/// Lower bound for the length of a zero locus in class `a`: the shortest
/// lattice cycle length times the lattice spacing. Zero iff `a = 0`.
pub fn hausdorff_lower_bound(
    a: &[i64],
    m: &LatticeManifold,
    spacing: &BigRational,
) -> Result<BigRational, OptimizeError> {
    if !spacing.is_positive() {
        return Err(OptimizeError::Input("spacing must be positive".into()));
    }
    let r = shortest_flow(&FlowProgram::new(m, a)?)?;
    Ok(r.value * spacing)
}

/// Parses a decimal or fraction string (`"0.25"`, `"1/4"`, `"3"`) exactly.
pub fn parse_rational(s: &str) -> Result<BigRational, OptimizeError> {
    let bad = || OptimizeError::Input(format!("cannot parse {s:?} as a rational number"));
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    let digits = format!("{int}{frac}");
    if !digits.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let n: BigInt = digits.parse().map_err(|_| bad())?;
    let d = num_traits::pow(BigInt::from(10), frac.len());
    let v = BigRational::new(n, d);
    Ok(if neg { -v } else { v })
}
