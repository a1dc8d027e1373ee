use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use super::{WeightedChain1, ZeroLocusError};
use crate::flows::{Edge, EmbeddedGraphFlow, Embedding, Flow, Graph};

/// A dual edge seen from one of its ends.
#[derive(Clone, Copy, Debug)]
struct Half {
    plaquette: usize,
    other: usize,
    /// +1 if leaving this end follows the edge's +e_normal direction
    forward: i64,
    dir: usize,
}

/// Converts a closed chain into an embedded graph with a flow.
///
/// Edges are oriented so that every Θ is positive. Vertices sit at dual vertices where the number of incident nonzero edges
/// differs from 2 or where the weight changes; each maximal path of constant
/// weight between them becomes one edge. A component without such vertices
/// is a loop at its smallest dual vertex. Polylines use dual-lattice integer
/// coordinates (the dual vertex of cube `v` sits at `coords(v)`).
pub fn chain_to_graph(chain: &WeightedChain1) -> Result<EmbeddedGraphFlow, ZeroLocusError> {
    chain.require_closed()?;
    let grid = *chain.grid();
    let mut halves: BTreeMap<usize, Vec<Half>> = BTreeMap::new();
    for &p in chain.coeffs().keys() {
        let (n, v) = grid.plaquette(p);
        let Some(t) = grid.shift(v, n, -1) else {
            return Err(ZeroLocusError::Input(format!(
                "plaquette {p} has no dual edge inside the lattice"
            )));
        };
        halves.entry(t).or_default().push(Half {
            plaquette: p,
            other: v,
            forward: 1,
            dir: n,
        });
        halves.entry(v).or_default().push(Half {
            plaquette: p,
            other: t,
            forward: -1,
            dir: n,
        });
    }

    let weight = |p: usize| chain.coeff(p).unsigned_abs();
    let is_branch = |v: usize| {
        let hs = &halves[&v];
        hs.len() != 2 || weight(hs[0].plaquette) != weight(hs[1].plaquette)
    };

    let mut vertices: BTreeSet<usize> = halves.keys().copied().filter(|&v| is_branch(v)).collect();
    let mut used: BTreeSet<usize> = BTreeSet::new();
    let mut edges = Vec::new();
    let mut polylines = BTreeMap::new();
    let mut theta = BTreeMap::new();

    let trace = |start: usize,
                 first: Half,
                 vertices: &BTreeSet<usize>,
                 used: &mut BTreeSet<usize>|
     -> (usize, Vec<[f64; 3]>, i64) {
        let c0 = grid.coords(start);
        let mut pos = [c0[0] as i64, c0[1] as i64, c0[2] as i64];
        let mut line = vec![pos.map(|x| x as f64)];
        let flow = chain.coeff(first.plaquette) * first.forward;
        let mut cur;
        let mut h = first;
        loop {
            used.insert(h.plaquette);
            pos[h.dir] += h.forward;
            line.push(pos.map(|x| x as f64));
            cur = h.other;
            if vertices.contains(&cur) {
                break;
            }
            let next = halves[&cur]
                .iter()
                .find(|x| !used.contains(&x.plaquette))
                .copied();
            match next {
                Some(n) => h = n,
                None => break,
            }
        }
        (cur, line, flow)
    };

    let mut counter = 0usize;
    let mut emit = |mut tail: usize,
                    mut head: usize,
                    mut line: Vec<[f64; 3]>,
                    mut flow: i64,
                    edges: &mut Vec<Edge>,
                    polylines: &mut BTreeMap<String, Vec<[f64; 3]>>,
                    theta: &mut BTreeMap<String, i64>| {
        // orient every edge along its flow
        if flow < 0 {
            std::mem::swap(&mut tail, &mut head);
            line.reverse();
            flow = -flow;
        }
        let id = format!("e{counter}");
        counter += 1;
        edges.push(Edge {
            id: id.clone(),
            tail: format!("v{tail}"),
            head: format!("v{head}"),
        });
        polylines.insert(id.clone(), compress(line));
        theta.insert(id, flow);
    };

    let branch: Vec<usize> = vertices.iter().copied().collect();
    for v in branch {
        for h in halves[&v].clone() {
            if used.contains(&h.plaquette) {
                continue;
            }
            let (end, line, flow) = trace(v, h, &vertices, &mut used);
            emit(v, end, line, flow, &mut edges, &mut polylines, &mut theta);
        }
    }
    // remaining components are circles
    let rest: Vec<usize> = halves.keys().copied().collect();
    for v in rest {
        let Some(h) = halves[&v]
            .iter()
            .find(|x| !used.contains(&x.plaquette))
            .copied()
        else {
            continue;
        };
        vertices.insert(v);
        let (end, line, flow) = trace(v, h, &vertices, &mut used);
        debug_assert_eq!(end, v);
        emit(v, end, line, flow, &mut edges, &mut polylines, &mut theta);
    }

    let graph = Arc::new(Graph::new(
        vertices.iter().map(|v| format!("v{v}")).collect(),
        edges,
    )?);
    let flow = Flow::new(graph.clone(), theta)?;
    Ok(EmbeddedGraphFlow::new(
        graph,
        Embedding::Polyline(polylines),
        flow,
    )?)
}

/// Drops interior points that lie on a straight run.
fn compress(line: Vec<[f64; 3]>) -> Vec<[f64; 3]> {
    if line.len() <= 2 {
        return line;
    }
    let mut out = vec![line[0]];
    for i in 1..line.len() - 1 {
        let a = out[out.len() - 1];
        let b = line[i];
        let c = line[i + 1];
        let d1 = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
        let d2 = [c[0] - b[0], c[1] - b[1], c[2] - b[2]];
        let same_axis = (0..3).all(|k| (d1[k] == 0.0) == (d2[k] == 0.0))
            && (0..3).all(|k| d1[k] * d2[k] >= 0.0);
        if !same_axis {
            out.push(b);
        }
    }
    out.push(line[line.len() - 1]);
    out
}
