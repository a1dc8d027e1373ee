//! Integer flows on finite graphs, embedded graphs in lattice manifolds, the
//! class map Γ: Flow(G) → H_1(M) and its image lattice Λ.
//!
//! A flow is stored in signed form `Θ: E → ℤ` relative to each edge's
//! reference orientation (tail → head), so the group law is coefficientwise
//! addition. The weight/orientation presentation is available through
//! [`Flow::oriented`].

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::sync::Arc;

use num_bigint::BigInt;
use serde::{Deserialize, Deserializer, Serialize};
use thiserror::Error;

use crate::homology::intmat::{self, IntMatrix};
use crate::homology::{Family, HomologyClass, HomologyError, LatticeManifold};

/// Snap tolerance for polyline points onto integer lattice coordinates.
pub const SNAP_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("embedding error: {0}")]
    Embedding(String),
    #[error(transparent)]
    Homology(#[from] HomologyError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    #[serde(deserialize_with = "id_string")]
    pub id: String,
    #[serde(deserialize_with = "id_string")]
    pub tail: String,
    #[serde(deserialize_with = "id_string")]
    pub head: String,
}

/// A finite graph; loops and parallel edges are allowed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    vertices: Vec<String>,
    edges: Vec<Edge>,
    vertex_index: BTreeMap<String, usize>,
    edge_index: BTreeMap<String, usize>,
}

impl Graph {
    pub fn new(vertices: Vec<String>, edges: Vec<Edge>) -> Result<Self, FlowError> {
        let mut vertex_index = BTreeMap::new();
        for (i, v) in vertices.iter().enumerate() {
            if vertex_index.insert(v.clone(), i).is_some() {
                return Err(FlowError::Input(format!("duplicate vertex id {v:?}")));
            }
        }
        let mut edge_index = BTreeMap::new();
        for (i, e) in edges.iter().enumerate() {
            if edge_index.insert(e.id.clone(), i).is_some() {
                return Err(FlowError::Input(format!("duplicate edge id {:?}", e.id)));
            }
            for end in [&e.tail, &e.head] {
                if !vertex_index.contains_key(end) {
                    return Err(FlowError::Input(format!(
                        "edge {:?} has unknown endpoint {end:?}",
                        e.id
                    )));
                }
            }
        }
        Ok(Graph {
            vertices,
            edges,
            vertex_index,
            edge_index,
        })
    }

    /// Convenience constructor from `(id, tail, head)` triples.
    pub fn from_triples<V: ToString>(
        vertices: &[V],
        edges: &[(&str, V, V)],
    ) -> Result<Self, FlowError> {
        Graph::new(
            vertices.iter().map(|v| v.to_string()).collect(),
            edges
                .iter()
                .map(|(id, t, h)| Edge {
                    id: id.to_string(),
                    tail: t.to_string(),
                    head: h.to_string(),
                })
                .collect(),
        )
    }

    pub fn empty() -> Self {
        Graph::new(Vec::new(), Vec::new()).expect("empty graph")
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: &str) -> Option<&Edge> {
        self.edge_index.get(id).map(|&i| &self.edges[i])
    }

    pub fn vertex_position(&self, id: &str) -> Option<usize> {
        self.vertex_index.get(id).copied()
    }

    pub fn edge_position(&self, id: &str) -> Option<usize> {
        self.edge_index.get(id).copied()
    }

    pub fn component_count(&self) -> usize {
        let (_, roots) = self.spanning_forest();
        roots
    }

    /// BFS spanning forest in vertex order: (tree edge flags, number of trees).
    fn spanning_forest(&self) -> (Vec<bool>, usize) {
        let n = self.vertices.len();
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        for (i, e) in self.edges.iter().enumerate() {
            let t = self.vertex_index[&e.tail];
            let h = self.vertex_index[&e.head];
            if t != h {
                adj[t].push((h, i));
                adj[h].push((t, i));
            }
        }
        let mut seen = vec![false; n];
        let mut tree = vec![false; self.edges.len()];
        let mut trees = 0;
        for root in 0..n {
            if seen[root] {
                continue;
            }
            trees += 1;
            seen[root] = true;
            let mut queue = VecDeque::from([root]);
            while let Some(v) = queue.pop_front() {
                for &(w, e) in &adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        tree[e] = true;
                        queue.push_back(w);
                    }
                }
            }
        }
        (tree, trees)
    }

    /// Vertex × edge incidence matrix (`+1` head, `-1` tail, loops 0).
    pub fn incidence_matrix(&self) -> IntMatrix {
        let mut m = IntMatrix::zeros(self.vertices.len(), self.edges.len());
        for (j, e) in self.edges.iter().enumerate() {
            let t = self.vertex_index[&e.tail];
            let h = self.vertex_index[&e.head];
            if t != h {
                m.set(h, j, BigInt::from(1));
                m.set(t, j, BigInt::from(-1));
            }
        }
        m
    }
}

fn id_string<'de, D: Deserializer<'de>>(d: D) -> Result<String, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        S(String),
        I(i64),
    }
    Ok(match Raw::deserialize(d)? {
        Raw::S(s) => s,
        Raw::I(i) => i.to_string(),
    })
}

/// Conservation check for candidate signed weights. Missing edges count as 0.
pub fn is_flow(g: &Graph, theta: &BTreeMap<String, i64>) -> Result<bool, FlowError> {
    Ok(conservation_defect(g, theta)?.is_empty())
}

/// Vertices where conservation fails, with their net inflow.
pub fn conservation_defect(
    g: &Graph,
    theta: &BTreeMap<String, i64>,
) -> Result<BTreeMap<String, i64>, FlowError> {
    let mut net = vec![0i64; g.vertices.len()];
    for (id, &x) in theta {
        let e = g
            .edge(id)
            .ok_or_else(|| FlowError::Input(format!("unknown edge id {id:?}")))?;
        let t = g.vertex_index[&e.tail];
        let h = g.vertex_index[&e.head];
        if t != h {
            net[h] += x;
            net[t] -= x;
        }
    }
    Ok(net
        .into_iter()
        .enumerate()
        .filter(|(_, x)| *x != 0)
        .map(|(i, x)| (g.vertices[i].clone(), x))
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    Reference,
    Reversed,
    Absent,
}

/// Weight and orientation of one edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct OrientedWeight {
    pub weight: u64,
    pub orientation: Orientation,
}

impl OrientedWeight {
    pub fn from_signed(x: i64) -> Self {
        let orientation = match x.signum() {
            1 => Orientation::Reference,
            -1 => Orientation::Reversed,
            _ => Orientation::Absent,
        };
        OrientedWeight {
            weight: x.unsigned_abs(),
            orientation,
        }
    }

    pub fn signed(&self) -> i64 {
        match self.orientation {
            Orientation::Reference => self.weight as i64,
            Orientation::Reversed => -(self.weight as i64),
            Orientation::Absent => 0,
        }
    }

    /// Sum by cases: equal orientations add; opposite ones subtract, keeping
    /// the orientation of the larger weight.
    pub fn case_sum(a: OrientedWeight, b: OrientedWeight) -> OrientedWeight {
        use Orientation::*;
        match (a.orientation, b.orientation) {
            (Absent, _) => b,
            (_, Absent) => a,
            (x, y) if x == y => OrientedWeight {
                weight: a.weight + b.weight,
                orientation: x,
            },
            _ => {
                let (big, small) = if a.weight >= b.weight { (a, b) } else { (b, a) };
                let weight = big.weight - small.weight;
                OrientedWeight {
                    weight,
                    orientation: if weight == 0 { Absent } else { big.orientation },
                }
            }
        }
    }
}

/// An integer flow on a fixed graph.
#[derive(Clone, Debug)]
pub struct Flow {
    graph: Arc<Graph>,
    theta: BTreeMap<String, i64>,
}

impl PartialEq for Flow {
    fn eq(&self, other: &Self) -> bool {
        same_graph(&self.graph, &other.graph) && self.theta == other.theta
    }
}

fn same_graph(a: &Arc<Graph>, b: &Arc<Graph>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

impl Flow {
    /// Validates conservation; zero entries are dropped.
    pub fn new(graph: Arc<Graph>, theta: BTreeMap<String, i64>) -> Result<Self, FlowError> {
        let defect = conservation_defect(&graph, &theta)?;
        if !defect.is_empty() {
            return Err(FlowError::Input(format!(
                "conservation fails at vertices {:?}",
                defect.keys().collect::<Vec<_>>()
            )));
        }
        let theta = theta.into_iter().filter(|(_, x)| *x != 0).collect();
        Ok(Flow { graph, theta })
    }

    pub fn zero(graph: Arc<Graph>) -> Self {
        Flow {
            graph,
            theta: BTreeMap::new(),
        }
    }

    pub fn graph(&self) -> &Arc<Graph> {
        &self.graph
    }

    /// Nonzero signed weights.
    pub fn theta(&self) -> &BTreeMap<String, i64> {
        &self.theta
    }

    pub fn get(&self, edge: &str) -> i64 {
        self.theta.get(edge).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.theta.is_empty()
    }

    /// Weight/orientation view of every edge of the graph.
    pub fn oriented(&self) -> BTreeMap<String, OrientedWeight> {
        self.graph
            .edges
            .iter()
            .map(|e| (e.id.clone(), OrientedWeight::from_signed(self.get(&e.id))))
            .collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({ "theta": self.theta })
    }

    pub fn from_json(graph: Arc<Graph>, v: &serde_json::Value) -> Result<Self, FlowError> {
        #[derive(Deserialize)]
        struct Raw {
            theta: BTreeMap<String, i64>,
        }
        let raw: Raw = serde_json::from_value(v.clone())
            .map_err(|e| FlowError::Input(format!("flow.json: {e}")))?;
        Flow::new(graph, raw.theta)
    }
}

pub fn flow_add(a: &Flow, b: &Flow) -> Result<Flow, FlowError> {
    if !same_graph(&a.graph, &b.graph) {
        return Err(FlowError::Input("flows live on different graphs".into()));
    }
    let mut theta = a.theta.clone();
    for (e, x) in &b.theta {
        *theta.entry(e.clone()).or_insert(0) += x;
    }
    theta.retain(|_, x| *x != 0);
    Ok(Flow {
        graph: a.graph.clone(),
        theta,
    })
}

pub fn flow_neg(a: &Flow) -> Flow {
    Flow {
        graph: a.graph.clone(),
        theta: a.theta.iter().map(|(e, x)| (e.clone(), -x)).collect(),
    }
}

/// Integer combination Σ c_i f_i of flows on one graph.
pub fn flow_combination(
    graph: &Arc<Graph>,
    flows: &[Flow],
    coeffs: &[i64],
) -> Result<Flow, FlowError> {
    let mut acc = Flow::zero(graph.clone());
    for (f, &c) in flows.iter().zip(coeffs) {
        let scaled = Flow {
            graph: f.graph.clone(),
            theta: f.theta.iter().map(|(e, x)| (e.clone(), x * c)).collect(),
        };
        acc = flow_add(&acc, &scaled)?;
    }
    Ok(acc)
}

/// Fundamental-cycle basis of Flow(G) together with the co-tree edges that
/// index its coordinates.
#[derive(Clone, Debug)]
pub struct FlowBasis {
    pub flows: Vec<Flow>,
    /// `cotree[i]` is the edge on which `flows[i]` is 1 and every other basis
    /// flow vanishes.
    pub cotree: Vec<String>,
}

impl FlowBasis {
    pub fn len(&self) -> usize {
        self.flows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flows.is_empty()
    }

    /// The unique integer coordinates of a flow in this basis.
    pub fn coordinates(&self, f: &Flow) -> Vec<i64> {
        self.cotree.iter().map(|e| f.get(e)).collect()
    }
}

/// Basis of the conservation kernel from the fundamental cycles of a BFS
/// spanning forest; its size is E − V + #components.
pub fn flow_basis(g: &Arc<Graph>) -> FlowBasis {
    let (tree, _) = g.spanning_forest();
    let n = g.vertices.len();
    // parent pointers of the forest
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (i, e) in g.edges.iter().enumerate() {
        if tree[i] {
            let t = g.vertex_index[&e.tail];
            let h = g.vertex_index[&e.head];
            adj[t].push((h, i));
            adj[h].push((t, i));
        }
    }
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; n];
    let mut depth = vec![0usize; n];
    let mut seen = vec![false; n];
    for root in 0..n {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for &(w, e) in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = Some((v, e));
                    depth[w] = depth[v] + 1;
                    queue.push_back(w);
                }
            }
        }
    }
    // signed tree path from the root to v, as edge -> coefficient
    let walk_up = |mut v: usize, sign: i64, acc: &mut BTreeMap<usize, i64>, stop: usize| {
        while v != stop {
            let (p, e) = parent[v].expect("path to ancestor");
            let edge = &g.edges[e];
            let forward = g.vertex_index[&edge.head] == v;
            *acc.entry(e).or_insert(0) += if forward { sign } else { -sign };
            v = p;
        }
    };

    let mut flows = Vec::new();
    let mut cotree = Vec::new();
    for (i, e) in g.edges.iter().enumerate() {
        if tree[i] {
            continue;
        }
        let t = g.vertex_index[&e.tail];
        let h = g.vertex_index[&e.head];
        let mut coef: BTreeMap<usize, i64> = BTreeMap::from([(i, 1)]);
        if t != h {
            // close e (t -> h) with the tree path h -> t
            let (mut a, mut b) = (h, t);
            while depth[a] > depth[b] {
                a = parent[a].unwrap().0;
            }
            while depth[b] > depth[a] {
                b = parent[b].unwrap().0;
            }
            while a != b {
                a = parent[a].unwrap().0;
                b = parent[b].unwrap().0;
            }
            let lca = a;
            // path h -> lca is traversed against tree orientation (upwards)
            walk_up(h, -1, &mut coef, lca);
            walk_up(t, 1, &mut coef, lca);
        }
        let theta = coef
            .into_iter()
            .filter(|(_, x)| *x != 0)
            .map(|(j, x)| (g.edges[j].id.clone(), x))
            .collect();
        flows.push(Flow {
            graph: g.clone(),
            theta,
        });
        cotree.push(e.id.clone());
    }
    debug_assert!(flows.iter().all(|f| is_flow(g, &f.theta).unwrap_or(false)));
    FlowBasis { flows, cotree }
}

/// SNF certificate that `basis` is a ℤ-basis of the conservation kernel:
/// correct rank and a saturated (all invariant factors 1) basis matrix.
pub fn certify_basis(g: &Graph, basis: &FlowBasis) -> bool {
    let e = g.edges.len();
    let inc = intmat::smith_normal_form(&g.incidence_matrix());
    let kernel_rank = e - inc.rank();
    if basis.len() != kernel_rank {
        return false;
    }
    if basis.is_empty() {
        return true;
    }
    let cols: Vec<Vec<BigInt>> = basis
        .flows
        .iter()
        .map(|f| {
            g.edges
                .iter()
                .map(|ed| BigInt::from(f.get(&ed.id)))
                .collect()
        })
        .collect();
    let m = IntMatrix::from_columns(e, &cols);
    if !g.incidence_matrix().mul(&m).is_zero() {
        return false;
    }
    let s = intmat::smith_normal_form(&m);
    let f = s.invariant_factors();
    f.len() == basis.len() && f.iter().all(|d| *d == BigInt::from(1))
}

/// How the edges of an embedded graph sit in the ambient manifold.
#[derive(Clone, Debug, PartialEq)]
pub enum Embedding {
    /// Per-edge polyline of lattice points on a 3-torus 1-skeleton
    /// (coordinates may be unwrapped lifts).
    Polyline(BTreeMap<String, Vec<[f64; 3]>>),
    /// Per-edge signed 1-cells of the ambient complex (any supported family).
    Cells(BTreeMap<String, Vec<(usize, i64)>>),
}

#[derive(Clone, Debug)]
pub struct EmbeddedGraphFlow {
    pub graph: Arc<Graph>,
    pub embedding: Embedding,
    pub flow: Flow,
}

impl EmbeddedGraphFlow {
    pub fn new(graph: Arc<Graph>, embedding: Embedding, flow: Flow) -> Result<Self, FlowError> {
        if !same_graph(&graph, flow.graph()) {
            return Err(FlowError::Input("flow belongs to a different graph".into()));
        }
        let keys: BTreeSet<&String> = match &embedding {
            Embedding::Polyline(p) => p.keys().collect(),
            Embedding::Cells(c) => c.keys().collect(),
        };
        let ids: BTreeSet<&String> = graph.edges.iter().map(|e| &e.id).collect();
        if keys != ids {
            return Err(FlowError::Embedding(
                "embedding must describe every edge exactly once".into(),
            ));
        }
        Ok(EmbeddedGraphFlow {
            graph,
            embedding,
            flow,
        })
    }

    /// Parses graph.json (polylines required) and an optional flow.json.
    pub fn from_json(
        graph_json: &serde_json::Value,
        flow_json: Option<&serde_json::Value>,
    ) -> Result<Self, FlowError> {
        #[derive(Deserialize)]
        struct RawEdge {
            #[serde(deserialize_with = "id_string")]
            id: String,
            #[serde(deserialize_with = "id_string")]
            tail: String,
            #[serde(deserialize_with = "id_string")]
            head: String,
            polyline: Vec<[f64; 3]>,
        }
        #[derive(Deserialize)]
        struct RawGraph {
            vertices: Vec<serde_json::Value>,
            edges: Vec<RawEdge>,
        }
        let raw: RawGraph = serde_json::from_value(graph_json.clone())
            .map_err(|e| FlowError::Input(format!("graph.json: {e}")))?;
        let vertices = raw
            .vertices
            .iter()
            .map(|v| match v {
                serde_json::Value::String(s) => Ok(s.clone()),
                serde_json::Value::Number(n) if n.is_i64() => Ok(n.to_string()),
                other => Err(FlowError::Input(format!(
                    "graph.json: bad vertex id {other}"
                ))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut polylines = BTreeMap::new();
        let mut edges = Vec::new();
        for e in raw.edges {
            polylines.insert(e.id.clone(), e.polyline);
            edges.push(Edge {
                id: e.id,
                tail: e.tail,
                head: e.head,
            });
        }
        let graph = Arc::new(Graph::new(vertices, edges)?);
        let flow = match flow_json {
            Some(v) => Flow::from_json(graph.clone(), v)?,
            None => Flow::zero(graph.clone()),
        };
        EmbeddedGraphFlow::new(graph, Embedding::Polyline(polylines), flow)
    }

    pub fn graph_json(&self) -> serde_json::Value {
        let edges: Vec<serde_json::Value> = self
            .graph
            .edges
            .iter()
            .map(|e| {
                let mut obj = serde_json::json!({"id": e.id, "tail": e.tail, "head": e.head});
                if let Embedding::Polyline(p) = &self.embedding {
                    obj["polyline"] = serde_json::json!(p[&e.id]);
                }
                obj
            })
            .collect();
        serde_json::json!({"vertices": self.graph.vertices, "edges": edges})
    }

    /// Same graph and embedding, different flow.
    pub fn with_flow(&self, flow: Flow) -> Result<Self, FlowError> {
        EmbeddedGraphFlow::new(self.graph.clone(), self.embedding.clone(), flow)
    }

    /// Signed 1-cells of each edge on the ambient complex.
    pub fn edge_chains(
        &self,
        ambient: &LatticeManifold,
    ) -> Result<BTreeMap<String, BTreeMap<usize, i64>>, FlowError> {
        match &self.embedding {
            Embedding::Cells(cells) => {
                let n1 = ambient.complex().count(1);
                let mut out = BTreeMap::new();
                for (id, list) in cells {
                    let mut c = BTreeMap::new();
                    for &(cell, s) in list {
                        if cell >= n1 {
                            return Err(FlowError::Embedding(format!(
                                "edge {id:?} uses missing 1-cell {cell}"
                            )));
                        }
                        *c.entry(cell).or_insert(0) += s;
                    }
                    c.retain(|_, x| *x != 0);
                    out.insert(id.clone(), c);
                }
                Ok(out)
            }
            Embedding::Polyline(lines) => {
                let Family::Torus3 { .. } = ambient.family() else {
                    return Err(FlowError::Embedding(
                        "polyline embeddings need a 3-torus ambient".into(),
                    ));
                };
                let grid = *ambient.grid().expect("torus grid");
                self.check_polylines(&grid)?;
                let mut out = BTreeMap::new();
                for (id, pts) in lines {
                    let snapped = snap_all(id, pts)?;
                    let mut c = BTreeMap::new();
                    for link in polyline_links(id, &snapped)? {
                        let (dir, base, sign) = link;
                        *c.entry(grid.link_id(dir, grid.vertex_wrapped(base)))
                            .or_insert(0) += sign;
                    }
                    c.retain(|_, x| *x != 0);
                    out.insert(id.clone(), c);
                }
                Ok(out)
            }
        }
    }

    /// Endpoint consistency and pairwise disjointness of the lattice polylines.
    fn check_polylines(&self, grid: &crate::homology::Grid) -> Result<(), FlowError> {
        let Embedding::Polyline(lines) = &self.embedding else {
            return Ok(());
        };
        let wrap = |p: [i64; 3]| grid.vertex_wrapped(p);
        let mut vertex_at: BTreeMap<String, usize> = BTreeMap::new();
        let mut owner_vertex: BTreeMap<usize, String> = BTreeMap::new();
        let mut used_links: BTreeMap<usize, String> = BTreeMap::new();
        let mut interior: BTreeMap<usize, String> = BTreeMap::new();
        for e in &self.graph.edges {
            let pts = snap_all(&e.id, &lines[&e.id])?;
            if pts.len() < 2 {
                return Err(FlowError::Embedding(format!(
                    "edge {:?} polyline needs at least two points",
                    e.id
                )));
            }
            for (end, p) in [(&e.tail, pts[0]), (&e.head, *pts.last().unwrap())] {
                let v = wrap(p);
                match vertex_at.get(end) {
                    Some(&w) if w != v => {
                        return Err(FlowError::Embedding(format!(
                            "edge {:?} does not end at the position of vertex {end:?}",
                            e.id
                        )))
                    }
                    _ => {
                        vertex_at.insert(end.clone(), v);
                    }
                }
                if let Some(other) = owner_vertex.insert(v, end.clone()) {
                    if &other != end {
                        return Err(FlowError::Embedding(format!(
                            "vertices {other:?} and {end:?} share a position"
                        )));
                    }
                }
            }
            let links = polyline_links(&e.id, &pts)?;
            let mut cur = pts[0];
            for (k, &(dir, base, sign)) in links.iter().enumerate() {
                let lid = grid.link_id(dir, wrap(base));
                if let Some(other) = used_links.insert(lid, e.id.clone()) {
                    return Err(FlowError::Embedding(format!(
                        "edges {other:?} and {:?} overlap along a lattice link",
                        e.id
                    )));
                }
                cur[dir] += sign;
                if k + 1 < links.len() {
                    let v = wrap(cur);
                    if let Some(other) = interior.insert(v, e.id.clone()) {
                        return Err(FlowError::Embedding(format!(
                            "edges {other:?} and {:?} meet away from a vertex",
                            e.id
                        )));
                    }
                }
            }
        }
        for (v, id) in &interior {
            if let Some(name) = owner_vertex.get(v) {
                return Err(FlowError::Embedding(format!(
                    "edge {id:?} passes through vertex {name:?}"
                )));
            }
        }
        Ok(())
    }
}

fn snap_all(id: &str, pts: &[[f64; 3]]) -> Result<Vec<[i64; 3]>, FlowError> {
    pts.iter()
        .map(|p| {
            let mut out = [0i64; 3];
            for i in 0..3 {
                let r = p[i].round();
                if !p[i].is_finite() || (p[i] - r).abs() > SNAP_TOLERANCE {
                    return Err(FlowError::Embedding(format!(
                        "edge {id:?} point {p:?} is off the lattice 1-skeleton"
                    )));
                }
                out[i] = r as i64;
            }
            Ok(out)
        })
        .collect()
}

/// Unit lattice steps `(dir, link base point, ±1)` along a snapped polyline.
fn polyline_links(id: &str, pts: &[[i64; 3]]) -> Result<Vec<(usize, [i64; 3], i64)>, FlowError> {
    let mut out = Vec::new();
    for w in pts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let moved: Vec<usize> = (0..3).filter(|&i| a[i] != b[i]).collect();
        match moved.as_slice() {
            [] => {}
            [d] => {
                let d = *d;
                let sign = (b[d] - a[d]).signum();
                let mut p = a;
                while p[d] != b[d] {
                    if sign > 0 {
                        out.push((d, p, 1));
                    } else {
                        let mut q = p;
                        q[d] -= 1;
                        out.push((d, q, -1));
                    }
                    p[d] += sign;
                }
            }
            _ => {
                return Err(FlowError::Embedding(format!(
                    "edge {id:?} segment {a:?} -> {b:?} is not along a lattice axis"
                )))
            }
        }
    }
    Ok(out)
}

/// Γ: the class of the 1-cycle Σ Θ(e)·e in H_1 of the ambient manifold.
pub fn gamma_class(
    egf: &EmbeddedGraphFlow,
    ambient: &LatticeManifold,
) -> Result<HomologyClass, FlowError> {
    gamma_of(egf, &egf.flow, ambient)
}

fn gamma_of(
    egf: &EmbeddedGraphFlow,
    flow: &Flow,
    ambient: &LatticeManifold,
) -> Result<HomologyClass, FlowError> {
    let chains = egf.edge_chains(ambient)?;
    let mut total: BTreeMap<usize, i64> = BTreeMap::new();
    for (e, &x) in flow.theta() {
        for (&cell, &c) in &chains[e] {
            *total.entry(cell).or_insert(0) += x * c;
        }
    }
    total.retain(|_, x| *x != 0);
    Ok(ambient.cycle_class(&total)?)
}

/// The image lattice Λ = Γ(Flow(G)) ⊂ H_1 (free part), in Hermite normal form.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Lambda {
    pub ambient_rank: usize,
    /// Γ of each basis flow, in basis order.
    pub generators: Vec<Vec<i64>>,
    /// Nonzero HNF rows spanning Λ.
    pub hnf: Vec<Vec<i64>>,
}

pub fn lambda_image(
    egf: &EmbeddedGraphFlow,
    ambient: &LatticeManifold,
) -> Result<Lambda, FlowError> {
    let basis = flow_basis(&egf.graph);
    let mut generators = Vec::with_capacity(basis.len());
    for f in &basis.flows {
        generators.push(gamma_of(egf, f, ambient)?.free);
    }
    let rank = ambient.h1_rank();
    let hnf = if generators.is_empty() {
        Vec::new()
    } else {
        let h = intmat::hermite_normal_form(&IntMatrix::from_rows(&generators));
        (0..h.rows())
            .map(|i| {
                h.row(i)
                    .iter()
                    .map(|x| {
                        intmat::to_i64(x).ok_or_else(|| HomologyError::Overflow(x.to_string()))
                    })
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?
    };
    Ok(Lambda {
        ambient_rank: rank,
        generators,
        hnf,
    })
}

impl Lambda {
    pub fn rank(&self) -> usize {
        self.hnf.len()
    }

    /// Exact membership via an integer solve against the generators.
    pub fn contains(&self, class: &[i64]) -> bool {
        if class.len() != self.ambient_rank {
            return false;
        }
        if class.iter().all(|&x| x == 0) {
            return true;
        }
        if self.hnf.is_empty() {
            return false;
        }
        let cols: Vec<Vec<BigInt>> = self
            .hnf
            .iter()
            .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
            .collect();
        let m = IntMatrix::from_columns(self.ambient_rank, &cols);
        let rhs: Vec<BigInt> = class.iter().map(|&x| BigInt::from(x)).collect();
        intmat::solve_integer(&m, &rhs).is_some()
    }

    /// Canonical representative of `class` modulo Λ (zero iff member).
    pub fn reduce(&self, class: &[i64]) -> Vec<i64> {
        let mut c = class.to_vec();
        for row in &self.hnf {
            let Some(p) = row.iter().position(|&x| x != 0) else {
                continue;
            };
            let q = c[p].div_euclid(row[p]);
            for (ci, ri) in c.iter_mut().zip(row) {
                *ci -= q * ri;
            }
        }
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn theta(pairs: &[(&str, i64)]) -> BTreeMap<String, i64> {
        pairs.iter().map(|(e, x)| (e.to_string(), *x)).collect()
    }

    fn y_graph() -> Graph {
        // the three outer ends are joined at u so the junction closes up
        Graph::from_triples(
            &["u", "v"],
            &[("e1", "u", "v"), ("e2", "u", "v"), ("e3", "v", "u")],
        )
        .unwrap()
    }

    #[test]
    fn y_junction_conserves() {
        let g = y_graph();
        assert!(is_flow(&g, &theta(&[("e1", 1), ("e2", 1), ("e3", 2)])).unwrap());
        assert!(is_flow(&g, &BTreeMap::new()).unwrap());
        assert!(!is_flow(&g, &theta(&[("e1", 1)])).unwrap());
        assert!(is_flow(&g, &theta(&[("nope", 1)])).is_err());
        let path = Graph::from_triples(&["a", "b"], &[("e", "a", "b")]).unwrap();
        assert!(!is_flow(&path, &theta(&[("e", 1)])).unwrap());
    }

    #[test]
    fn opposite_orientations_subtract() {
        let a = OrientedWeight::from_signed(2);
        let b = OrientedWeight::from_signed(-3);
        let s = OrientedWeight::case_sum(a, b);
        assert_eq!(s.weight, 1);
        assert_eq!(s.orientation, Orientation::Reversed);
        assert_eq!(s.signed(), -1);
    }

    #[test]
    fn theta_graph_basis() {
        let g = Arc::new(
            Graph::from_triples(&[0, 1], &[("p", 0, 1), ("q", 0, 1), ("r", 0, 1)]).unwrap(),
        );
        let b = flow_basis(&g);
        assert_eq!(b.len(), 2);
        assert!(certify_basis(&g, &b));
        let tree = Arc::new(Graph::from_triples(&[0, 1, 2], &[("a", 0, 1), ("b", 1, 2)]).unwrap());
        assert!(flow_basis(&tree).is_empty());
        let lp = Arc::new(Graph::from_triples(&[0], &[("l", 0, 0)]).unwrap());
        let b = flow_basis(&lp);
        assert_eq!(b.flows[0].theta(), &theta(&[("l", 1)]));
    }

    #[test]
    fn add_neg_identity() {
        let g = Arc::new(Graph::from_triples(&[0, 1], &[("p", 0, 1), ("q", 1, 0)]).unwrap());
        let f = Flow::new(g.clone(), theta(&[("p", 2), ("q", 2)])).unwrap();
        assert!(flow_add(&f, &flow_neg(&f)).unwrap().is_zero());
        assert_eq!(flow_add(&f, &Flow::zero(g.clone())).unwrap(), f);
        let other = Arc::new(Graph::empty());
        assert!(flow_add(&f, &Flow::zero(other)).is_err());
    }

    #[test]
    fn vertical_loop_class_and_lambda() {
        let m = LatticeManifold::torus([3, 3, 3]).unwrap();
        let g = Arc::new(Graph::from_triples(&["v"], &[("e", "v", "v")]).unwrap());
        let line = (0..=3).map(|z| [1.0, 1.0, z as f64]).collect();
        let flow = Flow::new(g.clone(), theta(&[("e", 3)])).unwrap();
        let egf = EmbeddedGraphFlow::new(
            g.clone(),
            Embedding::Polyline(BTreeMap::from([("e".to_string(), line)])),
            flow,
        )
        .unwrap();
        assert_eq!(gamma_class(&egf, &m).unwrap().free, vec![0, 0, 3]);
        let lam = lambda_image(&egf, &m).unwrap();
        assert_eq!(lam.hnf, vec![vec![0, 0, 1]]);
        assert!(lam.contains(&[0, 0, -2]));
        assert!(!lam.contains(&[1, 0, 0]));
        assert_eq!(lam.reduce(&[1, 0, 5]), vec![1, 0, 0]);
    }

    #[test]
    fn off_skeleton_polyline_is_rejected() {
        let m = LatticeManifold::torus([3, 3, 3]).unwrap();
        let g = Arc::new(Graph::from_triples(&["v"], &[("e", "v", "v")]).unwrap());
        let line = vec![[0.5, 0.0, 0.0], [0.5, 0.0, 3.0]];
        let egf = EmbeddedGraphFlow::new(
            g.clone(),
            Embedding::Polyline(BTreeMap::from([("e".to_string(), line)])),
            Flow::zero(g),
        )
        .unwrap();
        assert!(matches!(
            gamma_class(&egf, &m),
            Err(FlowError::Embedding(_))
        ));
    }

    #[test]
    fn json_round_trip() {
        let v = serde_json::json!({
            "vertices": [0],
            "edges": [{"id": "e", "tail": 0, "head": 0, "polyline": [[0,0,0],[0,0,2]]}]
        });
        let f = serde_json::json!({"theta": {"e": 2}});
        let egf = EmbeddedGraphFlow::from_json(&v, Some(&f)).unwrap();
        assert_eq!(egf.flow.get("e"), 2);
        let back =
            EmbeddedGraphFlow::from_json(&egf.graph_json(), Some(&egf.flow.to_json())).unwrap();
        assert_eq!(back.flow.theta(), egf.flow.theta());
    }
}
