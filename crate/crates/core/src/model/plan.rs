use super::measure::{Atom, DiscreteMeasure, MERGE_TOL};
use super::point::{displacement, Tie, TorusPoint};
use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;
use serde::{Deserialize, Serialize};

/// Absolute tolerance on Kirchhoff sums (unit total mass).
pub const KIRCHHOFF_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Node<S> {
    pub t: S,
    pub x: TorusPoint<S>,
}

/// Straight branch from `tail` to `head` carrying constant flux.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge<S> {
    pub tail: usize,
    pub head: usize,
    pub flux: S,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Violation {
    NodeOutsideHorizon { node: usize },
    NonCausalEdge { edge: usize },
    NonPositiveFlux { edge: usize },
    KirchhoffViolation { node: usize, inflow: f64, outflow: f64 },
    Loop { edge: usize },
}

/// A finite time-space forest representing `dt ⊗ Σ φ_i δ_{X_i(t)}` on
/// `(-T, T) × [0,1)^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct BranchedPlan<S> {
    dim: usize,
    horizon: S,
    nodes: Vec<Node<S>>,
    edges: Vec<Edge<S>>,
}

impl<S: Scalar> BranchedPlan<S> {
    /// Checks shapes only (dimensions, indices); the flow invariants are
    /// reported by [`validate`](Self::validate).
    pub fn new(dim: usize, horizon: S, nodes: Vec<Node<S>>, edges: Vec<Edge<S>>) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::UnsupportedDimension(dim));
        }
        if !(horizon > S::zero()) || !horizon.is_finite() {
            return invalid("horizon must be positive");
        }
        for n in &nodes {
            if n.x.dim() != dim {
                return Err(Error::DimensionMismatch(n.x.dim(), dim));
            }
            if !n.t.is_finite() {
                return invalid("non-finite node time");
            }
        }
        for e in &edges {
            if e.tail >= nodes.len() || e.head >= nodes.len() {
                return invalid("edge refers to a missing node");
            }
        }
        Ok(Self { dim, horizon, nodes, edges })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn horizon(&self) -> S {
        self.horizon
    }

    pub fn nodes(&self) -> &[Node<S>] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge<S>] {
        &self.edges
    }

    /// Periodic displacement of an edge (lexicographically smallest lift on ties).
    pub fn edge_displacement(&self, e: &Edge<S>) -> [S; 2] {
        displacement(&self.nodes[e.tail].x, &self.nodes[e.head].x, Tie::Negative)
    }

    /// Squared speed of an edge.
    pub fn edge_speed_sq(&self, e: &Edge<S>) -> S {
        let d = self.edge_displacement(e);
        let dt = self.nodes[e.head].t - self.nodes[e.tail].t;
        (d[0] * d[0] + d[1] * d[1]) / (dt * dt)
    }

    /// Position of the branch `e` at time `t` (affine interpolation).
    pub fn position_on_edge(&self, e: &Edge<S>, t: S) -> TorusPoint<S> {
        let a = &self.nodes[e.tail];
        let b = &self.nodes[e.head];
        let s = (t - a.t) / (b.t - a.t);
        let d = self.edge_displacement(e);
        a.x.translate(&[d[0] * s, d[1] * s][..self.dim])
    }

    fn flux_sums(&self) -> (Vec<S>, Vec<S>, Vec<usize>, Vec<usize>) {
        let n = self.nodes.len();
        let (mut inflow, mut outflow) = (vec![S::zero(); n], vec![S::zero(); n]);
        let (mut indeg, mut outdeg) = (vec![0usize; n], vec![0usize; n]);
        for e in &self.edges {
            outflow[e.tail] = outflow[e.tail] + e.flux;
            inflow[e.head] = inflow[e.head] + e.flux;
            outdeg[e.tail] += 1;
            indeg[e.head] += 1;
        }
        (inflow, outflow, indeg, outdeg)
    }

    /// Lists every violated invariant; empty iff the plan is admissible.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let big_t = self.horizon;
        for (i, n) in self.nodes.iter().enumerate() {
            if n.t < -big_t || n.t > big_t {
                out.push(Violation::NodeOutsideHorizon { node: i });
            }
        }
        for (k, e) in self.edges.iter().enumerate() {
            if !(e.flux > S::zero()) {
                out.push(Violation::NonPositiveFlux { edge: k });
            }
            if !(self.nodes[e.head].t > self.nodes[e.tail].t) {
                out.push(Violation::NonCausalEdge { edge: k });
            }
        }
        let (inflow, outflow, indeg, outdeg) = self.flux_sums();
        let tol = S::lit(KIRCHHOFF_TOL);
        for i in 0..self.nodes.len() {
            if indeg[i] > 0 && outdeg[i] > 0 {
                let scale = S::one().max(inflow[i]);
                if (inflow[i] - outflow[i]).abs() > tol * scale {
                    out.push(Violation::KirchhoffViolation {
                        node: i,
                        inflow: inflow[i].to_f64().unwrap_or(f64::NAN),
                        outflow: outflow[i].to_f64().unwrap_or(f64::NAN),
                    });
                }
            }
        }
        // undirected cycles away from the boundary times; each incidence of a
        // node sitting exactly at ±T counts as its own vertex
        let n = self.nodes.len();
        let mut parent: Vec<usize> = (0..n + 2 * self.edges.len()).collect();
        fn find(p: &mut [usize], mut i: usize) -> usize {
            while p[i] != i {
                p[i] = p[p[i]];
                i = p[i];
            }
            i
        }
        let mut fresh = n;
        for (k, e) in self.edges.iter().enumerate() {
            let mut vertex = |i: usize| {
                if self.nodes[i].t.abs() >= big_t {
                    fresh += 1;
                    fresh - 1
                } else {
                    i
                }
            };
            let (a, b) = (vertex(e.tail), vertex(e.head));
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra == rb {
                out.push(Violation::Loop { edge: k });
            } else {
                parent[ra] = rb;
            }
        }
        out
    }

    fn ensure_valid(&self) -> Result<()> {
        let v = self.validate();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidPlan(v))
        }
    }

    /// The trace `μ_t`: one atom per branch alive at `t`, coincident atoms merged.
    ///
    /// A branch is alive on `[t_tail, t_head)`; branches ending in a node
    /// without outgoing edges are also counted at their final time.
    pub fn trace(&self, t: S) -> Result<DiscreteMeasure<S>> {
        if !(t >= -self.horizon && t <= self.horizon) {
            return invalid(format!("trace time {t} outside [-T, T]"));
        }
        let (_, _, _, outdeg) = self.flux_sums();
        let mut atoms = Vec::new();
        for e in &self.edges {
            let (t0, t1) = (self.nodes[e.tail].t, self.nodes[e.head].t);
            if t0 <= t && t < t1 {
                atoms.push(Atom { pos: self.position_on_edge(e, t), mass: e.flux });
            } else if t == t1 && outdeg[e.head] == 0 {
                atoms.push(Atom { pos: self.nodes[e.head].x, mass: e.flux });
            }
        }
        DiscreteMeasure::merged(self.dim, atoms, S::lit(MERGE_TOL))
    }

    /// Everything reachable forward in time from `node`. On trees fluxes are
    /// copied unchanged; where a reached node also receives flux from outside
    /// the subsystem, its outgoing fluxes are scaled by the incoming share.
    pub fn forward_subsystem(&self, node: usize) -> Result<Self> {
        if node >= self.nodes.len() {
            return Err(Error::NotFound(format!("node {node}")));
        }
        let n = self.nodes.len();
        let mut out_edges: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut in_edges: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (k, e) in self.edges.iter().enumerate() {
            out_edges[e.tail].push(k);
            in_edges[e.head].push(k);
        }
        let mut reached = vec![false; n];
        reached[node] = true;
        let mut stack = vec![node];
        while let Some(v) = stack.pop() {
            for &k in &out_edges[v] {
                let h = self.edges[k].head;
                if !reached[h] {
                    reached[h] = true;
                    stack.push(h);
                }
            }
        }
        let mut order: Vec<usize> = (0..n).filter(|&i| reached[i]).collect();
        order.sort_by(|&a, &b| self.nodes[a].t.partial_cmp(&self.nodes[b].t).unwrap().then(a.cmp(&b)));
        let mut sub_flux: Vec<Option<S>> = vec![None; self.edges.len()];
        for &v in &order {
            let outs = &out_edges[v];
            if outs.is_empty() {
                continue;
            }
            let full = v == node || in_edges[v].iter().all(|&k| sub_flux[k] == Some(self.edges[k].flux));
            if full {
                for &k in outs {
                    sub_flux[k] = Some(self.edges[k].flux);
                }
            } else {
                let got = in_edges[v].iter().fold(S::zero(), |s, &k| s + sub_flux[k].unwrap_or(S::zero()));
                let all = in_edges[v].iter().fold(S::zero(), |s, &k| s + self.edges[k].flux);
                for &k in outs {
                    sub_flux[k] = Some(self.edges[k].flux * got / all);
                }
            }
        }
        let mut index = vec![usize::MAX; n];
        let mut nodes = Vec::new();
        for i in 0..n {
            if reached[i] {
                index[i] = nodes.len();
                nodes.push(self.nodes[i]);
            }
        }
        let edges = self
            .edges
            .iter()
            .enumerate()
            .filter_map(|(k, e)| {
                sub_flux[k].map(|f| Edge { tail: index[e.tail], head: index[e.head], flux: f })
            })
            .collect();
        Self::new(self.dim, self.horizon, nodes, edges)
    }

    /// Time reversal `t ↦ -t`.
    pub fn mirrored(&self) -> Self {
        Self {
            dim: self.dim,
            horizon: self.horizon,
            nodes: self.nodes.iter().map(|n| Node { t: -n.t, x: n.x }).collect(),
            edges: self.edges.iter().map(|e| Edge { tail: e.head, head: e.tail, flux: e.flux }).collect(),
        }
    }

    /// Rigid translation of every node by `v`.
    pub fn translated(&self, v: &[S]) -> Self {
        Self {
            dim: self.dim,
            horizon: self.horizon,
            nodes: self.nodes.iter().map(|n| Node { t: n.t, x: n.x.translate(v) }).collect(),
            edges: self.edges.clone(),
        }
    }

    /// Sorted distinct node times.
    pub fn breakpoints(&self) -> Vec<S> {
        let mut ts: Vec<S> = self.nodes.iter().map(|n| n.t).collect();
        ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ts.dedup();
        ts
    }

    /// Removes degree-two nodes whose two edges carry the same flux with the
    /// same velocity, joining the edges.
    pub fn merge_collinear_chains(&self) -> Self {
        let (_, _, indeg, outdeg) = self.flux_sums();
        let n = self.nodes.len();
        let mut in_edge = vec![usize::MAX; n];
        let mut out_edge = vec![usize::MAX; n];
        for (k, e) in self.edges.iter().enumerate() {
            in_edge[e.head] = k;
            out_edge[e.tail] = k;
        }
        let tol = S::lit(1e-12);
        let removable: Vec<bool> = (0..n)
            .map(|v| {
                if indeg[v] != 1 || outdeg[v] != 1 {
                    return false;
                }
                let (a, b) = (&self.edges[in_edge[v]], &self.edges[out_edge[v]]);
                if a.flux != b.flux {
                    return false;
                }
                let (da, db) = (self.edge_displacement(a), self.edge_displacement(b));
                let ta = self.nodes[a.head].t - self.nodes[a.tail].t;
                let tb = self.nodes[b.head].t - self.nodes[b.tail].t;
                (0..self.dim).all(|i| (da[i] / ta - db[i] / tb).abs() <= tol)
            })
            .collect();
        let mut edges = Vec::new();
        for (k, e) in self.edges.iter().enumerate() {
            if removable[e.tail] {
                continue;
            }
            let mut head = e.head;
            while removable[head] {
                head = self.edges[out_edge[head]].head;
            }
            let _ = k;
            edges.push(Edge { tail: e.tail, head, flux: e.flux });
        }
        let mut index = vec![usize::MAX; n];
        let mut nodes = Vec::new();
        for v in 0..n {
            if !removable[v] {
                index[v] = nodes.len();
                nodes.push(self.nodes[v]);
            }
        }
        for e in &mut edges {
            e.tail = index[e.tail];
            e.head = index[e.head];
        }
        Self { dim: self.dim, horizon: self.horizon, nodes, edges }
    }

    pub(crate) fn require_valid(&self) -> Result<()> {
        self.ensure_valid()
    }
}

/// Incremental construction of a plan.
#[derive(Clone, Debug, Default)]
pub struct PlanBuilder<S> {
    pub nodes: Vec<Node<S>>,
    pub edges: Vec<Edge<S>>,
}

impl<S: Scalar> PlanBuilder<S> {
    pub fn new() -> Self {
        Self { nodes: Vec::new(), edges: Vec::new() }
    }

    pub fn node(&mut self, t: S, x: TorusPoint<S>) -> usize {
        self.nodes.push(Node { t, x });
        self.nodes.len() - 1
    }

    pub fn edge(&mut self, tail: usize, head: usize, flux: S) {
        self.edges.push(Edge { tail, head, flux });
    }

    pub fn build(self, dim: usize, horizon: S) -> Result<BranchedPlan<S>> {
        BranchedPlan::new(dim, horizon, self.nodes, self.edges)
    }
}

#[derive(Serialize, Deserialize)]
struct NodeJson {
    t: f64,
    x: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct EdgeJson {
    tail: usize,
    head: usize,
    flux: f64,
}

#[derive(Serialize, Deserialize)]
struct PlanJson {
    dim: usize,
    #[serde(rename = "T")]
    horizon: f64,
    nodes: Vec<NodeJson>,
    edges: Vec<EdgeJson>,
}

impl BranchedPlan<f64> {
    fn json_struct(&self) -> PlanJson {
        PlanJson {
            dim: self.dim,
            horizon: self.horizon,
            nodes: self.nodes.iter().map(|n| NodeJson { t: n.t, x: n.x.coords().to_vec() }).collect(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeJson { tail: e.tail, head: e.head, flux: e.flux })
                .collect(),
        }
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(self.json_struct()).expect("plan serializes")
    }

    /// JSON text with keys in the order `dim, T, nodes, edges`; floats use the
    /// shortest representation that round-trips.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.json_struct()).expect("plan serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let j: PlanJson = serde_json::from_str(text)?;
        let nodes = j
            .nodes
            .iter()
            .map(|n| Ok(Node { t: n.t, x: TorusPoint::new(&n.x)? }))
            .collect::<Result<Vec<_>>>()?;
        let edges = j.edges.iter().map(|e| Edge { tail: e.tail, head: e.head, flux: e.flux }).collect();
        Self::new(j.dim, j.horizon, nodes, edges)
    }
}
