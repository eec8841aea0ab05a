use crate::constants::{C_DYADIC, DYADIC_MAX_DEPTH, DYADIC_MIN_SIDE};
use crate::error::{invalid, Error, Result};
use crate::model::{displacement, internal_energy, Atom, DiscreteMeasure, PlanBuilder, Tie, TorusPoint, MERGE_TOL};
use crate::transport::{mccann_interpolate, w2_periodic_discrete, SparsePlan};
use crate::Plan;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::{HashMap, VecDeque};

/// Level times `t_k = t_{k-1} + (1-δ) T δ^{k-1}` and grids `N_k = 2^k N₀`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DyadicSchedule {
    pub delta: f64,
    pub horizon: f64,
    pub n0: u64,
    /// `t_0 = 0, ..., t_K`.
    pub times: Vec<f64>,
    pub grids: Vec<u64>,
}

impl DyadicSchedule {
    /// `N₀ = max(1, round(T^{-2/3}))`; levels stop once `r_K < 1e-6` or at
    /// `K = 40`.
    pub fn new(horizon: f64, delta: f64) -> Result<Self> {
        if !(delta > 0.25 && delta < 0.5) {
            return invalid("δ must lie in (1/4, 1/2)");
        }
        if !(horizon > 0.0) || !horizon.is_finite() {
            return invalid("horizon must be positive");
        }
        let n0 = horizon.powf(-2.0 / 3.0).round().max(1.0) as u64;
        let mut times = vec![0.0];
        let mut grids = vec![n0];
        let mut step = (1.0 - delta) * horizon;
        while grids.len() <= DYADIC_MAX_DEPTH && 1.0 / (*grids.last().unwrap() as f64) >= DYADIC_MIN_SIDE {
            times.push(times.last().unwrap() + step);
            grids.push(2 * grids.last().unwrap());
            step *= delta;
        }
        Ok(Self { delta, horizon, n0, times, grids })
    }

    /// Number of refinement levels `K`.
    pub fn depth(&self) -> usize {
        self.times.len() - 1
    }

    pub fn side(&self, k: usize) -> f64 {
        1.0 / self.grids[k] as f64
    }
}

/// Mass of every atom moved to the center of its cell in the `n`-grid;
/// cell `⌈x n⌉ - 1`, so points on a cell face go to the smaller index.
pub fn discretize(mu: &DiscreteMeasure<f64>, n: u64) -> Result<DiscreteMeasure<f64>> {
    let nf = n as f64;
    let cell = |x: f64| ((x * nf).ceil() - 1.0).clamp(0.0, nf - 1.0);
    let atoms: Vec<Atom<f64>> = mu
        .atoms()
        .iter()
        .map(|a| {
            let mut c = [0.0; 2];
            for (ax, v) in c.iter_mut().enumerate().take(mu.dim()) {
                *v = (cell(a.pos.coord(ax)) + 0.5) / nf;
            }
            let pos = if mu.dim() == 1 { TorusPoint::new1(c[0]) } else { TorusPoint::new2(c[0], c[1]) };
            Atom { pos, mass: a.mass }
        })
        .collect();
    DiscreteMeasure::merged(mu.dim(), atoms, MERGE_TOL)
}

/// Support sizes around one stage `(t_k, t_{k+1})`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StageSupport {
    pub t0: f64,
    pub t1: f64,
    pub m0: usize,
    pub m1: usize,
    /// Branches alive inside the stage.
    pub alive: usize,
}

/// Bounds on one half `(0, T)` or `(-T, 0)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HalfCertificate {
    pub perimeter: f64,
    pub kinetic: f64,
    /// `E_cin - (1+η) W² / (4T)`.
    pub kinetic_excess: f64,
    pub perimeter_ratio: f64,
    /// `η · excess / T^{1/3}`.
    pub kinetic_ratio: f64,
    pub pass: bool,
}

#[derive(Clone, Debug)]
pub struct DyadicInterpolation {
    pub plan: Plan,
    pub schedule: DyadicSchedule,
    pub w2: f64,
    /// `[positive half, negative half]`.
    pub halves: [HalfCertificate; 2],
    pub stages: Vec<StageSupport>,
    pub constant: f64,
}

impl DyadicInterpolation {
    pub fn pass(&self) -> bool {
        self.halves.iter().all(|h| h.pass)
    }
}

fn check_probability(mu: &DiscreteMeasure<f64>) -> Result<()> {
    let m = mu.total_mass();
    if (m - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidMeasure(format!("expected a probability measure, total mass {m}")));
    }
    Ok(())
}

/// Joins `μ₋` at `-T` to `μ₊` at `T`: at `±t_k` the McCann interpolant of an
/// optimal plan, moved to the `N_k`-grid; consecutive levels are joined by
/// sparse optimal plans and the last level by a plan to the exact endpoint.
pub fn dyadic_interpolation(
    mu_minus: &DiscreteMeasure<f64>,
    mu_plus: &DiscreteMeasure<f64>,
    horizon: f64,
    delta: f64,
    eta: f64,
) -> Result<DyadicInterpolation> {
    check_probability(mu_minus)?;
    check_probability(mu_plus)?;
    if mu_minus.dim() != mu_plus.dim() {
        return Err(Error::DimensionMismatch(mu_minus.dim(), mu_plus.dim()));
    }
    if !(eta > 0.0 && eta < 1.0) {
        return invalid("η must lie in (0, 1)");
    }
    let dim = mu_plus.dim();
    let schedule = DyadicSchedule::new(horizon, delta)?;
    let ot = w2_periodic_discrete(mu_minus, mu_plus)?;
    let w2 = ot.cost;
    let depth = schedule.depth();

    // levels[side][k]: measure at time ±t_k, then the exact endpoint.
    let build_side = |sign: f64| -> Result<Vec<DiscreteMeasure<f64>>> {
        let mut lv = (0..=depth)
            .into_par_iter()
            .map(|k| {
                let s = (sign * schedule.times[k] + horizon) / (2.0 * horizon);
                discretize(&mccann_interpolate(&ot, mu_minus, mu_plus, s)?, schedule.grids[k])
            })
            .collect::<Result<Vec<_>>>()?;
        lv.push(if sign > 0.0 { mu_plus.clone() } else { mu_minus.clone() });
        Ok(lv)
    };
    let sides = [build_side(1.0)?, build_side(-1.0)?];
    let plans: Vec<Vec<SparsePlan>> = sides
        .iter()
        .map(|lv| (0..=depth).into_par_iter().map(|k| w2_periodic_discrete(&lv[k], &lv[k + 1])).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;

    let mut b = PlanBuilder::new();
    let level0: Vec<usize> = sides[0][0].atoms().iter().map(|a| b.node(0.0, a.pos)).collect();
    let mut stages = Vec::new();
    for (side, (lv, stage_plans)) in sides.iter().zip(&plans).enumerate() {
        let sign = if side == 0 { 1.0 } else { -1.0 };
        let mut prev = level0.clone();
        for k in 0..=depth {
            let t1 = if k == depth { horizon } else { schedule.times[k + 1] };
            let next: Vec<usize> = lv[k + 1].atoms().iter().map(|a| b.node(sign * t1, a.pos)).collect();
            for &(i, j, m) in &stage_plans[k].entries {
                if sign > 0.0 {
                    b.edge(prev[i], next[j], m);
                } else {
                    b.edge(next[j], prev[i], m);
                }
            }
            if side == 0 {
                stages.push(StageSupport {
                    t0: schedule.times[k],
                    t1,
                    m0: lv[k].len(),
                    m1: lv[k + 1].len(),
                    alive: stage_plans[k].entries.len(),
                });
            }
            prev = next;
        }
    }
    let p = (dim as f64 - 1.0) / dim as f64;
    let plan = cancel_cycles(b, p, horizon).build(dim, horizon)?;
    for (t, target) in [(horizon, mu_plus), (-horizon, mu_minus)] {
        let gap = w2_periodic_discrete(&plan.trace(t)?, target)?.cost;
        if gap > 1e-18 {
            return Err(Error::CertificationFailed(format!("trace at {t} misses the endpoint measure by W² = {gap:e}")));
        }
    }
    for st in &mut stages {
        st.alive = plan.trace(0.5 * (st.t0 + st.t1))?.len();
    }
    let scale = horizon.cbrt();
    let mut halves = Vec::with_capacity(2);
    for (a, c) in [(0.0, horizon), (-horizon, 0.0)] {
        let e = internal_energy(&plan, a, c, p)?;
        let excess = e.kinetic - (1.0 + eta) * w2 / (4.0 * horizon);
        let perimeter_ratio = e.perimeter / scale;
        let kinetic_ratio = eta * excess / scale;
        halves.push(HalfCertificate {
            perimeter: e.perimeter,
            kinetic: e.kinetic,
            kinetic_excess: excess,
            perimeter_ratio,
            kinetic_ratio,
            pass: perimeter_ratio <= C_DYADIC && kinetic_ratio <= C_DYADIC,
        });
    }
    let halves: [HalfCertificate; 2] = [halves[0], halves[1]];
    let out = DyadicInterpolation { plan, schedule, w2, halves, stages, constant: C_DYADIC };
    if !out.pass() {
        return Err(Error::CertificationFailed(format!("dyadic interpolation: {:?}", out.halves)));
    }
    Ok(out)
}

/// Consecutive sparse plans can close undirected cycles through several
/// levels. Each cycle is removed by pushing flux around it until one edge
/// vanishes, in whichever direction does not raise the energy (it is concave
/// in the pushed amount). Node positions and the masses at `±T` are kept.
fn cancel_cycles(b: PlanBuilder<f64>, power: f64, horizon: f64) -> PlanBuilder<f64> {
    let PlanBuilder { nodes, edges } = b;
    let cost: Vec<(f64, f64)> = edges
        .iter()
        .map(|e| {
            let (a, c) = (&nodes[e.tail], &nodes[e.head]);
            let d = displacement(&a.x, &c.x, Tie::Negative);
            let dt = c.t - a.t;
            (dt, (d[0] * d[0] + d[1] * d[1]) / dt)
        })
        .collect();
    let energy = |k: usize, phi: f64| if phi > 0.0 { phi.powf(power) * cost[k].0 + phi * cost[k].1 } else { 0.0 };
    let mut flux: Vec<f64> = edges.iter().map(|e| e.flux).collect();
    // Boundary incidences are separate vertices, as in validation.
    let vertex = |i: usize, k: usize| if nodes[i].t.abs() >= horizon { nodes.len() + 2 * k + usize::from(edges[k].head == i) } else { i };
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nodes.len() + 2 * edges.len()];
    let mut alive = vec![false; edges.len()];
    for k in 0..edges.len() {
        let (a, c) = (vertex(edges[k].tail, k), vertex(edges[k].head, k));
        if let Some(path) = forest_path(&adj, &edges, &alive, &vertex, a, c) {
            // Cycle: a -> c along k, then c -> a along the path.
            let mut cycle = vec![(k, 1.0)];
            cycle.extend(path);
            let lo = -cycle.iter().filter(|c| c.1 > 0.0).map(|c| flux[c.0]).fold(f64::INFINITY, f64::min);
            let hi = cycle.iter().filter(|c| c.1 < 0.0).map(|c| flux[c.0]).fold(f64::INFINITY, f64::min);
            let total = |d: f64| cycle.iter().map(|&(j, s)| energy(j, flux[j] + s * d)).sum::<f64>();
            let d = if total(lo) <= total(hi) { lo } else { hi };
            let sign = if d == lo { 1.0 } else { -1.0 };
            let z = cycle.iter().filter(|c| c.1 == sign).min_by(|x, y| flux[x.0].total_cmp(&flux[y.0])).unwrap().0;
            for &(j, s) in &cycle {
                flux[j] = (flux[j] + s * d).max(0.0);
            }
            flux[z] = 0.0;
            for &(j, _) in &cycle {
                if flux[j] <= 0.0 && j != k && alive[j] {
                    alive[j] = false;
                    let (u, w) = (vertex(edges[j].tail, j), vertex(edges[j].head, j));
                    adj[u].retain(|&x| x != j);
                    adj[w].retain(|&x| x != j);
                }
            }
            if flux[k] <= 0.0 {
                continue;
            }
        }
        alive[k] = true;
        adj[a].push(k);
        adj[c].push(k);
    }
    let mut index = vec![usize::MAX; nodes.len()];
    let mut out = PlanBuilder::new();
    for (k, e) in edges.iter().enumerate() {
        if !alive[k] || flux[k] <= 0.0 {
            continue;
        }
        for i in [e.tail, e.head] {
            if index[i] == usize::MAX {
                index[i] = out.node(nodes[i].t, nodes[i].x);
            }
        }
        out.edge(index[e.tail], index[e.head], flux[k]);
    }
    out
}

/// Edges of the current forest from `from` to `to`, each with `+1` when
/// walked tail to head.
fn forest_path(
    adj: &[Vec<usize>],
    edges: &[crate::model::Edge<f64>],
    alive: &[bool],
    vertex: &dyn Fn(usize, usize) -> usize,
    from: usize,
    to: usize,
) -> Option<Vec<(usize, f64)>> {
    if from == to {
        return Some(Vec::new());
    }
    let mut prev: HashMap<usize, (usize, usize)> = HashMap::new();
    let mut queue = VecDeque::from([to]);
    prev.insert(to, (usize::MAX, usize::MAX));
    while let Some(u) = queue.pop_front() {
        if u == from {
            break;
        }
        for &j in &adj[u] {
            if !alive[j] {
                continue;
            }
            let (a, c) = (vertex(edges[j].tail, j), vertex(edges[j].head, j));
            let w = if a == u { c } else { a };
            if let std::collections::hash_map::Entry::Vacant(slot) = prev.entry(w) {
                slot.insert((u, j));
                queue.push_back(w);
            }
        }
    }
    prev.get(&from)?;
    let mut walk = Vec::new();
    let mut v = from;
    while v != to {
        let (u, j) = prev[&v];
        walk.push(j);
        v = u;
    }
    let mut out = Vec::with_capacity(walk.len());
    let mut at = to;
    for &j in walk.iter().rev() {
        let (a, c) = (vertex(edges[j].tail, j), vertex(edges[j].head, j));
        if a == at {
            out.push((j, 1.0));
            at = c;
        } else {
            out.push((j, -1.0));
            at = a;
        }
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use rand::Rng;

    fn random_measure(seed: u64, n: usize, dim: usize) -> DiscreteMeasure<f64> {
        let mut rng = stream(seed, 0);
        let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..1.0)).collect();
        let s: f64 = w.iter().sum();
        let atoms = w
            .iter()
            .map(|&m| {
                let pos = if dim == 1 { TorusPoint::new1(rng.gen()) } else { TorusPoint::new2(rng.gen(), rng.gen()) };
                Atom { pos, mass: m / s }
            })
            .collect();
        DiscreteMeasure::merged(dim, atoms, MERGE_TOL).unwrap()
    }

    #[test]
    fn schedule() {
        let s = DyadicSchedule::new(1e-3, 0.3).unwrap();
        assert_eq!(s.n0, 100);
        assert_eq!(s.times[0], 0.0);
        assert!(s.times.windows(2).all(|w| w[0] < w[1]));
        assert!(*s.times.last().unwrap() < 1e-3);
        assert!(s.side(s.depth()) < DYADIC_MIN_SIDE);
        assert!(s.side(s.depth() - 1) >= DYADIC_MIN_SIDE);
        for k in 0..=s.depth() {
            assert_eq!(s.grids[k], 100 << k);
        }
        assert!(DyadicSchedule::new(1e-3, 0.2).is_err());
    }

    #[test]
    fn discretization_ties() {
        let mu = DiscreteMeasure::from_pairs(1, &[(&[0.25][..], 0.5), (&[0.0][..], 0.5)]).unwrap();
        let d = discretize(&mu, 4).unwrap();
        let xs: Vec<f64> = d.atoms().iter().map(|a| a.pos.coord(0)).collect();
        assert_eq!(xs, vec![0.125]);
    }

    #[test]
    fn random_pairs() {
        for seed in 0..3 {
            let (a, b) = (random_measure(seed, 10, 2), random_measure(seed + 100, 10, 2));
            let out = dyadic_interpolation(&a, &b, 1e-2, 0.3, 0.5).unwrap();
            assert!(out.plan.validate().is_empty());
            for st in &out.stages {
                assert!(st.alive <= st.m0 + st.m1);
            }
            let top = out.plan.trace(1e-2).unwrap();
            assert_eq!(top.len(), b.len());
            let bottom = out.plan.trace(-1e-2).unwrap();
            assert_eq!(bottom.len(), a.len());
        }
    }

    #[test]
    fn same_atom() {
        let mu = DiscreteMeasure::dirac(TorusPoint::new2(0.3, 0.7), 1.0);
        let out = dyadic_interpolation(&mu, &mu, 1e-3, 0.3, 0.5).unwrap();
        assert!(out.plan.validate().is_empty());
        assert!(out.w2 == 0.0);
    }

    #[test]
    fn rejects_non_probability() {
        let mu = DiscreteMeasure::dirac(TorusPoint::new2(0.3, 0.7), 0.5);
        assert!(dyadic_interpolation(&mu, &mu, 1e-3, 0.3, 0.5).is_err());
    }
}
