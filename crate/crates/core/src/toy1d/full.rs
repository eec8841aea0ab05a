use super::segments::{lagrangian_lower_bound, optimal_segment_count};
use super::subtree::{emit, Solver, SubtreeTree};
use crate::error::{invalid, Result};
use crate::model::{toy_energy, PlanBuilder, TorusPoint};
use crate::Plan;
use serde::Serialize;
use std::sync::Arc;

/// Minimizer of the toy energy among symmetric plans made of `N` identical
/// subtrees of mass `1/N` rooted at `t = 0`.
#[derive(Clone, Debug, Serialize)]
pub struct ToySolution {
    pub lambda: f64,
    pub horizon: f64,
    pub roots: usize,
    /// Shared subtree shape, in units where its mass is 1.
    pub tree: Arc<SubtreeTree>,
    /// `2 N E(1/N, T, λ)` as computed by the recursion.
    pub solver_value: f64,
    /// Energy of the assembled plan.
    pub e_upper: f64,
    pub e_lower: f64,
    pub segments_if_pure: Option<usize>,
    #[serde(skip)]
    pub plan: Plan,
    pub depth_limited: bool,
    pub pruning_overridden: bool,
    pub certified: bool,
}

pub fn solve_toy(lambda: f64, horizon: f64, depth: usize, grid: usize) -> Result<ToySolution> {
    if !(lambda > 0.0 && horizon > 0.0) || !lambda.is_finite() || !horizon.is_finite() {
        return invalid("λ and T must be positive and finite");
    }
    if grid == 0 {
        return invalid("grid must be positive");
    }
    let solver = Solver::new(grid);
    let n_seg = optimal_segment_count(lambda, horizon).0;
    let mut best: Option<(f64, usize, Arc<super::subtree::Solved>, bool)> = None;
    let mut n = 1usize;
    loop {
        let nf = n as f64;
        let r = nf.powf(-1.5);
        let (s, over) = solver.solve_with_fallback(horizon / r, lambda * r, depth);
        let total = 2.0 * nf * r * s.value;
        if best.as_ref().map_or(true, |b| total < b.0) {
            best = Some((total, n, s, over));
        }
        let bound = best.as_ref().unwrap().0;
        if (n > n_seg && 2.0 * nf * horizon >= bound) || n >= 1 << 20 {
            break;
        }
        n += 1;
    }
    let (value, n, solved, over) = best.unwrap();
    let plan = symmetric_plan(&solved.tree, n, horizon, lambda)?;
    let e_upper = toy_energy(&plan, lambda)?.total;
    Ok(ToySolution {
        lambda,
        horizon,
        roots: n,
        tree: solved.tree.clone(),
        solver_value: value,
        e_upper,
        e_lower: lagrangian_lower_bound(lambda, horizon).min(e_upper),
        segments_if_pure: solved.tree.is_segment().then_some(n),
        plan,
        depth_limited: solved.limited,
        pruning_overridden: over,
        certified: !solved.limited && grid >= 8,
    })
}

/// `N` copies of `tree` rooted at `((i + 1/2)/N, 0)`, mirrored to `t < 0`.
pub fn symmetric_plan(tree: &SubtreeTree, n: usize, horizon: f64, lambda: f64) -> Result<Plan> {
    if n == 0 {
        return invalid("need at least one root");
    }
    let phi = 1.0 / n as f64;
    let mut half = PlanBuilder::new();
    let mut leaves = Vec::new();
    let mut roots = Vec::with_capacity(n);
    for i in 0..n {
        let x = (i as f64 + 0.5) * phi;
        let root = half.node(0.0, TorusPoint::new1(x));
        roots.push(root);
        emit(tree, phi, horizon, lambda, 0.0, x, 0.0, root, &mut half, &mut leaves);
    }
    let mut full = PlanBuilder::new();
    full.nodes = half.nodes.clone();
    full.edges = half.edges.clone();
    let mut image = vec![usize::MAX; half.nodes.len()];
    for &r in &roots {
        image[r] = r;
    }
    for (i, nd) in half.nodes.iter().enumerate() {
        if image[i] == usize::MAX {
            image[i] = full.node(-nd.t, nd.x);
        }
    }
    for e in &half.edges {
        full.edge(image[e.head], image[e.tail], e.flux);
    }
    full.build(1, horizon)
}
