use crate::constants::{C0_ROOT, C_CHILD};
use crate::error::{invalid, Result};
use crate::model::{PlanBuilder, TorusPoint};
use crate::Plan;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

/// Smallest branch time on the grid, relative to the horizon.
const GRID_FLOOR: f64 = 1e-4;
/// Alternating golden-section rounds after the grid search.
const REFINE_ROUNDS: usize = 3;
/// Relative improvement that lets the unpruned root scan override pruning.
const FALLBACK_GAIN: f64 = 0.01;

/// Cell problem `E(Φ, T, λ, X̄)`: mass `Φ` spread uniformly over a cell of
/// width `Φ` centered at `0`, starting from a single point at `X̄`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SubtreeProblem {
    pub mass: f64,
    pub horizon: f64,
    pub lambda: f64,
    pub offset: f64,
}

impl SubtreeProblem {
    pub fn new(mass: f64, horizon: f64, lambda: f64, offset: f64) -> Result<Self> {
        for (name, v) in [("mass", mass), ("horizon", horizon), ("lambda", lambda)] {
            if !(v > 0.0) || !v.is_finite() {
                return invalid(format!("{name} must be positive and finite"));
            }
        }
        if !offset.is_finite() {
            return invalid("offset must be finite");
        }
        let p = Self { mass, horizon, lambda, offset };
        if !(p.t_lambda() > horizon) {
            return invalid("T_λ does not exceed T at this precision");
        }
        Ok(p)
    }

    pub fn centered(mass: f64, horizon: f64, lambda: f64) -> Result<Self> {
        Self::new(mass, horizon, lambda, 0.0)
    }

    pub fn t_lambda(&self) -> f64 {
        self.horizon + 1.0 / self.lambda
    }

    /// `(Φ/T_λ) X̄²`.
    pub fn offset_energy(&self) -> f64 {
        self.mass * self.offset * self.offset / self.t_lambda()
    }

    /// Everything stays at `X̄` until `T`, then fans out linearly.
    pub fn segment_energy(&self) -> f64 {
        self.horizon + self.lambda * self.mass.powi(3) / 12.0 + self.offset_energy()
    }

    /// `T + Φ³/(12 T_λ)` plus the offset shift.
    pub fn lower_bound(&self) -> f64 {
        self.horizon + self.mass.powi(3) / (12.0 * self.t_lambda()) + self.offset_energy()
    }

    fn normalized(&self) -> (f64, f64) {
        let r = self.mass.powf(1.5);
        (self.horizon / r, self.lambda * r)
    }
}

/// `(Φ, T, λ) ↦ (r^{-2/3} Φ, T/r, r λ)` together with the factor `r` such
/// that `E(problem) = r E(rescaled)`.
pub fn rescale(problem: &SubtreeProblem, r: f64) -> Result<(SubtreeProblem, f64)> {
    if problem.offset != 0.0 {
        return invalid("rescale needs a centered problem; subtract offset_energy first");
    }
    if !(r > 0.0) || !r.is_finite() {
        return invalid("scale factor must be positive");
    }
    let p = SubtreeProblem::centered(problem.mass * r.powf(-2.0 / 3.0), problem.horizon / r, problem.lambda * r)?;
    Ok((p, r))
}

/// Minimal admissible child-mass fraction at a root, `c₀(1+λT)/(λ²Φ³)`.
/// Values above 1 rule out branching.
pub fn branching_threshold(mass: f64, horizon: f64, lambda: f64) -> f64 {
    C0_ROOT * (1.0 + lambda * horizon) / (lambda * lambda * mass.powi(3))
}

/// Same estimate with the per-child constant; used to prune split fractions.
pub fn child_threshold(mass: f64, horizon: f64, lambda: f64) -> f64 {
    C_CHILD * (1.0 + lambda * horizon) / (lambda * lambda * mass.powi(3))
}

/// Optimal tree in units where the subtree mass is 1: `time` is the first
/// branch time and `fraction ≤ 1/2` the mass of the left child.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum SubtreeTree {
    Segment,
    Split { time: f64, fraction: f64, children: [Arc<SubtreeTree>; 2] },
}

impl SubtreeTree {
    pub fn is_segment(&self) -> bool {
        matches!(self, SubtreeTree::Segment)
    }

    pub fn branchings(&self) -> usize {
        match self {
            SubtreeTree::Segment => 0,
            SubtreeTree::Split { children, .. } => 1 + children[0].branchings() + children[1].branchings(),
        }
    }

    /// `(remaining horizon, λ, smaller fraction)` for every split, each in
    /// the normalized units of the split's own subtree.
    pub fn splits(&self, horizon: f64, lambda: f64) -> Vec<(f64, f64, f64)> {
        let mut out = Vec::new();
        self.collect_splits(horizon, lambda, &mut out);
        out
    }

    fn collect_splits(&self, horizon: f64, lambda: f64, out: &mut Vec<(f64, f64, f64)>) {
        if let SubtreeTree::Split { time, fraction, children } = self {
            let rest = horizon - time;
            out.push((rest, lambda, *fraction));
            for (c, phi) in children.iter().zip([*fraction, 1.0 - fraction]) {
                let r = phi.powf(1.5);
                c.collect_splits(rest / r, lambda * r, out);
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct SubtreeSolution {
    pub problem: SubtreeProblem,
    /// Objective value of the returned tree (an upper bound on the minimum).
    pub energy: f64,
    pub lower_bound: f64,
    pub tree: Arc<SubtreeTree>,
    /// Plan on `[0, T]`; cells wrap around the unit circle.
    pub plan: Plan,
    /// Some leaf hit the depth limit while branching was still admissible.
    pub depth_limited: bool,
    /// The unpruned root scan beat the pruned search by more than 1%.
    pub pruning_overridden: bool,
    pub certified: bool,
}

impl SubtreeSolution {
    pub fn gap(&self) -> f64 {
        self.energy - self.lower_bound
    }
}

#[derive(Debug)]
pub(crate) struct Solved {
    pub value: f64,
    pub tree: Arc<SubtreeTree>,
    pub limited: bool,
}

type Key = (u64, u64, usize, bool);

/// Recursive minimizer over binary trees in normalized units. Results are
/// memoized on the exact bits of `(T, λ)`.
pub(crate) struct Solver {
    grid: usize,
    memo: Mutex<HashMap<Key, Arc<Solved>>>,
}

struct Candidate {
    value: f64,
    time: f64,
    fraction: f64,
    children: [Arc<Solved>; 2],
}

impl Solver {
    pub fn new(grid: usize) -> Self {
        Self { grid: grid.max(1), memo: Mutex::new(HashMap::new()) }
    }

    /// `E(1, t, l)` with pruning everywhere.
    pub fn solve(&self, t: f64, l: f64, depth: usize) -> Arc<Solved> {
        self.solve_inner(t, l, depth, true)
    }

    /// Root-level fallback: repeat the search without the root test and the
    /// child threshold at the top split, keep it if it wins by more than 1%.
    pub fn solve_with_fallback(&self, t: f64, l: f64, depth: usize) -> (Arc<Solved>, bool) {
        let pruned = self.solve(t, l, depth);
        if depth == 0 {
            return (pruned, false);
        }
        let free = self.solve_inner(t, l, depth, false);
        if free.value < pruned.value * (1.0 - FALLBACK_GAIN) {
            (free, true)
        } else {
            (pruned, false)
        }
    }

    fn solve_inner(&self, t: f64, l: f64, depth: usize, prune: bool) -> Arc<Solved> {
        let admissible = l * l / (1.0 + l * t) >= C0_ROOT;
        if depth == 0 || (prune && !admissible) {
            // Closed form, not worth a memo entry.
            return Arc::new(self.compute(t, l, depth, prune));
        }
        let key = (t.to_bits(), l.to_bits(), depth, prune);
        if let Some(s) = self.memo.lock().unwrap().get(&key) {
            return s.clone();
        }
        let s = Arc::new(self.compute(t, l, depth, prune));
        self.memo.lock().unwrap().entry(key).or_insert(s).clone()
    }

    fn compute(&self, t: f64, l: f64, depth: usize, prune: bool) -> Solved {
        let segment = Solved { value: t + l / 12.0, tree: Arc::new(SubtreeTree::Segment), limited: false };
        let admissible = l * l / (1.0 + l * t) >= C0_ROOT;
        if prune && !admissible {
            return segment;
        }
        if depth == 0 {
            return Solved { limited: admissible, ..segment };
        }
        let Some(best) = self.search(t, l, depth, prune) else {
            return segment;
        };
        if best.value < segment.value {
            let limited = best.children.iter().any(|c| c.limited);
            Solved {
                value: best.value,
                tree: Arc::new(SubtreeTree::Split {
                    time: best.time,
                    fraction: best.fraction,
                    children: [best.children[0].tree.clone(), best.children[1].tree.clone()],
                }),
                limited,
            }
        } else {
            segment
        }
    }

    /// Value of splitting at `time` into `fraction` and `1 - fraction`.
    fn split(&self, t: f64, l: f64, depth: usize, prune: bool, time: f64, fraction: f64) -> Option<Candidate> {
        let rest = t - time;
        if !(time > 0.0 && rest > 0.0 && fraction > 0.0 && fraction <= 0.5) {
            return None;
        }
        if prune && fraction < child_threshold(1.0, rest, l) {
            return None;
        }
        let mut value = time + fraction * (1.0 - fraction) / (4.0 * (rest + 1.0 / l));
        let mut children = Vec::with_capacity(2);
        for phi in [fraction, 1.0 - fraction] {
            let r = phi.powf(1.5);
            let c = self.solve(rest / r, l * r, depth - 1);
            value += r * c.value;
            children.push(c);
        }
        let children: [Arc<Solved>; 2] = children.try_into().ok()?;
        Some(Candidate { value, time, fraction, children })
    }

    fn search(&self, t: f64, l: f64, depth: usize, prune: bool) -> Option<Candidate> {
        let g = self.grid;
        let times: Vec<f64> = (0..=g + 1).map(|j| t * GRID_FLOOR.powf(j as f64 / g as f64)).collect();
        let fractions: Vec<f64> = (1..=g).map(|k| k as f64 / (2 * g) as f64).collect();
        let best = (0..g * g)
            .into_par_iter()
            .filter_map(|idx| {
                let (j, k) = (idx / g + 1, idx % g);
                self.split(t, l, depth, prune, times[j], fractions[k]).map(|c| (idx, c))
            })
            .reduce_with(|a, b| if (b.1.value, b.0) < (a.1.value, a.0) { b } else { a })?;
        let (idx, mut best) = best;
        let j = idx / g + 1;
        let (t_lo, t_hi) = (times[j + 1], times[j - 1]);
        let df = 0.5 / g as f64;
        let (f_lo, f_hi) = (best.fraction - df, (best.fraction + df).min(0.5));
        let eval = |time: f64, fraction: f64| {
            self.split(t, l, depth, prune, time, fraction).map_or(f64::INFINITY, |c| c.value)
        };
        let (mut time, mut fraction) = (best.time, best.fraction);
        for _ in 0..REFINE_ROUNDS {
            time = golden_section(|x| eval(x, fraction), t_lo, t_hi.min(t * (1.0 - 1e-12)));
            fraction = golden_section(|f| eval(time, f), f_lo.max(1e-12), f_hi);
        }
        if let Some(c) = self.split(t, l, depth, prune, time, fraction) {
            if c.value < best.value {
                best = c;
            }
        }
        Some(best)
    }
}

fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let tol = 1e-11 * (a.abs() + b.abs()).max(1e-300);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..80 {
        if b - a < tol {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        x1
    } else {
        x2
    }
}

/// Appends the tree of a subtree with mass `phi` and remaining horizon
/// `horizon`, whose root node `tail` sits at unwrapped position `x0` and
/// time `t0` and which drifts with velocity `beta`. Returns the leaf
/// positions (unwrapped) with their masses, left to right.
#[allow(clippy::too_many_arguments)]
pub(crate) fn emit(
    tree: &SubtreeTree,
    phi: f64,
    horizon: f64,
    lambda: f64,
    t0: f64,
    x0: f64,
    beta: f64,
    tail: usize,
    b: &mut PlanBuilder<f64>,
    leaves: &mut Vec<(f64, f64)>,
) {
    match tree {
        SubtreeTree::Segment => {
            let x = x0 + beta * horizon;
            let head = b.node(t0 + horizon, TorusPoint::new1(x));
            b.edge(tail, head, phi);
            leaves.push((x, phi));
        }
        SubtreeTree::Split { time, fraction, children } => {
            let tb = phi.powf(1.5) * time;
            let xb = x0 + beta * tb;
            let node = b.node(t0 + tb, TorusPoint::new1(xb));
            b.edge(tail, node, phi);
            let rest = horizon - tb;
            let tl = rest + 1.0 / lambda;
            let (p1, p2) = (fraction * phi, phi - fraction * phi);
            let drifts = [-p2 / 2.0 / tl, p1 / 2.0 / tl];
            for ((child, p), v) in children.iter().zip([p1, p2]).zip(drifts) {
                emit(child, p, rest, lambda, t0 + tb, xb, beta + v, node, b, leaves);
            }
        }
    }
}

/// Minimizes `E(Φ, T, λ, X̄)` over binary trees explored to `depth` levels
/// on a `grid × grid` (branch time × fraction) grid.
pub fn solve_e(problem: &SubtreeProblem, depth: usize, grid: usize) -> Result<SubtreeSolution> {
    if grid == 0 {
        return invalid("grid must be positive");
    }
    let solver = Solver::new(grid);
    let (t, l) = problem.normalized();
    let (solved, overridden) = solver.solve_with_fallback(t, l, depth);
    let energy = problem.mass.powf(1.5) * solved.value + problem.offset_energy();

    let mut b = PlanBuilder::new();
    let root = b.node(0.0, TorusPoint::new1(problem.offset));
    let mut leaves = Vec::new();
    let beta = -problem.offset / problem.t_lambda();
    emit(&solved.tree, problem.mass, problem.horizon, problem.lambda, 0.0, problem.offset, beta, root, &mut b, &mut leaves);
    let plan = b.build(1, problem.horizon)?;
    Ok(SubtreeSolution {
        problem: *problem,
        energy,
        lower_bound: problem.lower_bound(),
        tree: solved.tree.clone(),
        plan,
        depth_limited: solved.limited,
        pruning_overridden: overridden,
        certified: !solved.limited && grid >= 8,
    })
}
