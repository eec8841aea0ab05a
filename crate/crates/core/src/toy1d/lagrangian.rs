use crate::error::{invalid, Error, Result};
use crate::model::{wrap, EnergyBreakdown, Tie};
use crate::Plan;

/// Positions closer than this are the same branch.
const SAME_BRANCH_TOL: f64 = 1e-12;
/// Monotonicity slack of `x ↦ X(t, x)`.
const MONOTONE_TOL: f64 = 1e-12;

/// A node of the forward forest behind a field: time, unwrapped position,
/// the label interval it carries and the plan node it came from.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldNode {
    pub t: f64,
    pub x: f64,
    pub labels: (f64, f64),
    pub plan_node: Option<usize>,
}

/// Trajectories `X(t, x)` sampled on `times × cells`. Each label cell
/// `[labels[j], labels[j+1]]` stores the left and right limits of `X`;
/// trajectories are affine in `t` between samples and in `x` inside a cell.
#[derive(Clone, Debug)]
pub struct LagrangianField {
    pub lambda: f64,
    pub horizon: f64,
    pub times: Vec<f64>,
    pub labels: Vec<f64>,
    pub left: Vec<Vec<f64>>,
    pub right: Vec<Vec<f64>>,
    /// `φ_X` per time interval (inside `[0, T]`) and cell, at the midpoint;
    /// zero where `X` is not locally constant in `x`.
    pub multiplicity: Vec<Vec<f64>>,
    /// Count the energy twice (symmetric extension to negative times).
    pub mirror: bool,
    pub nodes: Vec<FieldNode>,
}

impl LagrangianField {
    pub fn new(
        lambda: f64,
        horizon: f64,
        times: Vec<f64>,
        labels: Vec<f64>,
        left: Vec<Vec<f64>>,
        right: Vec<Vec<f64>>,
        mirror: bool,
    ) -> Result<Self> {
        if !(lambda > 0.0 && horizon > 0.0) {
            return invalid("λ and T must be positive");
        }
        let tl = horizon + 1.0 / lambda;
        let cells = labels.len().saturating_sub(1);
        if times.len() < 2 || cells == 0 || left.len() != times.len() || right.len() != times.len() {
            return invalid("field shape mismatch");
        }
        if left.iter().chain(&right).any(|row| row.len() != cells) {
            return invalid("field shape mismatch");
        }
        if times.windows(2).any(|w| !(w[0] < w[1])) || labels.windows(2).any(|w| !(w[0] < w[1])) {
            return invalid("times and labels must increase");
        }
        if *times.last().unwrap() != tl || !times.contains(&horizon) {
            return invalid("times must contain T and end at T_λ");
        }
        let last = times.len() - 1;
        for j in 0..cells {
            if left[last][j] != labels[j] || right[last][j] != labels[j + 1] {
                return invalid("X(T_λ, x) must equal x on the label grid");
            }
        }
        let mut f = Self {
            lambda,
            horizon,
            times,
            labels,
            left,
            right,
            multiplicity: Vec::new(),
            mirror,
            nodes: Vec::new(),
        };
        f.multiplicity = f.compute_multiplicity();
        Ok(f)
    }

    pub fn t_lambda(&self) -> f64 {
        self.horizon + 1.0 / self.lambda
    }

    fn cells(&self) -> usize {
        self.labels.len() - 1
    }

    fn compute_multiplicity(&self) -> Vec<Vec<f64>> {
        let n = self.cells();
        let mut out = Vec::new();
        for i in 0..self.times.len() - 1 {
            if self.times[i + 1] > self.horizon {
                break;
            }
            let mid = |j: usize, side: &Vec<Vec<f64>>| 0.5 * (side[i][j] + side[i + 1][j]);
            let constant: Vec<bool> = (0..n)
                .map(|j| {
                    (self.left[i][j] - self.right[i][j]).abs() <= SAME_BRANCH_TOL
                        && (self.left[i + 1][j] - self.right[i + 1][j]).abs() <= SAME_BRANCH_TOL
                })
                .collect();
            let mut row = vec![0.0; n];
            let mut j = 0;
            while j < n {
                if !constant[j] {
                    j += 1;
                    continue;
                }
                let x = mid(j, &self.left);
                let mut k = j;
                let mut mass = 0.0;
                while k < n && constant[k] && (mid(k, &self.left) - x).abs() <= SAME_BRANCH_TOL {
                    mass += self.labels[k + 1] - self.labels[k];
                    k += 1;
                }
                row[j..k].fill(mass);
                j = k;
            }
            out.push(row);
        }
        out
    }

    /// Fails if `x ↦ X(t, x)` decreases at some sample time.
    pub fn check_monotone(&self) -> Result<()> {
        for (i, (l, r)) in self.left.iter().zip(&self.right).enumerate() {
            for j in 0..self.cells() {
                let next_ok = j + 1 == self.cells() || r[j] <= l[j + 1] + MONOTONE_TOL;
                if l[j] > r[j] + MONOTONE_TOL || !next_ok {
                    return invalid(format!("field is not monotone at t = {}", self.times[i]));
                }
            }
        }
        Ok(())
    }

    /// One vertical segment of unit mass at `x = 0`, labels on `[-1/2, 1/2]`.
    pub fn segment(lambda: f64, horizon: f64, samples: usize) -> Result<Self> {
        let tl = horizon + 1.0 / lambda;
        let mut times: Vec<f64> = (0..=samples.max(1)).map(|i| horizon * i as f64 / samples.max(1) as f64).collect();
        *times.last_mut().unwrap() = horizon;
        times.push(tl);
        let labels: Vec<f64> = (0..=samples.max(1)).map(|j| -0.5 + j as f64 / samples.max(1) as f64).collect();
        let cells = labels.len() - 1;
        let mut left = vec![vec![0.0; cells]; times.len()];
        let mut right = left.clone();
        let last = times.len() - 1;
        left[last] = labels[..cells].to_vec();
        right[last] = labels[1..].to_vec();
        Self::new(lambda, horizon, times, labels, left, right, true)
    }

    /// Field induced by the part of `plan` at nonnegative times: leaves at
    /// `T` receive label intervals through the optimal monotone matching
    /// with Lebesgue measure, edges carry the union of their leaves' labels.
    /// Sample times are the node times plus `samples` uniform points.
    pub fn from_plan(plan: &Plan, lambda: f64, samples: usize) -> Result<Self> {
        if plan.dim() != 1 {
            return Err(Error::DimensionMismatch(plan.dim(), 1));
        }
        plan.require_valid()?;
        let horizon = plan.horizon();
        let forest = Forest::new(plan)?;
        let tl = horizon + 1.0 / lambda;

        let mut times: Vec<f64> = forest.nodes.iter().map(|n| n.t).filter(|&t| t > 0.0 && t < horizon).collect();
        times.extend((0..=samples).map(|i| horizon * i as f64 / samples.max(1) as f64));
        times.push(0.0);
        times.push(horizon);
        times.retain(|&t| (0.0..=horizon).contains(&t));
        times.sort_by(f64::total_cmp);
        times.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * horizon);
        *times.last_mut().unwrap() = horizon;
        times.push(tl);

        let lo = forest.label_start;
        let mut labels: Vec<f64> = forest.leaf_labels.iter().flat_map(|&(a, b)| [a, b]).collect();
        labels.extend((0..=samples).map(|j| lo + j as f64 / samples.max(1) as f64));
        labels.sort_by(f64::total_cmp);
        labels.dedup_by(|a, b| (*a - *b).abs() <= 1e-14);
        let cells = labels.len() - 1;

        let cell_leaf: Vec<usize> = (0..cells)
            .map(|j| {
                let u = 0.5 * (labels[j] + labels[j + 1]);
                forest.leaf_labels.partition_point(|&(_, b)| b <= u).min(forest.leaves.len() - 1)
            })
            .collect();
        let last = times.len() - 1;
        let mut left = vec![vec![0.0; cells]; times.len()];
        for (i, &t) in times[..last].iter().enumerate() {
            for j in 0..cells {
                left[i][j] = forest.position(forest.leaves[cell_leaf[j]], t);
            }
        }
        let mut right = left.clone();
        left[last] = labels[..cells].to_vec();
        right[last] = labels[1..].to_vec();
        let mut f = Self::new(lambda, horizon, times, labels, left, right, false)?;
        f.nodes = forest.nodes;
        Ok(f)
    }
}

/// Forward forest of a plan on `[0, T]` with unwrapped positions.
struct Forest {
    nodes: Vec<FieldNode>,
    parent: Vec<Option<usize>>,
    /// Leaf nodes sorted by label.
    leaves: Vec<usize>,
    leaf_labels: Vec<(f64, f64)>,
    label_start: f64,
}

impl Forest {
    fn new(plan: &Plan) -> Result<Self> {
        let horizon = plan.horizon();
        let pn = plan.nodes();
        let mut nodes: Vec<FieldNode> = Vec::new();
        let mut local = vec![None; pn.len()];
        for (i, n) in pn.iter().enumerate() {
            if n.t >= 0.0 {
                local[i] = Some(nodes.len());
                nodes.push(FieldNode { t: n.t, x: n.x.coord(0), labels: (0.0, 0.0), plan_node: Some(i) });
            }
        }
        let mut parent = vec![None; nodes.len()];
        let mut flux = vec![0.0; nodes.len()];
        for e in plan.edges() {
            if pn[e.head].t <= 0.0 {
                continue;
            }
            let tail = match local[e.tail] {
                Some(t) => t,
                None => {
                    let x = plan.position_on_edge(e, 0.0).coord(0);
                    nodes.push(FieldNode { t: 0.0, x, labels: (0.0, 0.0), plan_node: None });
                    parent.push(None);
                    flux.push(0.0);
                    nodes.len() - 1
                }
            };
            let head = local[e.head].unwrap();
            if parent[head].is_some() {
                return invalid("the field needs a forest at positive times (merging branches)");
            }
            parent[head] = Some(tail);
            flux[head] = e.flux;
        }
        // Unwrap along paths from the roots.
        let n = nodes.len();
        let mut children = vec![Vec::new(); n];
        for (c, p) in parent.iter().enumerate() {
            if let Some(p) = p {
                children[*p].push(c);
            }
        }
        let roots: Vec<usize> = (0..n).filter(|&i| parent[i].is_none() && !children[i].is_empty()).collect();
        let mut order = Vec::with_capacity(n);
        let mut tree_of = vec![usize::MAX; n];
        for (k, &r) in roots.iter().enumerate() {
            let mut stack = vec![r];
            tree_of[r] = k;
            while let Some(v) = stack.pop() {
                order.push(v);
                for &c in &children[v] {
                    let d = wrap(nodes[c].x - nodes[v].x, Tie::Negative);
                    nodes[c].x = nodes[v].x + d;
                    tree_of[c] = k;
                    stack.push(c);
                }
            }
        }
        let leaves: Vec<usize> = order.iter().copied().filter(|&v| children[v].is_empty()).collect();
        for &l in &leaves {
            if (nodes[l].t - horizon).abs() > 1e-12 * horizon.max(1.0) {
                return invalid("every branch must reach t = T");
            }
        }
        // Seam between tree arcs, then shift every tree into [seam, seam + 1).
        let mut arcs: Vec<(f64, f64)> = vec![(f64::INFINITY, f64::NEG_INFINITY); roots.len()];
        for &l in &leaves {
            let a = &mut arcs[tree_of[l]];
            a.0 = a.0.min(nodes[l].x);
            a.1 = a.1.max(nodes[l].x);
        }
        let seam = find_seam(&arcs)?;
        let mut shift = vec![0.0; roots.len()];
        for (k, a) in arcs.iter().enumerate() {
            shift[k] = (seam - a.0).ceil();
            if a.1 + shift[k] >= seam + 1.0 {
                return invalid("a subtree wraps around the circle");
            }
        }
        for v in 0..n {
            if tree_of[v] != usize::MAX {
                nodes[v].x += shift[tree_of[v]];
            }
        }
        let mut sorted = leaves.clone();
        sorted.sort_by(|&a, &b| nodes[a].x.total_cmp(&nodes[b].x).then(a.cmp(&b)));
        let total: f64 = sorted.iter().map(|&l| flux[l]).sum();
        let mut acc = 0.0;
        let mut raw = Vec::with_capacity(sorted.len());
        let mut mean_d = 0.0;
        for &l in &sorted {
            let m = flux[l] / total;
            let (a, b) = (acc, acc + m);
            mean_d += 0.5 * (b * b - a * a) - (nodes[l].x - seam) * m;
            raw.push((a, b));
            acc = b;
        }
        if let Some(last) = raw.last_mut() {
            last.1 = 1.0;
        }
        let start = seam - mean_d;
        let leaf_labels: Vec<(f64, f64)> = raw.iter().map(|&(a, b)| (start + a, start + b)).collect();
        for (&l, &ab) in sorted.iter().zip(&leaf_labels) {
            nodes[l].labels = ab;
        }
        for &v in order.iter().rev() {
            if !children[v].is_empty() {
                let lo = children[v].iter().map(|&c| nodes[c].labels.0).fold(f64::INFINITY, f64::min);
                let hi = children[v].iter().map(|&c| nodes[c].labels.1).fold(f64::NEG_INFINITY, f64::max);
                nodes[v].labels = (lo, hi);
            }
        }
        Ok(Self { nodes, parent, leaves: sorted, leaf_labels, label_start: start })
    }

    /// Position at time `t` of the branch that ends in `leaf`.
    fn position(&self, leaf: usize, t: f64) -> f64 {
        let mut v = leaf;
        while let Some(p) = self.parent[v] {
            let (a, b) = (&self.nodes[p], &self.nodes[v]);
            if a.t <= t {
                if b.t <= a.t {
                    return b.x;
                }
                let s = ((t - a.t) / (b.t - a.t)).clamp(0.0, 1.0);
                return a.x + s * (b.x - a.x);
            }
            v = p;
        }
        self.nodes[v].x
    }
}

/// A point of `[0, 1)` outside every arc (mod 1), in the middle of the
/// largest free gap.
fn find_seam(arcs: &[(f64, f64)]) -> Result<f64> {
    let mut ivs: Vec<(f64, f64)> = Vec::new();
    for &(a, b) in arcs {
        if b - a >= 1.0 {
            return invalid("a subtree covers the whole circle");
        }
        let a0 = a.rem_euclid(1.0);
        let b0 = a0 + (b - a);
        ivs.push((a0, b0));
        ivs.push((a0 - 1.0, b0 - 1.0));
        ivs.push((a0 + 1.0, b0 + 1.0));
    }
    ivs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut best = (0.0, -1.0);
    let mut reach = f64::NEG_INFINITY;
    for w in ivs.windows(2) {
        reach = reach.max(w[0].1);
        let gap = w[1].0 - reach;
        if gap > best.1 {
            let mid = 0.5 * (reach + w[1].0);
            if (0.0..1.0).contains(&mid.rem_euclid(1.0)) {
                best = (mid.rem_euclid(1.0), gap);
            }
        }
    }
    if best.1 <= 0.0 {
        return invalid("subtrees cover the whole circle at t = T");
    }
    Ok(best.0)
}

/// Lagrangian energy of a field: the branch count integrated over
/// `[0, T]` and the kinetic energy over `[0, T_λ]`, doubled for a
/// mirrored field. The kinetic part after `T` is reported as `boundary`.
/// A non-constant `X` at some `t ≤ T` makes the perimeter infinite.
pub fn lagrangian_energy(field: &LagrangianField) -> Result<EnergyBreakdown<f64>> {
    field.check_monotone()?;
    let n = field.cells();
    let (mut per, mut kin, mut bnd) = (0.0, 0.0, 0.0);
    for i in 0..field.times.len() - 1 {
        let dt = field.times[i + 1] - field.times[i];
        let mut k = 0.0;
        for j in 0..n {
            let len = field.labels[j + 1] - field.labels[j];
            let vl = (field.left[i + 1][j] - field.left[i][j]) / dt;
            let vr = (field.right[i + 1][j] - field.right[i][j]) / dt;
            let vm = 0.5 * (vl + vr);
            k += len * (vl * vl + 4.0 * vm * vm + vr * vr) / 6.0;
        }
        if field.times[i + 1] <= field.horizon {
            kin += k * dt;
            let row = &field.multiplicity[i];
            let mut p = 0.0;
            for j in 0..n {
                let len = field.labels[j + 1] - field.labels[j];
                p += if row[j] > 0.0 { len / row[j] } else { f64::INFINITY };
            }
            per += p * dt;
        } else {
            bnd += k * dt;
        }
    }
    let f = if field.mirror { 2.0 } else { 1.0 };
    Ok(EnergyBreakdown::new(f * per, f * kin, f * bnd))
}

/// Lagrangian energy of both halves of a plan.
pub fn lagrangian_energy_of_plan(plan: &Plan, lambda: f64, samples: usize) -> Result<EnergyBreakdown<f64>> {
    let up = lagrangian_energy(&LagrangianField::from_plan(plan, lambda, samples)?)?;
    let down = lagrangian_energy(&LagrangianField::from_plan(&plan.mirrored(), lambda, samples)?)?;
    Ok(up + down)
}
