use super::lagrangian::LagrangianField;
use crate::error::{invalid, Result};
use crate::Plan;
use serde::Serialize;

/// Containment slack.
pub const CONE_TOL: f64 = 1e-9;

/// `[x⁻(s), x⁺(s)]`: the section at time `s` of the cone with apex
/// `(t, x_i)` over the label interval `a` at time `T_λ`.
pub fn cone_bounds(t: f64, x_i: f64, a: (f64, f64), t_lambda: f64, s: f64) -> Result<(f64, f64)> {
    if s < t || s > t_lambda || t >= t_lambda {
        return invalid("need t ≤ s ≤ T_λ and t < T_λ");
    }
    let w = (s - t) / (t_lambda - t);
    Ok((w * a.0 + (1.0 - w) * x_i, w * a.1 + (1.0 - w) * x_i))
}

/// Worst cone violation below one node.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConeViolation {
    /// Plan node, `None` for a branch crossing `t = 0`.
    pub node: Option<usize>,
    /// Whether the node was found in the mirrored (negative time) half.
    pub mirrored: bool,
    pub time: f64,
    pub position: f64,
    pub bounds: (f64, f64),
}

fn check_field(field: &LagrangianField, mirrored: bool, out: &mut Vec<ConeViolation>) {
    let tl = field.t_lambda();
    for nd in &field.nodes {
        if nd.t >= field.horizon || nd.labels.1 <= nd.labels.0 {
            continue;
        }
        let mut worst: Option<(f64, ConeViolation)> = None;
        for (i, &s) in field.times.iter().enumerate() {
            if s <= nd.t {
                continue;
            }
            let (lo, hi) = cone_bounds(nd.t, nd.x, nd.labels, tl, s).expect("s within (t, T_λ]");
            for j in 0..field.labels.len() - 1 {
                let mid = 0.5 * (field.labels[j] + field.labels[j + 1]);
                if mid < nd.labels.0 || mid > nd.labels.1 {
                    continue;
                }
                for x in [field.left[i][j], field.right[i][j]] {
                    let excess = (lo - x).max(x - hi);
                    if excess > CONE_TOL && worst.as_ref().map_or(true, |w| excess > w.0) {
                        let v = ConeViolation { node: nd.plan_node, mirrored, time: s, position: x, bounds: (lo, hi) };
                        worst = Some((excess, v));
                    }
                }
            }
        }
        if let Some((_, v)) = worst {
            out.push(v);
        }
    }
}

/// Checks that every subtree stays inside the cone spanned by its root and
/// its label interval, on both halves of the plan. One record per node.
pub fn check_cone_property(plan: &Plan, lambda: f64) -> Result<Vec<ConeViolation>> {
    let mut out = Vec::new();
    for (half, mirrored) in [(plan.clone(), false), (plan.mirrored(), true)] {
        if half.edges().iter().any(|e| half.nodes()[e.head].t > 0.0) {
            check_field(&LagrangianField::from_plan(&half, lambda, 32)?, mirrored, &mut out);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{PlanBuilder, TorusPoint};
    use crate::toy1d::{solve_toy, symmetric_plan, SubtreeTree};

    #[test]
    fn bounds() {
        assert_eq!(cone_bounds(0.0, 0.5, (0.3, 0.7), 1.0, 0.5).unwrap(), (0.4, 0.6));
        assert_eq!(cone_bounds(0.2, 0.5, (0.3, 0.7), 1.0, 0.2).unwrap(), (0.5, 0.5));
        assert_eq!(cone_bounds(0.2, 0.5, (0.3, 0.7), 1.0, 1.0).unwrap(), (0.3, 0.7));
        assert!(cone_bounds(0.5, 0.5, (0.3, 0.7), 1.0, 0.4).is_err());
    }

    #[test]
    fn segments_and_solver_outputs_pass() {
        let plan = symmetric_plan(&SubtreeTree::Segment, 4, 0.1, 2.0).unwrap();
        assert!(check_cone_property(&plan, 2.0).unwrap().is_empty());
        let s = solve_toy(20.0, 1.0, 2, 12).unwrap();
        assert!(check_cone_property(&s.plan, 20.0).unwrap().is_empty());
    }

    #[test]
    fn kinked_branch_is_reported_once() {
        let mut b = PlanBuilder::new();
        let root = b.node(0.0, TorusPoint::new1(0.5));
        let leaf = b.node(0.1, TorusPoint::new1(0.8));
        b.edge(root, leaf, 1.0);
        let plan = b.build(1, 0.1).unwrap();
        let v = check_cone_property(&plan, 1.0).unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].node, Some(0));
    }
}
