use crate::model::{internal_energy, perimeter_power};
use crate::Plan;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Equipartition {
    /// Time average of `Λ(t) = Ṗ(t) - Ė_cin(t)`.
    pub lambda_bar: f64,
    pub max_deviation: f64,
    /// `|Λ̄| T / I`, expected to stay bounded.
    pub energy_ratio: f64,
}

/// `Λ(t)` on each interval between consecutive node times, with the toy
/// perimeter (every branch counts 1).
pub fn equipartition_residual(plan: &Plan) -> Equipartition {
    equipartition_residual_with_power(plan, 0.0)
}

pub fn equipartition_residual_with_power(plan: &Plan, power: f64) -> Equipartition {
    let times = plan.breakpoints();
    let mut pieces = Vec::new();
    for w in times.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b - a <= 1e-14 * plan.horizon() {
            continue;
        }
        let mid = 0.5 * (a + b);
        let mut lam = 0.0;
        for e in plan.edges() {
            let (t0, t1) = (plan.nodes()[e.tail].t, plan.nodes()[e.head].t);
            if t0 <= mid && mid < t1 {
                lam += perimeter_power(e.flux, power) - e.flux * plan.edge_speed_sq(e);
            }
        }
        pieces.push((lam, b - a));
    }
    if pieces.is_empty() {
        return Equipartition { lambda_bar: 0.0, max_deviation: 0.0, energy_ratio: 0.0 };
    }
    let total: f64 = pieces.iter().map(|p| p.1).sum();
    let base = pieces.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let lambda_bar = base + pieces.iter().map(|&(l, len)| (l - base) * len).sum::<f64>() / total;
    let max_deviation = pieces.iter().map(|p| (p.0 - lambda_bar).abs()).fold(0.0, f64::max);
    let h = plan.horizon();
    let energy = internal_energy(plan, -h, h, power).map(|e| e.internal()).unwrap_or(f64::NAN);
    Equipartition { lambda_bar, max_deviation, energy_ratio: lambda_bar.abs() * h / energy }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{PlanBuilder, TorusPoint};
    use crate::toy1d::{solve_e, solve_toy, symmetric_plan, SubtreeProblem, SubtreeTree};

    #[test]
    fn segments_are_exact() {
        for n in [1, 2, 5, 9] {
            let plan = symmetric_plan(&SubtreeTree::Segment, n, 0.3, 1.0).unwrap();
            let e = equipartition_residual(&plan);
            assert_eq!(e.lambda_bar, n as f64);
            assert_eq!(e.max_deviation, 0.0);
        }
    }

    #[test]
    fn kink_is_detected() {
        let mut b = PlanBuilder::new();
        let a = b.node(-1.0, TorusPoint::new1(0.5));
        let m = b.node(0.0, TorusPoint::new1(0.7));
        let c = b.node(1.0, TorusPoint::new1(0.7));
        b.edge(a, m, 1.0);
        b.edge(m, c, 1.0);
        let e = equipartition_residual(&b.build(1, 1.0).unwrap());
        assert!(e.max_deviation > 0.01);
    }

    #[test]
    fn solver_outputs_equipartition() {
        let s = solve_toy(10.0, 0.5, 2, 16).unwrap();
        let e = equipartition_residual(&s.plan);
        assert!(e.max_deviation <= 1e-3 * e.lambda_bar, "{e:?}");
        let p = SubtreeProblem::centered(1.0, 0.5, 10.0).unwrap();
        let e = equipartition_residual(&solve_e(&p, 2, 16).unwrap().plan);
        assert!(e.max_deviation <= 1e-3 * e.lambda_bar.abs(), "{e:?}");
    }
}
