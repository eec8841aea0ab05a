use super::certificate::Certificate;
use crate::constants::C_SHEAR;
use crate::error::{invalid, Result};
use crate::model::{internal_energy, PlanBuilder};
use crate::sobolev::{shear_damping, FourierTable};
use crate::Plan;

/// The competitor `½(μ⁺ + μ⁻)` where on `T - ε < |t| < T` the two copies
/// move apart with velocity `±(η/ε) e`.
#[derive(Clone, Debug)]
pub struct ShearCompetitor {
    pub plan: Plan,
    pub eta: f64,
    pub epsilon: f64,
    pub axis: usize,
    /// `I(μ̃) - I(μ)`.
    pub delta_i: f64,
    /// `(2^{1-p} - 1) P_ends + (η/ε)² Σ_layers φ·len`, the exact value of `ΔI`.
    pub predicted: f64,
    /// Perimeter of the original plan on the two end layers.
    pub perimeter_ends: f64,
    /// `ΔI ≤ C (P_ends + η²/ε)`.
    pub certificate: Certificate,
}

impl ShearCompetitor {
    /// Fourier coefficients of the new boundary trace from the old ones.
    pub fn transform(&self, tab: &FourierTable) -> Result<FourierTable> {
        shear_damping(tab, self.eta, self.axis)
    }
}

pub fn shear_competitor(plan: &Plan, eta: f64, epsilon: f64, axis: usize, power: f64) -> Result<ShearCompetitor> {
    let horizon = plan.horizon();
    if !(epsilon > 0.0 && epsilon < horizon) {
        return invalid("need 0 < ε < T");
    }
    if axis >= plan.dim() || !(eta >= 0.0) {
        return invalid("need η ≥ 0 and a valid axis");
    }
    let cut = horizon - epsilon;
    // Split every edge at t = ±cut.
    let mut split = PlanBuilder::new();
    split.nodes = plan.nodes().to_vec();
    for e in plan.edges() {
        let (t0, t1) = (plan.nodes()[e.tail].t, plan.nodes()[e.head].t);
        let mut tail = e.tail;
        for c in [-cut, cut] {
            if t0 < c && c < t1 {
                let mid = split.node(c, plan.position_on_edge(e, c));
                split.edge(tail, mid, e.flux);
                tail = mid;
            }
        }
        split.edge(tail, e.head, e.flux);
    }
    let base = split.build(plan.dim(), horizon)?;
    let mut dir = [0.0; 2];
    dir[axis] = 1.0;
    let shift = |t: f64, sign: f64| -> [f64; 2] {
        let s = sign * eta / epsilon * (t.abs() - cut).max(0.0);
        [s * dir[0], s * dir[1]]
    };
    let mut b = PlanBuilder::new();
    let n = base.nodes().len();
    let mut copies = vec![[usize::MAX; 2]; n];
    for (i, nd) in base.nodes().iter().enumerate() {
        if nd.t.abs() > cut {
            for (c, sign) in [1.0, -1.0].into_iter().enumerate() {
                copies[i][c] = b.node(nd.t, nd.x.translate(&shift(nd.t, sign)[..plan.dim()]));
            }
        } else {
            let id = b.node(nd.t, nd.x);
            copies[i] = [id, id];
        }
    }
    let mut layer_mass_time = 0.0;
    for e in base.edges() {
        let (t0, t1) = (base.nodes()[e.tail].t, base.nodes()[e.head].t);
        let in_layer = t0 >= cut || t1 <= -cut;
        if in_layer {
            layer_mass_time += e.flux * (t1 - t0);
            for c in 0..2 {
                b.edge(copies[e.tail][c], copies[e.head][c], 0.5 * e.flux);
            }
        } else {
            b.edge(copies[e.tail][0], copies[e.head][0], e.flux);
        }
    }
    let new = b.build(plan.dim(), horizon)?;
    let old_e = internal_energy(plan, -horizon, horizon, power)?;
    let new_e = internal_energy(&new, -horizon, horizon, power)?;
    let delta_i = new_e.internal() - old_e.internal();
    let ends = internal_energy(plan, cut, horizon, power)?.perimeter + internal_energy(plan, -horizon, -cut, power)?.perimeter;
    let predicted = (2f64.powf(1.0 - power) - 1.0) * ends + (eta / epsilon).powi(2) * layer_mass_time;
    let scale = ends + eta * eta / epsilon;
    let certificate = Certificate::new(
        new_e.perimeter - old_e.perimeter,
        new_e.kinetic - old_e.kinetic,
        delta_i,
        C_SHEAR,
        scale,
    )
    .require("shear competitor")?;
    Ok(ShearCompetitor { plan: new, eta, epsilon, axis, delta_i, predicted, perimeter_ends: ends, certificate })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{MeasureData, TorusPoint};
    use crate::sobolev::FourierTable;

    fn segment() -> Plan {
        let mut b = PlanBuilder::new();
        let a = b.node(-1.0, TorusPoint::new2(0.5, 0.5));
        let c = b.node(1.0, TorusPoint::new2(0.5, 0.5));
        b.edge(a, c, 1.0);
        b.build(2, 1.0).unwrap()
    }

    #[test]
    fn vertical_segment_closed_form() {
        let (eta, eps) = (0.01, 0.2);
        let s = shear_competitor(&segment(), eta, eps, 0, 0.5).unwrap();
        assert!(s.plan.validate().is_empty());
        let exact = (2f64.sqrt() - 1.0) * 2.0 * eps + 2.0 * eta * eta / eps;
        assert!((s.delta_i - exact).abs() < 1e-14, "{} vs {exact}", s.delta_i);
        assert!((s.predicted - exact).abs() < 1e-15);
        assert_eq!(s.plan.trace(1.0).unwrap().len(), 2);
    }

    #[test]
    fn zero_shift() {
        let s = shear_competitor(&segment(), 0.0, 0.2, 1, 0.5).unwrap();
        assert!((s.delta_i - (2f64.sqrt() - 1.0) * 0.4).abs() < 1e-14);
        let mu = MeasureData::Atomic(s.plan.trace(1.0).unwrap());
        let tab = FourierTable::of_measure(&mu, 4).unwrap();
        let moved = s.transform(&tab).unwrap();
        assert_eq!(moved.entries().collect::<Vec<_>>(), tab.entries().collect::<Vec<_>>());
    }

    #[test]
    fn trace_transform_matches_plan() {
        let s = shear_competitor(&segment(), 0.05, 0.2, 0, 0.5).unwrap();
        let old = FourierTable::of_measure(&MeasureData::Atomic(segment().trace(1.0).unwrap()), 6).unwrap();
        let new = FourierTable::of_measure(&MeasureData::Atomic(s.plan.trace(1.0).unwrap()), 6).unwrap();
        let moved = s.transform(&old).unwrap();
        for ((_, a), (_, b)) in new.entries().zip(moved.entries()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn epsilon_checked() {
        assert!(shear_competitor(&segment(), 0.1, 1.0, 0, 0.5).is_err());
    }
}
