mod common;

use branchlab::constructions::{building_block, Cube};
use branchlab::model::*;
use branchlab::transport::w2_periodic_discrete;
use branchlab::Plan;
use common::random_measure;
use proptest::prelude::*;

fn block(seed: u64, n: usize, m: usize, horizon: f64) -> Plan {
    let cube = Cube::new(TorusPoint::new2(0.0, 0.0), 1.0).unwrap();
    let a = random_measure(seed, n, 2, 1.0);
    let b = random_measure(seed + 1, m, 2, 1.0);
    building_block(&cube, horizon, &a, &b).unwrap().0
}

fn close(a: &EnergyBreakdown<f64>, b: &EnergyBreakdown<f64>, tol: f64) -> bool {
    (a.perimeter - b.perimeter).abs() <= tol * a.perimeter.max(1.0) && (a.kinetic - b.kinetic).abs() <= tol * a.kinetic.max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn additivity(seed in 0u64..5000, n in 1usize..6, m in 1usize..6, u in 0.0f64..1.0, v in 0.0f64..1.0) {
        let p = block(seed, n, m, 0.5);
        let (lo, hi) = if u < v { (u, v) } else { (v, u) };
        let (a, b, c) = (-0.5, -0.5 + lo.max(1e-6), -0.5 + hi.max(lo + 1e-6).min(1.0) );
        let c = if c <= b { 0.5 } else { c.min(0.5) };
        let whole = internal_energy(&p, a, c, 0.5).unwrap();
        let left = internal_energy(&p, a, b, 0.5).unwrap();
        let right = internal_energy(&p, b, c, 0.5).unwrap();
        let sum = EnergyBreakdown::new(left.perimeter + right.perimeter, left.kinetic + right.kinetic, 0.0);
        prop_assert!(close(&whole, &sum, 1e-12));
    }

    #[test]
    fn translation_invariance(seed in 0u64..5000, dx in 0.0f64..1.0, dy in 0.0f64..1.0) {
        let p = block(seed, 4, 3, 0.3);
        let e0 = internal_energy(&p, -0.3, 0.3, 0.5).unwrap();
        let e1 = internal_energy(&p.translated(&[dx, dy]), -0.3, 0.3, 0.5).unwrap();
        prop_assert!(close(&e0, &e1, 1e-12));
        let m0 = internal_energy(&p.mirrored(), -0.3, 0.3, 0.5).unwrap();
        prop_assert!(close(&e0, &m0, 1e-12));
    }

    #[test]
    fn subsystems_cost_less(seed in 0u64..5000, pick in 0usize..1000) {
        let p = block(seed, 5, 5, 0.4);
        let node = pick % p.nodes().len();
        let sub = p.forward_subsystem(node).unwrap();
        prop_assert!(sub.validate().is_empty());
        if !sub.edges().is_empty() {
            let (es, ep) = (internal_energy(&sub, -0.4, 0.4, 0.5).unwrap(), internal_energy(&p, -0.4, 0.4, 0.5).unwrap());
            prop_assert!(es.perimeter <= ep.perimeter * (1.0 + 1e-12));
            prop_assert!(es.kinetic <= ep.kinetic * (1.0 + 1e-12));
        }
    }

    #[test]
    fn trace_mass_is_constant(seed in 0u64..5000, t in -0.5f64..0.5) {
        let p = block(seed, 3, 6, 0.5);
        prop_assert!((p.trace(t).unwrap().total_mass() - 1.0).abs() < 1e-12);
        prop_assert!(p.validate().is_empty());
    }

    #[test]
    fn single_edge_saturates_transport_bound(x0 in 0.0f64..1.0, x1 in 0.0f64..1.0, flux in 0.1f64..2.0, t0 in -1.0f64..0.0, t1 in 0.01f64..1.0) {
        let mut b = PlanBuilder::new();
        let a = b.node(t0, TorusPoint::new1(x0));
        let c = b.node(t1, TorusPoint::new1(x1));
        b.edge(a, c, flux);
        let p = b.build(1, 1.0).unwrap();
        let e = internal_energy(&p, t0, t1, 0.0).unwrap();
        let w = w2_periodic_discrete(&p.trace(t0).unwrap(), &p.trace(t1).unwrap()).unwrap().cost;
        prop_assert!((e.kinetic - w / (t1 - t0)).abs() < 1e-12 * e.kinetic.max(1.0));
    }
}

fn y_tree<S: branchlab::Scalar>() -> BranchedPlan<S> {
    let l = |x: f64| S::lit(x);
    let mut b = PlanBuilder::new();
    let r = b.node(l(-1.0), TorusPoint::new2(l(0.5), l(0.5)));
    let s = b.node(l(0.0), TorusPoint::new2(l(0.5), l(0.5)));
    let u = b.node(l(1.0), TorusPoint::new2(l(0.25), l(0.75)));
    let v = b.node(l(1.0), TorusPoint::new2(l(0.875), l(0.5)));
    b.edge(r, s, l(1.0));
    b.edge(s, u, l(0.25));
    b.edge(s, v, l(0.75));
    b.build(2, l(1.0)).unwrap()
}

#[test]
fn single_precision_agrees() {
    let (p32, p64) = (y_tree::<f32>(), y_tree::<f64>());
    for (a, b) in [(-1.0, 1.0), (-0.5, 0.25), (0.1, 0.9)] {
        let e32 = internal_energy(&p32, a as f32, b as f32, 0.5).unwrap();
        let e64 = internal_energy(&p64, a, b, 0.5).unwrap();
        assert!((e32.perimeter as f64 - e64.perimeter).abs() < 1e-6 * e64.perimeter);
        assert!((e32.kinetic as f64 - e64.kinetic).abs() < 1e-6 * e64.kinetic.max(1e-3));
    }
    assert_eq!(p32.trace(0.5).unwrap().len(), 2);
}
