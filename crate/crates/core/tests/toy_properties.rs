use branchlab::toy1d::*;
use proptest::prelude::*;

const DEPTH: usize = 2;
const GRID: usize = 12;

#[test]
fn scaling_identity() {
    for (phi, t, l) in [(1.0, 0.5, 10.0), (0.5, 0.2, 40.0), (1.0, 0.01, 0.5)] {
        let p = SubtreeProblem::centered(phi, t, l).unwrap();
        let e = solve_e(&p, DEPTH, GRID).unwrap().energy;
        for r in [0.5, 2.0] {
            let (q, factor) = rescale(&p, r).unwrap();
            let eq = solve_e(&q, DEPTH, GRID).unwrap().energy;
            assert!((e - factor * eq).abs() < 1e-9 * e, "r={r}: {e} vs {}", factor * eq);
        }
    }
}

#[test]
fn offset_identity_and_lower_bound() {
    for (t, l) in [(0.5, 10.0), (1.0, 20.0), (0.1, 1.0)] {
        let base = solve_e(&SubtreeProblem::centered(1.0, t, l).unwrap(), DEPTH, GRID).unwrap();
        for x in [0.1, -0.3] {
            let p = SubtreeProblem::new(1.0, t, l, x).unwrap();
            let s = solve_e(&p, DEPTH, GRID).unwrap();
            assert!((s.energy - (base.energy + p.offset_energy())).abs() < 1e-12 * s.energy);
            assert!(s.energy >= s.lower_bound);
        }
        assert!(base.energy >= base.lower_bound);
        assert!(base.energy <= SubtreeProblem::centered(1.0, t, l).unwrap().segment_energy() * (1.0 + 1e-15));
    }
}

#[test]
fn children_respect_threshold() {
    for (t, l) in [(0.5, 10.0), (1.0, 20.0), (0.3, 30.0)] {
        let s = solve_e(&SubtreeProblem::centered(1.0, t, l).unwrap(), DEPTH, GRID).unwrap();
        if s.pruning_overridden {
            continue;
        }
        for (rest, lam, f) in s.tree.splits(t, l) {
            assert!(f >= child_threshold(1.0, rest, lam), "fraction {f} below threshold");
        }
    }
}

#[test]
fn toy_outputs_have_monotone_fields() {
    for (l, t) in [(10.0, 0.5), (5.0, 0.1), (0.1, 0.01)] {
        let s = solve_toy(l, t, DEPTH, GRID).unwrap();
        let field = LagrangianField::from_plan(&s.plan, l, 64).unwrap();
        field.check_monotone().unwrap();
        assert!(check_cone_property(&s.plan, l).unwrap().is_empty());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn segment_regime_has_no_branching(lt in -6.0f64..0.0, ratio in -2.0f64..2.0) {
        // λ min(1, T) ≤ 1e-2
        let t = 10f64.powf(lt);
        let l = (10f64.powf(ratio) * t).min(1e-2 / t.min(1.0));
        let p = SubtreeProblem::centered(1.0, t, l).unwrap();
        let s = solve_e(&p, DEPTH, GRID).unwrap();
        prop_assert!(s.tree.is_segment());
        prop_assert!((s.energy - p.segment_energy()).abs() <= 1e-15 * s.energy);
    }

    #[test]
    fn segment_count_minimizes(l in 1e-3f64..10.0, lt in -4.0f64..-1.0) {
        let t = 10f64.powf(lt);
        let (n, e) = optimal_segment_count(l, t);
        for m in 1..(3 * n + 3) {
            prop_assert!(segment_energy(m, l, t) >= e);
        }
    }
}
