mod common;

use branchlab::analysis::{local_energies, local_energy_exponent, quantization_check, ScalingFit};
use branchlab::constructions::*;
use branchlab::model::*;
use common::random_measure;
use proptest::prelude::*;

fn in_cube(mu: &DiscreteMeasure<f64>, cube: &Cube) -> DiscreteMeasure<f64> {
    let atoms = mu
        .atoms()
        .iter()
        .map(|a| {
            let c = cube.corner;
            let s = cube.side * 0.999;
            Atom { pos: TorusPoint::new2(c.coord(0) + s * a.pos.coord(0), c.coord(1) + s * a.pos.coord(1)), mass: a.mass }
        })
        .collect();
    DiscreteMeasure::merged(2, atoms, MERGE_TOL).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn blocks_are_valid_and_certified(seed in 0u64..5000, n in 1usize..12, m in 1usize..12, side in 0.01f64..1.0, t in 0.001f64..5.0) {
        let cube = Cube::new(TorusPoint::new2(0.7, 0.1), side).unwrap();
        let a = in_cube(&random_measure(seed, n, 2, 0.3), &cube);
        let b = in_cube(&random_measure(seed + 1, m, 2, 0.3), &cube);
        let (plan, cert) = building_block(&cube, t, &a, &b).unwrap();
        prop_assert!(plan.validate().is_empty());
        prop_assert!(cert.pass);
        prop_assert!(w2(&plan.trace(t).unwrap(), &b) < 1e-20);
        prop_assert!(w2(&plan.trace(-t).unwrap(), &a) < 1e-20);
    }

    #[test]
    fn shear_increment_is_exact(seed in 0u64..5000, eta in 0.0f64..0.05, frac in 0.05f64..0.9) {
        let cube = Cube::new(TorusPoint::new2(0.0, 0.0), 1.0).unwrap();
        let a = random_measure(seed, 4, 2, 1.0);
        let b = random_measure(seed + 1, 4, 2, 1.0);
        let (plan, _) = building_block(&cube, 1.0, &a, &b).unwrap();
        let s = shear_competitor(&plan, eta, frac, 0, 0.5).unwrap();
        prop_assert!(s.plan.validate().is_empty());
        prop_assert!((s.delta_i - s.predicted).abs() < 1e-10 * s.predicted.abs().max(1.0));
        prop_assert!(s.certificate.pass);
    }
}

fn w2(a: &DiscreteMeasure<f64>, b: &DiscreteMeasure<f64>) -> f64 {
    branchlab::transport::w2_periodic_discrete(a, b).unwrap().cost
}

#[test]
fn dyadic_stage_supports() {
    for t in [1e-4, 1e-3, 1e-2] {
        for seed in 0..3 {
            let a = random_measure(10 + seed, 10, 2, 1.0);
            let b = random_measure(20 + seed, 10, 2, 1.0);
            let d = dyadic_interpolation(&a, &b, t, 0.3, 0.5).unwrap();
            assert!(d.pass());
            for st in &d.stages {
                assert!(st.alive <= st.m0 + st.m1);
            }
        }
    }
}

#[test]
fn dyadic_local_energy_exponent() {
    let a = random_measure(1, 10, 2, 1.0);
    let b = random_measure(2, 10, 2, 1.0);
    let t = 1e-2;
    let d = dyadic_interpolation(&a, &b, t, 0.3, 0.5).unwrap();
    let eps: Vec<f64> = (0..6).map(|i| t * 10f64.powf(-0.5 * i as f64)).collect();
    let fit = local_energy_exponent(&local_energies(&d.plan, &eps, 0.5).unwrap()).unwrap();
    assert!(fit.exponent >= 1.0 / 3.0 - 0.05, "{fit:?}");
}

#[test]
fn nonuniform_energy_exponent() {
    let ts = [1e-4, 3e-4, 1e-3, 3e-3, 1e-2];
    let pts: Vec<(f64, f64)> = ts
        .iter()
        .map(|&t| {
            let p = choose_parameters(1.0, t).unwrap();
            let s = nonuniform_branching(p.n, p.r, t).unwrap();
            (t, s.energy(1.0).unwrap().0.total)
        })
        .collect();
    let fit = ScalingFit::least_squares(&pts).unwrap();
    assert!((fit.exponent - 3.0 / 7.0).abs() < 0.05, "{fit:?}");
}

#[test]
fn quantization_invariant_under_relabeling() {
    let leb = MeasureData::Grid(GridDensity::lebesgue(2, 4).unwrap());
    let a = quantization_check(&leb, &[0.5, 0.25, 0.25], 2.0, 3).unwrap();
    let b = quantization_check(&leb, &[0.25, 0.25, 0.5], 2.0, 3).unwrap();
    assert!((a.ratio - b.ratio).abs() < 1e-6 * a.ratio, "{} vs {}", a.ratio, b.ratio);
    for n in [1usize, 4, 9] {
        let q = quantization_check(&leb, &vec![1.0 / n as f64; n], 2.0, 3).unwrap();
        assert!((q.bound - 1.0 / n as f64).abs() < 1e-15);
        assert!(q.ratio <= 1.0 / 6.0 + 1e-9, "N={n}: {}", q.ratio);
    }
}
