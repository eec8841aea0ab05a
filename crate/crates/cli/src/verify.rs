//! Quick invariant checks, one line per check.

use crate::commands::{plan_ok, random_probability};
use crate::Suite;
use branchlab::analysis::{box_counting_dimension, dim_bounds_from_beta};
use branchlab::constructions::{building_block, dyadic_interpolation, uniform_branching, Cube};
use branchlab::model::{internal_energy, toy_energy, GridDensity, MeasureData, PlanBuilder, TorusPoint};
use branchlab::sobolev::{h_negative_norm_sq, semigroup_norm_sq, Complex64, FourierTable, TailModel};
use branchlab::toy1d::{check_cone_property, equipartition_residual, segment_energy, solve_toy, symmetric_plan, SubtreeTree};
use branchlab::transport::{solve_transport, w2_periodic_discrete, w2_to_lebesgue_1d};
use branchlab::{Measure, Plan};
use num_rational::Ratio;
use std::fmt::Write as _;

pub struct Report {
    pub text: String,
    pub failures: usize,
}

type Check = (&'static str, fn(u64) -> Result<bool, String>);

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * b.abs().max(1e-300)
}

fn y_plan() -> Result<Plan, String> {
    let mut b = PlanBuilder::new();
    let root = b.node(0.0, TorusPoint::new2(0.5, 0.5));
    let lo = b.node(-0.2, TorusPoint::new2(0.5, 0.5));
    b.edge(lo, root, 1.0);
    for (x, m) in [(0.3, 0.25), (0.8, 0.75)] {
        let leaf = b.node(0.2, TorusPoint::new2(x, 0.6));
        b.edge(root, leaf, m);
    }
    b.build(2, 0.2).map_err(err)
}

fn model_valid(_: u64) -> Result<bool, String> {
    Ok(plan_ok(&y_plan()?))
}

fn model_trace_mass(_: u64) -> Result<bool, String> {
    let p = y_plan()?;
    for t in [-0.2, -0.1, 0.05, 0.2] {
        if !close(p.trace(t).map_err(err)?.total_mass(), 1.0, 1e-12) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn model_additive(_: u64) -> Result<bool, String> {
    let p = y_plan()?;
    let whole = internal_energy(&p, -0.2, 0.2, 0.5).map_err(err)?;
    let a = internal_energy(&p, -0.2, 0.07, 0.5).map_err(err)?;
    let b = internal_energy(&p, 0.07, 0.2, 0.5).map_err(err)?;
    Ok(close(a.internal() + b.internal(), whole.internal(), 1e-12))
}

fn transport_closed_form(_: u64) -> Result<bool, String> {
    for n in [1usize, 2, 4, 8] {
        let pairs: Vec<(Vec<f64>, f64)> = (0..n).map(|i| (vec![(i as f64 + 0.5) / n as f64], 1.0 / n as f64)).collect();
        let refs: Vec<(&[f64], f64)> = pairs.iter().map(|(x, m)| (x.as_slice(), *m)).collect();
        let m = Measure::from_pairs(1, &refs).map_err(err)?;
        let w = w2_to_lebesgue_1d(&m).map_err(err)?;
        if (w - 1.0 / (12.0 * (n * n) as f64)).abs() > 1e-9 {
            return Ok(false);
        }
    }
    Ok(true)
}

fn transport_sparse(seed: u64) -> Result<bool, String> {
    for k in 0..5 {
        let a = random_probability(seed, 100 + 2 * k, 12, 2).map_err(|_| "measure".to_string())?;
        let b = random_probability(seed, 101 + 2 * k, 9, 2).map_err(|_| "measure".to_string())?;
        let ab = w2_periodic_discrete(&a, &b).map_err(err)?;
        let ba = w2_periodic_discrete(&b, &a).map_err(err)?;
        if ab.support_size() > a.len() + b.len() - 1 || !close(ab.cost, ba.cost, 1e-9) {
            return Ok(false);
        }
    }
    let p = solve_transport(&[0.5, 0.5], &[1.0], |i, _| i as f64).map_err(err)?;
    Ok(close(p.cost, 0.5, 1e-15))
}

fn cos_mode() -> Result<FourierTable, String> {
    let h = Complex64::new(0.5, 0.0);
    FourierTable::from_entries(1, 4, &[([1, 0], h), ([-1, 0], h)], TailModel::Zero).map_err(err)
}

fn sobolev_two_mode(_: u64) -> Result<bool, String> {
    let t = cos_mode()?;
    let n = h_negative_norm_sq(&t, 0.5).map_err(err)?;
    let s = semigroup_norm_sq(&t, 0.5).map_err(err)?;
    Ok(n.value == 0.5 && n.tail_bound == 0.0 && (s - 0.25).abs() < 1e-15)
}

fn sobolev_lebesgue_zero(_: u64) -> Result<bool, String> {
    let g = MeasureData::Grid(GridDensity::lebesgue(2, 8).map_err(err)?);
    let t = FourierTable::of_deviation(&g, 8).map_err(err)?;
    Ok(h_negative_norm_sq(&t, 0.5).map_err(err)?.value < 1e-24)
}

fn constructions_block(seed: u64) -> Result<bool, String> {
    let a = random_probability(seed, 0, 10, 2).map_err(|_| "measure".to_string())?;
    let b = random_probability(seed, 1, 10, 2).map_err(|_| "measure".to_string())?;
    let cube = Cube::new(TorusPoint::origin(2), 1.0).map_err(err)?;
    let (plan, cert) = building_block(&cube, 0.1, &a, &b).map_err(err)?;
    let ends = w2_periodic_discrete(&plan.trace(0.1).map_err(err)?, &b).map_err(err)?.cost;
    Ok(plan_ok(&plan) && cert.pass && ends < 1e-18)
}

fn constructions_uniform(_: u64) -> Result<bool, String> {
    let s = uniform_branching(4, 0.05).map_err(err)?;
    Ok(plan_ok(&s.plan) && s.certificate.pass)
}

fn constructions_dyadic(seed: u64) -> Result<bool, String> {
    let a = random_probability(seed, 0, 10, 2).map_err(|_| "measure".to_string())?;
    let b = random_probability(seed, 1, 10, 2).map_err(|_| "measure".to_string())?;
    let d = dyadic_interpolation(&a, &b, 1e-2, 0.3, 0.5).map_err(err)?;
    let stages = d.stages.iter().all(|s| s.alive <= s.m0 + s.m1);
    Ok(d.pass() && stages && plan_ok(&d.plan))
}

fn toy_segment(_: u64) -> Result<bool, String> {
    let s = solve_toy(0.1, 0.01, 3, 32).map_err(err)?;
    Ok(s.segments_if_pure == Some(1) && (s.e_upper - segment_energy(1, 0.1, 0.01)).abs() < 1e-9)
}

fn toy_cone(_: u64) -> Result<bool, String> {
    let s = solve_toy(10.0, 0.5, 2, 16).map_err(err)?;
    let v = check_cone_property(&s.plan, 10.0).map_err(err)?;
    Ok(v.is_empty() && s.e_lower <= s.e_upper)
}

fn toy_equipartition(_: u64) -> Result<bool, String> {
    let (lambda, horizon, n) = (1.0, 0.01, 3);
    let plan = symmetric_plan(&SubtreeTree::Segment, n, horizon, lambda).map_err(err)?;
    let eq = equipartition_residual(&plan);
    let e = toy_energy(&plan, lambda).map_err(err)?;
    Ok(eq.lambda_bar == n as f64 && eq.max_deviation == 0.0 && close(e.total, segment_energy(n, lambda, horizon), 1e-12))
}

fn analysis_rational(_: u64) -> Result<bool, String> {
    let r = |a, b| Ratio::<i64>::new(a, b);
    let (f, g) = dim_bounds_from_beta(r(3, 7)).map_err(err)?;
    let (f3, g3) = dim_bounds_from_beta(r(1, 3)).map_err(err)?;
    Ok(f == r(8, 5) && g == r(8, 5) && f3 == r(3, 2) && g3 == r(2, 1))
}

fn analysis_boxcount(_: u64) -> Result<bool, String> {
    let g = MeasureData::Grid(GridDensity::lebesgue(2, 64).map_err(err)?);
    let fit = box_counting_dimension(&g, &[0.5, 0.25, 0.125, 0.0625]).map_err(err)?;
    Ok((fit.exponent - 2.0).abs() < 1e-2)
}

fn checks(suite: Suite) -> Vec<(&'static str, Vec<Check>)> {
    let all: Vec<(Suite, &'static str, Vec<Check>)> = vec![
        (
            Suite::Model,
            "model",
            vec![("valid_plan", model_valid), ("trace_mass", model_trace_mass), ("additivity", model_additive)],
        ),
        (
            Suite::Transport,
            "transport",
            vec![("equidistant_atoms", transport_closed_form), ("sparse_symmetric", transport_sparse)],
        ),
        (Suite::Sobolev, "sobolev", vec![("two_mode", sobolev_two_mode), ("lebesgue_zero", sobolev_lebesgue_zero)]),
        (
            Suite::Constructions,
            "constructions",
            vec![("block", constructions_block), ("uniform", constructions_uniform), ("dyadic", constructions_dyadic)],
        ),
        (
            Suite::Toy1d,
            "toy1d",
            vec![("segment_regime", toy_segment), ("cone", toy_cone), ("equipartition", toy_equipartition)],
        ),
        (Suite::Analysis, "analysis", vec![("rational_exponents", analysis_rational), ("box_count", analysis_boxcount)]),
    ];
    all.into_iter().filter(|(s, _, _)| suite == Suite::All || *s == suite).map(|(_, n, c)| (n, c)).collect()
}

pub fn run(suite: Suite, seed: u64) -> Report {
    let mut text = format!("# seed={seed}\n");
    let mut failures = 0;
    for (group, list) in checks(suite) {
        for (name, f) in list {
            let (ok, note) = match f(seed) {
                Ok(ok) => (ok, String::new()),
                Err(e) => (false, format!(" ({e})")),
            };
            failures += usize::from(!ok);
            let _ = writeln!(text, "{} {group}/{name}{note}", if ok { "PASS" } else { "FAIL" });
        }
    }
    Report { text, failures }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_pass() {
        let r = run(Suite::All, 0);
        assert_eq!(r.failures, 0, "{}", r.text);
        assert_eq!(r.text.lines().filter(|l| l.starts_with("PASS")).count(), 15);
    }
}
