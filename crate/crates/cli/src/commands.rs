use crate::output::{csv, emit, json, json_with_plan, read};
use crate::{verify, Cli, Command, Failure, Kind, SweepCommand, Vary};
use branchlab::analysis::{box_counting_dimension, ScalingFit};
use branchlab::constants::C_DYADIC;
use branchlab::constructions::{
    building_block, choose_parameters, dyadic_interpolation, nonuniform_branching, uniform_branching, Certificate,
    Cube, ScalingPlan,
};
use branchlab::model::{Atom, MeasureData, TorusPoint, MERGE_TOL};
use branchlab::rng::stream;
use branchlab::sobolev::{h_negative_norm_sq, FourierTable};
use branchlab::toy1d::{check_cone_property, equipartition_residual, solve_toy};
use branchlab::transport::w2_periodic_discrete;
use branchlab::{Measure, Plan};
use rand::Rng;
use rayon::prelude::*;
use serde_json::{json, Value};
use std::path::Path;

pub fn run(cli: &Cli) -> Result<(), Failure> {
    let out = cli.out.as_deref();
    let seed = cli.seed;
    match &cli.command {
        Command::SolveToy { lambda, horizon, depth, grid } => {
            let (meta, plan) = solve_toy_json(*lambda, *horizon, *depth, *grid)?;
            emit(out, &json_with_plan(&with_seed(seed, meta), &plan))
        }
        Command::Construct { kind, horizon, lambda, delta, eta, n, r, atoms, mu_minus, mu_plus } => {
            let endpoints = Endpoints { seed, atoms: *atoms, minus: mu_minus.as_deref(), plus: mu_plus.as_deref() };
            let (meta, plan) = construct(*kind, *horizon, *lambda, *delta, *eta, *n, *r, &endpoints)?;
            emit(out, &json_with_plan(&with_seed(seed, meta), &plan))
        }
        Command::Ot { mu, nu } => {
            let a = load_measure(mu)?;
            let b = load_measure(nu)?;
            let plan = w2_periodic_discrete(&a, &b)?;
            let entries: Vec<Value> = plan.entries.iter().map(|&(i, j, m)| json!([i, j, m])).collect();
            let v = json!({"cost": plan.cost, "support_size": plan.support_size(), "entries": entries});
            emit(out, &json(&with_seed(seed, v)))
        }
        Command::Norm { measure, table, gamma, k_max } => {
            let tab = match (measure, table) {
                (Some(m), None) => FourierTable::of_deviation(&MeasureData::Atomic(load_measure(m)?), *k_max)?,
                (None, Some(t)) => FourierTable::from_json(&read(t)?)?,
                _ => return Err(Failure::Usage("give exactly one of --measure, --table".into())),
            };
            let mut rows = Vec::with_capacity(gamma.len());
            for &g in gamma {
                let n = h_negative_norm_sq(&tab, g)?;
                rows.push(vec![g, n.value, n.tail_bound]);
            }
            emit(out, &csv(seed, &["gamma", "value", "tail"], &rows))
        }
        Command::Dim { measure, nonuniform, horizon, lambda, radii } => {
            let (data, radii) = match (measure, nonuniform) {
                (Some(m), false) => {
                    if radii.is_empty() {
                        return Err(Failure::Usage("--radii is required with --measure".into()));
                    }
                    (MeasureData::Atomic(load_measure(m)?), radii.clone())
                }
                (None, true) => {
                    let p = choose_parameters(*lambda, *horizon)?;
                    let s = nonuniform_branching(p.n, p.r, *horizon)?;
                    let radii = if radii.is_empty() { (1..=4).map(|j| p.r.powf(j as f64 / 4.0)).collect() } else { radii.clone() };
                    (MeasureData::Atomic(s.trace_atoms), radii)
                }
                _ => return Err(Failure::Usage("give exactly one of --measure, --nonuniform".into())),
            };
            let fit = box_counting_dimension(&data, &radii)?;
            fit_output(out, seed, &fit.points, &fit)
        }
        Command::Sweep { command, vary, from, to, points, lambda, horizon, depth, grid } => {
            sweep(out, seed, *command, *vary, (*from, *to, *points), *lambda, *horizon, *depth, *grid)
        }
        Command::Verify { suite } => {
            let report = verify::run(*suite, seed);
            emit(out, &report.text)?;
            if report.failures > 0 {
                return Err(Failure::Certification(format!("{} check(s) failed", report.failures)));
            }
            Ok(())
        }
    }
}

fn with_seed(seed: u64, mut v: Value) -> Value {
    if let Value::Object(m) = &mut v {
        m.insert("seed".into(), json!(seed));
    }
    v
}

fn load_measure(path: &Path) -> Result<Measure, Failure> {
    Ok(Measure::from_json(&read(path)?)?)
}

/// Summary of a toy solve and its plan.
pub fn solve_toy_json(lambda: f64, horizon: f64, depth: usize, grid: usize) -> Result<(Value, Plan), Failure> {
    let s = solve_toy(lambda, horizon, depth, grid)?;
    let eq = equipartition_residual(&s.plan);
    let cone = check_cone_property(&s.plan, lambda)?;
    let meta = json!({
        "lambda": lambda,
        "T": horizon,
        "E_upper": s.e_upper,
        "E_lower": s.e_lower,
        "N_segments_if_pure": s.segments_if_pure,
        "roots": s.roots,
        "branchings": s.tree.branchings(),
        "solver_value": s.solver_value,
        "certified": s.certified,
        "depth_limited": s.depth_limited,
        "pruning_overridden": s.pruning_overridden,
        "equipartition": {"lambda_bar": eq.lambda_bar, "max_dev": eq.max_deviation},
        "cone_ok": cone.is_empty(),
    });
    Ok((meta, s.plan))
}

/// Where the dyadic and block constructions take their endpoint measures from.
pub struct Endpoints<'a> {
    pub seed: u64,
    pub atoms: usize,
    pub minus: Option<&'a Path>,
    pub plus: Option<&'a Path>,
}

impl Endpoints<'_> {
    fn get(&self, dim: usize) -> Result<(Measure, Measure), Failure> {
        let one = |path: Option<&Path>, label: u64| -> Result<Measure, Failure> {
            match path {
                Some(p) => load_measure(p),
                None => random_probability(self.seed, label, self.atoms, dim),
            }
        };
        Ok((one(self.minus, 0)?, one(self.plus, 1)?))
    }
}

/// `n` atoms at uniform positions with masses uniform in `[0.1, 1)`, normalized.
pub fn random_probability(seed: u64, label: u64, n: usize, dim: usize) -> Result<Measure, Failure> {
    if n == 0 {
        return Err(Failure::Usage("--atoms must be positive".into()));
    }
    let mut rng = stream(seed, label);
    let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..1.0)).collect();
    let s: f64 = w.iter().sum();
    let atoms = w
        .iter()
        .map(|&m| {
            let pos = if dim == 1 { TorusPoint::new1(rng.gen()) } else { TorusPoint::new2(rng.gen(), rng.gen()) };
            Atom { pos, mass: m / s }
        })
        .collect();
    Ok(Measure::merged(dim, atoms, MERGE_TOL)?)
}

fn certificate_json(c: &Certificate) -> Value {
    json!({"perimeter": c.perimeter, "kinetic": c.kinetic, "value": c.value, "bound": c.bound, "constant": c.constant, "pass": c.pass})
}

fn scaling_json(s: ScalingPlan, extra: Value) -> (Value, Plan) {
    let mut v = json!({
        "N": s.n,
        "r": s.r,
        "T": s.horizon,
        "certificate": certificate_json(&s.certificate),
    });
    if let (Value::Object(m), Value::Object(e)) = (&mut v, extra) {
        m.extend(e);
    }
    (v, s.plan)
}

#[allow(clippy::too_many_arguments)]
pub fn construct(
    kind: Kind,
    horizon: f64,
    lambda: f64,
    delta: f64,
    eta: f64,
    n: Option<usize>,
    r: Option<f64>,
    endpoints: &Endpoints,
) -> Result<(Value, Plan), Failure> {
    match kind {
        Kind::Uniform => {
            let n = n.unwrap_or_else(|| horizon.powf(-2.0 / 3.0).round().max(1.0) as usize);
            let s = uniform_branching(n, horizon)?;
            Ok(scaling_json(s, json!({"kind": "uniform"})))
        }
        Kind::Nonuniform => {
            let p = choose_parameters(lambda, horizon)?;
            let (n, r) = (n.unwrap_or(p.n), r.unwrap_or(p.r));
            let s = nonuniform_branching(n, r, horizon)?;
            let (e, tail) = s.energy(lambda)?;
            Ok(scaling_json(
                s,
                json!({
                    "kind": "nonuniform",
                    "lambda": lambda,
                    "regime": p.regime.label(),
                    "energy": {"perimeter": e.perimeter, "kinetic": e.kinetic, "boundary": e.boundary, "total": e.total, "tail": tail},
                }),
            ))
        }
        Kind::Dyadic => {
            let (a, b) = endpoints.get(2)?;
            let d = dyadic_interpolation(&a, &b, horizon, delta, eta)?;
            let perimeter: f64 = d.halves.iter().map(|h| h.perimeter).sum();
            let kinetic: f64 = d.halves.iter().map(|h| h.kinetic).sum();
            let cert = json!({
                "perimeter": perimeter,
                "kinetic": kinetic,
                "bound": C_DYADIC * horizon.cbrt(),
                "constant": C_DYADIC,
                "pass": d.pass(),
                "halves": d.halves,
            });
            let meta = json!({
                "kind": "dyadic",
                "T": horizon,
                "delta": delta,
                "eta": eta,
                "w2": d.w2,
                "schedule": d.schedule,
                "stages": d.stages,
                "certificate": cert,
            });
            Ok((meta, d.plan))
        }
        Kind::Block => {
            let (a, b) = endpoints.get(2)?;
            let cube = Cube::new(TorusPoint::origin(2), 1.0)?;
            let (plan, cert) = building_block(&cube, horizon, &a, &b)?;
            let cert = cert.require("building block")?;
            Ok((json!({"kind": "block", "T": horizon, "certificate": certificate_json(&cert)}), plan))
        }
    }
}

fn fit_output(out: Option<&Path>, seed: u64, points: &[(f64, f64)], fit: &ScalingFit) -> Result<(), Failure> {
    let rows: Vec<Vec<f64>> = points.iter().map(|&(s, v)| vec![s, v]).collect();
    let table = csv(seed, &["scale", "value"], &rows);
    let summary = json(&json!({"exponent": fit.exponent, "prefactor": fit.prefactor, "r2": fit.r_squared, "seed": seed}));
    match out {
        Some(p) => {
            std::fs::write(p, table)?;
            print!("{summary}");
        }
        None => {
            print!("{table}");
            eprint!("{summary}");
        }
    }
    Ok(())
}

/// `points` log-spaced values from `from` to `to`, both included.
pub fn logspace(from: f64, to: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![from];
    }
    let (a, b) = (from.ln(), to.ln());
    let mut xs: Vec<f64> = (0..points).map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp()).collect();
    xs[0] = from;
    xs[points - 1] = to;
    xs
}

/// One sweep sample: `solve-toy` gives the minimal toy energy, `uniform`
/// the internal energy at `N = round(T^{-2/3})`, `nonuniform` the total
/// energy at the chosen parameters.
pub fn sweep_value(command: SweepCommand, lambda: f64, horizon: f64, depth: usize, grid: usize) -> Result<f64, Failure> {
    Ok(match command {
        SweepCommand::SolveToy => solve_toy(lambda, horizon, depth, grid)?.e_upper,
        SweepCommand::Uniform => {
            let n = horizon.powf(-2.0 / 3.0).round().max(1.0) as usize;
            uniform_branching(n, horizon)?.certificate.value
        }
        SweepCommand::Nonuniform => {
            let p = choose_parameters(lambda, horizon)?;
            nonuniform_branching(p.n, p.r, horizon)?.energy(lambda)?.0.total
        }
    })
}

#[allow(clippy::too_many_arguments)]
fn sweep(
    out: Option<&Path>,
    seed: u64,
    command: SweepCommand,
    vary: Vary,
    range: (f64, f64, usize),
    lambda: f64,
    horizon: f64,
    depth: usize,
    grid: usize,
) -> Result<(), Failure> {
    let (from, to, points) = range;
    if !(from > 0.0 && to > 0.0) || points == 0 {
        return Err(Failure::Usage("--from and --to must be positive and --points at least 1".into()));
    }
    let xs = logspace(from, to, points);
    let values: Vec<f64> = xs
        .par_iter()
        .map(|&x| match vary {
            Vary::Horizon => sweep_value(command, lambda, x, depth, grid),
            Vary::Lambda => sweep_value(command, x, horizon, depth, grid),
        })
        .collect::<Result<_, _>>()?;
    let pts: Vec<(f64, f64)> = xs.into_iter().zip(values).collect();
    let fit = ScalingFit::least_squares(&pts)?;
    fit_output(out, seed, &pts, &fit)
}

/// Shared by `verify`: the plan must be valid.
pub fn plan_ok(p: &Plan) -> bool {
    p.validate().is_empty()
}
