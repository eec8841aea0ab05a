use super::simplex::{solve_transport, SparsePlan};
use crate::error::{invalid, Error, Result};
use crate::model::{displacement, Atom, DiscreteMeasure, Tie, TorusPoint, MERGE_TOL};

/// Largest grid side accepted by [`wasserstein_to_lebesgue_2d`].
pub const MAX_GRID: usize = 512;

/// `⟦x - y⟧²`.
pub fn sq_dist(x: &TorusPoint<f64>, y: &TorusPoint<f64>) -> f64 {
    let d = displacement(x, y, Tie::Positive);
    d[0] * d[0] + d[1] * d[1]
}

/// Optimal vertex plan between two discrete measures for the cost `⟦x - y⟧²`.
pub fn w2_periodic_discrete(l1: &DiscreteMeasure<f64>, l2: &DiscreteMeasure<f64>) -> Result<SparsePlan> {
    if l1.dim() != l2.dim() {
        return Err(Error::DimensionMismatch(l1.dim(), l2.dim()));
    }
    let a: Vec<f64> = l1.atoms().iter().map(|x| x.mass).collect();
    let b: Vec<f64> = l2.atoms().iter().map(|x| x.mass).collect();
    let (xa, xb) = (l1.atoms(), l2.atoms());
    solve_transport(&a, &b, |i, j| sq_dist(&xa[i].pos, &xb[j].pos))
}

/// Pushes the plan forward to `x + s ⟦y - x⟧` (positive lift on antipodal ties).
pub fn mccann_interpolate(
    plan: &SparsePlan,
    l1: &DiscreteMeasure<f64>,
    l2: &DiscreteMeasure<f64>,
    s: f64,
) -> Result<DiscreteMeasure<f64>> {
    if !(0.0..=1.0).contains(&s) {
        return invalid(format!("interpolation parameter {s} outside [0, 1]"));
    }
    if s == 0.0 {
        return Ok(l1.clone());
    }
    if s == 1.0 {
        return Ok(l2.clone());
    }
    let mut atoms = Vec::with_capacity(plan.entries.len());
    for &(i, j, m) in &plan.entries {
        let (x, y) = (l1.atoms().get(i), l2.atoms().get(j));
        let (Some(x), Some(y)) = (x, y) else {
            return invalid("plan refers to a missing atom");
        };
        let d = displacement(&x.pos, &y.pos, Tie::Positive);
        atoms.push(Atom { pos: x.pos.translate(&[s * d[0], s * d[1]][..l1.dim()]), mass: m });
    }
    DiscreteMeasure::merged(l1.dim(), atoms, MERGE_TOL)
}

/// The `M × M` grid of cell centers with masses `mass / M²`.
pub fn grid_measure(m: usize, mass: f64) -> DiscreteMeasure<f64> {
    let w = mass / (m * m) as f64;
    let mut atoms = Vec::with_capacity(m * m);
    for i in 0..m {
        for j in 0..m {
            let p = TorusPoint::new2((i as f64 + 0.5) / m as f64, (j as f64 + 0.5) / m as f64);
            atoms.push(Atom { pos: p, mass: w });
        }
    }
    DiscreteMeasure::new(2, atoms).expect("grid centers are distinct")
}

/// Discrete proxy for `W²_per(σ, σ(Q)·1)`: transport to the `M × M` grid of cell centers.
pub fn wasserstein_to_lebesgue_2d(sigma: &DiscreteMeasure<f64>, m: usize) -> Result<f64> {
    if sigma.dim() != 2 {
        return Err(Error::DimensionMismatch(sigma.dim(), 2));
    }
    if m < 8 {
        return invalid("grid resolution must be at least 8");
    }
    if m > MAX_GRID {
        return Err(Error::TableTooLarge((m * m) as u128));
    }
    let g = grid_measure(m, sigma.total_mass());
    Ok(w2_periodic_discrete(sigma, &g)?.cost)
}

/// Richardson extrapolation of [`wasserstein_to_lebesgue_2d`] from `M/2` and
/// `M`, assuming an `M^{-2}` discretization error.
pub fn wasserstein_to_lebesgue_2d_extrapolated(sigma: &DiscreteMeasure<f64>, m: usize) -> Result<f64> {
    if m % 2 != 0 || m < 16 {
        return invalid("extrapolation needs an even M >= 16");
    }
    let fine = wasserstein_to_lebesgue_2d(sigma, m)?;
    let coarse = wasserstein_to_lebesgue_2d(sigma, m / 2)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m1(xs: &[(f64, f64)]) -> DiscreteMeasure<f64> {
        DiscreteMeasure::new(1, xs.iter().map(|&(x, m)| Atom { pos: TorusPoint::new1(x), mass: m }).collect()).unwrap()
    }

    #[test]
    fn examples() {
        let p = w2_periodic_discrete(&m1(&[(0.0, 1.0)]), &m1(&[(0.4, 1.0)])).unwrap();
        assert!((p.cost - 0.16).abs() < 1e-15);
        assert_eq!(p.support_size(), 1);
        let a = m1(&[(0.0, 0.5), (0.5, 0.5)]);
        let b = m1(&[(0.25, 0.5), (0.75, 0.5)]);
        let p = w2_periodic_discrete(&a, &b).unwrap();
        assert!((p.cost - 0.0625).abs() < 1e-15);
        assert!(p.support_size() <= 3);
    }

    #[test]
    fn mccann_examples() {
        let a = m1(&[(0.0, 1.0)]);
        let b = m1(&[(0.4, 1.0)]);
        let p = w2_periodic_discrete(&a, &b).unwrap();
        assert_eq!(mccann_interpolate(&p, &a, &b, 0.0).unwrap(), a);
        let mid = mccann_interpolate(&p, &a, &b, 0.5).unwrap();
        assert!((mid.atoms()[0].pos.coord(0) - 0.2).abs() < 1e-15);
        assert!(mccann_interpolate(&p, &a, &b, 1.5).is_err());
        // antipodal pair moves in the positive direction
        let c = m1(&[(0.5, 1.0)]);
        let p = w2_periodic_discrete(&a, &c).unwrap();
        let q = mccann_interpolate(&p, &a, &c, 0.5).unwrap();
        assert!((q.atoms()[0].pos.coord(0) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn lebesgue_proxies() {
        let g = grid_measure(16, 1.0);
        assert!(wasserstein_to_lebesgue_2d(&g, 16).unwrap().abs() < 1e-15);
        let center = DiscreteMeasure::dirac(TorusPoint::new2(0.5, 0.5), 1.0);
        let w = wasserstein_to_lebesgue_2d(&center, 16).unwrap();
        assert!((w - (1.0 / 6.0 - 1.0 / (6.0 * 256.0))).abs() < 1e-14);
        let e = wasserstein_to_lebesgue_2d_extrapolated(&center, 32).unwrap();
        assert!((e - 1.0 / 6.0).abs() < 1e-13);
        assert!(wasserstein_to_lebesgue_2d(&center, 4).is_err());
    }
}
