use crate::error::{invalid, Result};
use crate::model::{periodic_distance, Atom, DiscreteMeasure};
use rayon::prelude::*;

const MAX_LEVEL: i32 = 60;

/// Dyadic radii `2^{-j} ≤ 1` down to half the smallest distance between two
/// atoms (down to `2^{-60}` for a single atom). Below that scale every ball
/// around an atom holds the atom alone.
pub fn regularity_radii(sigma: &DiscreteMeasure<f64>) -> Vec<f64> {
    let atoms = sigma.atoms();
    let gap = (0..atoms.len())
        .into_par_iter()
        .map(|i| {
            (i + 1..atoms.len())
                .map(|j| periodic_distance(&atoms[i].pos, &atoms[j].pos).unwrap_or(f64::INFINITY))
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| f64::INFINITY, f64::min);
    let floor = if gap.is_finite() { 0.5 * gap } else { 0.0 };
    (0..=MAX_LEVEL).map(|j| (-(j as f64)).exp2()).take_while(|&r| r >= floor).collect()
}

/// `σ(B_r(x)) ≤ M r^α` at every radius, with open balls.
pub fn local_mass_ok(sigma: &DiscreteMeasure<f64>, x: usize, radii: &[f64], alpha: f64, m: f64) -> bool {
    let atoms = sigma.atoms();
    let d: Vec<f64> = atoms.iter().map(|a| periodic_distance(&atoms[x].pos, &a.pos).unwrap_or(f64::INFINITY)).collect();
    radii.iter().all(|&r| {
        let mass: f64 = atoms.iter().zip(&d).filter(|(_, &dist)| dist < r).map(|(a, _)| a.mass).sum();
        mass <= m * r.powf(alpha) * (1.0 + 1e-12)
    })
}

/// Restriction of `σ` to the atoms satisfying `σ(B_r(x)) ≤ M r^α` at every
/// radius of [`regularity_radii`]. The result satisfies
/// `σ̃(B_r(x)) ≤ 2^α M r^α` for every center.
pub fn prune_alpha_regular(sigma: &DiscreteMeasure<f64>, alpha: f64, m: f64) -> Result<DiscreteMeasure<f64>> {
    if !(alpha > 0.0 && alpha <= sigma.dim() as f64) {
        return invalid("α must lie in (0, d]");
    }
    if !(m > 0.0) {
        return invalid("M must be positive");
    }
    let radii = regularity_radii(sigma);
    let keep: Vec<bool> = (0..sigma.len()).into_par_iter().map(|i| local_mass_ok(sigma, i, &radii, alpha, m)).collect();
    let atoms: Vec<Atom<f64>> = sigma.atoms().iter().zip(&keep).filter(|(_, &k)| k).map(|(a, _)| *a).collect();
    DiscreteMeasure::new(sigma.dim(), atoms)
}
