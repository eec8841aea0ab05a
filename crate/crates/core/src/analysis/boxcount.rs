use super::cells::cell_masses;
use super::fit::ScalingFit;
use crate::error::{invalid, Error, Result};
use crate::model::MeasureData;

/// Fraction of the mass the counted cells must carry.
pub const MASS_FRACTION: f64 = 0.99;

/// Box-counting fit `n(s) ≈ C s^{-dim}` over dyadic cells. Each radius is
/// rounded up to the dyadic side `s = 2^{-j} ≥ r`; `n(s)` is the least number
/// of cells carrying 99% of the mass. The returned `exponent` is the
/// dimension (the negated slope) and `points` holds `(s, n(s))`.
pub fn box_counting_dimension(sigma: &MeasureData, radii: &[f64]) -> Result<ScalingFit> {
    if radii.len() < 4 {
        return invalid("need at least four radii");
    }
    let total = sigma.total_mass();
    if !(total > 0.0) {
        return Err(Error::InvalidMeasure("degenerate support".into()));
    }
    let mut levels = Vec::with_capacity(radii.len());
    for &r in radii {
        if !(r > 0.0 && r <= 1.0) {
            return invalid(format!("radius {r} outside (0, 1]"));
        }
        let j = (-r.log2()).floor().max(0.0) as u32;
        if j > 14 {
            return invalid(format!("radius {r} is finer than 2^-14"));
        }
        levels.push(j);
    }
    let mut distinct = levels.clone();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 2 {
        return invalid("radii collapse onto one dyadic level");
    }
    let mut points = Vec::with_capacity(levels.len());
    for &j in &levels {
        let mut masses = cell_masses(sigma, 1 << j)?;
        masses.sort_by(|a, b| b.total_cmp(a));
        let mut acc = 0.0;
        let mut n = 0usize;
        for m in masses {
            if acc >= MASS_FRACTION * total || m <= 0.0 {
                break;
            }
            acc += m;
            n += 1;
        }
        points.push(((-(j as f64)).exp2(), n as f64));
    }
    let mut fit = ScalingFit::least_squares(&points)?;
    fit.exponent = -fit.exponent;
    Ok(fit)
}
