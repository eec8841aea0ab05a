use crate::error::{invalid, Result};
use crate::model::internal_energy;
use crate::Plan;
use serde::Serialize;

/// `value ≈ prefactor · scale^exponent`, fitted by least squares in log-log
/// coordinates.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingFit {
    pub exponent: f64,
    pub prefactor: f64,
    pub r_squared: f64,
    pub points: Vec<(f64, f64)>,
}

impl ScalingFit {
    pub fn least_squares(points: &[(f64, f64)]) -> Result<Self> {
        if points.len() < 2 {
            return invalid("need at least two points");
        }
        if points.iter().any(|&(s, v)| !(s > 0.0 && v > 0.0) || !s.is_finite() || !v.is_finite()) {
            return invalid("log-log fit needs positive finite data");
        }
        let n = points.len() as f64;
        let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
        let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
        let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        if sxx == 0.0 {
            return invalid("all scales coincide");
        }
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
        let slope = sxy / sxx;
        let intercept = my - slope * mx;
        let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) };
        Ok(Self { exponent: slope, prefactor: intercept.exp(), r_squared, points: points.to_vec() })
    }
}

/// Fit of `I(μ, ε)` against `ε`. Needs at least four scales spanning at
/// least 1.5 decades.
pub fn local_energy_exponent(points: &[(f64, f64)]) -> Result<ScalingFit> {
    if points.len() < 4 {
        return invalid("need at least four scales");
    }
    let lo = points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi = points.iter().map(|p| p.0).fold(0.0, f64::max);
    if !(lo > 0.0) || (hi / lo).log10() < 1.5 {
        return invalid("scales must span at least 1.5 decades");
    }
    ScalingFit::least_squares(points)
}

/// `(ε, I(μ, (T - ε, T)))` for each `ε`.
pub fn local_energies(plan: &Plan, eps: &[f64], power: f64) -> Result<Vec<(f64, f64)>> {
    let t = plan.horizon();
    eps.iter()
        .map(|&e| {
            if !(e > 0.0 && e <= t) {
                return invalid(format!("scale {e} outside (0, T]"));
            }
            Ok((e, internal_energy(plan, t - e, t, power)?.internal()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power() {
        let pts: Vec<(f64, f64)> = (0..6).map(|i| 10f64.powf(-(i as f64) * 0.5)).map(|e| (e, 3.0 * e.cbrt())).collect();
        let f = local_energy_exponent(&pts).unwrap();
        assert!((f.exponent - 1.0 / 3.0).abs() < 1e-12);
        assert!((f.prefactor - 3.0).abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn insufficient_scales() {
        let few = [(1.0, 1.0), (0.1, 0.5), (0.01, 0.2)];
        assert!(local_energy_exponent(&few).is_err());
        let narrow: Vec<(f64, f64)> = (0..5).map(|i| (1.0 + i as f64, 1.0)).collect();
        assert!(local_energy_exponent(&narrow).is_err());
    }
}
