use super::fourier::{FourierTable, TailModel};
use crate::error::{invalid, Error, Result};
use serde::Serialize;
use std::f64::consts::PI;

/// Largest zero mode accepted as "mean zero".
pub const ZERO_MODE_TOL: f64 = 1e-12;

/// Truncated value and a bound on the neglected part.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NormSq {
    pub value: f64,
    pub tail_bound: f64,
}

fn norm_k(k: [i64; 2]) -> f64 {
    ((k[0] * k[0] + k[1] * k[1]) as f64).sqrt()
}

fn check(tab: &FourierTable, gamma: f64) -> Result<()> {
    if !(gamma > 0.0) {
        return invalid("gamma must be positive");
    }
    let z = tab.zero_mode().norm();
    if z > ZERO_MODE_TOL {
        return Err(Error::NonzeroZeroMode(z));
    }
    Ok(())
}

/// Bound on `Σ_{j ∈ Z^d, |j|_∞ > J} |j|^{-s}`; infinite when the sum diverges.
pub fn lattice_tail_sum(dim: usize, j: usize, s: f64) -> f64 {
    let e = s - dim as f64 + 1.0; // exponent of the shell sum Σ m^{-e}
    let shell = if dim == 1 { 2.0 } else { 8.0 };
    if e <= 1.0 {
        return f64::INFINITY;
    }
    if j == 0 {
        shell * (1.0 + 1.0 / (e - 1.0))
    } else {
        shell * (j as f64).powf(1.0 - e) / (e - 1.0)
    }
}

/// `‖σ‖²_{H^{-γ}} = Σ_{k≠0} |k|^{-2γ} |σ̂_k|²` over the table, plus a tail bound.
pub fn h_negative_norm_sq(tab: &FourierTable, gamma: f64) -> Result<NormSq> {
    check(tab, gamma)?;
    let value = tab.entries().map(|(k, v)| norm_k(k).powf(-2.0 * gamma) * v.norm_sqr()).sum();
    let p = tab.lattice() as f64;
    let j = tab.k_max() / tab.lattice();
    let tail_bound = match tab.tail_model() {
        TailModel::Zero => 0.0,
        TailModel::Bounded { c } => c * c * p.powf(-2.0 * gamma) * lattice_tail_sum(tab.dim(), j, 2.0 * gamma),
        TailModel::Decay { c } => {
            let s = 2.0 * gamma + 2.0;
            c * c * p.powf(-s) * lattice_tail_sum(tab.dim(), j, s)
        }
    };
    Ok(NormSq { value, tail_bound })
}

/// `∫_0^1 η^{2γ+1} Σ_{|k| ≤ 1/η} |k| |σ̂_k|² dη/η`, integrated exactly between
/// the breakpoints `η = 1/|k|`.
pub fn semigroup_norm_sq(tab: &FourierTable, gamma: f64) -> Result<f64> {
    check(tab, gamma)?;
    let mut terms: Vec<(f64, f64)> =
        tab.entries().map(|(k, v)| (norm_k(k), norm_k(k) * v.norm_sqr())).filter(|t| t.1 > 0.0).collect();
    terms.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let q = 2.0 * gamma + 1.0;
    let mut total = 0.0;
    let mut active = 0.0;
    let mut i = 0;
    while i < terms.len() {
        let n = terms[i].0;
        while i < terms.len() && terms[i].0 == n {
            active += terms[i].1;
            i += 1;
        }
        // η ∈ (1/n_next, min(1, 1/n)] sees every |k| ≤ n
        let hi = (1.0 / n).min(1.0);
        let lo = if i < terms.len() { 1.0 / terms[i].0 } else { 0.0 };
        total += active * (hi.powf(q) - lo.powf(q)) / q;
    }
    Ok(total)
}

/// Multiplies `σ̂_k` by `cos(2πη k_axis)`.
pub fn shear_damping(tab: &FourierTable, eta: f64, axis: usize) -> Result<FourierTable> {
    if axis >= tab.dim() {
        return invalid(format!("axis {axis} out of range"));
    }
    Ok(tab.map(|k| (2.0 * PI * eta * k[axis] as f64).cos()))
}

/// The two sides of the shear damping gap: the loss
/// `Σ sin²(2πη k_e) |k|^{-1} |σ̂_k|²` and the low-frequency sum
/// `Σ_{|k| ≤ 1/(4η)} k_e² |k|^{-1} |σ̂_k|²` it dominates up to `16 η²`.
pub fn shear_gap(tab: &FourierTable, eta: f64, axis: usize) -> Result<(f64, f64)> {
    if axis >= tab.dim() || !(eta > 0.0) {
        return invalid("shear gap needs eta > 0 and a valid axis");
    }
    let mut loss = 0.0;
    let mut low = 0.0;
    for (k, v) in tab.entries() {
        let w = v.norm_sqr() / norm_k(k);
        let ke = k[axis] as f64;
        loss += (2.0 * PI * eta * ke).sin().powi(2) * w;
        if norm_k(k) <= 1.0 / (4.0 * eta) {
            low += ke * ke * w;
        }
    }
    Ok((loss, low))
}
