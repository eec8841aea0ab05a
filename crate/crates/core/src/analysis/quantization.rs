use super::cells::cell_masses;
use super::prune::regularity_radii;
use crate::constants::C_QUANT;
use crate::error::{invalid, Error, Result};
use crate::model::{displacement, Atom, DiscreteMeasure, MeasureData, Tie, TorusPoint};
use crate::rng::stream;
use crate::transport::{solve_transport, sq_dist};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

/// Local searches per check.
pub const MULTISTARTS: usize = 16;
/// Grid side used to turn a density into atoms.
const DENSITY_GRID: usize = 32;
/// Finest dyadic level of the regularity check on densities.
const REGULARITY_LEVELS: u32 = 6;
const MOVE_TOL: f64 = 1e-6;
const MAX_ROUNDS: usize = 200;
const STALL_REL: f64 = 1e-12;

#[derive(Clone, Debug, Serialize)]
pub struct QuantizationCheck {
    /// Best `W²_per(Σ φ_i δ_{X_i}, σ)` found.
    pub r: f64,
    /// `Σ φ_i^{1 + 2/α}`.
    pub bound: f64,
    pub ratio: f64,
    #[serde(skip)]
    pub positions: Vec<TorusPoint<f64>>,
}

/// `σ(Q) ≤ s^α` for every dyadic cell `Q` of side `s`, down to `2^{-6}` for
/// densities and down to half the smallest atom spacing for atoms.
fn check_regular(sigma: &MeasureData, alpha: f64) -> Result<()> {
    let finest = match sigma {
        MeasureData::Atomic(mu) => {
            let r = regularity_radii(mu);
            (r.len() as u32).saturating_sub(1)
        }
        _ => REGULARITY_LEVELS,
    };
    for j in 0..=finest {
        let s = (-(j as f64)).exp2();
        let worst = cell_masses(sigma, 1 << j)?.into_iter().fold(0.0, f64::max);
        if worst > s.powf(alpha) * (1.0 + 1e-9) {
            return Err(Error::InvalidMeasure(format!("not {alpha}-regular: a cell of side {s} carries {worst}")));
        }
    }
    Ok(())
}

fn as_atoms(sigma: &MeasureData, m: usize) -> Result<DiscreteMeasure<f64>> {
    if let MeasureData::Atomic(mu) = sigma {
        return Ok(mu.clone());
    }
    let dim = sigma.dim();
    let h = 1.0 / m as f64;
    let atoms = cell_masses(sigma, m)?
        .into_iter()
        .enumerate()
        .filter(|&(_, w)| w > 0.0)
        .map(|(k, w)| {
            let pos = if dim == 1 {
                TorusPoint::new1((k as f64 + 0.5) * h)
            } else {
                TorusPoint::new2(((k / m) as f64 + 0.5) * h, ((k % m) as f64 + 0.5) * h)
            };
            Atom { pos, mass: w }
        })
        .collect();
    DiscreteMeasure::new(dim, atoms)
}

/// Partial transport of `Σ φ_i δ_{X_i}` into `σ`: a free dummy source takes
/// whatever mass of `σ` is left over. Returns the cost and the new positions
/// (barycenters of the transported mass).
fn assign(phi: &[f64], xs: &[TorusPoint<f64>], sigma: &DiscreteMeasure<f64>) -> Result<(f64, Vec<TorusPoint<f64>>)> {
    let targets = sigma.atoms();
    let mut a = phi.to_vec();
    let spare = sigma.total_mass() - phi.iter().sum::<f64>();
    if spare > 0.0 {
        a.push(spare);
    }
    let b: Vec<f64> = targets.iter().map(|t| t.mass).collect();
    let n = phi.len();
    let plan = solve_transport(&a, &b, |i, j| if i < n { sq_dist(&xs[i], &targets[j].pos) } else { 0.0 })?;
    let mut shift = vec![[0.0; 2]; n];
    for &(i, j, m) in &plan.entries {
        if i < n {
            let d = displacement(&xs[i], &targets[j].pos, Tie::Positive);
            shift[i][0] += m * d[0] / phi[i];
            shift[i][1] += m * d[1] / phi[i];
        }
    }
    let moved = xs.iter().zip(&shift).map(|(x, s)| x.translate(&s[..sigma.dim()])).collect();
    Ok((plan.cost, moved))
}

/// k-means++ style seeding: each new center drawn from `σ` with weight
/// `mass · distance²` to the centers so far.
fn seed_positions(sigma: &DiscreteMeasure<f64>, k: usize, rng: &mut impl Rng) -> Vec<TorusPoint<f64>> {
    let atoms = sigma.atoms();
    let mut out: Vec<TorusPoint<f64>> = Vec::with_capacity(k);
    let mut weight: Vec<f64> = atoms.iter().map(|a| a.mass).collect();
    for _ in 0..k {
        let total: f64 = weight.iter().sum();
        let pick = if total > 0.0 {
            let mut u = rng.gen::<f64>() * total;
            let mut idx = atoms.len() - 1;
            for (i, w) in weight.iter().enumerate() {
                if u < *w {
                    idx = i;
                    break;
                }
                u -= w;
            }
            idx
        } else {
            rng.gen_range(0..atoms.len())
        };
        let c = atoms[pick].pos;
        out.push(c);
        for (w, a) in weight.iter_mut().zip(atoms) {
            let d = sq_dist(&a.pos, &c);
            let prev = if out.len() == 1 { f64::INFINITY } else { *w / a.mass };
            *w = a.mass * d.min(prev);
        }
    }
    out
}

/// Alternates optimal assignment and barycentric moves. Stops when no
/// center moves by `1e-6`, or when the cost stalls (degenerate assignments
/// can keep centers oscillating at equal cost).
fn local_search(phi: &[f64], sigma: &DiscreteMeasure<f64>, mut xs: Vec<TorusPoint<f64>>) -> Result<(f64, Vec<TorusPoint<f64>>)> {
    let mut best = (f64::INFINITY, xs.clone());
    for _ in 0..MAX_ROUNDS {
        let (c, next) = assign(phi, &xs, sigma)?;
        let stalled = c >= best.0 * (1.0 - STALL_REL);
        if c < best.0 {
            best = (c, xs.clone());
        }
        let step = xs.iter().zip(&next).map(|(a, b)| sq_dist(a, b).sqrt()).fold(0.0, f64::max);
        if step < MOVE_TOL || stalled {
            break;
        }
        xs = next;
    }
    Ok(best)
}

/// Upper estimate `R` of `min_X W²_per(Σ φ_i δ_{X_i}, σ)` by multistart
/// barycentric local search, compared with `Σ φ_i^{1+2/α}`. Densities are
/// replaced by a 32-grid of cell centers, with the final value extrapolated
/// from the 16- and 32-grids. Fails if `σ` is not `α`-regular or if the ratio
/// falls below [`C_QUANT`].
pub fn quantization_check(sigma: &MeasureData, phi: &[f64], alpha: f64, seed: u64) -> Result<QuantizationCheck> {
    let dim = sigma.dim();
    if !(alpha > 0.0 && alpha <= dim as f64) {
        return invalid("α must lie in (0, d]");
    }
    if phi.is_empty() || phi.iter().any(|&p| !(p > 0.0)) {
        return invalid("masses must be positive");
    }
    if phi.iter().sum::<f64>() > sigma.total_mass() * (1.0 + 1e-12) {
        return Err(Error::MassMismatch(phi.iter().sum(), sigma.total_mass()));
    }
    check_regular(sigma, alpha)?;
    // Search with the masses in decreasing order so that relabeling the
    // input cannot change the outcome.
    let mut order: Vec<usize> = (0..phi.len()).collect();
    order.sort_by(|&i, &j| phi[j].total_cmp(&phi[i]));
    let sorted: Vec<f64> = order.iter().map(|&i| phi[i]).collect();
    let fine = as_atoms(sigma, DENSITY_GRID)?;
    let runs = (0..MULTISTARTS)
        .into_par_iter()
        .map(|s| {
            let mut rng = stream(seed, s as u64);
            local_search(&sorted, &fine, seed_positions(&fine, phi.len(), &mut rng))
        })
        .collect::<Result<Vec<_>>>()?;
    let (mut r, found) = runs.into_iter().min_by(|a, b| a.0.total_cmp(&b.0)).expect("at least one start");
    if !matches!(sigma, MeasureData::Atomic(_)) {
        let coarse = as_atoms(sigma, DENSITY_GRID / 2)?;
        let rc = assign(&sorted, &found, &coarse)?.0;
        r = (4.0 * r - rc) / 3.0;
    }
    let mut positions = found.clone();
    for (k, &i) in order.iter().enumerate() {
        positions[i] = found[k];
    }
    let bound: f64 = phi.iter().map(|p| p.powf(1.0 + 2.0 / alpha)).sum();
    let ratio = r / bound;
    if ratio < C_QUANT {
        return Err(Error::CertificationFailed(format!("quantization ratio {ratio} below {C_QUANT}")));
    }
    Ok(QuantizationCheck { r, bound, ratio, positions })
}
