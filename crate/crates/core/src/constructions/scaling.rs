use super::block::{building_block, subcell_grid, Cube};
use super::certificate::Certificate;
use crate::constants::C_SCALING;
use crate::error::{invalid, Result};
use crate::model::{
    internal_energy, Atom, BoxDensity, DensityBox, DiscreteMeasure, EnergyBreakdown, MeasureData, PlanBuilder,
    TorusPoint,
};
use crate::sobolev::{h_negative_norm_sq, FourierTable};
use crate::Plan;
use rayon::prelude::*;
use serde::Serialize;

/// Frequency cutoff for trace norms, in multiples of `N`.
pub const TRACE_K_FACTOR: usize = 64;

/// Refinement depth of the per-cell blocks: `2^L × 2^L` boundary atoms per
/// cell, `L ∈ [1, 3]`, fewer levels when there are many cells.
pub fn refinement_level(n: usize) -> u32 {
    let cells = (n * n) as f64;
    (((20.0 - cells.log2()) / 2.0).floor()).clamp(1.0, 3.0) as u32
}

/// Which term of `min(T, T^{1/3}, λ^{2/7}T^{3/7}, λ^{2/3}T^{-1/3})` is active.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Thick,
    Branching,
    SmallLambda,
}

impl Regime {
    pub fn label(&self) -> &'static str {
        match self {
            Regime::Thick => "thick",
            Regime::Branching => "branching",
            Regime::SmallLambda => "small-lambda",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Parameters {
    pub n: usize,
    pub r: f64,
    pub regime: Regime,
}

/// `(N, r)` for [`nonuniform_branching`]: `N = 1, r = 1` for `T ≥ 1`;
/// `N = 1, r = (λT)^{1/3}` for `λ ≤ T²/10`; otherwise
/// `N ≈ λ^{2/7}T^{-4/7}`, `r = λ^{1/7}T^{5/7}`, saturating at the uniform
/// construction `N ≈ T^{-2/3}`, `r = 1/N` when `r` would exceed `1/N`.
pub fn choose_parameters(lambda: f64, horizon: f64) -> Result<Parameters> {
    if !(lambda > 0.0 && horizon > 0.0) || !lambda.is_finite() || !horizon.is_finite() {
        return invalid("λ and T must be positive and finite");
    }
    if horizon >= 1.0 {
        return Ok(Parameters { n: 1, r: 1.0, regime: Regime::Thick });
    }
    if lambda <= horizon * horizon / 10.0 {
        return Ok(Parameters { n: 1, r: (lambda * horizon).cbrt().min(1.0), regime: Regime::SmallLambda });
    }
    let n = (lambda.powf(2.0 / 7.0) * horizon.powf(-4.0 / 7.0)).round().max(1.0) as usize;
    let r = lambda.powf(1.0 / 7.0) * horizon.powf(5.0 / 7.0);
    if r >= 1.0 / n as f64 {
        let n = horizon.powf(-2.0 / 3.0).round().max(1.0) as usize;
        return Ok(Parameters { n, r: 1.0 / n as f64, regime: Regime::Branching });
    }
    Ok(Parameters { n, r, regime: Regime::Branching })
}

/// Copies of `block` translated to every cell of the `N × N` grid.
fn tile(block: &Plan, n: usize) -> Result<Plan> {
    let h = 1.0 / n as f64;
    let parts: Vec<PlanBuilder<f64>> = (0..n * n)
        .into_par_iter()
        .map(|c| {
            let shift = [(c / n) as f64 * h, (c % n) as f64 * h];
            let mut b = PlanBuilder::new();
            for nd in block.nodes() {
                b.node(nd.t, nd.x.translate(&shift));
            }
            b.edges = block.edges().to_vec();
            b
        })
        .collect();
    let mut all = PlanBuilder::new();
    all.nodes.reserve(parts.len() * block.nodes().len());
    all.edges.reserve(parts.len() * block.edges().len());
    for p in parts {
        let off = all.nodes.len();
        all.nodes.extend(p.nodes);
        all.edges.extend(p.edges.into_iter().map(|mut e| {
            e.tail += off;
            e.head += off;
            e
        }));
    }
    all.build(2, block.horizon())
}

/// A scaling construction with its boundary data.
#[derive(Clone, Debug)]
pub struct ScalingPlan {
    pub n: usize,
    pub r: f64,
    pub horizon: f64,
    pub plan: Plan,
    /// One atom of mass `1/N²` per cell center.
    pub trace_atoms: DiscreteMeasure<f64>,
    /// `Σ_i χ_{Q_i} / (N² r²)` with `Q_i` the centered `r`-cube of cell `i`.
    pub trace_density: BoxDensity,
    /// `I ≤ C (N T + r² / T)`.
    pub certificate: Certificate,
}

impl ScalingPlan {
    /// `E_{λ,T}` with the density trace on both sides (the boundary part is
    /// truncated at `|k| ≤ 64 N`), and the tail bound of the truncation.
    pub fn energy(&self, lambda: f64) -> Result<(EnergyBreakdown<f64>, f64)> {
        let data = MeasureData::Boxes(self.trace_density.clone());
        let tab = FourierTable::of_deviation(&data, TRACE_K_FACTOR * self.n)?;
        let norm = h_negative_norm_sq(&tab, 0.5)?;
        let c = &self.certificate;
        let e = EnergyBreakdown::new(c.perimeter, c.kinetic, 2.0 * lambda * norm.value);
        Ok((e, 2.0 * lambda * norm.tail_bound))
    }
}

/// Each cell of the `N × N` grid gets a trunk from its center, refined by a
/// building block onto a subgrid of the centered cube of side `r`; the
/// construction is symmetric on `(-T, T)`.
pub fn nonuniform_branching(n: usize, r: f64, horizon: f64) -> Result<ScalingPlan> {
    if n == 0 {
        return invalid("N must be at least 1");
    }
    let h = 1.0 / n as f64;
    if !(r > 0.0) || r > h * (1.0 + 1e-12) {
        return invalid(format!("need 0 < r ≤ 1/N = {h}, got r = {r}"));
    }
    if !(horizon > 0.0) {
        return invalid("horizon must be positive");
    }
    let r = r.min(h);
    let off = 0.5 * (h - r);
    let cube = Cube::new(TorusPoint::new2(off, off), r)?;
    let mass = h * h;
    let grid = subcell_grid(&cube, refinement_level(n), mass);
    let (block, _) = building_block(&cube, horizon, &grid, &grid)?;
    let plan = tile(&block, n)?;

    let atoms: Vec<Atom<f64>> = (0..n * n)
        .map(|c| Atom { pos: TorusPoint::new2(((c / n) as f64 + 0.5) * h, ((c % n) as f64 + 0.5) * h), mass })
        .collect();
    let trace_atoms = DiscreteMeasure::new(2, atoms)?;
    let trace_density =
        BoxDensity::new(2, vec![DensityBox { lo: [off, off], len: [r, r], value: mass / (r * r) }], n)?;

    let e = internal_energy(&plan, -horizon, horizon, 0.5)?;
    let scale = n as f64 * horizon + r * r / horizon;
    let certificate = Certificate::new(e.perimeter, e.kinetic, e.internal(), C_SCALING, scale).require("scaling construction")?;
    Ok(ScalingPlan { n, r, horizon, plan, trace_atoms, trace_density, certificate })
}

/// [`nonuniform_branching`] with full cells, `r = 1/N`: `I ≤ C(NT + 1/(N²T))`.
pub fn uniform_branching(n: usize, horizon: f64) -> Result<ScalingPlan> {
    if n == 0 {
        return invalid("N must be at least 1");
    }
    nonuniform_branching(n, 1.0 / n as f64, horizon)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parameters() {
        assert_eq!(choose_parameters(1.0, 2.0).unwrap(), Parameters { n: 1, r: 1.0, regime: Regime::Thick });
        let p = choose_parameters(1e-3, 0.5).unwrap();
        assert_eq!((p.n, p.regime), (1, Regime::SmallLambda));
        assert!((p.r - (0.5e-3f64).cbrt()).abs() < 1e-15);
        let p = choose_parameters(1.0, 1e-3).unwrap();
        assert_eq!((p.n, p.regime), (52, Regime::Branching));
        assert!(p.r < 1.0 / 52.0);
        let p = choose_parameters(1e3, 0.5).unwrap();
        assert!((p.r - 1.0 / p.n as f64).abs() < 1e-15);
    }

    #[test]
    fn single_cell_reduces_to_block() {
        let s = uniform_branching(1, 0.3).unwrap();
        assert!(s.plan.validate().is_empty());
        assert_eq!(s.trace_atoms.len(), 1);
    }

    #[test]
    fn uniform_equals_full_nonuniform() {
        let a = uniform_branching(4, 0.1).unwrap();
        let b = nonuniform_branching(4, 0.25, 0.1).unwrap();
        assert_eq!(a.certificate, b.certificate);
    }

    #[test]
    fn nonuniform_bounds() {
        let p = choose_parameters(1.0, 1e-2).unwrap();
        let s = nonuniform_branching(p.n, p.r, 1e-2).unwrap();
        assert!(s.plan.validate().is_empty());
        assert!((s.trace_density.total_mass() - 1.0).abs() < 1e-12);
        let (e, tail) = s.energy(1.0).unwrap();
        assert!(e.boundary > 0.0 && tail < e.boundary);
        assert!(nonuniform_branching(4, 0.3, 0.1).is_err());
    }
}
