use super::density::MeasureData;
use super::plan::BranchedPlan;
use crate::error::{invalid, Result};
use crate::scalar::Scalar;
use serde::Serialize;

/// Energy split into its three parts; `total` is always their sum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EnergyBreakdown<S> {
    pub perimeter: S,
    pub kinetic: S,
    pub boundary: S,
    pub total: S,
}

impl<S: Scalar> EnergyBreakdown<S> {
    pub fn new(perimeter: S, kinetic: S, boundary: S) -> Self {
        Self { perimeter, kinetic, boundary, total: perimeter + kinetic + boundary }
    }

    pub fn zero() -> Self {
        Self::new(S::zero(), S::zero(), S::zero())
    }

    /// Interior part `perimeter + kinetic`.
    pub fn internal(&self) -> S {
        self.perimeter + self.kinetic
    }

    pub fn with_boundary(self, boundary: S) -> Self {
        Self::new(self.perimeter, self.kinetic, boundary)
    }
}

impl<S: Scalar> std::ops::Add for EnergyBreakdown<S> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.perimeter + o.perimeter, self.kinetic + o.kinetic, self.boundary + o.boundary)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ModelConfig {
    pub lambda: f64,
    pub horizon: f64,
    pub dim: usize,
    pub perimeter_power: f64,
}

impl ModelConfig {
    /// Torus model with the default perimeter power `(d-1)/d`.
    pub fn new(lambda: f64, horizon: f64, dim: usize) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(crate::Error::UnsupportedDimension(dim));
        }
        Self::with_power(lambda, horizon, dim, (dim as f64 - 1.0) / dim as f64)
    }

    /// The one-dimensional toy model (perimeter counts branches).
    pub fn toy(lambda: f64, horizon: f64) -> Result<Self> {
        Self::with_power(lambda, horizon, 1, 0.0)
    }

    pub fn with_power(lambda: f64, horizon: f64, dim: usize, perimeter_power: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) || !(horizon > 0.0 && horizon.is_finite()) {
            return invalid("lambda and T must be positive");
        }
        if perimeter_power != 0.0 && perimeter_power != 0.5 {
            return invalid("perimeter power must be 0 or 1/2");
        }
        Ok(Self { lambda, horizon, dim, perimeter_power })
    }
}

/// `φ^p` with `0^0 = 1`.
pub fn perimeter_power<S: Scalar>(flux: S, power: S) -> S {
    if power == S::zero() {
        S::one()
    } else {
        flux.powf(power)
    }
}

/// `I(μ, (a, b))`: branch count (or `φ^power`) plus `φ|Ẋ|²`, integrated over
/// the part of each edge inside `(a, b)`.
pub fn internal_energy<S: Scalar>(plan: &BranchedPlan<S>, a: S, b: S, power: S) -> Result<EnergyBreakdown<S>> {
    let big_t = plan.horizon();
    if !(a < b) || a < -big_t || b > big_t {
        return invalid(format!("interval ({a}, {b}) not inside [-T, T]"));
    }
    plan.require_valid()?;
    let (mut per, mut kin) = (S::zero(), S::zero());
    for e in plan.edges() {
        let (t0, t1) = (plan.nodes()[e.tail].t, plan.nodes()[e.head].t);
        let len = t1.min(b) - t0.max(a);
        if len <= S::zero() {
            continue;
        }
        per = per + len * perimeter_power(e.flux, power);
        kin = kin + len * e.flux * plan.edge_speed_sq(e);
    }
    Ok(EnergyBreakdown::new(per, kin, S::zero()))
}

/// `E_{λ,T}` on the torus. The boundary traces are passed explicitly because
/// an atomic trace has infinite `H^{-1/2}` norm in two dimensions; the tail
/// bound of the two truncated norms is returned alongside.
pub fn torus_energy(
    plan: &BranchedPlan<f64>,
    cfg: &ModelConfig,
    bottom: &MeasureData,
    top: &MeasureData,
    k_max: usize,
) -> Result<(EnergyBreakdown<f64>, f64)> {
    let t = plan.horizon();
    let inner = internal_energy(plan, -t, t, cfg.perimeter_power)?;
    let mut value = 0.0;
    let mut tail = 0.0;
    for m in [bottom, top] {
        let tab = crate::sobolev::FourierTable::of_deviation(m, k_max)?;
        let n = crate::sobolev::h_negative_norm_sq(&tab, 0.5)?;
        value += n.value;
        tail += n.tail_bound;
    }
    Ok((inner.with_boundary(cfg.lambda * value), cfg.lambda * tail))
}

/// `E^1d_{λ,T}`: branch count plus kinetic energy plus `λ W²_per(μ_{±T}, 1)`.
pub fn toy_energy(plan: &BranchedPlan<f64>, lambda: f64) -> Result<EnergyBreakdown<f64>> {
    if plan.dim() != 1 {
        return Err(crate::Error::DimensionMismatch(plan.dim(), 1));
    }
    let t = plan.horizon();
    let inner = internal_energy(plan, -t, t, 0.0)?;
    let w = crate::transport::w2_to_lebesgue_1d(&plan.trace(-t)?)? + crate::transport::w2_to_lebesgue_1d(&plan.trace(t)?)?;
    Ok(inner.with_boundary(lambda * w))
}
