//! Library constants. The certification constants were calibrated once by
//! parameter sweeps (see the test suites) and are frozen here; each carries
//! the largest ratio seen during calibration.

/// Geometric ratio of the dyadic level times inside a building block.
pub const BLOCK_THETA: f64 = 1.0 / 3.0;

/// `I ≤ C_BB (T Φ^{(d-1)/d} + r² Φ / T)` for building blocks. Worst ratio
/// seen: 6.7 (random atoms in cubes of side 0.01..1, T = 1e-3..10, d = 1, 2).
pub const C_BB: f64 = 8.0;

/// Scaling constructions: `I ≤ C (N T + r² / T)`. Worst ratio seen: 5.3.
pub const C_SCALING: f64 = 8.0;

/// `E_{λ,T} ≤ C λ^{2/7} T^{3/7}` for the nonuniform construction with the
/// parameters of `choose_parameters`. Worst ratio seen at λ = 1: 10.2.
pub const C_SCALING_ENERGY: f64 = 16.0;

/// Dyadic interpolation: `P ≤ C T^{1/3}` and
/// `E_cin - (1+η) W² / (4T) ≤ (C/η) T^{1/3}`. Worst ratio seen: 0.51, for
/// a single atom on both sides.
pub const C_DYADIC: f64 = 1.0;

/// Shear competitor: `ΔI ≤ C (P(μ, ε) + η²/ε)`. A unit vertical segment
/// attains `2η²/ε` in the kinetic part, so `C ≥ 2`.
pub const C_SHEAR: f64 = 2.0;

/// Root branching constant: no branching when `λ²Φ³ / (1 + λT) < C0_ROOT`.
pub const C0_ROOT: f64 = 1.0;

/// Per-child branching constant.
pub const C_CHILD: f64 = 1.0 / 8.0;

/// Frozen interval for `semigroup / h_negative` over the test suite.
pub const SEMIGROUP_RATIO: (f64, f64) = (1.5, 3.0);

/// Shear damping: loss ≥ `SHEAR_DAMPING_C η²` times the low-frequency sum
/// over `|k| ≤ 1/(4η)`.
pub const SHEAR_DAMPING_C: f64 = 16.0;

/// Lower bound on the quantization ratio `R / Σ φ_i^{1+2/α}`.
pub const C_QUANT: f64 = 0.05;

/// Dyadic depth truncation: stop once `r_K` falls below this, or at `MAX_DEPTH`.
pub const DYADIC_MIN_SIDE: f64 = 1e-6;
pub const DYADIC_MAX_DEPTH: usize = 40;
