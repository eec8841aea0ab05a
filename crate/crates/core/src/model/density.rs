use super::measure::DiscreteMeasure;
use crate::error::{invalid, Error, Result};

/// Piecewise constant density on a uniform `n^d` grid of `[0, side)^d`.
/// Cell `(i0, i1)` is stored at `i0 * n + i1`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridDensity {
    pub dim: usize,
    pub n: usize,
    pub side: f64,
    pub values: Vec<f64>,
}

impl GridDensity {
    pub fn new(dim: usize, n: usize, side: f64, values: Vec<f64>) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::UnsupportedDimension(dim));
        }
        if n == 0 || !(side > 0.0) {
            return invalid("grid density needs n >= 1 and side > 0");
        }
        if values.len() != n.pow(dim as u32) {
            return invalid(format!("expected {} cell values, got {}", n.pow(dim as u32), values.len()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return invalid("non-finite density value");
        }
        Ok(Self { dim, n, side, values })
    }

    /// Lebesgue measure on the unit torus, stored on an `n^d` grid.
    pub fn lebesgue(dim: usize, n: usize) -> Result<Self> {
        Self::new(dim, n, 1.0, vec![1.0; n.pow(dim as u32)])
    }

    pub fn cell(&self) -> f64 {
        self.side / self.n as f64
    }

    pub fn total_mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cell().powi(self.dim as i32)
    }

    pub fn to_boxes(&self) -> BoxDensity {
        let h = self.cell();
        let mut boxes = Vec::with_capacity(self.values.len());
        for (idx, &v) in self.values.iter().enumerate() {
            let (i0, i1) = if self.dim == 1 { (idx, 0) } else { (idx / self.n, idx % self.n) };
            let len = if self.dim == 1 { [h, 0.0] } else { [h, h] };
            boxes.push(DensityBox { lo: [i0 as f64 * h, i1 as f64 * h], len, value: v });
        }
        BoxDensity { dim: self.dim, boxes, period: 1 }
    }
}

/// Axis-aligned box `lo + [0, len)` carrying constant density `value`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityBox {
    pub lo: [f64; 2],
    pub len: [f64; 2],
    pub value: f64,
}

impl DensityBox {
    pub fn volume(&self, dim: usize) -> f64 {
        self.len[..dim].iter().product()
    }
}

/// Sum of constant-density boxes, replicated over the translates `j/period`
/// (`j ∈ {0..period-1}^d`). `period = 1` means no replication.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxDensity {
    pub dim: usize,
    pub boxes: Vec<DensityBox>,
    pub period: usize,
}

impl BoxDensity {
    pub fn new(dim: usize, boxes: Vec<DensityBox>, period: usize) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::UnsupportedDimension(dim));
        }
        if period == 0 {
            return invalid("period must be at least 1");
        }
        for b in &boxes {
            for a in 0..dim {
                if !(b.len[a] > 0.0) || b.len[a] > 1.0 / period as f64 + 1e-15 {
                    return invalid("box side must lie in (0, 1/period]");
                }
            }
            if !b.value.is_finite() {
                return invalid("non-finite box density");
            }
        }
        Ok(Self { dim, boxes, period })
    }

    pub fn total_mass(&self) -> f64 {
        let copies = (self.period as f64).powi(self.dim as i32);
        copies * self.boxes.iter().map(|b| b.value * b.volume(self.dim)).sum::<f64>()
    }

    /// Every box with all its periodic copies listed explicitly.
    pub fn expanded(&self) -> Vec<DensityBox> {
        let p = self.period;
        let h = 1.0 / p as f64;
        let mut out = Vec::with_capacity(self.boxes.len() * p.pow(self.dim as u32));
        let shifts1 = p;
        let shifts2 = if self.dim == 2 { p } else { 1 };
        for j0 in 0..shifts1 {
            for j1 in 0..shifts2 {
                for b in &self.boxes {
                    let mut c = *b;
                    c.lo[0] += j0 as f64 * h;
                    c.lo[1] += j1 as f64 * h;
                    out.push(c);
                }
            }
        }
        out
    }
}

/// Input accepted by the estimators that work on atoms as well as densities.
#[derive(Clone, Debug)]
pub enum MeasureData {
    Atomic(DiscreteMeasure<f64>),
    Grid(GridDensity),
    Boxes(BoxDensity),
}

impl MeasureData {
    pub fn dim(&self) -> usize {
        match self {
            MeasureData::Atomic(m) => m.dim(),
            MeasureData::Grid(g) => g.dim,
            MeasureData::Boxes(b) => b.dim,
        }
    }

    pub fn total_mass(&self) -> f64 {
        match self {
            MeasureData::Atomic(m) => m.total_mass(),
            MeasureData::Grid(g) => g.total_mass(),
            MeasureData::Boxes(b) => b.total_mass(),
        }
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self, MeasureData::Atomic(m) if !m.is_empty())
    }
}
