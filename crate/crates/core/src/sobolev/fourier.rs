use crate::error::{invalid, Error, Result};
use crate::model::{BoxDensity, MeasureData};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Largest number of stored coefficients.
pub const MAX_TABLE_ENTRIES: u128 = 100_000_000;

/// What is known about coefficients beyond the truncation, used for tail bounds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TailModel {
    /// No coefficients beyond `K_max` (trigonometric polynomial).
    Zero,
    /// `|σ̂_k| ≤ c` for every `k`.
    Bounded { c: f64 },
    /// `|σ̂_k| ≤ c / |k|` for every `k ≠ 0`.
    Decay { c: f64 },
}

/// Truncated Fourier coefficients `σ̂_k`, `|k|_∞ ≤ K_max`.
///
/// Only frequencies in `lattice · Z^d` are stored; all others vanish (periodic
/// replication with period `1/lattice` kills them).
#[derive(Clone, Debug, PartialEq)]
pub struct FourierTable {
    dim: usize,
    k_max: usize,
    lattice: usize,
    /// dense row-major over `j ∈ [-J, J]^d` with `k = lattice · j`
    values: Vec<Complex64>,
    tail: TailModel,
}

fn sinc_factor(k: i64, lo: f64, len: f64) -> Complex64 {
    // ∫_lo^{lo+len} e^{-2πikx} dx
    if k == 0 {
        return Complex64::new(len, 0.0);
    }
    let kf = k as f64;
    let mag = (PI * kf * len).sin() / (PI * kf);
    let phase = -2.0 * PI * (kf * (lo + 0.5 * len)).rem_euclid(1.0);
    Complex64::from_polar(mag, phase)
}

fn check_size(dim: usize, half: usize) -> Result<()> {
    let n = (2 * half as u128 + 1).pow(dim as u32);
    if n > MAX_TABLE_ENTRIES {
        return Err(Error::TableTooLarge(n));
    }
    Ok(())
}

impl FourierTable {
    fn side(&self) -> usize {
        2 * self.half() + 1
    }

    fn half(&self) -> usize {
        self.k_max / self.lattice
    }

    fn center(&self) -> usize {
        (self.values.len() - 1) / 2
    }

    fn frequency(&self, flat: usize) -> [i64; 2] {
        let (h, s, p) = (self.half() as i64, self.side(), self.lattice as i64);
        if self.dim == 1 {
            [(flat as i64 - h) * p, 0]
        } else {
            [((flat / s) as i64 - h) * p, ((flat % s) as i64 - h) * p]
        }
    }

    fn build(dim: usize, k_max: usize, lattice: usize, tail: TailModel, f: impl Fn([i64; 2]) -> Complex64 + Sync) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::UnsupportedDimension(dim));
        }
        if k_max == 0 {
            return invalid("K_max must be at least 1");
        }
        let half = k_max / lattice;
        check_size(dim, half)?;
        let side = 2 * half + 1;
        let total = side.pow(dim as u32);
        let mut t = Self { dim, k_max, lattice, values: vec![Complex64::new(0.0, 0.0); total], tail };
        let center = t.center();
        // compute the upper half and mirror it, so σ̂_{-k} = conj(σ̂_k) exactly
        let upper: Vec<Complex64> = (center..total).into_par_iter().map(|i| f(t.frequency(i))).collect();
        for (o, v) in upper.into_iter().enumerate() {
            let i = center + o;
            t.values[i] = v;
            t.values[total - 1 - i] = v.conj();
        }
        t.values[center].im = 0.0;
        Ok(t)
    }

    /// Coefficients of `σ` itself.
    pub fn of_measure(sigma: &MeasureData, k_max: usize) -> Result<Self> {
        let dim = sigma.dim();
        match sigma {
            MeasureData::Atomic(m) => {
                let atoms: Vec<([f64; 2], f64)> =
                    m.atoms().iter().map(|a| ([a.pos.coord(0), a.pos.coord(1)], a.mass)).collect();
                let c = atoms.iter().map(|a| a.1).sum();
                Self::build(dim, k_max, 1, TailModel::Bounded { c }, |k| {
                    let mut s = Complex64::new(0.0, 0.0);
                    for (x, m) in &atoms {
                        let ph = (k[0] as f64 * x[0] + k[1] as f64 * x[1]).rem_euclid(1.0);
                        s += Complex64::from_polar(*m, -2.0 * PI * ph);
                    }
                    s
                })
            }
            MeasureData::Grid(g) => {
                if g.side > 1.0 + 1e-15 {
                    return invalid("grid density must lie inside the unit torus");
                }
                Self::of_boxes(&g.to_boxes(), k_max)
            }
            MeasureData::Boxes(b) => Self::of_boxes(b, k_max),
        }
    }

    fn of_boxes(b: &BoxDensity, k_max: usize) -> Result<Self> {
        let dim = b.dim;
        let p = b.period;
        let copies = (p as f64).powi(dim as i32);
        let c = copies * std::f64::consts::SQRT_2 / PI
            * b.boxes.iter().map(|x| (x.value * x.volume(dim)).abs() / x.len[..dim].iter().cloned().fold(f64::INFINITY, f64::min)).sum::<f64>();
        let boxes = b.boxes.clone();
        Self::build(dim, k_max, p, TailModel::Decay { c }, move |k| {
            let mut s = Complex64::new(0.0, 0.0);
            for bx in &boxes {
                let mut v = Complex64::new(bx.value, 0.0) * sinc_factor(k[0], bx.lo[0], bx.len[0]);
                if dim == 2 {
                    v *= sinc_factor(k[1], bx.lo[1], bx.len[1]);
                }
                s += v;
            }
            s * copies
        })
    }

    /// Coefficients of `σ - 1` (the measure minus Lebesgue).
    pub fn of_deviation(sigma: &MeasureData, k_max: usize) -> Result<Self> {
        let mut t = Self::of_measure(sigma, k_max)?;
        let c = t.center();
        t.values[c].re -= 1.0;
        if t.values[c].re.abs() < 1e-13 {
            t.values[c].re = 0.0;
        }
        Ok(t)
    }

    /// Table from explicit coefficients; unspecified entries are zero.
    pub fn from_entries(dim: usize, k_max: usize, entries: &[([i64; 2], Complex64)], tail: TailModel) -> Result<Self> {
        let mut t = Self::build(dim, k_max, 1, tail, |_| Complex64::new(0.0, 0.0))?;
        for (k, v) in entries {
            let i = t.index(*k).ok_or_else(|| Error::InvalidArgument(format!("frequency {k:?} outside table")))?;
            t.values[i] = *v;
        }
        Ok(t)
    }

    fn index(&self, k: [i64; 2]) -> Option<usize> {
        let (p, h) = (self.lattice as i64, self.half() as i64);
        if self.dim == 1 && k[1] != 0 {
            return None;
        }
        if k.iter().any(|&c| c.rem_euclid(p) != 0) {
            return None;
        }
        let (j0, j1) = (k[0] / p, k[1] / p);
        if j0.abs() > h || j1.abs() > h {
            return None;
        }
        let s = self.side() as i64;
        Some(if self.dim == 1 { (j0 + h) as usize } else { ((j0 + h) * s + (j1 + h)) as usize })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn lattice(&self) -> usize {
        self.lattice
    }

    pub fn tail_model(&self) -> TailModel {
        self.tail
    }

    pub fn zero_mode(&self) -> Complex64 {
        self.values[self.center()]
    }

    /// `σ̂_k`, zero outside the stored range.
    pub fn get(&self, k: [i64; 2]) -> Complex64 {
        self.index(k).map(|i| self.values[i]).unwrap_or_default()
    }

    /// Nonzero frequencies with their coefficients, in lexicographic order of `k`.
    pub fn entries(&self) -> impl Iterator<Item = ([i64; 2], Complex64)> + '_ {
        let c = self.center();
        (0..self.values.len()).filter(move |&i| i != c).map(move |i| (self.frequency(i), self.values[i]))
    }

    /// Multiplies every coefficient by `f(k)`.
    pub fn map(&self, f: impl Fn([i64; 2]) -> f64) -> Self {
        let mut t = self.clone();
        for i in 0..t.values.len() {
            t.values[i] *= f(self.frequency(i));
        }
        t
    }

    pub fn to_json(&self) -> String {
        let entries: Vec<EntryJson> = (0..self.values.len())
            .map(|i| {
                let k = self.frequency(i);
                EntryJson { k: k[..self.dim].to_vec(), re: self.values[i].re, im: self.values[i].im }
            })
            .collect();
        let j = TableJson { dim: self.dim, k_max: self.k_max, lattice: self.lattice, tail: self.tail, entries };
        serde_json::to_string(&j).expect("table serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let j: TableJson = serde_json::from_str(text)?;
        let mut t = Self::build(j.dim, j.k_max, j.lattice.max(1), j.tail, |_| Complex64::new(0.0, 0.0))?;
        for e in &j.entries {
            if e.k.len() != j.dim {
                return Err(Error::DimensionMismatch(e.k.len(), j.dim));
            }
            let k = [e.k[0], if j.dim == 2 { e.k[1] } else { 0 }];
            let i = t.index(k).ok_or_else(|| Error::InvalidArgument(format!("frequency {k:?} outside table")))?;
            t.values[i] = Complex64::new(e.re, e.im);
        }
        Ok(t)
    }
}

#[derive(Serialize, Deserialize)]
struct EntryJson {
    k: Vec<i64>,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct TableJson {
    dim: usize,
    #[serde(rename = "K_max")]
    k_max: usize,
    #[serde(default = "one")]
    lattice: usize,
    tail: TailModel,
    entries: Vec<EntryJson>,
}

fn one() -> usize {
    1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DiscreteMeasure, GridDensity, TorusPoint};

    #[test]
    fn dirac_at_origin() {
        let d = MeasureData::Atomic(DiscreteMeasure::dirac(TorusPoint::new2(0.0, 0.0), 1.0));
        let t = FourierTable::of_measure(&d, 5).unwrap();
        for (_, v) in t.entries() {
            assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn grid_of_atoms_brute_force() {
        for n in [2usize, 3] {
            let mut atoms = Vec::new();
            for i in 0..n {
                for j in 0..n {
                    let x = [(i as f64 + 0.5) / n as f64, (j as f64 + 0.5) / n as f64];
                    atoms.push((x, 1.0 / (n * n) as f64));
                }
            }
            let pairs: Vec<(&[f64], f64)> = atoms.iter().map(|(x, m)| (&x[..], *m)).collect();
            let m = DiscreteMeasure::from_pairs(2, &pairs).unwrap();
            let t = FourierTable::of_measure(&MeasureData::Atomic(m), 12).unwrap();
            for (k, v) in t.entries() {
                let on = k[0] % n as i64 == 0 && k[1] % n as i64 == 0;
                let expect = if on { 1.0 } else { 0.0 };
                assert!((v.norm() - expect).abs() < 1e-12, "n={n} k={k:?} |v|={}", v.norm());
            }
        }
    }

    #[test]
    fn lebesgue_has_no_deviation() {
        let g = GridDensity::lebesgue(2, 4).unwrap();
        let t = FourierTable::of_deviation(&MeasureData::Grid(g), 8).unwrap();
        assert_eq!(t.zero_mode(), Complex64::new(0.0, 0.0));
        for (_, v) in t.entries() {
            assert!(v.norm() < 1e-14);
        }
    }

    #[test]
    fn periodic_boxes_match_expanded() {
        use crate::model::DensityBox;
        let b = BoxDensity::new(2, vec![DensityBox { lo: [0.05, 0.1], len: [0.1, 0.2], value: 25.0 }], 3).unwrap();
        let e = BoxDensity::new(2, b.expanded(), 1).unwrap();
        let t1 = FourierTable::of_measure(&MeasureData::Boxes(b), 9).unwrap();
        let t2 = FourierTable::of_measure(&MeasureData::Boxes(e), 9).unwrap();
        for (k, v) in t2.entries() {
            assert!((t1.get(k) - v).norm() < 1e-12, "k={k:?}");
        }
    }

    #[test]
    fn size_guard() {
        let d = MeasureData::Atomic(DiscreteMeasure::dirac(TorusPoint::new2(0.0, 0.0), 1.0));
        assert!(matches!(FourierTable::of_measure(&d, 6000), Err(Error::TableTooLarge(_))));
        assert!(FourierTable::of_measure(&d, 0).is_err());
    }

    #[test]
    fn json_round_trip() {
        let d = MeasureData::Atomic(DiscreteMeasure::dirac(TorusPoint::new2(0.3, 0.1), 1.0));
        let t = FourierTable::of_measure(&d, 3).unwrap();
        assert_eq!(FourierTable::from_json(&t.to_json()).unwrap(), t);
    }
}
