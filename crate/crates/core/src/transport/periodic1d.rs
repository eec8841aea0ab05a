//! Periodic optimal transport on the circle via quantile functions.
//!
//! With `Q1`, `Q2` the quantile functions (extended by `Q(u+1) = Q(u)+1`),
//! `W²_per = min_α c(α)`, `c(α) = ∫_0^1 (Q1(u) - Q2(u+α))² du`, and `c` is
//! convex in `α`.

use crate::error::{invalid, Error, Result};
use crate::model::{DiscreteMeasure, MeasureData};
use serde::Serialize;

/// `Q` is affine from `x0` to `x1` on `[u0, u1]` (constant for an atom).
#[derive(Clone, Copy, Debug, PartialEq)]
struct Piece {
    u0: f64,
    u1: f64,
    x0: f64,
    x1: f64,
}

impl Piece {
    fn at(&self, u: f64) -> f64 {
        if self.x0 == self.x1 || self.u1 == self.u0 {
            self.x0
        } else {
            self.x0 + (self.x1 - self.x0) * (u - self.u0) / (self.u1 - self.u0)
        }
    }
}

/// Quantile function of a normalized measure on the circle.
#[derive(Clone, Debug)]
struct Quantile {
    pieces: Vec<Piece>,
    atomic: bool,
    mean: f64,
}

impl Quantile {
    fn new(sigma: &MeasureData) -> Result<(Self, f64)> {
        if sigma.dim() != 1 {
            return Err(Error::DimensionMismatch(sigma.dim(), 1));
        }
        let total = sigma.total_mass();
        if !(total > 0.0) {
            return invalid("measure has no mass");
        }
        // (position start, position end, mass)
        let mut raw: Vec<(f64, f64, f64)> = match sigma {
            MeasureData::Atomic(m) => m.atoms().iter().map(|a| (a.pos.coord(0), a.pos.coord(0), a.mass)).collect(),
            MeasureData::Grid(g) => {
                if g.side > 1.0 + 1e-15 {
                    return invalid("grid density must lie inside the unit circle");
                }
                let h = g.cell();
                g.values
                    .iter()
                    .enumerate()
                    .filter(|(_, &v)| v != 0.0)
                    .map(|(i, &v)| (i as f64 * h, (i + 1) as f64 * h, v * h))
                    .collect()
            }
            MeasureData::Boxes(b) => {
                let mut out = Vec::new();
                for bx in b.expanded() {
                    if bx.value == 0.0 {
                        continue;
                    }
                    // split boxes crossing the period boundary
                    let lo = bx.lo[0].rem_euclid(1.0);
                    let hi = lo + bx.len[0];
                    if hi > 1.0 {
                        out.push((lo, 1.0, bx.value * (1.0 - lo)));
                        out.push((0.0, hi - 1.0, bx.value * (hi - 1.0)));
                    } else {
                        out.push((lo, hi, bx.value * bx.len[0]));
                    }
                }
                out
            }
        };
        if raw.iter().any(|r| r.2 < 0.0) {
            return invalid("negative density");
        }
        raw.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.partial_cmp(&b.1).unwrap()));
        for w in raw.windows(2) {
            if w[1].0 < w[0].1 - 1e-15 {
                return invalid("overlapping density pieces");
            }
        }
        let mut pieces = Vec::with_capacity(raw.len());
        let mut acc = 0.0;
        let mut mean = 0.0;
        for (x0, x1, m) in &raw {
            let w = m / total;
            pieces.push(Piece { u0: acc, u1: acc + w, x0: *x0, x1: *x1 });
            acc += w;
            mean += w * 0.5 * (x0 + x1);
        }
        if let Some(last) = pieces.last_mut() {
            last.u1 = 1.0;
        }
        let atomic = matches!(sigma, MeasureData::Atomic(_));
        Ok((Self { pieces, atomic, mean }, total))
    }

    /// Pieces of `u ↦ Q(u + α)` covering `[0, 1]`, in order.
    fn shifted(&self, alpha: f64) -> Vec<Piece> {
        let mut out = Vec::with_capacity(self.pieces.len() + 2);
        let k0 = alpha.floor() as i64;
        for k in k0..=k0 + 1 {
            for p in &self.pieces {
                let (a, b) = (p.u0 + k as f64 - alpha, p.u1 + k as f64 - alpha);
                if b <= 0.0 || a >= 1.0 {
                    continue;
                }
                let shift = k as f64;
                out.push(Piece { u0: a, u1: b, x0: p.x0 + shift, x1: p.x1 + shift });
            }
        }
        out
    }

    /// Breakpoints `u_i + k` of the extension, sorted.
    fn extended_breaks(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut out = Vec::new();
        for k in (lo.floor() as i64 - 1)..=(hi.ceil() as i64 + 1) {
            for p in &self.pieces {
                out.push(p.u0 + k as f64);
            }
        }
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out
    }
}

/// Walks the common refinement of `Q1` and `Q2(· + α)`, calling `f` with the
/// overlap `[u0, u1]` and the two affine pieces active there.
fn sweep(q1: &Quantile, q2: &Quantile, alpha: f64, mut f: impl FnMut(f64, f64, &Piece, &Piece)) {
    let s = q2.shifted(alpha);
    let (mut i, mut j) = (0, 0);
    while i < q1.pieces.len() && j < s.len() {
        let (p, q) = (&q1.pieces[i], &s[j]);
        let a = p.u0.max(q.u0).max(0.0);
        let b = p.u1.min(q.u1).min(1.0);
        if b > a {
            f(a, b, p, q);
        }
        if p.u1 <= q.u1 {
            i += 1;
        } else {
            j += 1;
        }
    }
}

fn offset_cost(q1: &Quantile, q2: &Quantile, alpha: f64) -> f64 {
    let mut c = 0.0;
    // Simpson is exact for the squared affine difference
    sweep(q1, q2, alpha, |a, b, p, q| {
        let m = 0.5 * (a + b);
        let (d0, dm, d1) = (q.at(a) - p.at(a), q.at(m) - p.at(m), q.at(b) - p.at(b));
        c += (b - a) / 6.0 * (d0 * d0 + 4.0 * dm * dm + d1 * d1);
    });
    c
}

fn golden_section(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if b - a < 1e-15 {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        }
    }
    0.5 * (a + b)
}

/// Minimizes `c` over the smooth piece containing `alpha` (a polynomial of
/// degree at most three between consecutive offsets where breakpoints align).
fn refine_on_piece(q1: &Quantile, q2: &Quantile, alpha: f64) -> (f64, f64) {
    let ext = q2.extended_breaks(alpha, alpha + 1.0);
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for p in q1.pieces.iter().map(|p| p.u0).chain(std::iter::once(1.0)) {
        let target = p + alpha;
        let idx = ext.partition_point(|&w| w <= target);
        if idx > 0 {
            lo = lo.max(ext[idx - 1] - p);
        }
        if idx < ext.len() {
            hi = hi.min(ext[idx] - p);
        }
    }
    let c = |a: f64| offset_cost(q1, q2, a);
    // the golden-section point is only accurate to sqrt(eps); it is kept
    // solely as a fallback when the piece is degenerate
    let mut best = (f64::NAN, f64::INFINITY);
    let mut consider = |a: f64| {
        if a.is_finite() {
            let v = c(a);
            if v < best.1 {
                best = (a, v);
            }
        }
    };
    consider(lo);
    consider(hi);
    if lo.is_finite() && hi.is_finite() && hi - lo > 1e-12 {
        // cubic through four samples, stationary points in closed form
        let xs = [lo, lo + (hi - lo) / 3.0, lo + 2.0 * (hi - lo) / 3.0, hi];
        let ys: Vec<f64> = xs.iter().map(|&x| c(x)).collect();
        let (y0, y1, y2, y3) = (ys[0], ys[1], ys[2], ys[3]);
        // Newton form on nodes 0, 1/3, 2/3, 1 in t
        let d1 = (y1 - y0) * 3.0;
        let d2 = ((y2 - y1) * 3.0 - d1) * 1.5;
        let d3 = (((y3 - y2) * 3.0 - (y2 - y1) * 3.0) * 1.5 - d2) * 1.0;
        // p(t) = y0 + d1 t + d2 t(t-1/3) + d3 t(t-1/3)(t-2/3)
        let a3 = d3;
        let a2 = d2 - d3;
        let a1 = d1 - d2 / 3.0 + 2.0 * d3 / 9.0;
        let (qa, qb, qc) = (3.0 * a3, 2.0 * a2, a1);
        // stable roots of qa t² + qb t + qc (qa is often rounding noise)
        let mut roots = Vec::new();
        let disc = qb * qb - 4.0 * qa * qc;
        if disc >= 0.0 {
            let q = -0.5 * (qb + qb.signum() * disc.sqrt());
            if q != 0.0 {
                roots.push(qc / q);
            }
            if qa != 0.0 {
                roots.push(q / qa);
            }
        }
        for r in roots {
            if (0.0..=1.0).contains(&r) {
                consider(lo + r * (hi - lo));
            }
        }
    }
    if !lo.is_finite() || !hi.is_finite() {
        consider(alpha);
    }
    best
}

/// A nondecreasing map `Ψ` with `Ψ - x` periodic, stored as affine pieces
/// over the source support together with the mass each piece carries.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonotoneMap {
    /// `(x0, x1, Ψ(x0), Ψ(x1), mass)`
    pub pieces: Vec<(f64, f64, f64, f64, f64)>,
    /// Rotation offset `α` of the quantile matching.
    pub offset: f64,
}

impl MonotoneMap {
    /// `Ψ(x)` for `x` in the source support, extended by `Ψ(x+1) = Ψ(x)+1`.
    pub fn eval(&self, x: f64) -> f64 {
        let k = x.floor();
        let y = x - k;
        let idx = self.pieces.partition_point(|p| p.1 <= y).min(self.pieces.len() - 1);
        let (x0, x1, y0, y1, _) = self.pieces[idx];
        let v = if x1 > x0 { y0 + (y1 - y0) * ((y - x0) / (x1 - x0)).clamp(0.0, 1.0) } else { y0 };
        v + k
    }

    /// `∫ (Ψ - x) dλ₁`.
    pub fn mean_displacement(&self) -> f64 {
        self.pieces.iter().map(|&(x0, x1, y0, y1, m)| m * 0.5 * ((y0 - x0) + (y1 - x1))).sum()
    }

    pub fn is_monotone(&self) -> bool {
        self.pieces.iter().all(|p| p.3 >= p.2)
            && self.pieces.windows(2).all(|w| w[1].2 >= w[0].3 - 1e-12)
    }
}

/// Optimal offset and cost for normalized quantiles.
fn solve_offset(q1: &Quantile, q2: &Quantile) -> (f64, f64) {
    // mean displacement vanishes at α0; the optimum lies within 1/2 of it
    let alpha0 = q1.mean - q2.mean;
    let c = |a: f64| offset_cost(q1, q2, a);
    let g = golden_section(&c, alpha0 - 0.5, alpha0 + 0.5);
    refine_on_piece(q1, q2, g)
}

/// `W²_per(λ₁, λ₂)` on the circle without building a map; atoms allowed.
pub fn w2_periodic_1d_cost(l1: &MeasureData, l2: &MeasureData) -> Result<f64> {
    let (q1, m1) = Quantile::new(l1)?;
    let (q2, m2) = Quantile::new(l2)?;
    if (m1 - m2).abs() > super::simplex::MASS_TOL * m1.max(m2).max(1.0) {
        return Err(Error::MassMismatch(m1, m2));
    }
    Ok(m1 * solve_offset(&q1, &q2).1)
}

/// `W²_per(λ₁, λ₂)` and the monotone optimal map; `λ₁` must be atomless.
pub fn w2_periodic_1d(l1: &MeasureData, l2: &MeasureData) -> Result<(f64, MonotoneMap)> {
    let (q1, m1) = Quantile::new(l1)?;
    let (q2, m2) = Quantile::new(l2)?;
    if (m1 - m2).abs() > super::simplex::MASS_TOL * m1.max(m2).max(1.0) {
        return Err(Error::MassMismatch(m1, m2));
    }
    if q1.atomic {
        return invalid("a transport map needs an atomless source");
    }
    let (alpha, cost) = solve_offset(&q1, &q2);
    let mut pieces = Vec::new();
    sweep(&q1, &q2, alpha, |a, b, p, q| {
        pieces.push((p.at(a), p.at(b), q.at(a), q.at(b), m1 * (b - a)));
    });
    Ok((m1 * cost, MonotoneMap { pieces, offset: alpha }))
}

/// `W²_per(σ, 1)` for atoms on the circle, in closed form: with
/// `D(v) = v - Q(v)`, the cost is the variance of `D` over `[0, 1]`.
pub fn w2_to_lebesgue_1d(sigma: &DiscreteMeasure<f64>) -> Result<f64> {
    if sigma.dim() != 1 {
        return Err(Error::DimensionMismatch(sigma.dim(), 1));
    }
    let total = sigma.total_mass();
    if !(total > 0.0) {
        return invalid("measure has no mass");
    }
    let s = sigma.sorted();
    let mut pieces = Vec::with_capacity(s.len());
    let mut acc = 0.0;
    for a in s.atoms() {
        let f = acc + a.mass / total;
        pieces.push((acc, f, a.pos.coord(0)));
        acc = f;
    }
    if let Some(last) = pieces.last_mut() {
        last.1 = 1.0;
    }
    let mean: f64 = pieces.iter().map(|&(a, b, x)| 0.5 * (b * b - a * a) - x * (b - a)).sum();
    let var: f64 = pieces
        .iter()
        .map(|&(a, b, x)| ((b - x - mean).powi(3) - (a - x - mean).powi(3)) / 3.0)
        .sum();
    Ok(total * var)
}
