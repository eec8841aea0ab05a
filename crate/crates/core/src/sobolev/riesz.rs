use crate::error::{invalid, Error, Result};
use crate::model::{GridDensity, MeasureData};
use rayon::prelude::*;

const GL_NODES: [f64; 5] = [
    0.148_874_338_981_631_2,
    0.433_395_394_129_247_2,
    0.679_409_568_299_024_4,
    0.865_063_366_688_984_5,
    0.973_906_528_517_171_7,
];
const GL_WEIGHTS: [f64; 5] = [
    0.295_524_224_714_752_9,
    0.269_266_719_309_996_4,
    0.219_086_362_515_982,
    0.149_451_349_150_580_6,
    0.066_671_344_308_688_1,
];

/// 10-point Gauss–Legendre rule on `[a, b]`.
fn gl10(a: f64, b: f64, f: &impl Fn(f64) -> f64) -> f64 {
    let (m, h) = (0.5 * (a + b), 0.5 * (b - a));
    let mut s = 0.0;
    for i in 0..5 {
        s += GL_WEIGHTS[i] * (f(m - h * GL_NODES[i]) + f(m + h * GL_NODES[i]));
    }
    s * h
}

fn adaptive_1d(a: f64, b: f64, f: &impl Fn(f64) -> f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (l, r) = (gl10(a, m, f), gl10(m, b, f));
    if depth == 0 || (l + r - whole).abs() <= tol {
        return l + r;
    }
    adaptive_1d(a, m, f, l, 0.5 * tol, depth - 1) + adaptive_1d(m, b, f, r, 0.5 * tol, depth - 1)
}

fn gl10_square(x0: f64, y0: f64, h: f64, f: &impl Fn(f64, f64) -> f64) -> f64 {
    gl10(x0, x0 + h, &|x| gl10(y0, y0 + h, &|y| f(x, y)))
}

fn adaptive_square(x0: f64, y0: f64, h: f64, f: &impl Fn(f64, f64) -> f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let g = 0.5 * h;
    let parts = [
        gl10_square(x0, y0, g, f),
        gl10_square(x0 + g, y0, g, f),
        gl10_square(x0, y0 + g, g, f),
        gl10_square(x0 + g, y0 + g, g, f),
    ];
    let sum: f64 = parts.iter().sum();
    if depth == 0 || (sum - whole).abs() <= tol {
        return sum;
    }
    let corners = [(x0, y0), (x0 + g, y0), (x0, y0 + g), (x0 + g, y0 + g)];
    corners
        .iter()
        .zip(parts)
        .map(|(&(x, y), p)| adaptive_square(x, y, g, f, p, 0.25 * tol, depth - 1))
        .sum()
}

const TOL: f64 = 1e-11;

/// `∫_{[-1,1]} (1-|z|) |z+p|^{-α} dz`.
fn offset_weight_1d(p: i64, alpha: f64) -> f64 {
    if p.abs() <= 3 {
        let g = |z: f64| z.abs().powf(2.0 - alpha) / ((1.0 - alpha) * (2.0 - alpha));
        let p = p as f64;
        g(p + 1.0) - 2.0 * g(p) + g(p - 1.0)
    } else {
        let f = |z: f64| (1.0 - z.abs()) * (z + p as f64).abs().powf(-alpha);
        gl10(-1.0, 0.0, &f) + gl10(0.0, 1.0, &f)
    }
}

/// `∫_{[0,1]²} (c00 + c10 a + c01 b + c11 ab) |(a,b)|^{-α} da db` in polar
/// coordinates around the singular corner, radial part in closed form.
fn corner_integral(c: [f64; 4], alpha: f64) -> f64 {
    let radial = |th: f64| {
        let (s, co) = th.sin_cos();
        let r = 1.0 / co.max(s);
        c[0] * r.powf(2.0 - alpha) / (2.0 - alpha)
            + (c[1] * co + c[2] * s) * r.powf(3.0 - alpha) / (3.0 - alpha)
            + c[3] * co * s * r.powf(4.0 - alpha) / (4.0 - alpha)
    };
    let q = std::f64::consts::FRAC_PI_4;
    let a = gl10(0.0, q, &radial);
    let b = gl10(q, 2.0 * q, &radial);
    adaptive_1d(0.0, q, &radial, a, TOL, 20) + adaptive_1d(q, 2.0 * q, &radial, b, TOL, 20)
}

/// `∫_{[-1,1]²} (1-|z1|)(1-|z2|) |z+P|^{-α} dz`.
fn offset_weight_2d(p: [i64; 2], alpha: f64) -> f64 {
    let w = |z1: f64, z2: f64| (1.0 - z1.abs()) * (1.0 - z2.abs());
    let mut total = 0.0;
    for q0 in [-1i64, 0] {
        for q1 in [-1i64, 0] {
            // unit square of u = z + P with lower corner (q0 + p0, q1 + p1)
            let lo = [q0 + p[0], q1 + p[1]];
            let corner = [lo[0] == 0 || lo[0] == -1, lo[1] == 0 || lo[1] == -1];
            if corner[0] && corner[1] {
                // reflect so the singular corner sits at the origin
                let s = [if lo[0] == 0 { 1.0 } else { -1.0 }, if lo[1] == 0 { 1.0 } else { -1.0 }];
                let at = |a: f64, b: f64| w(s[0] * a - p[0] as f64, s[1] * b - p[1] as f64);
                let (w00, w10, w01, w11) = (at(0.0, 0.0), at(1.0, 0.0), at(0.0, 1.0), at(1.0, 1.0));
                total += corner_integral([w00, w10 - w00, w01 - w00, w11 - w10 - w01 + w00], alpha);
            } else {
                let f = |u1: f64, u2: f64| w(u1 - p[0] as f64, u2 - p[1] as f64) * (u1 * u1 + u2 * u2).powf(-0.5 * alpha);
                let (x0, y0) = (lo[0] as f64, lo[1] as f64);
                let whole = gl10_square(x0, y0, 1.0, &f);
                total += adaptive_square(x0, y0, 1.0, &f, whole, TOL, 8);
            }
        }
    }
    total
}

/// `V_α(σ) = ∫∫ |x-y|^{-α} dσ(x) dσ(y)` for a piecewise constant density on
/// `[0, side]^d` (Euclidean, not periodic).
pub fn riesz_energy(sigma: &MeasureData, alpha: f64) -> Result<f64> {
    let g: &GridDensity = match sigma {
        MeasureData::Grid(g) => g,
        MeasureData::Atomic(_) => return invalid("Riesz energy of an atomic measure is infinite"),
        MeasureData::Boxes(_) => return invalid("Riesz energy needs a grid density"),
    };
    let d = g.dim;
    if !(alpha > 0.0 && alpha < d as f64) {
        return Err(Error::InvalidArgument(format!("alpha must lie in (0, {d})")));
    }
    let n = g.n as i64;
    let h = g.cell();
    let v = &g.values;
    if d == 1 {
        let s: f64 = (-(n - 1)..n)
            .into_par_iter()
            .map(|p| {
                let c: f64 = (0.max(-p)..n.min(n - p)).map(|i| v[i as usize] * v[(i + p) as usize]).sum();
                if c == 0.0 {
                    0.0
                } else {
                    c * offset_weight_1d(p, alpha)
                }
            })
            .sum();
        return Ok(s * h.powf(2.0 - alpha));
    }
    let at = |i: i64, j: i64| v[(i * n + j) as usize];
    let offsets: Vec<[i64; 2]> = (-(n - 1)..n).flat_map(|p| (-(n - 1)..n).map(move |q| [p, q])).collect();
    let s: f64 = offsets
        .par_iter()
        .map(|&[p, q]| {
            let mut c = 0.0;
            for i in 0.max(-p)..n.min(n - p) {
                for j in 0.max(-q)..n.min(n - q) {
                    c += at(i, j) * at(i + p, j + q);
                }
            }
            if c == 0.0 {
                0.0
            } else {
                c * offset_weight_2d([p, q], alpha)
            }
        })
        .sum();
    Ok(s * h.powf(4.0 - alpha))
}
