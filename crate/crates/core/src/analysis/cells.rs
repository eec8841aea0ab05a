use crate::error::{invalid, Result};
use crate::model::MeasureData;

/// Masses of the `m^d` cells `[i/m, (i+1)/m)` of the torus, cell `(i0, i1)`
/// at `i0 * m + i1`.
pub fn cell_masses(sigma: &MeasureData, m: usize) -> Result<Vec<f64>> {
    if m == 0 {
        return invalid("need at least one cell per axis");
    }
    let dim = sigma.dim();
    let mut out = vec![0.0; m.pow(dim as u32)];
    let mf = m as f64;
    let index = |i0: usize, i1: usize| if dim == 1 { i0 } else { i0 * m + i1 };
    match sigma {
        MeasureData::Atomic(mu) => {
            for a in mu.atoms() {
                let c = |ax: usize| ((a.pos.coord(ax) * mf) as usize).min(m - 1);
                out[index(c(0), if dim == 2 { c(1) } else { 0 })] += a.mass;
            }
        }
        MeasureData::Grid(g) => add_boxes(&g.to_boxes().expanded(), dim, m, &mut out),
        MeasureData::Boxes(b) => add_boxes(&b.expanded(), dim, m, &mut out),
    }
    Ok(out)
}

/// Lengths of the overlaps of `[lo, lo + len)` (mod 1) with the cells of an
/// `m`-grid.
fn overlaps(lo: f64, len: f64, m: usize) -> Vec<(usize, f64)> {
    let mf = m as f64;
    let start = lo.rem_euclid(1.0) * mf;
    let end = start + len * mf;
    let mut out = Vec::new();
    let mut k = start.floor();
    while k < end {
        let a = start.max(k);
        let b = end.min(k + 1.0);
        if b > a {
            out.push(((k as i64).rem_euclid(m as i64) as usize, (b - a) / mf));
        }
        k += 1.0;
    }
    out
}

fn add_boxes(boxes: &[crate::model::DensityBox], dim: usize, m: usize, out: &mut [f64]) {
    for b in boxes {
        let xs = overlaps(b.lo[0], b.len[0], m);
        if dim == 1 {
            for (i, w) in xs {
                out[i] += b.value * w;
            }
        } else {
            let ys = overlaps(b.lo[1], b.len[1], m);
            for &(i, wx) in &xs {
                for &(j, wy) in &ys {
                    out[i * m + j] += b.value * wx * wy;
                }
            }
        }
    }
}
