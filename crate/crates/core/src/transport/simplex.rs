//! Transportation-form network simplex.

use crate::error::{Error, Result};
use serde::Serialize;
use std::collections::VecDeque;

/// Reduced costs below `-PRICE_TOL` enter the basis.
const PRICE_TOL: f64 = 1e-12;
/// Entries below this fraction of the total mass are dropped from the output.
const PRUNE_REL: f64 = 1e-14;
/// Relative mass mismatch accepted between the two marginals.
pub const MASS_TOL: f64 = 1e-10;

/// A vertex solution of the discrete transport problem.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SparsePlan {
    /// `(source, target, mass)`, sorted by `(source, target)`.
    pub entries: Vec<(usize, usize, f64)>,
    pub cost: f64,
}

impl SparsePlan {
    pub fn support_size(&self) -> usize {
        self.entries.len()
    }

    pub fn row_sums(&self, n: usize) -> Vec<f64> {
        let mut r = vec![0.0; n];
        for &(i, _, x) in &self.entries {
            r[i] += x;
        }
        r
    }

    pub fn col_sums(&self, m: usize) -> Vec<f64> {
        let mut c = vec![0.0; m];
        for &(_, j, x) in &self.entries {
            c[j] += x;
        }
        c
    }
}

struct Basis {
    n: usize,
    m: usize,
    /// basic cells `(i, j, x)`; always `n + m - 1` of them
    cells: Vec<(usize, usize, f64)>,
}

impl Basis {
    /// Northwest corner rule with the columns visited in `order`.
    fn northwest(a: &[f64], b: &[f64], order: &[usize]) -> Self {
        let (n, m) = (a.len(), b.len());
        let mut cells = Vec::with_capacity(n + m - 1);
        let (mut i, mut j) = (0, 0);
        let (mut ra, mut rb) = (a[0], b[order[0]]);
        loop {
            let x = ra.min(rb);
            cells.push((i, order[j], x));
            ra -= x;
            rb -= x;
            if i == n - 1 && j == m - 1 {
                break;
            }
            if j == m - 1 || (i < n - 1 && ra <= rb) {
                i += 1;
                ra = a[i];
            } else {
                j += 1;
                rb = b[order[j]];
            }
        }
        Self { n, m, cells }
    }

    /// Tree adjacency over rows `0..n` and columns `n..n+m`; each entry is
    /// `(neighbour, cell index)`.
    fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.n + self.m];
        for (k, &(i, j, _)) in self.cells.iter().enumerate() {
            adj[i].push((self.n + j, k));
            adj[self.n + j].push((i, k));
        }
        adj
    }
}

/// Solves `min Σ c(i,j) x_ij` subject to row sums `a` and column sums `b`.
///
/// Entering cell: the most negative reduced cost below `-1e-12`, first in
/// row-major order on ties; leaving cell: the smallest cell index among the
/// ratio-test ties.
pub fn solve_transport(a: &[f64], b: &[f64], cost: impl Fn(usize, usize) -> f64) -> Result<SparsePlan> {
    let (n, m) = (a.len(), b.len());
    if n == 0 || m == 0 {
        return Err(Error::InvalidArgument("empty marginal".into()));
    }
    if a.iter().chain(b).any(|&x| !(x > 0.0) || !x.is_finite()) {
        return Err(Error::InvalidArgument("marginal masses must be positive".into()));
    }
    let (sa, sb): (f64, f64) = (a.iter().sum(), b.iter().sum());
    if (sa - sb).abs() > MASS_TOL * sa.max(sb).max(1.0) {
        return Err(Error::MassMismatch(sa, sb));
    }
    // absorb the rounding-level mismatch into the targets
    let b: Vec<f64> = b.iter().map(|x| x * (sa / sb)).collect();
    let c: Vec<f64> = (0..n * m).map(|k| cost(k / m, k % m)).collect();
    // Columns grouped by their cheapest row, so the starting basis already
    // sends most mass along cheap cells.
    let best_row = |j: usize| (0..n).min_by(|&x, &y| c[x * m + j].total_cmp(&c[y * m + j])).unwrap_or(0);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by_key(|&j| (best_row(j), j));
    let mut basis = Basis::northwest(a, &b, &order);
    let mut in_basis = vec![false; n * m];
    for &(i, j, _) in &basis.cells {
        in_basis[i * m + j] = true;
    }
    let max_iter = 50 * (n * m + n + m) + 10_000;
    let mut u = vec![0.0; n];
    let mut v = vec![0.0; m];
    for _ in 0..max_iter {
        let adj = basis.adjacency();
        // potentials and BFS tree rooted at row 0
        let mut parent = vec![(usize::MAX, usize::MAX); n + m];
        let mut depth = vec![0usize; n + m];
        let mut seen = vec![false; n + m];
        seen[0] = true;
        u[0] = 0.0;
        let mut queue = VecDeque::from([0usize]);
        while let Some(p) = queue.pop_front() {
            for &(q, k) in &adj[p] {
                if seen[q] {
                    continue;
                }
                seen[q] = true;
                parent[q] = (p, k);
                depth[q] = depth[p] + 1;
                let (i, j, _) = basis.cells[k];
                if q >= n {
                    v[j] = c[i * m + j] - u[i];
                } else {
                    u[i] = c[i * m + j] - v[j];
                }
                queue.push_back(q);
            }
        }
        let mut entering = None;
        let mut most = -PRICE_TOL;
        for k in 0..n * m {
            let r = c[k] - u[k / m] - v[k % m];
            if r < most && !in_basis[k] {
                most = r;
                entering = Some(k);
            }
        }
        let Some(e) = entering else {
            return Ok(finish(&basis, &c, m, sa));
        };
        let (ei, ej) = (e / m, e % m);
        // tree path between column ej and row ei
        let (mut p, mut q) = (n + ej, ei);
        let mut from_col = Vec::new();
        let mut from_row = Vec::new();
        while p != q {
            if depth[p] >= depth[q] {
                from_col.push(parent[p].1);
                p = parent[p].0;
            } else {
                from_row.push(parent[q].1);
                q = parent[q].0;
            }
        }
        from_col.extend(from_row.into_iter().rev());
        // walking from the entering column back to its row, cells alternate -, +, -, ...
        let minus: Vec<usize> = from_col.iter().step_by(2).copied().collect();
        let plus: Vec<usize> = from_col.iter().skip(1).step_by(2).copied().collect();
        let theta = minus.iter().map(|&k| basis.cells[k].2).fold(f64::INFINITY, f64::min);
        let leave = *minus
            .iter()
            .filter(|&&k| basis.cells[k].2 == theta)
            .min_by_key(|&&k| basis.cells[k].0 * m + basis.cells[k].1)
            .expect("cycle has a decreasing cell");
        for &k in &minus {
            basis.cells[k].2 -= theta;
        }
        for &k in &plus {
            basis.cells[k].2 += theta;
        }
        let (li, lj, _) = basis.cells[leave];
        in_basis[li * m + lj] = false;
        in_basis[e] = true;
        basis.cells[leave] = (ei, ej, theta);
    }
    Err(Error::InvalidArgument("network simplex did not converge".into()))
}

fn finish(basis: &Basis, c: &[f64], m: usize, total: f64) -> SparsePlan {
    let mut entries: Vec<(usize, usize, f64)> =
        basis.cells.iter().filter(|&&(_, _, x)| x > PRUNE_REL * total).map(|&(i, j, x)| (i, j, x.max(0.0))).collect();
    entries.sort_by_key(|&(i, j, _)| (i, j));
    let cost = entries.iter().map(|&(i, j, x)| c[i * m + j] * x).sum();
    SparsePlan { entries, cost }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tiny_instances() {
        let p = solve_transport(&[1.0], &[1.0], |_, _| 0.16).unwrap();
        assert_eq!(p.entries, vec![(0, 0, 1.0)]);
        assert_eq!(p.cost, 0.16);
        let c = [[1.0, 0.0], [0.0, 1.0]];
        let p = solve_transport(&[0.5, 0.5], &[0.5, 0.5], |i, j| c[i][j]).unwrap();
        assert_eq!(p.cost, 0.0);
        assert_eq!(p.entries, vec![(0, 1, 0.5), (1, 0, 0.5)]);
    }

    #[test]
    fn rejects_mismatch() {
        assert!(matches!(solve_transport(&[1.0], &[0.9], |_, _| 0.0), Err(Error::MassMismatch(..))));
        assert!(solve_transport(&[], &[1.0], |_, _| 0.0).is_err());
    }

    #[test]
    fn degenerate_marginals() {
        let a = [0.25; 4];
        let b = [0.5, 0.5];
        let p = solve_transport(&a, &b, |i, j| ((i as f64) / 4.0 - (j as f64) / 2.0).powi(2)).unwrap();
        assert!(p.support_size() <= 5);
        for (r, x) in p.row_sums(4).iter().zip(a) {
            assert!((r - x).abs() < 1e-15);
        }
    }
}
