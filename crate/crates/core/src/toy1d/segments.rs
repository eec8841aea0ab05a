/// `2[N T + λ / (12 N²)]`: N equidistant vertical segments of mass `1/N`.
pub fn segment_energy(n: usize, lambda: f64, horizon: f64) -> f64 {
    let n = n.max(1) as f64;
    2.0 * (n * horizon + lambda / (12.0 * n * n))
}

/// Exact integer minimizer of [`segment_energy`] (smaller `N` on ties).
pub fn optimal_segment_count(lambda: f64, horizon: f64) -> (usize, f64) {
    let cont = (lambda / (6.0 * horizon)).cbrt();
    let lo = (cont.floor() as usize).max(1);
    let mut best = (1, segment_energy(1, lambda, horizon));
    for n in [lo, lo + 1] {
        let e = segment_energy(n, lambda, horizon);
        if e < best.1 {
            best = (n, e);
        }
    }
    best
}

/// `min_N 2[N T + 1/(12 N² T_λ)]`, the lower bound from straight label paths.
pub fn lagrangian_lower_bound(lambda: f64, horizon: f64) -> f64 {
    let tl = horizon + 1.0 / lambda;
    segment_energy_general(horizon, 1.0 / tl)
}

/// `min_N 2[N T + a/(12 N²)]` over integers.
fn segment_energy_general(horizon: f64, a: f64) -> f64 {
    optimal_segment_count(a, horizon).1
}
