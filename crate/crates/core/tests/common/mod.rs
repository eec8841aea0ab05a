#![allow(dead_code)]

use branchlab::model::{Atom, DiscreteMeasure, TorusPoint, MERGE_TOL};
use branchlab::rng::stream;
use rand::Rng;

pub fn point(rng: &mut impl Rng, dim: usize) -> TorusPoint<f64> {
    if dim == 1 {
        TorusPoint::new1(rng.gen())
    } else {
        TorusPoint::new2(rng.gen(), rng.gen())
    }
}

/// `n` atoms with masses in `[0.1, 1)`, scaled to total mass `total`.
pub fn random_measure(seed: u64, n: usize, dim: usize, total: f64) -> DiscreteMeasure<f64> {
    let mut rng = stream(seed, 0);
    let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..1.0)).collect();
    let s: f64 = w.iter().sum();
    let atoms = w.iter().map(|&m| Atom { pos: point(&mut rng, dim), mass: total * m / s }).collect();
    DiscreteMeasure::merged(dim, atoms, MERGE_TOL).unwrap()
}
