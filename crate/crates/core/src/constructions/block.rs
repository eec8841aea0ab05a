use super::certificate::Certificate;
use crate::constants::{BLOCK_THETA, C_BB};
use crate::error::{invalid, Result};
use crate::model::{internal_energy, reduce, DiscreteMeasure, PlanBuilder, TorusPoint};
use crate::Plan;

/// Refinement stops here even if atoms are still not separated.
const MAX_LEVEL: usize = 48;

/// Axis-aligned cube `corner + [0, side]^d` on the torus.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cube {
    pub corner: TorusPoint<f64>,
    pub side: f64,
}

impl Cube {
    pub fn new(corner: TorusPoint<f64>, side: f64) -> Result<Self> {
        if !(side > 0.0 && side <= 1.0) {
            return invalid("cube side must lie in (0, 1]");
        }
        Ok(Self { corner, side })
    }

    pub fn dim(&self) -> usize {
        self.corner.dim()
    }

    pub fn center(&self) -> TorusPoint<f64> {
        let h = 0.5 * self.side;
        self.corner.translate(&[h, h][..self.dim()])
    }

    /// Coordinates relative to the corner, or `None` outside the cube.
    fn local(&self, x: &TorusPoint<f64>) -> Option<[f64; 2]> {
        let mut u = [0.0; 2];
        for a in 0..self.dim() {
            let v = reduce(x.coord(a) - self.corner.coord(a));
            let v = if v > self.side && 1.0 - v <= 1e-12 { 0.0 } else { v };
            if v > self.side * (1.0 + 1e-12) {
                return None;
            }
            u[a] = v;
        }
        Some(u)
    }

    fn point(&self, u: [f64; 2]) -> TorusPoint<f64> {
        self.corner.translate(&u[..self.dim()])
    }
}

/// Symmetric dyadic tree through a trunk at the cube center: on each side
/// the level-`ℓ` node of a subcube of side `r 2^{-ℓ}` sits at the barycenter
/// of the boundary mass it carries, at time `±T(1 - θ^ℓ)`; a subcube with a
/// single atom goes straight to it.
pub fn building_block(
    cube: &Cube,
    horizon: f64,
    mu_minus: &DiscreteMeasure<f64>,
    mu_plus: &DiscreteMeasure<f64>,
) -> Result<(Plan, Certificate)> {
    let d = cube.dim();
    if mu_minus.dim() != d || mu_plus.dim() != d {
        return invalid("measures and cube differ in dimension");
    }
    if !(horizon > 0.0) {
        return invalid("horizon must be positive");
    }
    let phi = mu_plus.total_mass();
    if (mu_minus.total_mass() - phi).abs() > 1e-12 * phi.max(1.0) || !(phi > 0.0) {
        return invalid("boundary measures must carry the same positive mass");
    }
    let mut b = PlanBuilder::new();
    let root = b.node(0.0, cube.center());
    for (mu, sign) in [(mu_plus, 1.0), (mu_minus, -1.0)] {
        let mut atoms = Vec::with_capacity(mu.len());
        for a in mu.atoms() {
            let u = cube.local(&a.pos).ok_or_else(|| crate::Error::InvalidMeasure("atom outside the cube".into()))?;
            atoms.push((u, a.mass));
        }
        let half = HalfTree { cube, horizon, sign };
        half.grow(&mut b, root, &atoms, [0.0; 2], cube.side, 0);
    }
    let plan = b.build(d, horizon)?.merge_collinear_chains();
    let p = (d as f64 - 1.0) / d as f64;
    let e = internal_energy(&plan, -horizon, horizon, p)?;
    let scale = horizon * phi.powf(p) + cube.side * cube.side * phi / horizon;
    let cert = Certificate::new(e.perimeter, e.kinetic, e.internal(), C_BB, scale).require("building block")?;
    Ok((plan, cert))
}

struct HalfTree<'a> {
    cube: &'a Cube,
    horizon: f64,
    sign: f64,
}

impl HalfTree<'_> {
    fn connect(&self, b: &mut PlanBuilder<f64>, near: usize, far: usize, flux: f64) {
        if self.sign > 0.0 {
            b.edge(near, far, flux);
        } else {
            b.edge(far, near, flux);
        }
    }

    /// Children of the node `parent`, which carries `atoms` inside the
    /// subcube `lo + [0, side]^d` at refinement level `level`.
    fn grow(&self, b: &mut PlanBuilder<f64>, parent: usize, atoms: &[([f64; 2], f64)], lo: [f64; 2], side: f64, level: usize) {
        let d = self.cube.dim();
        if atoms.len() == 1 || level >= MAX_LEVEL {
            for &(u, m) in atoms {
                let leaf = b.node(self.sign * self.horizon, self.cube.point(u));
                self.connect(b, parent, leaf, m);
            }
            return;
        }
        let h = 0.5 * side;
        let mut groups: Vec<Vec<([f64; 2], f64)>> = vec![Vec::new(); 1 << d];
        for &(u, m) in atoms {
            let mut idx = 0;
            for a in 0..d {
                // Points on the midplane belong to the lower half.
                if (u[a] - lo[a]) / h > 1.0 {
                    idx |= 1 << a;
                }
            }
            groups[idx].push((u, m));
        }
        let t = self.sign * self.horizon * (1.0 - BLOCK_THETA.powi(level as i32 + 1));
        for (idx, g) in groups.iter().enumerate() {
            if g.is_empty() {
                continue;
            }
            let mass: f64 = g.iter().map(|x| x.1).sum();
            let mut bary = [0.0; 2];
            for &(u, m) in g {
                for a in 0..d {
                    bary[a] += u[a] * m / mass;
                }
            }
            let node = b.node(t, self.cube.point(bary));
            self.connect(b, parent, node, mass);
            let mut sub = lo;
            for a in 0..d {
                if idx & (1 << a) != 0 {
                    sub[a] += h;
                }
            }
            self.grow(b, node, g, sub, h, level + 1);
        }
    }
}

/// The `2^L × 2^L` grid of subcell centers of `cube`, total mass `mass`.
pub fn subcell_grid(cube: &Cube, level: u32, mass: f64) -> DiscreteMeasure<f64> {
    let d = cube.dim();
    let m = 1usize << level;
    let h = cube.side / m as f64;
    let count = m.pow(d as u32);
    let w = mass / count as f64;
    let mut pairs = Vec::with_capacity(count);
    for idx in 0..count {
        let (i, j) = if d == 1 { (idx, 0) } else { (idx / m, idx % m) };
        let u = [(i as f64 + 0.5) * h, (j as f64 + 0.5) * h];
        pairs.push(crate::model::Atom { pos: cube.point(u), mass: w });
    }
    DiscreteMeasure::new(d, pairs).expect("grid atoms are valid")
}
