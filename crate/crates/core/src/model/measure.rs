use super::point::{periodic_distance, TorusPoint};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Atoms closer than this (in torus distance) are merged by [`DiscreteMeasure::merged`].
pub const MERGE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Atom<S> {
    pub pos: TorusPoint<S>,
    pub mass: S,
}

/// Finitely many weighted atoms on the torus with positive masses at
/// distinct positions.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteMeasure<S> {
    dim: usize,
    atoms: Vec<Atom<S>>,
}

impl<S: Scalar> DiscreteMeasure<S> {
    pub fn new(dim: usize, atoms: Vec<Atom<S>>) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::UnsupportedDimension(dim));
        }
        for a in &atoms {
            if a.pos.dim() != dim {
                return Err(Error::DimensionMismatch(a.pos.dim(), dim));
            }
            if !(a.mass > S::zero()) || !a.mass.is_finite() {
                return Err(Error::InvalidMeasure(format!("atom mass {} is not positive", a.mass)));
            }
        }
        let mut order: Vec<usize> = (0..atoms.len()).collect();
        order.sort_by(|&i, &j| atoms[i].pos.lex_cmp(&atoms[j].pos));
        for w in order.windows(2) {
            if atoms[w[0]].pos == atoms[w[1]].pos {
                return Err(Error::InvalidMeasure("two atoms share a position".into()));
            }
        }
        Ok(Self { dim, atoms })
    }

    /// Builds a measure from `(position, mass)` pairs.
    pub fn from_pairs(dim: usize, pairs: &[(&[S], S)]) -> Result<Self> {
        let atoms = pairs
            .iter()
            .map(|(x, m)| Ok(Atom { pos: TorusPoint::new(x)?, mass: *m }))
            .collect::<Result<Vec<_>>>()?;
        Self::new(dim, atoms)
    }

    pub fn empty(dim: usize) -> Self {
        Self { dim, atoms: Vec::new() }
    }

    /// Single atom of mass `mass` at `pos`.
    pub fn dirac(pos: TorusPoint<S>, mass: S) -> Self {
        Self { dim: pos.dim(), atoms: vec![Atom { pos, mass }] }
    }

    /// Collects atoms, dropping nonpositive masses and merging atoms within
    /// `tol` of each other (torus distance). Merged atoms keep the position of
    /// the first atom in lexicographic order. Output is sorted.
    pub fn merged(dim: usize, mut atoms: Vec<Atom<S>>, tol: S) -> Result<Self> {
        atoms.retain(|a| a.mass > S::zero());
        for a in &atoms {
            if a.pos.dim() != dim {
                return Err(Error::DimensionMismatch(a.pos.dim(), dim));
            }
        }
        atoms.sort_by(|a, b| a.pos.lex_cmp(&b.pos));
        let n = atoms.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut i: usize) -> usize {
            while p[i] != i {
                p[i] = p[p[i]];
                i = p[i];
            }
            i
        }
        let close = |a: &Atom<S>, b: &Atom<S>| periodic_distance(&a.pos, &b.pos).unwrap() <= tol;
        for i in 0..n {
            let mut j = i + 1;
            while j < n && atoms[j].pos.coord(0) - atoms[i].pos.coord(0) <= tol {
                if close(&atoms[i], &atoms[j]) {
                    let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                    parent[ri.max(rj)] = ri.min(rj);
                }
                j += 1;
            }
        }
        // wrap-around in the first coordinate
        let one = S::one();
        let lo: Vec<usize> = (0..n).take_while(|&i| atoms[i].pos.coord(0) <= tol).collect();
        let hi: Vec<usize> =
            (0..n).rev().take_while(|&i| atoms[i].pos.coord(0) >= one - tol).collect();
        for &i in &lo {
            for &j in &hi {
                if i != j && close(&atoms[i], &atoms[j]) {
                    let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
        // class roots are the smallest index in their class, so the kept
        // position is the lexicographically first one
        let mut out: Vec<Atom<S>> = Vec::with_capacity(n);
        let mut slot = vec![usize::MAX; n];
        for i in 0..n {
            let r = find(&mut parent, i);
            if slot[r] == usize::MAX {
                slot[r] = out.len();
                out.push(atoms[i]);
            } else {
                out[slot[r]].mass = out[slot[r]].mass + atoms[i].mass;
            }
        }
        Ok(Self { dim, atoms: out })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> &[Atom<S>] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> S {
        self.atoms.iter().fold(S::zero(), |s, a| s + a.mass)
    }

    /// Same atoms with masses divided by the total mass.
    pub fn normalized(&self) -> Self {
        let m = self.total_mass();
        Self {
            dim: self.dim,
            atoms: self.atoms.iter().map(|a| Atom { pos: a.pos, mass: a.mass / m }).collect(),
        }
    }

    /// Translates every atom by `v`.
    pub fn translated(&self, v: &[S]) -> Self {
        Self {
            dim: self.dim,
            atoms: self.atoms.iter().map(|a| Atom { pos: a.pos.translate(v), mass: a.mass }).collect(),
        }
    }

    /// Atoms sorted lexicographically by position.
    pub fn sorted(&self) -> Self {
        let mut atoms = self.atoms.clone();
        atoms.sort_by(|a, b| a.pos.lex_cmp(&b.pos));
        Self { dim: self.dim, atoms }
    }
}

#[derive(serde::Serialize, serde::Deserialize)]
struct AtomJson {
    x: Vec<f64>,
    mass: f64,
}

#[derive(serde::Serialize, serde::Deserialize)]
struct MeasureJson {
    dim: usize,
    atoms: Vec<AtomJson>,
}

impl DiscreteMeasure<f64> {
    /// `{dim, atoms: [{x, mass}]}`.
    pub fn to_json(&self) -> String {
        let j = MeasureJson {
            dim: self.dim,
            atoms: self.atoms.iter().map(|a| AtomJson { x: a.pos.coords().to_vec(), mass: a.mass }).collect(),
        };
        serde_json::to_string(&j).expect("measure serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let j: MeasureJson = serde_json::from_str(text)?;
        let atoms = j.atoms.iter().map(|a| Ok(Atom { pos: TorusPoint::new(&a.x)?, mass: a.mass })).collect::<Result<Vec<_>>>()?;
        Self::new(j.dim, atoms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn atom(x: f64, m: f64) -> Atom<f64> {
        Atom { pos: TorusPoint::new1(x), mass: m }
    }

    #[test]
    fn rejects_bad_atoms() {
        assert!(DiscreteMeasure::new(1, vec![atom(0.1, 0.0)]).is_err());
        assert!(DiscreteMeasure::new(1, vec![atom(0.1, 0.5), atom(0.1, 0.5)]).is_err());
        assert!(DiscreteMeasure::<f64>::new(3, vec![]).is_err());
        assert!(DiscreteMeasure::new(1, vec![atom(0.1, 0.5), atom(0.2, 0.5)]).is_ok());
    }

    #[test]
    fn merging_handles_wraparound() {
        let m = DiscreteMeasure::merged(
            1,
            vec![atom(0.3, 0.25), atom(0.0, 0.25), atom(1.0 - 1e-13, 0.25), atom(0.3 + 1e-13, 0.25)],
            MERGE_TOL,
        )
        .unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m.atoms()[0].mass, 0.5);
        assert_eq!(m.atoms()[1].mass, 0.5);
        assert_eq!(m.total_mass(), 1.0);
    }

    #[test]
    fn json_round_trip() {
        let mu = DiscreteMeasure::from_pairs(2, &[(&[0.1, 0.7][..], 0.3), (&[1.0 / 3.0, 0.2][..], 0.7)]).unwrap();
        let back = DiscreteMeasure::from_json(&mu.to_json()).unwrap();
        assert_eq!(back, mu);
        assert!(DiscreteMeasure::from_json(r#"{"dim":1,"atoms":[{"x":[0.5],"mass":-1}]}"#).is_err());
    }
}
