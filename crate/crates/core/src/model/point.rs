use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A point of the flat torus `[0,1)^d`, `d ∈ {1,2}`.
///
/// Unused trailing coordinates are kept at zero so that derived equality and
/// ordering only see the meaningful ones.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TorusPoint<S> {
    coords: [S; 2],
    dim: usize,
}

/// Reduces a real number to `[0,1)`.
pub fn reduce<S: Scalar>(x: S) -> S {
    let r = x - x.floor();
    // x - floor(x) rounds up to 1 for tiny negative inputs
    if r >= S::one() {
        S::zero()
    } else {
        r
    }
}

/// Which representative to pick when a coordinate difference is exactly 1/2.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tie {
    /// Lexicographically smallest lift (`-1/2`); used for plan edges.
    Negative,
    /// Positive-direction lift (`+1/2`); used for transport geodesics.
    Positive,
}

/// Representative of `d mod 1` in `[-1/2, 1/2]`.
pub fn wrap<S: Scalar>(d: S, tie: Tie) -> S {
    let half = S::lit(0.5);
    let r = d - d.round();
    match tie {
        Tie::Negative if r == half => -half,
        Tie::Positive if r == -half => half,
        _ => r,
    }
}

impl<S: Scalar> TorusPoint<S> {
    pub fn new(coords: &[S]) -> Result<Self> {
        match coords.len() {
            1 => Ok(Self::new1(coords[0])),
            2 => Ok(Self::new2(coords[0], coords[1])),
            d => Err(Error::UnsupportedDimension(d)),
        }
    }

    pub fn new1(x: S) -> Self {
        Self { coords: [reduce(x), S::zero()], dim: 1 }
    }

    pub fn new2(x: S, y: S) -> Self {
        Self { coords: [reduce(x), reduce(y)], dim: 2 }
    }

    /// Origin of the `dim`-torus.
    pub fn origin(dim: usize) -> Self {
        Self { coords: [S::zero(); 2], dim }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coords(&self) -> &[S] {
        &self.coords[..self.dim]
    }

    pub fn coord(&self, axis: usize) -> S {
        self.coords[axis]
    }

    /// Adds `v` (length `dim`) and reduces back to the torus.
    pub fn translate(&self, v: &[S]) -> Self {
        let mut c = self.coords;
        for (a, vi) in v.iter().enumerate().take(self.dim) {
            c[a] = reduce(c[a] + *vi);
        }
        Self { coords: c, dim: self.dim }
    }

    /// Lexicographic comparison of the coordinates.
    pub fn lex_cmp(&self, other: &Self) -> std::cmp::Ordering {
        for a in 0..self.dim.max(other.dim) {
            match self.coords[a].partial_cmp(&other.coords[a]) {
                Some(std::cmp::Ordering::Equal) | None => continue,
                Some(o) => return o,
            }
        }
        std::cmp::Ordering::Equal
    }
}

/// Minimal periodic displacement from `x` to `y`, coordinatewise.
pub fn displacement<S: Scalar>(x: &TorusPoint<S>, y: &TorusPoint<S>, tie: Tie) -> [S; 2] {
    let mut d = [S::zero(); 2];
    for (a, da) in d.iter_mut().enumerate().take(x.dim) {
        *da = wrap(y.coords[a] - x.coords[a], tie);
    }
    d
}

/// `⟦x - y⟧`, the distance on the torus.
pub fn periodic_distance<S: Scalar>(x: &TorusPoint<S>, y: &TorusPoint<S>) -> Result<S> {
    if x.dim != y.dim {
        return Err(Error::DimensionMismatch(x.dim, y.dim));
    }
    let d = displacement(x, y, Tie::Negative);
    Ok((d[0] * d[0] + d[1] * d[1]).sqrt())
}
