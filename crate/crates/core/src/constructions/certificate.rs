use crate::error::{Error, Result};
use serde::Serialize;

/// A constructor's own energy evaluation against its frozen bound
/// `value ≤ constant · scale`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Certificate {
    pub perimeter: f64,
    pub kinetic: f64,
    /// The certified quantity (usually `perimeter + kinetic`).
    pub value: f64,
    /// `constant · scale`.
    pub bound: f64,
    pub constant: f64,
    pub pass: bool,
}

impl Certificate {
    pub fn new(perimeter: f64, kinetic: f64, value: f64, constant: f64, scale: f64) -> Self {
        let bound = constant * scale;
        Self { perimeter, kinetic, value, bound, constant, pass: value <= bound }
    }

    /// `value / scale`, the constant this instance actually needs.
    pub fn ratio(&self) -> f64 {
        self.value * self.constant / self.bound
    }

    pub fn require(self, what: &str) -> Result<Self> {
        if self.pass {
            Ok(self)
        } else {
            Err(Error::CertificationFailed(format!(
                "{what}: {} > {} (constant {})",
                self.value, self.bound, self.constant
            )))
        }
    }
}
