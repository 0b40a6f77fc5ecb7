//! Spatial setting: dimension, radial symmetry, and the oscillator spectrum.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Dimension and symmetry class of the underlying space.
///
/// Dimension one works on the full line; every higher dimension is restricted
/// to radial functions, which is what makes the spectrum simple (λ_n² = 4n + d)
/// and all mode sums one-dimensional.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Geometry {
    dim: u32,
    radial: bool,
}

impl Geometry {
    /// The line (d = 1).
    pub fn line() -> Self {
        Geometry {
            dim: 1,
            radial: false,
        }
    }

    /// Radial geometry in dimension `dim` ≥ 2.
    pub fn radial(dim: u32) -> Result<Self> {
        if dim < 2 {
            return Err(Error::Domain(format!(
                "radial geometry needs dim >= 2, got {dim}"
            )));
        }
        Ok(Geometry { dim, radial: true })
    }

    /// Validating constructor from raw config fields.
    pub fn new(dim: u32, radial: bool) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Domain("dimension must be positive".into()));
        }
        if dim >= 2 && !radial {
            return Err(Error::Domain(format!(
                "dim = {dim} requires the radial symmetry flag"
            )));
        }
        if dim == 1 && radial {
            return Err(Error::Domain(
                "radial flag is not meaningful for dim = 1".into(),
            ));
        }
        Ok(Geometry { dim, radial })
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn is_radial(&self) -> bool {
        self.radial
    }

    /// λ_n² — the n-th eigenvalue of −Δ + |x|².
    pub fn eigenvalue_sq(&self, n: usize) -> f64 {
        if self.dim == 1 {
            2.0 * n as f64 + 1.0
        } else {
            4.0 * n as f64 + self.dim as f64
        }
    }

    /// λ_n = √(1 + 2n) on the line, √(4n + d) radially.
    pub fn eigenvalue(&self, n: usize) -> f64 {
        self.eigenvalue_sq(n).sqrt()
    }

    /// The critical nonlinearity exponent 2 + 4/d.
    pub fn critical_exponent(&self) -> f64 {
        2.0 + 4.0 / self.dim as f64
    }

    /// Constraint on admissible L^p exponents: p > 2 always, and p < 2d/(d−2)
    /// in dimension ≥ 3.
    pub fn admissible_p(&self, p: f64) -> bool {
        if p <= 2.0 {
            return false;
        }
        if self.dim >= 3 {
            let d = self.dim as f64;
            p < 2.0 * d / (d - 2.0)
        } else {
            true
        }
    }

    /// |S^{d-1}|, the surface measure factor carried by radial quadrature weights.
    pub fn sphere_area(&self) -> f64 {
        crate::special::sphere_area(self.dim)
    }
}
