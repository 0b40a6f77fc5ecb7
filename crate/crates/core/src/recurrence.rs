//! Stable pointwise evaluation of the oscillator eigenfunctions.
//!
//! Everything goes through normalized three-term recurrences on the function
//! values themselves, never through raw Hermite/Laguerre polynomials: the
//! polynomials overflow around n ~ 100 while the L²-normalized functions stay
//! O(1). The only hazard left is that the n = 0 seed e^{-x²/2} underflows for
//! |x| ≳ 38 even where high modes are O(1), so the recurrence carries a shared
//! power-of-two exponent alongside the mantissas.

use crate::error::{Error, Result};
use crate::geometry::Geometry;

/// Highest mode index evaluated on the line.
pub const MODE_CAP_LINE: usize = 65_536;
/// Highest mode index evaluated radially.
pub const MODE_CAP_RADIAL: usize = 16_384;

pub fn mode_cap(geometry: &Geometry) -> usize {
    if geometry.dim() == 1 {
        MODE_CAP_LINE
    } else {
        MODE_CAP_RADIAL
    }
}

/// Multiply by 2^e without intermediate overflow.
fn ldexp(x: f64, e: i64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let mut v = x;
    let mut e = e;
    while e > 511 {
        v *= 2f64.powi(511);
        e -= 511;
        if !v.is_finite() {
            return v;
        }
    }
    while e < -511 {
        v *= 2f64.powi(-511);
        e += 511;
        if v == 0.0 {
            return 0.0;
        }
    }
    v * 2f64.powi(e as i32)
}

/// Split exp(t) as m · 2^e with m in [1, 2).
fn exp_split(t: f64) -> (f64, i64) {
    let e2 = t * std::f64::consts::LOG2_E;
    let ei = e2.floor();
    ((e2 - ei).exp2(), ei as i64)
}

const RESCALE_LIMIT: f64 = 1e300;
const RESCALE_FACTOR_LOG2: i64 = 512;

#[inline]
fn maybe_rescale(p: &mut f64, q: &mut f64, exp2: &mut i64) {
    let m = p.abs().max(q.abs());
    if m > RESCALE_LIMIT {
        let s = 2f64.powi(-RESCALE_FACTOR_LOG2 as i32);
        *p *= s;
        *q *= s;
        *exp2 += RESCALE_FACTOR_LOG2;
    } else if m < 1.0 / RESCALE_LIMIT && m > 0.0 {
        let s = 2f64.powi(RESCALE_FACTOR_LOG2 as i32);
        *p *= s;
        *q *= s;
        *exp2 -= RESCALE_FACTOR_LOG2;
    }
}

/// Fill `out[n] = h_n(x)` for n = 0..=n_max on the line.
fn hermite_column(x: f64, out: &mut [f64]) {
    let n_max = out.len() - 1;
    let (m0, e0) = exp_split(-0.5 * x * x);
    let mut exp2 = e0;
    let mut q = std::f64::consts::PI.powf(-0.25) * m0; // h_0 mantissa
    let mut p = 0.0; // h_{-1}
    out[0] = ldexp(q, exp2);
    for n in 0..n_max {
        let nf = n as f64;
        let next = x * (2.0 / (nf + 1.0)).sqrt() * q - (nf / (nf + 1.0)).sqrt() * p;
        p = q;
        q = next;
        maybe_rescale(&mut p, &mut q, &mut exp2);
        out[n + 1] = ldexp(q, exp2);
    }
}

/// Fill `out[n] = h_n(r)` for the radial oscillator: normalized Laguerre
/// functions of order α = d/2 − 1 in t = r², scaled to unit L²(ℝ^d) norm.
fn laguerre_column(geometry: &Geometry, r: f64, out: &mut [f64]) {
    let n_max = out.len() - 1;
    let d = geometry.dim() as f64;
    let alpha = 0.5 * d - 1.0;
    let t = r * r;
    // h_n(r) = √(2/|S^{d-1}|) φ_n(r²) with φ_n the orthonormal Laguerre
    // functions: ∫_0^∞ φ_n φ_m t^α dt = δ_{nm}.
    let scale = (2.0 / geometry.sphere_area()).sqrt();
    let (m0, e0) = exp_split(-0.5 * t);
    let mut exp2 = e0;
    // φ_0 = e^{-t/2} / √Γ(α+1), and Γ(α+1) = Γ(d/2).
    let mut q = m0 / crate::special::gamma_half(geometry.dim()).sqrt();
    let mut p = 0.0;
    out[0] = scale * ldexp(q, exp2);
    for n in 0..n_max {
        let nf = n as f64;
        let next = ((2.0 * nf + 1.0 + alpha - t) * q - (nf * (nf + alpha)).sqrt() * p)
            / ((nf + 1.0) * (nf + 1.0 + alpha)).sqrt();
        p = q;
        q = next;
        maybe_rescale(&mut p, &mut q, &mut exp2);
        out[n + 1] = scale * ldexp(q, exp2);
    }
}

/// All eigenfunction values h_0(x)..h_{n_max}(x) at one point.
pub fn eigenfunction_column(geometry: &Geometry, x: f64, out: &mut [f64]) {
    if geometry.dim() == 1 {
        hermite_column(x, out);
    } else {
        laguerre_column(geometry, x, out);
    }
}

/// Single eigenfunction value, with the mode-cap check.
pub fn eigenfunction_value(geometry: &Geometry, n: usize, x: f64) -> Result<f64> {
    let cap = mode_cap(geometry);
    if n > cap {
        return Err(Error::Capability(format!(
            "mode {n} exceeds evaluation cap {cap}"
        )));
    }
    if geometry.is_radial() && x < 0.0 {
        return Err(Error::Domain(
            "radial coordinate must be nonnegative".into(),
        ));
    }
    let mut buf = vec![0.0; n + 1];
    eigenfunction_column(geometry, x, &mut buf);
    Ok(buf[n])
}
