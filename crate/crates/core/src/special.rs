//! Small special-function helpers: half-integer gamma values, sphere areas,
//! Bessel functions of low order, and an adaptive quadrature routine.

use crate::error::{Error, Result};

/// Gamma function at half-integer arguments: `gamma_half(k)` = Γ(k/2), k ≥ 1.
pub fn gamma_half(k: u32) -> f64 {
    assert!(k >= 1, "gamma_half needs a positive half-integer index");
    if k % 2 == 0 {
        // Γ(m) = (m-1)!
        let m = k / 2;
        (1..m).fold(1.0, |acc, j| acc * j as f64)
    } else {
        // Γ(1/2 + m) = (2m-1)!! √π / 2^m
        let m = (k - 1) / 2;
        let mut acc = f64::sqrt(std::f64::consts::PI);
        for j in 1..=m {
            acc *= (2 * j - 1) as f64 / 2.0;
        }
        acc
    }
}

/// Surface area of the unit sphere S^{d-1} in ℝ^d.
pub fn sphere_area(dim: u32) -> f64 {
    let d = dim as f64;
    2.0 * std::f64::consts::PI.powf(d / 2.0) / gamma_half(dim)
}

/// Bessel function J_ν for the orders needed by radial transforms.
///
/// Integer orders 0 and 1 use the power series below |x| = 12 and the Hankel
/// asymptotic expansion above; half-integer orders are closed forms.
pub fn bessel_j(nu2: i32, x: f64) -> f64 {
    // nu2 = 2ν, so ν = nu2/2 ∈ {-1/2, 0, 1/2, 1}.
    match nu2 {
        -1 => {
            if x == 0.0 {
                f64::INFINITY
            } else {
                (2.0 / (std::f64::consts::PI * x)).sqrt() * x.cos()
            }
        }
        1 => {
            if x == 0.0 {
                0.0
            } else {
                (2.0 / (std::f64::consts::PI * x)).sqrt() * x.sin()
            }
        }
        0 => bessel_integer(0, x),
        2 => bessel_integer(1, x),
        _ => panic!("bessel_j: unsupported order 2ν = {nu2}"),
    }
}

fn bessel_integer(nu: u32, x: f64) -> f64 {
    let ax = x.abs();
    let val = if ax <= 12.0 {
        bessel_series(nu, ax)
    } else {
        bessel_asymptotic(nu, ax)
    };
    if nu == 1 && x < 0.0 {
        -val
    } else {
        val
    }
}

fn bessel_series(nu: u32, x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = (0.5 * x).powi(nu as i32) / gamma_half(2 * (nu + 1));
    let mut sum = term;
    for k in 1..64u32 {
        term *= -q / (k as f64 * (k + nu) as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

fn bessel_asymptotic(nu: u32, x: f64) -> f64 {
    // Hankel expansion: J_ν(x) ≈ √(2/πx) (P cos χ − Q sin χ), χ = x − (2ν+1)π/4,
    // with P, Q in inverse powers of 8x. Truncated where the terms are ≪ 1e-14
    // for x > 12.
    let mu = 4.0 * (nu as f64) * (nu as f64);
    let e = 8.0 * x;
    let t1 = mu - 1.0;
    let t3 = t1 * (mu - 9.0);
    let t5 = t3 * (mu - 25.0);
    let t7 = t5 * (mu - 49.0);
    let t9 = t7 * (mu - 81.0);
    let t11 = t9 * (mu - 121.0);
    let p = 1.0 - t3 / (2.0 * e * e) + t7 / (24.0 * e.powi(4)) - t11 / (720.0 * e.powi(6));
    let q = t1 / e - t5 / (6.0 * e.powi(3)) + t9 / (120.0 * e.powi(5));
    let chi = x - (2.0 * nu as f64 + 1.0) * std::f64::consts::FRAC_PI_4;
    (2.0 / (std::f64::consts::PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// Adaptive Simpson quadrature of `f` on [a, b] to absolute tolerance `tol`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) || b < a {
        return Err(Error::Domain(format!("bad interval [{a}, {b}]")));
    }
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    Ok(simpson_rec(f, a, b, fa, fm, fb, whole, tol, 50))
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_half_values() {
        assert!((gamma_half(2) - 1.0).abs() < 1e-15); // Γ(1)
        assert!((gamma_half(4) - 1.0).abs() < 1e-15); // Γ(2)
        assert!((gamma_half(6) - 2.0).abs() < 1e-15); // Γ(3)
        assert!((gamma_half(1) - std::f64::consts::PI.sqrt()).abs() < 1e-15); // Γ(1/2)
        assert!((gamma_half(3) - 0.5 * std::f64::consts::PI.sqrt()).abs() < 1e-15);
        // Γ(3/2)
    }

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(1) - 2.0).abs() < 1e-14);
        assert!((sphere_area(2) - 2.0 * std::f64::consts::PI).abs() < 1e-13);
        assert!((sphere_area(3) - 4.0 * std::f64::consts::PI).abs() < 1e-13);
    }

    #[test]
    fn bessel_j0_reference_points() {
        // Reference values from Abramowitz & Stegun tables.
        assert!((bessel_j(0, 0.0) - 1.0).abs() < 1e-15);
        assert!((bessel_j(0, 1.0) - 0.7651976865579666).abs() < 1e-12);
        assert!((bessel_j(0, 5.0) - (-0.17759677131433830)).abs() < 1e-12);
        assert!((bessel_j(0, 20.0) - 0.16702466434058315).abs() < 1e-10);
        assert!((bessel_j(2, 1.0) - 0.44005058574493355).abs() < 1e-12);
        assert!((bessel_j(2, 20.0) - 0.06683312417584990).abs() < 1e-9);
    }

    #[test]
    fn simpson_integrates_gaussian() {
        let v = adaptive_simpson(&|x: f64| (-x * x).exp(), -8.0, 8.0, 1e-12).unwrap();
        assert!((v - std::f64::consts::PI.sqrt()).abs() < 1e-10);
    }
}
