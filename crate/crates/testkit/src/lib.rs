//! Test oracles kept independent of the implementation paths they check.
//!
//! The filtered-field endpoint laws in the main crate are closed forms; the
//! oracle here integrates the same stochastic differential equation pathwise
//! with Euler–Maruyama and reports empirical moments. It deliberately shares
//! nothing with the closed-form code except the spectrum.

use gibbslab::mc::derive_stream;
use gibbslab::Geometry;

/// Empirical endpoint/path moments of the residual OU mode
/// dX = −a X dt + λ^{-1} dB, X(0) = 0, with B the driving Brownian motion.
#[derive(Clone, Copy, Debug)]
pub struct OuPathMoments {
    /// Empirical E[X(1)²] and its standard error.
    pub var_x: (f64, f64),
    /// Empirical E[B(1) X(1)] and its standard error.
    pub cov_bx: (f64, f64),
    /// Empirical E[∫₀¹ X(s)² ds] and its standard error.
    pub time_integrated_var: (f64, f64),
    pub paths: u64,
    pub dt: f64,
}

/// Euler–Maruyama simulation of the mode-n residual at filter scale m.
pub fn simulate_ou_mode(
    geometry: Geometry,
    m: usize,
    n: usize,
    dt: f64,
    paths: u64,
    seed: u64,
) -> OuPathMoments {
    let lam = geometry.eigenvalue(n);
    let a = (m as f64).sqrt() / lam;
    let steps = (1.0 / dt).round() as usize;
    let sqrt_dt = dt.sqrt();
    let mut stream = derive_stream(seed, 0);

    let mut acc_x = Moments::default();
    let mut acc_bx = Moments::default();
    let mut acc_int = Moments::default();
    for _ in 0..paths {
        let mut x = 0.0f64;
        let mut b = 0.0f64;
        let mut integral = 0.0f64;
        for _ in 0..steps {
            integral += x * x * dt;
            let dw = sqrt_dt * stream.normal();
            x += -a * x * dt + dw / lam;
            b += dw;
        }
        acc_x.push(x * x);
        acc_bx.push(b * x);
        acc_int.push(integral);
    }
    OuPathMoments {
        var_x: acc_x.mean_and_se(),
        cov_bx: acc_bx.mean_and_se(),
        time_integrated_var: acc_int.mean_and_se(),
        paths,
        dt,
    }
}

#[derive(Default)]
struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn mean_and_se(&self) -> (f64, f64) {
        let var = if self.n > 1 {
            self.m2 / (self.n - 1) as f64
        } else {
            0.0
        };
        (self.mean, (var / self.n as f64).sqrt())
    }
}

/// erf(1), used by the χ²₁ quadrature checks: P(g² ≤ 2) for g ~ N(0,1).
pub const ERF_ONE: f64 = 0.842700792949715;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_reproduces_m1_mode0_closed_forms() {
        let m = simulate_ou_mode(Geometry::line(), 1, 0, 1e-3, 20_000, 123);
        let var_exact = (1.0 - (-2.0f64).exp()) / 2.0;
        let cov_exact = 1.0 - (-1.0f64).exp();
        assert!((m.var_x.0 - var_exact).abs() < 4.0 * m.var_x.1 + 2e-3);
        assert!((m.cov_bx.0 - cov_exact).abs() < 4.0 * m.cov_bx.1 + 2e-3);
    }
}
