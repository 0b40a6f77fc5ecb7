//! Composite midpoint quadrature grids.
//!
//! The line uses a symmetric uniform midpoint grid on [−L, L]. Radial
//! geometries use a uniform midpoint grid on [0, L] with the surface measure
//! |S^{d-1}| r^{d-1} folded into the weights. For d = 2 the integrand density
//! r·G(r) has a derivative jump at r = 0, which costs the midpoint rule an
//! O(h²) boundary term; the grid therefore carries an explicit origin
//! correction −|S¹| h²/24 · G(0) applied through an auxiliary zero-weight node
//! at r = 0. For d = 1 and d ≥ 3 that boundary term vanishes.

use crate::geometry::Geometry;
use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct Grid {
    geometry: Geometry,
    /// Node positions. Radial grids store the auxiliary r = 0 node first.
    nodes: Vec<f64>,
    /// Quadrature weights, including the measure factor. The auxiliary origin
    /// node carries weight zero.
    weights: Vec<f64>,
    /// Half-width L of the covered interval.
    extent: f64,
    /// Uniform node spacing.
    step: f64,
    /// Coefficient of the O(h²) origin correction (zero except radial d = 2).
    origin_correction: f64,
}

impl Grid {
    /// Uniform midpoint grid with `cells` cells over [−L, L] (line) or [0, L]
    /// (radial).
    pub fn build(geometry: Geometry, extent: f64, cells: usize) -> Grid {
        assert!(cells > 0 && extent > 0.0);
        if geometry.dim() == 1 && !geometry.is_radial() {
            let h = 2.0 * extent / cells as f64;
            let nodes: Vec<f64> = (0..cells).map(|j| -extent + (j as f64 + 0.5) * h).collect();
            let weights = vec![h; cells];
            Grid {
                geometry,
                nodes,
                weights,
                extent,
                step: h,
                origin_correction: 0.0,
            }
        } else {
            let h = extent / cells as f64;
            let area = geometry.sphere_area();
            let dm1 = (geometry.dim() - 1) as i32;
            let mut nodes = Vec::with_capacity(cells + 1);
            let mut weights = Vec::with_capacity(cells + 1);
            nodes.push(0.0);
            weights.push(0.0);
            for j in 0..cells {
                let r = (j as f64 + 0.5) * h;
                nodes.push(r);
                weights.push(area * r.powi(dm1) * h);
            }
            let origin_correction = if geometry.dim() == 2 {
                -area * h * h / 24.0
            } else {
                0.0
            };
            Grid {
                geometry,
                nodes,
                weights,
                extent,
                step: h,
                origin_correction,
            }
        }
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn origin_correction(&self) -> f64 {
        self.origin_correction
    }

    /// Whether node 0 is the auxiliary origin node.
    pub fn has_origin_node(&self) -> bool {
        self.geometry.dim() > 1
    }

    /// Weights with the origin correction folded into the auxiliary node.
    /// Valid for linear functionals (inner products, projections); nonlinear
    /// integrands must go through [`Grid::integrate_map`] instead.
    pub fn effective_weights(&self) -> Vec<f64> {
        let mut w = self.weights.clone();
        if self.origin_correction != 0.0 {
            w[0] += self.origin_correction;
        }
        w
    }

    /// ∫ g dμ for a density g sampled on the nodes (μ includes the surface
    /// measure).
    pub fn integrate(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.nodes.len());
        let mut acc = 0.0;
        for (w, v) in self.weights.iter().zip(values) {
            acc += w * v;
        }
        if self.origin_correction != 0.0 {
            acc += self.origin_correction * values[0];
        }
        acc
    }

    /// ∫ f(g(x)) dμ without materializing the mapped values.
    pub fn integrate_map(&self, values: &[f64], f: impl Fn(f64) -> f64) -> f64 {
        debug_assert_eq!(values.len(), self.nodes.len());
        let mut acc = 0.0;
        for (w, v) in self.weights.iter().zip(values) {
            acc += w * f(*v);
        }
        if self.origin_correction != 0.0 {
            acc += self.origin_correction * f(values[0]);
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_grid_integrates_gaussian() {
        let g = Grid::build(Geometry::line(), 9.0, 600);
        let vals: Vec<f64> = g.nodes().iter().map(|&x| (-x * x).exp()).collect();
        assert!((g.integrate(&vals) - std::f64::consts::PI.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn radial_d2_origin_correction_beats_plain_midpoint() {
        // ∫_{R²} e^{-r²} dx = π. The plain midpoint rule carries an O(h²)
        // boundary error here; with the correction the h⁴ term remains.
        let geo = Geometry::radial(2).unwrap();
        let g = Grid::build(geo, 9.0, 1000);
        let vals: Vec<f64> = g.nodes().iter().map(|&r| (-r * r).exp()).collect();
        let with_corr = g.integrate(&vals);
        let plain: f64 = g.weights().iter().zip(&vals).map(|(w, v)| w * v).sum();
        let exact = std::f64::consts::PI;
        assert!((with_corr - exact).abs() < 1e-9, "corrected: {with_corr}");
        assert!((with_corr - exact).abs() < 0.01 * (plain - exact).abs());
    }

    #[test]
    fn radial_d3_needs_no_correction() {
        let geo = Geometry::radial(3).unwrap();
        let g = Grid::build(geo, 10.0, 2000);
        assert_eq!(g.origin_correction(), 0.0);
        let vals: Vec<f64> = g.nodes().iter().map(|&r| (-r * r).exp()).collect();
        let exact = std::f64::consts::PI.powf(1.5);
        assert!((g.integrate(&vals) - exact).abs() < 1e-10);
    }
}
