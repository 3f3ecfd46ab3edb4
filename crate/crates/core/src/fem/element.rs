//! Bilinear shape functions on axis-aligned square elements.

use nalgebra::{Vector2, Vector3};

use super::quadrature::{gauss_rule, QuadPoint};
use crate::error::Result;

const CORNERS: [[f64; 2]; 4] = [[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]];

pub fn shape_values(xi: [f64; 2]) -> [f64; 4] {
    let mut n = [0.0; 4];
    for (a, c) in CORNERS.iter().enumerate() {
        n[a] = 0.25 * (1.0 + c[0] * xi[0]) * (1.0 + c[1] * xi[1]);
    }
    n
}

/// Physical gradients of the four shape functions on an element of side `h`.
pub fn shape_gradients(xi: [f64; 2], h: f64) -> [Vector2<f64>; 4] {
    let s = 2.0 / h;
    let mut g = [Vector2::zeros(); 4];
    for (a, c) in CORNERS.iter().enumerate() {
        g[a] = Vector2::new(0.25 * c[0] * (1.0 + c[1] * xi[1]) * s, 0.25 * c[1] * (1.0 + c[0] * xi[0]) * s);
    }
    g
}

/// Engineering strain of the vector basis function (node `a`, component `c`).
pub fn basis_strain(grad: &Vector2<f64>, component: usize) -> Vector3<f64> {
    if component == 0 {
        Vector3::new(grad[0], 0.0, grad[1])
    } else {
        Vector3::new(0.0, grad[1], grad[0])
    }
}

/// Precomputed quadrature data shared by all elements of a uniform mesh.
#[derive(Debug, Clone)]
pub struct ElementPoint {
    pub xi: [f64; 2],
    /// Offset from the element's lower-left corner.
    pub offset: [f64; 2],
    pub shape: [f64; 4],
    pub grad: [Vector2<f64>; 4],
    /// Quadrature weight times Jacobian determinant.
    pub jxw: f64,
}

#[derive(Debug, Clone)]
pub struct Q1Element {
    h: f64,
    points: Vec<ElementPoint>,
}

impl Q1Element {
    pub fn new(h: f64, order: usize) -> Result<Self> {
        let rule = gauss_rule(order)?;
        Ok(Self::from_rule(h, &rule))
    }

    pub fn from_rule(h: f64, rule: &[QuadPoint]) -> Self {
        let det = 0.25 * h * h;
        let points = rule
            .iter()
            .map(|qp| ElementPoint {
                xi: qp.xi,
                offset: [0.5 * (qp.xi[0] + 1.0) * h, 0.5 * (qp.xi[1] + 1.0) * h],
                shape: shape_values(qp.xi),
                grad: shape_gradients(qp.xi, h),
                jxw: qp.weight * det,
            })
            .collect();
        Q1Element { h, points }
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn points(&self) -> &[ElementPoint] {
        &self.points
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_of_unity_and_zero_gradient_sum() {
        for xi in [[0.1, -0.7], [1.0, 1.0], [-0.3, 0.9]] {
            let n = shape_values(xi);
            assert!((n.iter().sum::<f64>() - 1.0).abs() < 1e-15);
            let g = shape_gradients(xi, 0.25);
            let s: Vector2<f64> = g.iter().sum();
            assert!(s.norm() < 1e-14);
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let h = 0.5;
        let xi = [0.2, -0.4];
        let g = shape_gradients(xi, h);
        let d = 1e-6;
        for (a, ga) in g.iter().enumerate() {
            for k in 0..2 {
                let mut p = xi;
                let mut m = xi;
                p[k] += d;
                m[k] -= d;
                let fd = (shape_values(p)[a] - shape_values(m)[a]) / (2.0 * d) * 2.0 / h;
                assert!((fd - ga[k]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn element_weights_sum_to_area() {
        let el = Q1Element::new(0.125, 3).unwrap();
        let area: f64 = el.points().iter().map(|p| p.jxw).sum();
        assert!((area - 0.125 * 0.125).abs() < 1e-16);
    }
}
