//! Nodal finite-element fields and the integrals computed from them.

use std::sync::Arc;

use nalgebra::{Matrix2, Vector2, Vector3};

use super::element::{shape_gradients, shape_values, Q1Element};
use crate::error::{Error, Result};
use crate::mesh::{PhaseMap, StructuredMesh};

/// Gauss order used for norms of finite-element fields (exact for Q1 products).
pub const NORM_ORDER: usize = 2;
/// Gauss order used when comparing against smooth closed-form functions.
pub const ERROR_ORDER: usize = 5;

/// Q1 field with `components` values per node, stored node-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FeField {
    mesh: Arc<StructuredMesh>,
    components: usize,
    values: Vec<f64>,
}

impl FeField {
    pub fn new(mesh: Arc<StructuredMesh>, components: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.node_count() * components {
            return Err(Error::MeshMismatch);
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidGeometry(format!("non-finite field value at dof {k}")));
        }
        Ok(FeField { mesh, components, values })
    }

    pub fn zeros(mesh: Arc<StructuredMesh>, components: usize) -> Self {
        let len = mesh.node_count() * components;
        FeField { mesh, components, values: vec![0.0; len] }
    }

    /// Nodal interpolant of a scalar function.
    pub fn interpolate_scalar(mesh: Arc<StructuredMesh>, f: impl Fn([f64; 2]) -> f64) -> Self {
        let values = mesh.nodes().iter().map(|&x| f(x)).collect();
        FeField { mesh, components: 1, values }
    }

    /// Nodal interpolant of a vector function.
    pub fn interpolate_vector(mesh: Arc<StructuredMesh>, f: impl Fn([f64; 2]) -> [f64; 2]) -> Self {
        let values = mesh.nodes().iter().flat_map(|&x| f(x)).collect();
        FeField { mesh, components: 2, values }
    }

    pub fn mesh(&self) -> &Arc<StructuredMesh> {
        &self.mesh
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn value(&self, node: usize, component: usize) -> f64 {
        self.values[node * self.components + component]
    }

    pub fn component_values(&self, component: usize) -> Vec<f64> {
        self.values.iter().skip(component).step_by(self.components).copied().collect()
    }

    pub fn compatible(&self, other: &FeField) -> bool {
        self.components == other.components && self.mesh.same_layout(&other.mesh)
    }

    /// `self + s * other`, nodewise.
    pub fn axpy(&self, s: f64, other: &FeField) -> Result<FeField> {
        if !self.compatible(other) {
            return Err(Error::MeshMismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + s * b).collect();
        Ok(FeField { mesh: self.mesh.clone(), components: self.components, values })
    }

    pub fn scaled(&self, s: f64) -> FeField {
        FeField {
            mesh: self.mesh.clone(),
            components: self.components,
            values: self.values.iter().map(|v| v * s).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    fn element_values(&self, element: usize, component: usize) -> [f64; 4] {
        let nodes = self.mesh.elements()[element];
        nodes.map(|k| self.values[k * self.components + component])
    }

    pub fn value_in(&self, element: usize, shape: &[f64; 4], component: usize) -> f64 {
        let v = self.element_values(element, component);
        (0..4).map(|a| v[a] * shape[a]).sum()
    }

    pub fn gradient_in(&self, element: usize, grad: &[Vector2<f64>; 4], component: usize) -> Vector2<f64> {
        let v = self.element_values(element, component);
        (0..4).map(|a| grad[a] * v[a]).sum()
    }

    /// Engineering strain of a vector field.
    pub fn strain_in(&self, element: usize, grad: &[Vector2<f64>; 4]) -> Vector3<f64> {
        debug_assert_eq!(self.components, 2);
        let g0 = self.gradient_in(element, grad, 0);
        let g1 = self.gradient_in(element, grad, 1);
        Vector3::new(g0[0], g1[1], g0[1] + g1[0])
    }

    /// Point evaluation; points outside the mesh are clamped onto it.
    pub fn eval(&self, x: [f64; 2], component: usize) -> f64 {
        let (e, xi) = self.mesh.locate(x);
        self.value_in(e, &shape_values(xi), component)
    }

    pub fn eval_gradient(&self, x: [f64; 2], component: usize) -> Vector2<f64> {
        let (e, xi) = self.mesh.locate(x);
        self.gradient_in(e, &shape_gradients(xi, self.mesh.spacing()), component)
    }

    /// Applies `f(element, point, x)` at every quadrature point and sums the
    /// results times the quadrature weights.
    pub fn integrate_with(
        &self,
        order: usize,
        mut f: impl FnMut(usize, &super::element::ElementPoint, [f64; 2]) -> f64,
    ) -> f64 {
        let el = Q1Element::new(self.mesh.spacing(), order).expect("supported quadrature order");
        let mut total = 0.0;
        for e in 0..self.mesh.element_count() {
            let o = self.mesh.element_origin(e);
            for p in el.points() {
                let x = [o[0] + p.offset[0], o[1] + p.offset[1]];
                total += p.jxw * f(e, p, x);
            }
        }
        total
    }

    pub fn integral(&self, component: usize) -> f64 {
        self.integrate_with(NORM_ORDER, |e, p, _| self.value_in(e, &p.shape, component))
    }

    /// Componentwise average over the mesh domain.
    pub fn mean(&self, component: usize) -> f64 {
        self.integral(component) / self.mesh.total_area()
    }

    pub fn l2_norm(&self) -> f64 {
        self.integrate_with(NORM_ORDER, |e, p, _| {
            (0..self.components).map(|c| self.value_in(e, &p.shape, c).powi(2)).sum()
        })
        .sqrt()
    }

    pub fn h1_seminorm(&self) -> f64 {
        self.integrate_with(NORM_ORDER, |e, p, _| {
            (0..self.components).map(|c| self.gradient_in(e, &p.grad, c).norm_squared()).sum()
        })
        .sqrt()
    }

    pub fn h1_norm(&self) -> f64 {
        self.l2_norm().hypot(self.h1_seminorm())
    }

    /// L2 distance to a closed-form function.
    pub fn l2_error(&self, exact: impl Fn([f64; 2]) -> Vec<f64>) -> f64 {
        self.integrate_with(ERROR_ORDER, |e, p, x| {
            let u = exact(x);
            (0..self.components).map(|c| (self.value_in(e, &p.shape, c) - u[c]).powi(2)).sum()
        })
        .sqrt()
    }

    /// H1 seminorm distance to a closed-form gradient (`grad[c]` per component).
    pub fn h1_error(&self, exact_grad: impl Fn([f64; 2]) -> Vec<[f64; 2]>) -> f64 {
        self.integrate_with(ERROR_ORDER, |e, p, x| {
            let g = exact_grad(x);
            (0..self.components).map(|c| (self.gradient_in(e, &p.grad, c) - Vector2::from(g[c])).norm_squared()).sum()
        })
        .sqrt()
    }

    /// L2 distance to a field on another mesh covering the same domain,
    /// evaluated at the quadrature points of `self`.
    pub fn l2_distance(&self, other: &FeField) -> Result<f64> {
        if self.components != other.components {
            return Err(Error::MeshMismatch);
        }
        Ok(self
            .integrate_with(ERROR_ORDER, |e, p, x| {
                (0..self.components).map(|c| (self.value_in(e, &p.shape, c) - other.eval(x, c)).powi(2)).sum()
            })
            .sqrt())
    }

    /// H1 seminorm distance to a field on another mesh.
    pub fn h1_distance(&self, other: &FeField) -> Result<f64> {
        if self.components != other.components {
            return Err(Error::MeshMismatch);
        }
        Ok(self
            .integrate_with(ERROR_ORDER, |e, p, x| {
                (0..self.components)
                    .map(|c| (self.gradient_in(e, &p.grad, c) - other.eval_gradient(x, c)).norm_squared())
                    .sum()
            })
            .sqrt())
    }
}

/// `int (A grad f) . grad g` with a piecewise-constant coefficient.
pub fn integrate_gradient_pairing(f: &FeField, g: &FeField, coeff: &PhaseMap<Matrix2<f64>>) -> Result<f64> {
    if !f.compatible(g) || f.components() != 1 {
        return Err(Error::MeshMismatch);
    }
    let mesh = f.mesh().clone();
    Ok(f.integrate_with(NORM_ORDER, |e, p, _| {
        let a = coeff.get(mesh.phase(e));
        (a * f.gradient_in(e, &p.grad, 0)).dot(&g.gradient_in(e, &p.grad, 0))
    }))
}
