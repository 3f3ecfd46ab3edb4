//! Global operator and load-vector assembly on structured meshes.
//!
//! Coefficients are constant per element (one value per phase), and all
//! elements of a mesh are congruent, so one element matrix per phase is
//! computed and scattered.

use nalgebra::{Matrix2, SMatrix, Vector2, Vector3};

use super::element::{basis_strain, ElementPoint, Q1Element};
use super::sparse::{CsrMatrix, TripletBuilder};
use crate::error::Result;
use crate::mesh::{Phase, PhaseMap, StructuredMesh};
use crate::tensor::{check_spd, Lame, Voigt4};

type ElementMatrix4 = SMatrix<f64, 4, 4>;
type ElementMatrix8 = SMatrix<f64, 8, 8>;

fn scalar_element_matrix(el: &Q1Element, a: &Matrix2<f64>) -> ElementMatrix4 {
    let mut k = ElementMatrix4::zeros();
    for p in el.points() {
        for i in 0..4 {
            let ai = a * p.grad[i];
            for j in 0..4 {
                k[(i, j)] += p.jxw * ai.dot(&p.grad[j]);
            }
        }
    }
    k
}

fn elastic_element_matrix(el: &Q1Element, d: &Voigt4) -> ElementMatrix8 {
    let mut k = ElementMatrix8::zeros();
    for p in el.points() {
        let strains: Vec<Vector3<f64>> = (0..8).map(|r| basis_strain(&p.grad[r / 2], r % 2)).collect();
        for r in 0..8 {
            let s = d.stress(&strains[r]);
            for c in 0..8 {
                k[(r, c)] += p.jxw * s.dot(&strains[c]);
            }
        }
    }
    k
}

/// Discrete form of `int a grad(phi) . grad(eta)`.
pub fn assemble_scalar_operator(
    mesh: &StructuredMesh,
    coeff: &PhaseMap<Matrix2<f64>>,
    order: usize,
) -> Result<CsrMatrix> {
    check_spd(&coeff.matrix, "matrix-phase coefficient")?;
    check_spd(&coeff.inclusion, "inclusion-phase coefficient")?;
    let el = Q1Element::new(mesh.spacing(), order)?;
    let local = coeff.map(|a| scalar_element_matrix(&el, a));
    let mut b = TripletBuilder::with_capacity(mesh.node_count(), 16 * mesh.element_count());
    for (e, nodes) in mesh.elements().iter().enumerate() {
        let k = local.get(mesh.phase(e));
        for i in 0..4 {
            for j in 0..4 {
                b.add(nodes[i], nodes[j], k[(i, j)]);
            }
        }
    }
    Ok(b.build())
}

/// Discrete form of `int (s B) : D(u) : D(xi)` with per-phase isotropic `B`
/// and per-phase multipliers `s`.
pub fn assemble_elasticity_operator(
    mesh: &StructuredMesh,
    tensor: &PhaseMap<Lame>,
    phase_scale: &PhaseMap<f64>,
    order: usize,
) -> Result<CsrMatrix> {
    tensor.matrix.validate("matrix-phase tensor")?;
    tensor.inclusion.validate("inclusion-phase tensor")?;
    for phase in Phase::ALL {
        let s = *phase_scale.get(phase);
        if !(s > 0.0 && s.is_finite()) {
            return Err(crate::error::Error::NonEllipticTensor(format!("phase scale {s} must be positive")));
        }
    }
    let voigt = PhaseMap::new(
        tensor.matrix.voigt().scaled(phase_scale.matrix),
        tensor.inclusion.voigt().scaled(phase_scale.inclusion),
    );
    assemble_elasticity_voigt(mesh, &voigt, order)
}

/// Elasticity operator for arbitrary per-phase Voigt tensors (zero allowed).
pub fn assemble_elasticity_voigt(mesh: &StructuredMesh, tensor: &PhaseMap<Voigt4>, order: usize) -> Result<CsrMatrix> {
    let el = Q1Element::new(mesh.spacing(), order)?;
    let local = tensor.map(|d| elastic_element_matrix(&el, d));
    let mut b = TripletBuilder::with_capacity(2 * mesh.node_count(), 64 * mesh.element_count());
    for (e, nodes) in mesh.elements().iter().enumerate() {
        let k = local.get(mesh.phase(e));
        for r in 0..8 {
            for c in 0..8 {
                b.add(2 * nodes[r / 2] + r % 2, 2 * nodes[c / 2] + c % 2, k[(r, c)]);
            }
        }
    }
    Ok(b.build())
}

/// Visits every quadrature point as `(element, point, x)`.
pub fn for_each_point(
    mesh: &StructuredMesh,
    order: usize,
    mut f: impl FnMut(usize, &ElementPoint, [f64; 2]),
) -> Result<()> {
    let el = Q1Element::new(mesh.spacing(), order)?;
    for e in 0..mesh.element_count() {
        let o = mesh.element_origin(e);
        for p in el.points() {
            f(e, p, [o[0] + p.offset[0], o[1] + p.offset[1]]);
        }
    }
    Ok(())
}

/// `int f eta` for every nodal basis function `eta`.
pub fn scalar_source_load(mesh: &StructuredMesh, f: impl Fn([f64; 2]) -> f64, order: usize) -> Result<Vec<f64>> {
    let mut load = vec![0.0; mesh.node_count()];
    for_each_point(mesh, order, |e, p, x| {
        let v = f(x) * p.jxw;
        for (a, &node) in mesh.elements()[e].iter().enumerate() {
            load[node] += v * p.shape[a];
        }
    })?;
    Ok(load)
}

/// `int q . grad(eta)` with `q` given per quadrature point.
pub fn flux_load(
    mesh: &StructuredMesh,
    order: usize,
    mut q: impl FnMut(usize, &ElementPoint, [f64; 2]) -> Vector2<f64>,
) -> Result<Vec<f64>> {
    let mut load = vec![0.0; mesh.node_count()];
    for_each_point(mesh, order, |e, p, x| {
        let qv = q(e, p, x) * p.jxw;
        for (a, &node) in mesh.elements()[e].iter().enumerate() {
            load[node] += qv.dot(&p.grad[a]);
        }
    })?;
    Ok(load)
}

/// `int g . xi` for a body force `g`.
pub fn body_force_load(mesh: &StructuredMesh, g: impl Fn([f64; 2]) -> [f64; 2], order: usize) -> Result<Vec<f64>> {
    let mut load = vec![0.0; 2 * mesh.node_count()];
    for_each_point(mesh, order, |e, p, x| {
        let gv = g(x);
        for (a, &node) in mesh.elements()[e].iter().enumerate() {
            load[2 * node] += gv[0] * p.shape[a] * p.jxw;
            load[2 * node + 1] += gv[1] * p.shape[a] * p.jxw;
        }
    })?;
    Ok(load)
}

/// `int sigma : D(xi)` with the stress `sigma` (Voigt, no engineering factor)
/// given per quadrature point.
pub fn stress_load(
    mesh: &StructuredMesh,
    order: usize,
    mut sigma: impl FnMut(usize, &ElementPoint, [f64; 2]) -> Vector3<f64>,
) -> Result<Vec<f64>> {
    let mut load = vec![0.0; 2 * mesh.node_count()];
    for_each_point(mesh, order, |e, p, x| {
        let s = sigma(e, p, x) * p.jxw;
        for (a, &node) in mesh.elements()[e].iter().enumerate() {
            for c in 0..2 {
                load[2 * node + c] += s.dot(&basis_strain(&p.grad[a], c));
            }
        }
    })?;
    Ok(load)
}
