//! The homogenized system on the macro domain.
//!
//! Three solves run in order: the potential `phi0` with Dirichlet data `h`,
//! the bounded-coefficient displacement `v0` driven by `g` and by the
//! effective electrostriction stress, and the stiff-inclusion remainder `w0`
//! driven by `T_hom : D(v0)`. The displacement is `u0 = v0 + w0`.

use std::sync::Arc;

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::fem::assembly::{
    assemble_elasticity_voigt, assemble_scalar_operator, body_force_load, scalar_source_load, stress_load,
};
use crate::fem::constraints::{apply_constraints, ConstraintSpec};
use crate::fem::field::FeField;
use crate::fem::solver::{solve, SolverConfig};
use crate::loading::{Loading, ScalarFn, VectorFn};
use crate::mesh::{PhaseMap, StructuredMesh};
use crate::tensor::sym_dyad;
use crate::tensors::EffectiveTensors;

/// Smallest Voigt eigenvalue of `R_hom` below which `w0` is not solved.
pub const R_HOM_EIGEN_FLOOR: f64 = 1e-10;

#[derive(Clone)]
pub struct MacroProblem {
    pub mesh: Arc<StructuredMesh>,
    pub tensors: EffectiveTensors,
    pub f: ScalarFn,
    pub g: VectorFn,
    pub h: ScalarFn,
}

impl std::fmt::Debug for MacroProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MacroProblem").field("mesh", &self.mesh).field("tensors", &self.tensors).finish_non_exhaustive()
    }
}

impl MacroProblem {
    pub fn new(mesh: Arc<StructuredMesh>, tensors: EffectiveTensors, loading: &Loading) -> Self {
        MacroProblem { mesh, tensors, f: loading.f.to_fn(), g: loading.g.to_fn(), h: loading.h.to_fn() }
    }
}

#[derive(Debug, Clone)]
pub struct MacroSolution {
    pub phi0: FeField,
    pub v0: FeField,
    pub w0: FeField,
    pub u0: FeField,
}

/// `-div(a_hom grad phi0) = f`, `phi0 = h` at boundary nodes.
pub fn solve_phi0(problem: &MacroProblem, cfg: &SolverConfig) -> Result<FeField> {
    let mesh = &problem.mesh;
    let k = assemble_scalar_operator(mesh, &PhaseMap::uniform(problem.tensors.a()), cfg.quadrature_order)?;
    let f = problem.f.clone();
    let rhs = scalar_source_load(mesh, move |x| f(x), cfg.quadrature_order)?;
    let h = problem.h.clone();
    let bc = ConstraintSpec::boundary_values(mesh, move |x| h(x));
    let red = apply_constraints(&k, &rhs, mesh, 1, &[bc])?;
    let x = solve(&red.op, &red.rhs, cfg)?;
    red.layout.into_field(mesh, &x)
}

/// Load of the `v0` equation: `int g . xi - int (C_hom : grad phi0 (x) grad phi0) : D(xi)`.
pub fn v0_load(problem: &MacroProblem, phi0: &FeField, order: usize) -> Result<Vec<f64>> {
    let mesh = &problem.mesh;
    if !phi0.mesh().same_layout(mesh) || phi0.components() != 1 {
        return Err(Error::MeshMismatch);
    }
    let g = problem.g.clone();
    let mut rhs = body_force_load(mesh, move |x| g(x), order)?;
    let c = problem.tensors.c();
    if c.max_abs() > 0.0 {
        let electro = stress_load(mesh, order, |e, p, _| {
            let grad = phi0.gradient_in(e, &p.grad, 0);
            c.stress(&sym_dyad(grad, grad))
        })?;
        rhs.iter_mut().zip(&electro).for_each(|(r, s)| *r -= s);
    }
    Ok(rhs)
}

/// `-div(B_hom : D(v0) + C_hom : grad phi0 (x) grad phi0) = g`, `v0 = 0` on the boundary.
pub fn solve_v0(problem: &MacroProblem, phi0: &FeField, cfg: &SolverConfig) -> Result<FeField> {
    let mesh = &problem.mesh;
    let k = assemble_elasticity_voigt(mesh, &PhaseMap::uniform(problem.tensors.b()), cfg.quadrature_order)?;
    let rhs = v0_load(problem, phi0, cfg.quadrature_order)?;
    let red = apply_constraints(&k, &rhs, mesh, 2, &[ConstraintSpec::zero_boundary(mesh, 2)])?;
    let x = solve(&red.op, &red.rhs, cfg)?;
    red.layout.into_field(mesh, &x)
}

/// `-div(T_hom : D(v0) + R_hom : D(w0)) = 0`, `w0 = 0` on the boundary.
pub fn solve_w0(problem: &MacroProblem, v0: &FeField, cfg: &SolverConfig) -> Result<FeField> {
    let mesh = &problem.mesh;
    if !v0.mesh().same_layout(mesh) || v0.components() != 2 {
        return Err(Error::MeshMismatch);
    }
    let t = problem.tensors.t();
    if t.max_abs() == 0.0 || v0.max_abs() == 0.0 {
        return Ok(FeField::zeros(mesh.clone(), 2));
    }
    let r = problem.tensors.r();
    let min_eigenvalue = r.min_eigenvalue();
    if min_eigenvalue <= R_HOM_EIGEN_FLOOR {
        return Err(Error::DegenerateRHom { min_eigenvalue });
    }
    let k = assemble_elasticity_voigt(mesh, &PhaseMap::uniform(r), cfg.quadrature_order)?;
    let rhs = stress_load(mesh, cfg.quadrature_order, |e, p, _| -t.stress(&v0.strain_in(e, &p.grad)))?;
    let red = apply_constraints(&k, &rhs, mesh, 2, &[ConstraintSpec::zero_boundary(mesh, 2)])?;
    let x = solve(&red.op, &red.rhs, cfg)?;
    red.layout.into_field(mesh, &x)
}

/// `u0 = v0 + w0`, nodewise.
pub fn compose_u0(v0: &FeField, w0: &FeField) -> Result<FeField> {
    v0.axpy(1.0, w0)
}

/// Runs the three solves in order.
pub fn solve_macro(problem: &MacroProblem, cfg: &SolverConfig) -> Result<MacroSolution> {
    let phi0 = solve_phi0(problem, cfg)?;
    let v0 = solve_v0(problem, &phi0, cfg)?;
    let w0 = solve_w0(problem, &v0, cfg)?;
    let u0 = compose_u0(&v0, &w0)?;
    Ok(MacroSolution { phi0, v0, w0, u0 })
}

/// `int S : D(u) : D(u')` over the macro mesh for a constant tensor `S`.
pub fn strain_pairing(s: &crate::tensor::Voigt4, u: &FeField, u2: &FeField) -> f64 {
    u.integrate_with(crate::fem::field::NORM_ORDER, |e, p, _| {
        let a: Vector3<f64> = u.strain_in(e, &p.grad);
        s.stress(&a).dot(&u2.strain_in(e, &p.grad))
    })
}
