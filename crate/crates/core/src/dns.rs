//! Direct simulation of the fine-scale system on `[0,1]^2` for `eps = 1/k`.
//!
//! The fine mesh has `k m` cells per side, so every period of the
//! microstructure is resolved by an `m x m` block whose phase labels are those
//! of the unit-cell mesh at resolution `m`. Inclusion elements carry
//! `B + eps^(-2 gamma) R`. The bounded-coefficient companion `v_eps` uses `B`
//! alone with the same load, and `w_eps = (u_eps - v_eps) / eps^gamma`.

use std::sync::Arc;

use nalgebra::Vector3;

use crate::cell::PhaseCoefficients;
use crate::error::{Error, Result};
use crate::fem::assembly::{
    assemble_elasticity_voigt, assemble_scalar_operator, body_force_load, scalar_source_load, stress_load,
};
use crate::fem::constraints::{apply_constraints, ConstraintSpec};
use crate::fem::field::{FeField, NORM_ORDER};
use crate::fem::solver::{solve, SolverConfig};
use crate::loading::{Loading, ScalarFn, VectorFn};
use crate::mesh::{build_unit_cell_mesh, Phase, PhaseMap, StructuredMesh, UnitCellGeometry, MIN_CELLS};
use crate::tensor::{sym_dyad, Voigt4};

#[derive(Clone)]
pub struct DnsProblem {
    /// Number of periods per side, `eps = 1/periods`.
    pub periods: usize,
    pub cells_per_period: usize,
    pub geometry: UnitCellGeometry,
    pub coeffs: PhaseCoefficients,
    pub f: ScalarFn,
    pub g: VectorFn,
    pub h: ScalarFn,
    /// Replaces `eps^(-2 gamma)` when set.
    pub multiplier_override: Option<f64>,
}

impl std::fmt::Debug for DnsProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DnsProblem")
            .field("periods", &self.periods)
            .field("cells_per_period", &self.cells_per_period)
            .field("geometry", &self.geometry)
            .field("coeffs", &self.coeffs)
            .field("multiplier_override", &self.multiplier_override)
            .finish_non_exhaustive()
    }
}

/// `k` with `eps = 1/k`, or `LadderMismatch` when `eps` does not tile `[0,1]`.
pub fn periods_for(epsilon: f64) -> Result<usize> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::LadderMismatch(format!("epsilon {epsilon} must lie in (0, 1]")));
    }
    let k = (1.0 / epsilon).round();
    if ((1.0 / epsilon) - k).abs() > 1e-9 * k {
        return Err(Error::LadderMismatch(format!("epsilon {epsilon} is not 1/k for an integer k")));
    }
    Ok(k as usize)
}

impl DnsProblem {
    pub fn new(
        epsilon: f64,
        cells_per_period: usize,
        geometry: UnitCellGeometry,
        coeffs: PhaseCoefficients,
        loading: &Loading,
    ) -> Result<Self> {
        Ok(DnsProblem {
            periods: periods_for(epsilon)?,
            cells_per_period,
            geometry,
            coeffs,
            f: loading.f.to_fn(),
            g: loading.g.to_fn(),
            h: loading.h.to_fn(),
            multiplier_override: None,
        })
    }

    pub fn epsilon(&self) -> f64 {
        1.0 / self.periods as f64
    }

    /// Stiffening factor of `R` on the inclusions.
    pub fn multiplier(&self) -> f64 {
        self.multiplier_override.unwrap_or_else(|| self.epsilon().powf(-2.0 * self.coeffs.gamma))
    }

    pub fn fine_cells(&self) -> usize {
        self.periods * self.cells_per_period
    }
}

/// Fine mesh of `[0,1]^2` with labels from the unit cell tiled `k x k` times.
pub fn sample_oscillatory_phase(problem: &DnsProblem) -> Result<StructuredMesh> {
    let m = problem.cells_per_period;
    if m < MIN_CELLS {
        return Err(Error::ResolutionTooCoarse { m });
    }
    let cell = build_unit_cell_mesh(&problem.geometry, m)?;
    StructuredMesh::new([0.0, 0.0], 1.0, problem.fine_cells(), |i, j, _| cell.phase(i % m + (j % m) * m))
}

#[derive(Debug, Clone)]
pub struct DnsSolution {
    pub epsilon: f64,
    pub gamma: f64,
    pub multiplier: f64,
    pub phi: FeField,
    pub u: FeField,
    pub v: FeField,
    pub w: FeField,
}

/// `int a(x/eps) grad phi . grad eta = int f eta`, `phi = h` at boundary nodes.
pub fn solve_phi_eps(problem: &DnsProblem, mesh: &Arc<StructuredMesh>, cfg: &SolverConfig) -> Result<FeField> {
    let k = assemble_scalar_operator(mesh, &problem.coeffs.a, cfg.quadrature_order)?;
    let f = problem.f.clone();
    let rhs = scalar_source_load(mesh, move |x| f(x), cfg.quadrature_order)?;
    let h = problem.h.clone();
    let red = apply_constraints(&k, &rhs, mesh, 1, &[ConstraintSpec::boundary_values(mesh, move |x| h(x))])?;
    let x = solve(&red.op, &red.rhs, cfg)?;
    red.layout.into_field(mesh, &x)
}

/// Shared load `int g . xi - int C(x/eps) : (grad phi (x) grad phi) : D(xi)`.
pub fn elastic_load(problem: &DnsProblem, phi: &FeField, order: usize) -> Result<Vec<f64>> {
    let mesh = phi.mesh();
    let g = problem.g.clone();
    let mut rhs = body_force_load(mesh, move |x| g(x), order)?;
    let c = problem.coeffs.c_voigt();
    if c.matrix.max_abs() > 0.0 || c.inclusion.max_abs() > 0.0 {
        let electro = stress_load(mesh, order, |e, p, _| {
            let grad = phi.gradient_in(e, &p.grad, 0);
            c.get(mesh.phase(e)).stress(&sym_dyad(grad, grad))
        })?;
        rhs.iter_mut().zip(&electro).for_each(|(r, s)| *r -= s);
    }
    Ok(rhs)
}

fn solve_elastic(
    mesh: &Arc<StructuredMesh>,
    tensor: &PhaseMap<Voigt4>,
    rhs: &[f64],
    cfg: &SolverConfig,
) -> Result<FeField> {
    let k = assemble_elasticity_voigt(mesh, tensor, cfg.quadrature_order)?;
    let red = apply_constraints(&k, rhs, mesh, 2, &[ConstraintSpec::zero_boundary(mesh, 2)])?;
    let x = solve(&red.op, &red.rhs, cfg)?;
    red.layout.into_field(mesh, &x)
}

/// High-contrast displacement with `B + multiplier R` on the inclusions.
pub fn solve_u_eps(problem: &DnsProblem, phi: &FeField, cfg: &SolverConfig) -> Result<FeField> {
    let mesh = phi.mesh();
    let b = problem.coeffs.b_voigt();
    let mult = problem.multiplier();
    let tensor = PhaseMap::new(b.matrix, b.inclusion + problem.coeffs.r.voigt().scaled(mult));
    let rhs = elastic_load(problem, phi, cfg.quadrature_order)?;
    solve_elastic(mesh, &tensor, &rhs, cfg).map_err(|e| match e {
        Error::SingularSystem { pivot, .. } => Error::IllConditioned {
            contrast: tensor.inclusion.max_abs() / b.matrix.max_abs().min(b.inclusion.max_abs()),
            pivot,
        },
        other => other,
    })
}

/// Bounded-coefficient displacement with `B` alone and the same load.
pub fn solve_v_eps(problem: &DnsProblem, phi: &FeField, cfg: &SolverConfig) -> Result<FeField> {
    let rhs = elastic_load(problem, phi, cfg.quadrature_order)?;
    solve_elastic(phi.mesh(), &problem.coeffs.b_voigt(), &rhs, cfg)
}

/// `w_eps = (u_eps - v_eps) / eps^gamma`.
pub fn split_w_eps(u: &FeField, v: &FeField, gamma: f64, epsilon: f64) -> Result<FeField> {
    Ok(u.axpy(-1.0, v)?.scaled(epsilon.powf(-gamma)))
}

/// Runs `phi_eps`, then `u_eps` and `v_eps` concurrently, then the split.
pub fn solve_dns(problem: &DnsProblem, cfg: &SolverConfig) -> Result<DnsSolution> {
    problem.coeffs.validate()?;
    let mesh = Arc::new(sample_oscillatory_phase(problem)?);
    let phi = solve_phi_eps(problem, &mesh, cfg)?;
    let (u, v) = rayon::join(|| solve_u_eps(problem, &phi, cfg), || solve_v_eps(problem, &phi, cfg));
    let (u, v) = (u?, v?);
    let w = split_w_eps(&u, &v, problem.coeffs.gamma, problem.epsilon())?;
    Ok(DnsSolution {
        epsilon: problem.epsilon(),
        gamma: problem.coeffs.gamma,
        multiplier: problem.multiplier(),
        phi,
        u,
        v,
        w,
    })
}

impl DnsSolution {
    /// Largest nodal `|u - (v + eps^gamma w)|` relative to `max |u|`.
    pub fn splitting_defect(&self) -> f64 {
        let scale = self.epsilon.powf(self.gamma);
        let u = self.u.values();
        let defect = self
            .v
            .values()
            .iter()
            .zip(self.w.values())
            .zip(u)
            .map(|((v, w), u)| (u - (v + scale * w)).abs())
            .fold(0.0, f64::max);
        defect / self.u.max_abs().max(f64::MIN_POSITIVE)
    }

    /// `|| eps^gamma w_eps ||_{H1}`.
    pub fn scaled_w_norm(&self) -> f64 {
        self.w.scaled(self.epsilon.powf(self.gamma)).h1_norm()
    }
}

/// `|D(u)|^2` from the engineering strain.
fn strain_square(e: &Vector3<f64>) -> f64 {
    e[0] * e[0] + e[1] * e[1] + 0.5 * e[2] * e[2]
}

/// Share of `int |D(u)|^2` carried by the inclusion elements.
pub fn inclusion_strain_fraction(u: &FeField) -> f64 {
    let mesh = u.mesh().clone();
    let mut inclusion = 0.0;
    let total = u.integrate_with(NORM_ORDER, |e, p, _| {
        let s = strain_square(&u.strain_in(e, &p.grad));
        if mesh.phase(e) == Phase::Inclusion {
            inclusion += p.jxw * s;
        }
        s
    });
    inclusion / total
}

/// `int_{inclusions} |D(u)|^2`.
pub fn inclusion_strain_energy(u: &FeField) -> f64 {
    let mesh = u.mesh().clone();
    u.integrate_with(NORM_ORDER, |e, p, _| {
        if mesh.phase(e) == Phase::Inclusion {
            strain_square(&u.strain_in(e, &p.grad))
        } else {
            0.0
        }
    })
}
