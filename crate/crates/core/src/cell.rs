//! Periodic cell problems on the unit cell `Y = [0,1]^2`.
//!
//! Four families of correctors are computed:
//!
//! * `chi^i`: scalar correctors of the dielectric problem, one per direction.
//! * `V^{ij}`: elastic correctors for the unit strains `sym(e^i (x) e^j)`.
//! * `p^{ij}`: electrostriction correctors, driven by the stress
//!   `C : sym((e^i + grad chi^i) (x) (e^j + grad chi^j))`.
//! * `W^{ij}`: correctors of the stiff-inclusion tensor `R`, which live on
//!   the inclusion and vanish on the matrix.
//!
//! Tensor-valued families are indexed by Voigt slot (`0 ~ 11`, `1 ~ 22`,
//! `2 ~ 12`), so `V^{12}` and `V^{21}` share one field. Each family shares a
//! single assembled and factored operator across its right-hand sides.

use std::sync::Arc;

use nalgebra::{Matrix2, Vector2, Vector3};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fem::assembly::{assemble_elasticity_voigt, assemble_scalar_operator, flux_load, stress_load};
use crate::fem::constraints::{build_layout, reduce_with, ConstraintSpec, DofLayout};
use crate::fem::element::ElementPoint;
use crate::fem::field::FeField;
use crate::fem::solver::{PreparedSolver, SolverConfig};
use crate::fem::sparse::CsrMatrix;
use crate::mesh::{PeriodicMap, Phase, PhaseMap, StructuredMesh};
use crate::tensor::{check_spd, sym_dyad, unit_strain, Electrostriction, Lame, Voigt4};

/// Material data of the two phases.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseCoefficients {
    /// Dielectric permittivity per phase.
    pub a: PhaseMap<Matrix2<f64>>,
    /// Bounded elastic tensor per phase.
    pub b: PhaseMap<Lame>,
    /// Stiff-inclusion tensor, active on the inclusion only.
    pub r: Lame,
    /// Electrostriction tensor per phase.
    pub c: PhaseMap<Electrostriction>,
    /// Contrast exponent: the inclusion carries `eps^(-2 gamma) R`.
    pub gamma: f64,
}

impl Default for PhaseCoefficients {
    fn default() -> Self {
        PhaseCoefficients {
            a: PhaseMap::new(Matrix2::identity(), Matrix2::identity() * 10.0),
            b: PhaseMap::new(Lame::new(1.0, 1.0), Lame::new(2.0, 2.0)),
            r: Lame::new(10.0, 10.0),
            c: PhaseMap::new(Electrostriction::new(1.0, 0.5), Electrostriction::new(0.5, 0.25)),
            gamma: 1.0,
        }
    }
}

impl PhaseCoefficients {
    /// Identical phases with the given data.
    pub fn uniform(a: Matrix2<f64>, b: Lame, r: Lame, c: Electrostriction) -> Self {
        PhaseCoefficients { a: PhaseMap::uniform(a), b: PhaseMap::uniform(b), r, c: PhaseMap::uniform(c), gamma: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        check_spd(&self.a.matrix, "a (matrix phase)")?;
        check_spd(&self.a.inclusion, "a (inclusion phase)")?;
        self.b.matrix.validate("B (matrix phase)")?;
        self.b.inclusion.validate("B (inclusion phase)")?;
        if !self.r_is_zero() {
            self.r.validate("R")?;
        }
        for c in [self.c.matrix, self.c.inclusion] {
            if !(c.alpha.is_finite() && c.beta.is_finite()) {
                return Err(Error::validation("coefficients.c", "entries must be finite"));
            }
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::validation("coefficients.gamma", "must be positive"));
        }
        Ok(())
    }

    /// `R = 0` switches the contrast off entirely.
    pub fn r_is_zero(&self) -> bool {
        self.r.lambda == 0.0 && self.r.mu == 0.0
    }

    pub fn b_voigt(&self) -> PhaseMap<Voigt4> {
        self.b.map(Lame::voigt)
    }

    pub fn c_voigt(&self) -> PhaseMap<Voigt4> {
        self.c.map(Electrostriction::voigt)
    }

    /// `R` on the inclusion, zero on the matrix.
    pub fn r_on_inclusion(&self) -> PhaseMap<Voigt4> {
        PhaseMap::new(Voigt4::zero(), self.r.voigt())
    }
}

/// Voigt slot of the index pair `(i, j)`.
pub fn voigt_slot(i: usize, j: usize) -> usize {
    if i == j {
        i
    } else {
        2
    }
}

/// All correctors of one unit-cell mesh.
#[derive(Debug, Clone)]
pub struct CorrectorSet {
    mesh: Arc<StructuredMesh>,
    pub chi: [FeField; 2],
    pub v: [FeField; 3],
    pub p: [FeField; 3],
    pub w: [FeField; 3],
}

impl CorrectorSet {
    pub fn mesh(&self) -> &Arc<StructuredMesh> {
        &self.mesh
    }

    /// Solves every family; `chi` first, then the other three concurrently.
    pub fn solve(mesh: &Arc<StructuredMesh>, coeffs: &PhaseCoefficients, cfg: &SolverConfig) -> Result<Self> {
        coeffs.validate()?;
        cfg.validate()?;
        let map = crate::mesh::build_periodic_map(mesh)?;
        let chi = solve_chi(mesh, &map, coeffs, cfg)?;
        let (v, (p, w)) = rayon::join(
            || solve_v(mesh, &map, coeffs, cfg),
            || rayon::join(|| solve_p(mesh, &map, coeffs, Some(&chi), cfg), || solve_w(mesh, &map, coeffs, cfg)),
        );
        Ok(CorrectorSet { mesh: mesh.clone(), chi, v: v?, p: p?, w: w? })
    }

    /// `e^i + grad chi^i` at a quadrature point.
    pub fn corrected_gradient(&self, i: usize, e: usize, p: &ElementPoint) -> Vector2<f64> {
        let mut g = self.chi[i].gradient_in(e, &p.grad, 0);
        g[i] += 1.0;
        g
    }

    /// Engineering strain of `y_j e^i - V^{ij}` for Voigt slot `a`.
    pub fn v_strain(&self, a: usize, e: usize, p: &ElementPoint) -> Vector3<f64> {
        unit_strain(a) - self.v[a].strain_in(e, &p.grad)
    }

    /// Engineering strain of `y_j e^i - W^{ij}` for Voigt slot `a`.
    pub fn w_strain(&self, a: usize, e: usize, p: &ElementPoint) -> Vector3<f64> {
        unit_strain(a) - self.w[a].strain_in(e, &p.grad)
    }

    /// `sym((e^i + grad chi^i) (x) (e^j + grad chi^j))` for Voigt slot `a`.
    pub fn field_dyad(&self, a: usize, e: usize, p: &ElementPoint) -> Vector3<f64> {
        let (i, j) = crate::tensor::VOIGT_PAIRS[a];
        let gi = self.corrected_gradient(i, e, p);
        let gj = self.corrected_gradient(j, e, p);
        sym_dyad(gi, gj)
    }

    /// `B : D(p^{ij}) + C : sym(...)`, the local electrostriction stress.
    pub fn electro_stress(&self, a: usize, e: usize, p: &ElementPoint, coeffs: &PhaseCoefficients) -> Vector3<f64> {
        let phase = self.mesh.phase(e);
        let b = coeffs.b.get(phase).voigt();
        let c = coeffs.c.get(phase).voigt();
        b.stress(&self.p[a].strain_in(e, &p.grad)) + c.stress(&self.field_dyad(a, e, p))
    }
}

struct Family {
    op: CsrMatrix,
    layout: DofLayout,
}

impl Family {
    fn new(mesh: &StructuredMesh, full: CsrMatrix, components: usize, specs: &[ConstraintSpec]) -> Result<Self> {
        let layout = build_layout(mesh, components, specs)?;
        let zero = vec![0.0; full.dim()];
        let red = reduce_with(&full, &zero, layout);
        Ok(Family { op: red.op, layout: red.layout })
    }

    fn solve_all<const N: usize>(
        &self,
        mesh: &Arc<StructuredMesh>,
        cfg: &SolverConfig,
        loads: [Vec<f64>; N],
    ) -> Result<[FeField; N]> {
        if self.layout.reduced_dim() == 0 {
            return Ok(std::array::from_fn(|_| FeField::zeros(mesh.clone(), self.components())));
        }
        let solver = PreparedSolver::new(&self.op, cfg)?;
        let fields = loads
            .par_iter()
            .map(|load| {
                let x = solver.solve(&self.layout.restrict(load))?;
                self.layout.into_field(mesh, &x)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(fields.try_into().expect("one field per load"))
    }

    fn components(&self) -> usize {
        self.layout.components()
    }
}

/// Scalar correctors: `int a (e^i + grad chi^i) . grad tau = 0` for all
/// periodic `tau`, with zero mean.
pub fn solve_chi(
    mesh: &Arc<StructuredMesh>,
    map: &PeriodicMap,
    coeffs: &PhaseCoefficients,
    cfg: &SolverConfig,
) -> Result<[FeField; 2]> {
    let order = cfg.quadrature_order;
    let k = assemble_scalar_operator(mesh, &coeffs.a, order)?;
    let family = Family::new(mesh, k, 1, &[ConstraintSpec::Periodic(map), ConstraintSpec::MeanZero])?;
    let loads = [0, 1].map(|i| flux_load(mesh, order, |e, _, _| -(coeffs.a.get(mesh.phase(e)) * Vector2::ith(i, 1.0))));
    let [l0, l1] = loads;
    family.solve_all(mesh, cfg, [l0?, l1?])
}

/// Elastic correctors: `int B : D(y_j e^i - V^{ij}) : D(xi) = 0` for all
/// periodic `xi`, with zero mean.
pub fn solve_v(
    mesh: &Arc<StructuredMesh>,
    map: &PeriodicMap,
    coeffs: &PhaseCoefficients,
    cfg: &SolverConfig,
) -> Result<[FeField; 3]> {
    let order = cfg.quadrature_order;
    let b = coeffs.b_voigt();
    let k = assemble_elasticity_voigt(mesh, &b, order)?;
    let family = Family::new(mesh, k, 2, &[ConstraintSpec::Periodic(map), ConstraintSpec::MeanZero])?;
    let [l0, l1, l2] =
        [0, 1, 2].map(|a| stress_load(mesh, order, |e, _, _| b.get(mesh.phase(e)).stress(&unit_strain(a))));
    family.solve_all(mesh, cfg, [l0?, l1?, l2?])
}

/// Electrostriction correctors:
/// `int [B : D(p^{ij}) + C : sym(g_i (x) g_j)] : D(xi) = 0` with
/// `g_i = e^i + grad chi^i`, for all periodic `xi`, with zero mean.
pub fn solve_p(
    mesh: &Arc<StructuredMesh>,
    map: &PeriodicMap,
    coeffs: &PhaseCoefficients,
    chi: Option<&[FeField; 2]>,
    cfg: &SolverConfig,
) -> Result<[FeField; 3]> {
    let chi = chi.ok_or(Error::MissingChi)?;
    if chi.iter().any(|f| f.components() != 1 || !f.mesh().same_layout(mesh)) {
        return Err(Error::MissingChi);
    }
    let order = cfg.quadrature_order;
    let b = coeffs.b_voigt();
    let c = coeffs.c_voigt();
    let k = assemble_elasticity_voigt(mesh, &b, order)?;
    let family = Family::new(mesh, k, 2, &[ConstraintSpec::Periodic(map), ConstraintSpec::MeanZero])?;
    let grad = |i: usize, e: usize, p: &ElementPoint| {
        let mut g = chi[i].gradient_in(e, &p.grad, 0);
        g[i] += 1.0;
        g
    };
    let [l0, l1, l2] = [(0, 0), (1, 1), (0, 1)].map(|(i, j)| {
        stress_load(mesh, order, |e, p, _| -c.get(mesh.phase(e)).stress(&sym_dyad(grad(i, e, p), grad(j, e, p))))
    });
    family.solve_all(mesh, cfg, [l0?, l1?, l2?])
}

/// Stiff-inclusion correctors: `int_{Y_s} R : D(y_j e^i - W^{ij}) : D(xi) = 0`
/// for periodic `xi` vanishing on the matrix.
///
/// Every node of a matrix element is held at zero, so `D(W) = 0` on the
/// whole matrix and `W` is continuous across the interface. When the
/// inclusion fills the cell the field is only periodic and zero-mean.
pub fn solve_w(
    mesh: &Arc<StructuredMesh>,
    map: &PeriodicMap,
    coeffs: &PhaseCoefficients,
    cfg: &SolverConfig,
) -> Result<[FeField; 3]> {
    if mesh.phases().iter().all(|&p| p == Phase::Matrix) {
        return Err(Error::EmptyInclusion);
    }
    if coeffs.r_is_zero() {
        return Ok(std::array::from_fn(|_| FeField::zeros(mesh.clone(), 2)));
    }
    let order = cfg.quadrature_order;
    let r = coeffs.r_on_inclusion();
    let k = assemble_elasticity_voigt(mesh, &r, order)?;
    let has_matrix = mesh.phases().contains(&Phase::Matrix);
    let specs = if has_matrix {
        vec![ConstraintSpec::Periodic(map), ConstraintSpec::PhaseFrozen { phase: Phase::Matrix, value: 0.0 }]
    } else {
        vec![ConstraintSpec::Periodic(map), ConstraintSpec::MeanZero]
    };
    let family = Family::new(mesh, k, 2, &specs)?;
    let [l0, l1, l2] =
        [0, 1, 2].map(|a| stress_load(mesh, order, |e, _, _| r.get(mesh.phase(e)).stress(&unit_strain(a))));
    family.solve_all(mesh, cfg, [l0?, l1?, l2?])
}
