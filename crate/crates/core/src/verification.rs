//! Convergence studies over an `eps` ladder, the corrector residual and the
//! tensor cross-checks.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::Vector2;
use rayon::prelude::*;
use serde::Serialize;

use crate::cell::{CorrectorSet, PhaseCoefficients};
use crate::dns::{periods_for, solve_dns, DnsProblem, DnsSolution};
use crate::error::{Error, Result};
use crate::fem::field::{FeField, ERROR_ORDER};
use crate::fem::solver::SolverConfig;
use crate::loading::Loading;
use crate::macro_solver::{solve_macro, MacroProblem, MacroSolution};
use crate::mesh::{build_macro_mesh, build_unit_cell_mesh, UnitCellGeometry};
use crate::tensors::{CHomMode, EffectiveTensors, TensorDomain};

/// Everything a convergence study needs.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub geometry: UnitCellGeometry,
    pub coeffs: PhaseCoefficients,
    pub loading: Loading,
    pub epsilons: Vec<f64>,
    pub cells_per_period: usize,
    /// Resolution of the cell problems; the DNS period resolution when unset.
    pub cell_resolution: Option<usize>,
    /// Resolution of the macro mesh; the finest DNS resolution when unset.
    pub macro_resolution: Option<usize>,
    pub solver: SolverConfig,
    pub c_mode: CHomMode,
    pub domain: TensorDomain,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            geometry: UnitCellGeometry::disk(0.25),
            coeffs: PhaseCoefficients::default(),
            loading: Loading::default(),
            epsilons: vec![0.5, 0.25, 0.125],
            cells_per_period: 8,
            cell_resolution: None,
            macro_resolution: None,
            solver: SolverConfig::default(),
            c_mode: CHomMode::default(),
            domain: TensorDomain::default(),
        }
    }
}

impl StudyConfig {
    pub fn cell_n(&self) -> usize {
        self.cell_resolution.unwrap_or(self.cells_per_period)
    }

    /// Periods per side for every rung, validated.
    pub fn ladder(&self) -> Result<Vec<usize>> {
        if self.epsilons.is_empty() {
            return Err(Error::LadderMismatch("the epsilon ladder is empty".into()));
        }
        self.epsilons.iter().map(|&e| periods_for(e)).collect()
    }

    pub fn macro_n(&self) -> Result<usize> {
        let finest = self.ladder()?.into_iter().max().unwrap_or(1) * self.cells_per_period;
        match self.macro_resolution {
            Some(n) if n < finest => Err(Error::validation(
                "macroResolution",
                format!("must be at least the finest DNS resolution {finest}"),
            )),
            Some(n) => Ok(n),
            None => Ok(finest),
        }
    }
}

/// Diagnostics of one rung of the ladder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct EpsilonRow {
    pub epsilon: f64,
    pub fine_cells: usize,
    pub multiplier: f64,
    pub phi_l2_error: f64,
    pub u_l2_error: f64,
    pub phi_h1_distance: f64,
    pub u_h1_distance: f64,
    pub corrector_residual: f64,
    pub phi_h1_norm: f64,
    pub u_h1_norm: f64,
    pub scaled_w_h1_norm: f64,
    pub splitting_defect: f64,
}

impl EpsilonRow {
    /// `||u_eps||_{H1} + ||phi_eps||_{H1}`.
    pub fn a_priori_norm(&self) -> f64 {
        self.u_h1_norm + self.phi_h1_norm
    }
}

#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub rows: Vec<EpsilonRow>,
    pub tensors: EffectiveTensors,
    pub tensor_cross_checks: BTreeMap<String, f64>,
    pub macro_cells: usize,
    pub cell_cells: usize,
}

impl ConvergenceReport {
    pub fn column(&self, f: impl Fn(&EpsilonRow) -> f64) -> Vec<f64> {
        self.rows.iter().map(f).collect()
    }

    pub fn epsilons(&self) -> Vec<f64> {
        self.column(|r| r.epsilon)
    }

    pub fn phi_l2_errors(&self) -> Vec<f64> {
        self.column(|r| r.phi_l2_error)
    }

    pub fn u_l2_errors(&self) -> Vec<f64> {
        self.column(|r| r.u_l2_error)
    }

    pub fn corrector_residuals(&self) -> Vec<f64> {
        self.column(|r| r.corrector_residual)
    }
}

/// True when every entry is strictly smaller than its predecessor.
pub fn strictly_decreasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] < w[0])
}

/// `max / min` of positive values.
pub fn spread_ratio(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::MIN, f64::max);
    let min = values.iter().copied().fold(f64::MAX, f64::min);
    max / min
}

/// `|| grad phi_eps - (grad phi0 + d_i phi0 grad_y chi^i(x/eps)) ||_{L2}`,
/// evaluated at the quadrature points of the fine mesh.
pub fn corrector_residual(phi_eps: &FeField, phi0: &FeField, chi: &[FeField; 2], epsilon: f64) -> Result<f64> {
    if phi_eps.components() != 1 || phi0.components() != 1 || chi.iter().any(|c| c.components() != 1) {
        return Err(Error::MeshMismatch);
    }
    let fine = phi_eps.mesh();
    let coarse = phi0.mesh();
    if (fine.edge_length() - coarse.edge_length()).abs() > 1e-12 || fine.origin() != coarse.origin() {
        return Err(Error::MeshMismatch);
    }
    Ok(phi_eps
        .integrate_with(ERROR_ORDER, |e, p, x| {
            let g0 = phi0.eval_gradient(x, 0);
            let y = [(x[0] / epsilon).rem_euclid(1.0), (x[1] / epsilon).rem_euclid(1.0)];
            let corr: Vector2<f64> = (0..2).map(|i| chi[i].eval_gradient(y, 0) * g0[i]).sum();
            (phi_eps.gradient_in(e, &p.grad, 0) - g0 - corr).norm_squared()
        })
        .sqrt())
}

/// Energy-versus-averaging gaps and the gaps between the alternative
/// readings of `C_hom`, `R_hom` and `T_hom`.
pub fn tensor_cross_check(tensors: &EffectiveTensors) -> BTreeMap<String, f64> {
    BTreeMap::from([
        ("aHom.energyVsAveraging".to_string(), tensors.a_hom.discrepancy()),
        ("bHom.energyVsAveraging".to_string(), tensors.b_hom.discrepancy()),
        (
            "cHom.weakFormVsStressProduct".to_string(),
            (tensors.c_hom.weak_form - tensors.c_hom.stress_product).max_abs(),
        ),
        ("rHom.fullCellVsInclusionOnly".to_string(), tensors.r_hom.gap()),
        ("tHom.fullCellVsInclusionOnly".to_string(), tensors.t_hom.gap()),
    ])
}

/// Cell problems and effective tensors of a study configuration.
pub fn homogenize(cfg: &StudyConfig) -> Result<(CorrectorSet, EffectiveTensors)> {
    let mesh = Arc::new(build_unit_cell_mesh(&cfg.geometry, cfg.cell_n())?);
    let set = CorrectorSet::solve(&mesh, &cfg.coeffs, &cfg.solver)?;
    let tensors = EffectiveTensors::assemble(&set, &cfg.coeffs, cfg.c_mode, cfg.domain)?;
    Ok((set, tensors))
}

fn row(dns: &DnsSolution, macro_sol: &MacroSolution, chi: &[FeField; 2]) -> Result<EpsilonRow> {
    Ok(EpsilonRow {
        epsilon: dns.epsilon,
        fine_cells: dns.phi.mesh().cells_per_side(),
        multiplier: dns.multiplier,
        phi_l2_error: dns.phi.l2_distance(&macro_sol.phi0)?,
        u_l2_error: dns.u.l2_distance(&macro_sol.u0)?,
        phi_h1_distance: dns.phi.h1_distance(&macro_sol.phi0)?,
        u_h1_distance: dns.u.h1_distance(&macro_sol.u0)?,
        corrector_residual: corrector_residual(&dns.phi, &macro_sol.phi0, chi, dns.epsilon)?,
        phi_h1_norm: dns.phi.h1_norm(),
        u_h1_norm: dns.u.h1_norm(),
        scaled_w_h1_norm: dns.scaled_w_norm(),
        splitting_defect: dns.splitting_defect(),
    })
}

/// Runs the cell problems, the macro problem and one DNS per rung, and
/// compares them.
pub fn run_convergence_study(cfg: &StudyConfig) -> Result<ConvergenceReport> {
    cfg.coeffs.validate()?;
    cfg.solver.validate()?;
    cfg.geometry.validate()?;
    let ladder = cfg.ladder()?;
    let macro_n = cfg.macro_n()?;
    let (set, tensors) = homogenize(cfg)?;
    let macro_mesh = Arc::new(build_macro_mesh(1.0, macro_n)?);
    let macro_problem = MacroProblem::new(macro_mesh, tensors.clone(), &cfg.loading);
    let (macro_sol, dns) = rayon::join(
        || solve_macro(&macro_problem, &cfg.solver),
        || {
            ladder
                .par_iter()
                .map(|&k| {
                    let problem = DnsProblem::new(
                        1.0 / k as f64,
                        cfg.cells_per_period,
                        cfg.geometry.clone(),
                        cfg.coeffs.clone(),
                        &cfg.loading,
                    )?;
                    solve_dns(&problem, &cfg.solver)
                })
                .collect::<Result<Vec<_>>>()
        },
    );
    let (macro_sol, dns) = (macro_sol?, dns?);
    let rows = dns.par_iter().map(|d| row(d, &macro_sol, &set.chi)).collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceReport {
        rows,
        tensor_cross_checks: tensor_cross_check(&tensors),
        tensors,
        macro_cells: macro_n,
        cell_cells: cfg.cell_n(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::PhaseMap;
    use crate::tensor::{Electrostriction, Lame};
    use nalgebra::Matrix2;

    #[test]
    fn ladder_validation() {
        let cfg = StudyConfig { epsilons: vec![0.5, 0.3], ..Default::default() };
        assert!(matches!(run_convergence_study(&cfg), Err(Error::LadderMismatch(_))));
        let cfg = StudyConfig { epsilons: vec![], ..Default::default() };
        assert!(matches!(cfg.ladder(), Err(Error::LadderMismatch(_))));
        let cfg = StudyConfig { macro_resolution: Some(16), ..Default::default() };
        assert!(matches!(cfg.macro_n(), Err(Error::Validation { .. })));
        assert_eq!(StudyConfig::default().macro_n().unwrap(), 64);
    }

    #[test]
    fn homogeneous_medium_has_only_discretization_error() {
        let coeffs = PhaseCoefficients::uniform(
            Matrix2::identity() * 2.0,
            Lame::new(1.0, 1.0),
            Lame::new(0.0, 0.0),
            Electrostriction::new(0.3, 0.1),
        );
        let cfg = StudyConfig { coeffs, epsilons: vec![0.5, 0.25], ..Default::default() };
        let report = run_convergence_study(&cfg).unwrap();
        let first = &report.rows[0];
        let last = &report.rows[1];
        // both rungs are compared against the same macro mesh
        assert!(last.phi_l2_error <= first.phi_l2_error * (1.0 + 1e-9) + 1e-12);
        assert!(last.phi_l2_error < 1e-3);
        for r in &report.rows {
            assert!(r.corrector_residual <= r.phi_h1_distance + 1e-12);
        }
        for (name, gap) in &report.tensor_cross_checks {
            if !name.starts_with("cHom") {
                assert!(*gap < 1e-12, "{name}: {gap}");
            }
        }
    }

    #[test]
    fn laminate_potential_converges_and_corrector_helps() {
        let coeffs = PhaseCoefficients {
            a: PhaseMap::new(Matrix2::identity(), Matrix2::identity() * 4.0),
            ..Default::default()
        };
        let loading = Loading {
            h: crate::loading::ScalarFunction::Affine { offset: 0.0, slope: [1.0, 0.5] },
            ..Default::default()
        };
        let cfg = StudyConfig { geometry: UnitCellGeometry::laminate(0.5), coeffs, loading, ..Default::default() };
        let report = run_convergence_study(&cfg).unwrap();
        assert!(strictly_decreasing(&report.phi_l2_errors()));
        for r in &report.rows {
            assert!(r.corrector_residual < r.phi_h1_distance);
        }
        assert!(report.tensor_cross_checks["aHom.energyVsAveraging"] < 1e-10);
    }

    #[test]
    fn helpers() {
        assert!(strictly_decreasing(&[3.0, 2.0, 1.0]));
        assert!(!strictly_decreasing(&[3.0, 3.0]));
        assert_eq!(spread_ratio(&[1.0, 4.0, 2.0]), 4.0);
    }
}
