//! The acceptance suite as a library: each check returns a named outcome
//! with the measured quantities, and [`run_suite`] collects them into a
//! report whose serialization is reproducible byte for byte.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::Matrix2;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::cell::{CorrectorSet, PhaseCoefficients};
use crate::error::Result;
use crate::fem::field::FeField;
use crate::fem::solver::SolverConfig;
use crate::macro_solver::{solve_phi0, solve_v0, MacroProblem};
use crate::mesh::{build_macro_mesh, build_unit_cell_mesh, Phase, PhaseMap, UnitCellGeometry};
use crate::tensor::{Electrostriction, Lame, Voigt4};
use crate::tensors::{voigt_reuss_bounds, CHomMode, EffectiveTensors, TensorDomain};
use crate::verification::{run_convergence_study, spread_ratio, strictly_decreasing, ConvergenceReport, StudyConfig};

/// Cell resolution of the tensor checks.
pub const CELL_N: usize = 64;
/// Scalar Reuss and Voigt values for the default disk, fraction `pi / 16`.
pub const DISK_A_INTERVAL: (f64, f64) = (1.2146, 2.7672);

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionOutcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub metrics: Map<String, Value>,
}

impl CriterionOutcome {
    fn new(id: u8, name: &'static str) -> Self {
        CriterionOutcome { id, name, passed: true, metrics: Map::new() }
    }

    /// Records a metric and folds `ok` into the verdict.
    fn check(&mut self, key: &str, value: impl Into<Value>, ok: bool) -> &mut Self {
        self.metrics.insert(key.to_string(), value.into());
        self.passed &= ok;
        self
    }

    fn note(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.metrics.insert(key.to_string(), value.into());
        self
    }

    /// One-line summary, `[PASS] 3 bounds: ...`.
    pub fn summary(&self) -> String {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        format!("[{tag}] {:>2} {}: {}", self.id, self.name, Value::Object(self.metrics.clone()))
    }
}

fn rows(m: &Voigt4) -> Value {
    json!(m.as_rows())
}

fn tensors_for(
    geometry: &UnitCellGeometry,
    coeffs: &PhaseCoefficients,
    solver: &SolverConfig,
) -> Result<(CorrectorSet, EffectiveTensors)> {
    let mesh = Arc::new(build_unit_cell_mesh(geometry, CELL_N)?);
    let set = CorrectorSet::solve(&mesh, coeffs, solver)?;
    let t = EffectiveTensors::assemble(&set, coeffs, CHomMode::default(), TensorDomain::InclusionOnly)?;
    Ok((set, t))
}

/// Spatially constant coefficients of the trivial-limit check.
pub fn constant_coefficients() -> PhaseCoefficients {
    PhaseCoefficients::uniform(
        Matrix2::new(2.0, 0.0, 0.0, 3.0),
        Lame::new(1.5, 0.75),
        Lame::new(10.0, 10.0),
        Electrostriction::new(0.6, 0.2),
    )
}

/// Scalar laminate `a_f = 1`, `a_s = 4`, half-filled.
pub fn laminate_coefficients() -> PhaseCoefficients {
    PhaseCoefficients { a: PhaseMap::new(Matrix2::identity(), Matrix2::identity() * 4.0), ..Default::default() }
}

fn seminorms(set: &CorrectorSet) -> f64 {
    set.chi.iter().chain(&set.v).chain(&set.p).chain(&set.w).map(FeField::h1_seminorm).fold(0.0, f64::max)
}

pub fn trivial_limit(solver: &SolverConfig) -> Result<CriterionOutcome> {
    let coeffs = constant_coefficients();
    let (set, t) = tensors_for(&UnitCellGeometry::disk(0.25), &coeffs, solver)?;
    let a_gap = (t.a() - coeffs.a.matrix).abs().max();
    let b_gap = (t.b() - coeffs.b.matrix.voigt()).max_abs();
    let chi_max = seminorms(&set);
    let mut o = CriterionOutcome::new(1, "trivial-limit exactness");
    o.check("aHomGap", a_gap, a_gap <= 1e-10).check("bHomGap", b_gap, b_gap <= 1e-10).check(
        "maxCorrectorH1Seminorm",
        chi_max,
        chi_max <= 1e-10,
    );
    Ok(o)
}

pub fn laminate_oracle(solver: &SolverConfig) -> Result<CriterionOutcome> {
    let (_, t) = tensors_for(&UnitCellGeometry::laminate(0.5), &laminate_coefficients(), solver)?;
    let a = t.a();
    let gap = (a - Matrix2::new(1.6, 0.0, 0.0, 2.5)).abs().max();
    let mut o = CriterionOutcome::new(2, "laminate oracle");
    o.note("aHom", json!([[a[(0, 0)], a[(0, 1)]], [a[(1, 0)], a[(1, 1)]]])).check(
        "gapToDiag(1.6,2.5)",
        gap,
        gap <= 1e-8,
    );
    Ok(o)
}

pub fn bounds(solver: &SolverConfig) -> Result<CriterionOutcome> {
    let coeffs = PhaseCoefficients::default();
    let (set, t) = tensors_for(&UnitCellGeometry::disk(0.25), &coeffs, solver)?;
    let a = t.a();
    let (lo, hi) = DISK_A_INTERVAL;
    let inside = |x: f64| lo < x && x < hi;
    let fraction = set.mesh().phase_area(Phase::Inclusion);
    let b_bounds = voigt_reuss_bounds(&coeffs, fraction)?;
    let b = t.b().0;
    let b_ok = (0..3).all(|k| b_bounds.b[k].contains_strictly(b[(k, k)]));
    let mut o = CriterionOutcome::new(3, "Reuss-Voigt bounds");
    o.check("aHom11", a[(0, 0)], inside(a[(0, 0)]))
        .check("aHom22", a[(1, 1)], inside(a[(1, 1)]))
        .check("aHom12", a[(0, 1)], a[(0, 1)].abs() < 1e-8)
        .note("meshInclusionFraction", fraction)
        .note("bHomDiagonal", json!([b[(0, 0)], b[(1, 1)], b[(2, 2)]]))
        .note("bReuss", json!(b_bounds.b.map(|x| x.reuss)))
        .check("bVoigt", json!(b_bounds.b.map(|x| x.voigt)), b_ok);
    Ok(o)
}

/// Configurations covered by the form-agreement check.
pub fn default_configurations() -> Vec<(&'static str, UnitCellGeometry, PhaseCoefficients)> {
    vec![
        ("disk", UnitCellGeometry::disk(0.25), PhaseCoefficients::default()),
        ("laminate", UnitCellGeometry::laminate(0.5), laminate_coefficients()),
        ("constant", UnitCellGeometry::disk(0.25), constant_coefficients()),
    ]
}

pub fn form_agreement(solver: &SolverConfig) -> Result<CriterionOutcome> {
    let mut o = CriterionOutcome::new(4, "energy vs averaging forms");
    for (name, geometry, coeffs) in default_configurations() {
        let (_, t) = tensors_for(&geometry, &coeffs, solver)?;
        let gap = t.a_hom.discrepancy().max(t.b_hom.discrepancy());
        o.check(name, gap, gap <= 1e-8);
    }
    Ok(o)
}

pub fn symmetry_ellipticity(solver: &SolverConfig) -> Result<CriterionOutcome> {
    let (_, t) = tensors_for(&UnitCellGeometry::disk(0.25), &PhaseCoefficients::default(), solver)?;
    let mut o = CriterionOutcome::new(5, "symmetry and ellipticity");
    o.check("bHomAsymmetry", t.b().major_asymmetry(), t.b().major_asymmetry() <= 1e-10)
        .check("rHomAsymmetry", t.r().major_asymmetry(), t.r().major_asymmetry() <= 1e-10)
        .check("tHomAsymmetry", t.t().major_asymmetry(), t.t().major_asymmetry() <= 1e-10)
        .check("bHomMinEigenvalue", t.b().min_eigenvalue(), t.b().min_eigenvalue() > 0.0)
        .note("rHom", rows(&t.r()))
        .note("tHom", rows(&t.t()));
    Ok(o)
}

fn mms_problem(n: usize) -> Result<MacroProblem> {
    let mesh = Arc::new(build_macro_mesh(1.0, n)?);
    let b = Lame::new(1.0, 1.0);
    let tensors =
        EffectiveTensors::from_constants(Matrix2::identity(), b.voigt(), Voigt4::zero(), b.voigt(), b.voigt());
    let (l, m) = (b.lambda, b.mu);
    Ok(MacroProblem {
        mesh,
        tensors,
        f: Arc::new(|x| 2.0 * PI * PI * (PI * x[0]).sin() * (PI * x[1]).sin()),
        g: Arc::new(move |x| {
            let (sx, cx, sy, cy) = ((PI * x[0]).sin(), (PI * x[0]).cos(), (PI * x[1]).sin(), (PI * x[1]).cos());
            [(l + 3.0 * m) * PI * PI * sx * sy, -(l + m) * PI * PI * cx * cy]
        }),
        h: Arc::new(|_| 0.0),
    })
}

/// L2 errors of the scalar and vector manufactured solutions at resolution `n`.
pub fn mms_errors(n: usize, solver: &SolverConfig) -> Result<(f64, f64)> {
    let p = mms_problem(n)?;
    let phi = solve_phi0(&p, solver)?;
    let v = solve_v0(&p, &phi, solver)?;
    let exact = |x: [f64; 2]| (PI * x[0]).sin() * (PI * x[1]).sin();
    Ok((phi.l2_error(|x| vec![exact(x)]), v.l2_error(|x| vec![exact(x), 0.0])))
}

pub fn manufactured_convergence(solver: &SolverConfig) -> Result<CriterionOutcome> {
    let errors = [16, 32, 64].map(|n| mms_errors(n, solver));
    let mut scalar = Vec::new();
    let mut vector = Vec::new();
    for e in errors {
        let (s, v) = e?;
        scalar.push(s);
        vector.push(v);
    }
    let ratios = |e: &[f64]| e.windows(2).map(|w| w[0] / w[1]).collect::<Vec<_>>();
    let ok = |r: &[f64]| r.iter().all(|x| (3.0..=5.0).contains(x));
    let (rs, rv) = (ratios(&scalar), ratios(&vector));
    let mut o = CriterionOutcome::new(6, "manufactured-solution convergence");
    o.note("scalarErrors", json!(scalar))
        .check("scalarRatios", json!(rs), ok(&rs))
        .note("vectorErrors", json!(vector))
        .check("vectorRatios", json!(rv), ok(&rv));
    Ok(o)
}

/// Ladder study of the electrostatic criterion (default disk data).
pub fn electrostatic_study(solver: &SolverConfig) -> Result<ConvergenceReport> {
    run_convergence_study(&StudyConfig { solver: *solver, ..Default::default() })
}

/// Ladder study of the elastic criteria: no electrostriction, `gamma = 1`.
pub fn elastic_study(solver: &SolverConfig) -> Result<ConvergenceReport> {
    let coeffs = PhaseCoefficients { c: PhaseMap::uniform(Electrostriction::ZERO), gamma: 1.0, ..Default::default() };
    run_convergence_study(&StudyConfig {
        coeffs,
        solver: *solver,
        domain: TensorDomain::InclusionOnly,
        ..Default::default()
    })
}

pub fn electrostatic_convergence(report: &ConvergenceReport) -> CriterionOutcome {
    let errors = report.phi_l2_errors();
    let residual = report.corrector_residuals();
    let plain = report.column(|r| r.phi_h1_distance);
    let mut o = CriterionOutcome::new(7, "electrostatic homogenization convergence");
    o.note("epsilons", json!(report.epsilons()))
        .check("phiL2Errors", json!(errors), strictly_decreasing(&errors))
        .note("uncorrectedGradientErrors", json!(plain))
        .check("correctorResiduals", json!(residual), residual.iter().zip(&plain).all(|(r, p)| r < p));
    o
}

pub fn elastic_convergence(report: &ConvergenceReport) -> CriterionOutcome {
    let errors = report.u_l2_errors();
    let mut o = CriterionOutcome::new(8, "high-contrast elastic convergence");
    o.note("epsilons", json!(report.epsilons())).check("uL2Errors", json!(errors), strictly_decreasing(&errors));
    o
}

pub fn uniform_bounds(report: &ConvergenceReport) -> CriterionOutcome {
    let a_priori = report.column(|r| r.a_priori_norm());
    let w = report.column(|r| r.scaled_w_h1_norm);
    let (ra, rw) = (spread_ratio(&a_priori), spread_ratio(&w));
    let mut o = CriterionOutcome::new(9, "uniform-bound monitor");
    o.note("uPlusPhiH1Norms", json!(a_priori))
        .check("uPlusPhiRatio", ra, ra < 2.0)
        .note("scaledWH1Norms", json!(w))
        .check("scaledWRatio", rw, rw < 2.0);
    o
}

pub fn splitting_identity(reports: &[&ConvergenceReport]) -> CriterionOutcome {
    let defects: Vec<f64> = reports.iter().flat_map(|r| r.column(|row| row.splitting_defect)).collect();
    let worst = defects.iter().copied().fold(0.0, f64::max);
    let mut o = CriterionOutcome::new(10, "splitting identity");
    o.note("runs", defects.len()).check("maxRelativeDefect", worst, worst <= 1e-12);
    o
}

/// Criteria 1 to 10, in order.
pub fn run_suite(solver: &SolverConfig) -> Result<Vec<CriterionOutcome>> {
    let mut out = vec![
        trivial_limit(solver)?,
        laminate_oracle(solver)?,
        bounds(solver)?,
        form_agreement(solver)?,
        symmetry_ellipticity(solver)?,
        manufactured_convergence(solver)?,
    ];
    let (electro, elastic) = rayon::join(|| electrostatic_study(solver), || elastic_study(solver));
    let (electro, elastic) = (electro?, elastic?);
    out.push(electrostatic_convergence(&electro));
    out.push(elastic_convergence(&elastic));
    out.push(uniform_bounds(&elastic));
    out.push(splitting_identity(&[&electro, &elastic]));
    Ok(out)
}

/// Outcome of the determinism check comparing two serialized suite runs.
pub fn determinism(first: &str, second: &str) -> CriterionOutcome {
    let mut o = CriterionOutcome::new(11, "determinism");
    o.check("identicalReports", first == second, first == second).note("bytes", first.len());
    o
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn outcome_bookkeeping() {
        let mut o = CriterionOutcome::new(3, "x");
        o.check("a", 1.0, true).note("b", "info");
        assert!(o.passed);
        o.check("c", 2.0, false);
        assert!(!o.passed);
        assert!(o.summary().starts_with("[FAIL]  3 x"));
        let keys: Vec<_> = o.metrics.keys().cloned().collect();
        assert_eq!(keys, ["a", "b", "c"]);
    }

    #[test]
    fn determinism_outcome() {
        assert!(determinism("abc", "abc").passed);
        assert!(!determinism("abc", "abd").passed);
    }

    #[test]
    fn manufactured_errors_shrink() {
        let (s16, v16) = mms_errors(16, &SolverConfig::default()).unwrap();
        let (s32, v32) = mms_errors(32, &SolverConfig::default()).unwrap();
        assert!(s32 < s16 && v32 < v16);
    }
}
