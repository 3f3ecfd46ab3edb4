use std::sync::Arc;

use approx::assert_relative_eq;
use hichom_core::macro_solver::solve_macro;
use hichom_core::tensors::voigt_reuss_bounds;
use hichom_core::{
    build_macro_mesh, build_unit_cell_mesh, CHomMode, CorrectorSet, EffectiveTensors, Electrostriction, Lame, Loading,
    MacroProblem, Phase, PhaseCoefficients, PhaseMap, SolverConfig, SolverMethod, TensorDomain, UnitCellGeometry,
};
use nalgebra::Matrix2;

fn tensors(geometry: &UnitCellGeometry, coeffs: &PhaseCoefficients, n: usize, cfg: &SolverConfig) -> EffectiveTensors {
    let mesh = Arc::new(build_unit_cell_mesh(geometry, n).unwrap());
    let set = CorrectorSet::solve(&mesh, coeffs, cfg).unwrap();
    EffectiveTensors::assemble(&set, coeffs, CHomMode::default(), TensorDomain::InclusionOnly).unwrap()
}

#[test]
fn laminate_means_for_several_fractions_and_contrasts() {
    for (fraction, a_s) in [(0.25, 4.0), (0.5, 10.0), (0.75, 100.0)] {
        let coeffs = PhaseCoefficients {
            a: PhaseMap::new(Matrix2::identity(), Matrix2::identity() * a_s),
            ..Default::default()
        };
        let a = tensors(&UnitCellGeometry::laminate(fraction), &coeffs, 32, &SolverConfig::default()).a();
        let harmonic = 1.0 / (fraction / a_s + (1.0 - fraction));
        let arithmetic = fraction * a_s + (1.0 - fraction);
        assert_relative_eq!(a[(0, 0)], harmonic, max_relative = 1e-10);
        assert_relative_eq!(a[(1, 1)], arithmetic, max_relative = 1e-10);
        assert!(a[(0, 1)].abs() < 1e-10);
    }
}

#[test]
fn direct_and_iterative_solvers_agree_on_tensors() {
    let g = UnitCellGeometry::disk(0.3);
    let coeffs = PhaseCoefficients::default();
    let direct = tensors(&g, &coeffs, 24, &SolverConfig::default());
    let cg = SolverConfig { method: SolverMethod::ConjugateGradient, tolerance: 1e-12, ..Default::default() };
    let iterative = tensors(&g, &coeffs, 24, &cg);
    assert_relative_eq!(direct.a(), iterative.a(), epsilon = 1e-8);
    assert_relative_eq!(direct.b().0, iterative.b().0, epsilon = 1e-8);
    assert_relative_eq!(direct.r().0, iterative.r().0, epsilon = 1e-8);
}

#[test]
fn disk_tensors_respect_bounds_under_refinement() {
    let g = UnitCellGeometry::disk(0.25);
    let coeffs = PhaseCoefficients::default();
    let mut previous = None;
    for n in [16, 32, 64] {
        let mesh = Arc::new(build_unit_cell_mesh(&g, n).unwrap());
        let set = CorrectorSet::solve(&mesh, &coeffs, &SolverConfig::default()).unwrap();
        let t = EffectiveTensors::assemble(&set, &coeffs, CHomMode::default(), TensorDomain::InclusionOnly).unwrap();
        let bounds = voigt_reuss_bounds(&coeffs, mesh.phase_area(Phase::Inclusion)).unwrap();
        assert!(bounds.check(&t));
        assert_relative_eq!(t.a()[(0, 0)], t.a()[(1, 1)], max_relative = 1e-10);
        if let Some(p) = previous {
            assert_relative_eq!(t.a()[(0, 0)], p, max_relative = 0.05);
        }
        previous = Some(t.a()[(0, 0)]);
    }
}

#[test]
fn macro_displacement_responds_to_electrostriction() {
    let g = UnitCellGeometry::disk(0.25);
    let base = PhaseCoefficients::default();
    let silent = PhaseCoefficients { c: PhaseMap::uniform(Electrostriction::ZERO), ..base.clone() };
    let mesh = Arc::new(build_macro_mesh(1.0, 16).unwrap());
    let loading = Loading::default();
    let solve = |c: &PhaseCoefficients| {
        let t = tensors(&g, c, 16, &SolverConfig::default());
        solve_macro(&MacroProblem::new(mesh.clone(), t, &loading), &SolverConfig::default()).unwrap()
    };
    let (with, without) = (solve(&base), solve(&silent));
    assert_relative_eq!(with.phi0.l2_norm(), without.phi0.l2_norm(), max_relative = 1e-12);
    assert!(with.u0.l2_distance(&without.u0).unwrap() > 1e-6);
}

#[test]
fn stiff_limit_keeps_bounded_tensor_between_phase_values() {
    let coeffs = PhaseCoefficients { b: PhaseMap::new(Lame::new(1.0, 1.0), Lame::new(1.0, 1.0)), ..Default::default() };
    let t = tensors(&UnitCellGeometry::disk(0.2), &coeffs, 32, &SolverConfig::default());
    assert_relative_eq!(t.b().0, Lame::new(1.0, 1.0).voigt().0, epsilon = 1e-10);
    assert!(t.r().min_eigenvalue() > 0.0);
    assert!(t.t().min_eigenvalue() > 0.0);
}
