//! Fixtures shared by the benchmarks.

use std::sync::Arc;

use hichom_core::fem::assembly::assemble_scalar_operator;
use hichom_core::fem::constraints::{apply_constraints, ConstraintSpec, ReducedSystem};
use hichom_core::fem::sparse::CsrMatrix;
use hichom_core::{build_unit_cell_mesh, DnsProblem, Loading, PhaseCoefficients, StructuredMesh, UnitCellGeometry};

/// Unit cell with the default disk inclusion at resolution `n`.
pub fn disk_cell(n: usize) -> Arc<StructuredMesh> {
    Arc::new(build_unit_cell_mesh(&UnitCellGeometry::disk(0.25), n).expect("valid resolution"))
}

/// Scalar operator of the default permittivities on `mesh`.
pub fn scalar_operator(mesh: &StructuredMesh) -> CsrMatrix {
    assemble_scalar_operator(mesh, &PhaseCoefficients::default().a, 2).expect("assembly succeeds")
}

/// Scalar Dirichlet problem with unit load, ready for a solver.
pub fn dirichlet_system(mesh: &StructuredMesh) -> ReducedSystem {
    let op = scalar_operator(mesh);
    let rhs = vec![mesh.element_area(); op.dim()];
    apply_constraints(&op, &rhs, mesh, 1, &[ConstraintSpec::zero_boundary(mesh, 1)]).expect("consistent constraints")
}

/// Default fine-scale problem at `epsilon = 1/periods`.
pub fn dns_problem(periods: usize) -> DnsProblem {
    DnsProblem::new(
        1.0 / periods as f64,
        8,
        UnitCellGeometry::disk(0.25),
        PhaseCoefficients::default(),
        &Loading::default(),
    )
    .expect("valid epsilon")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_consistent() {
        let mesh = disk_cell(8);
        assert_eq!(scalar_operator(&mesh).dim(), 81);
        assert_eq!(dirichlet_system(&mesh).op.dim(), 49);
        assert_eq!(dns_problem(4).fine_cells(), 32);
    }
}
