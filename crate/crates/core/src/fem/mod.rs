//! Q1 finite elements on uniform square grids: quadrature, assembly,
//! constraint elimination, sparse storage and linear solvers.

pub mod assembly;
pub mod constraints;
pub mod element;
pub mod field;
pub mod quadrature;
pub mod solver;
pub mod sparse;

pub use assembly::{
    assemble_elasticity_operator, assemble_elasticity_voigt, assemble_scalar_operator, body_force_load, flux_load,
    for_each_point, scalar_source_load, stress_load,
};
pub use constraints::{
    apply_constraints, build_layout, reduce_rhs, reduce_with, ConstraintSpec, DofLayout, ReducedSystem,
};
pub use element::{ElementPoint, Q1Element};
pub use field::FeField;
pub use solver::{solve, PreparedSolver, SolverConfig, SolverMethod};
pub use sparse::{CsrMatrix, TripletBuilder};
