//! Periodic homogenization of dielectric elastomer composites whose
//! inclusions are much stiffer than the surrounding matrix.
//!
//! The crate covers the whole pipeline on structured Q1 grids: unit-cell
//! corrector problems, effective tensors, the homogenized macroscopic
//! problem, direct fine-scale simulation at a given period, and a
//! verification layer comparing the two across a ladder of periods.

pub mod cell;
pub mod dns;
pub mod error;
pub mod fem;
pub mod io;
pub mod loading;
pub mod macro_solver;
pub mod mesh;
pub mod selftest;
pub mod tensor;
pub mod tensors;
pub mod verification;

pub use cell::{CorrectorSet, PhaseCoefficients};
pub use dns::{solve_dns, DnsProblem, DnsSolution};
pub use error::{Error, Result};
pub use fem::{FeField, SolverConfig, SolverMethod};
pub use io::{parse_config, run, Command, RunConfig, RunOutcome, REPORT_FORMAT};
pub use loading::{Loading, ScalarFunction, VectorFunction};
pub use macro_solver::{solve_macro, MacroProblem, MacroSolution};
pub use mesh::{build_macro_mesh, build_unit_cell_mesh, Phase, PhaseMap, StructuredMesh, UnitCellGeometry};
pub use selftest::CriterionOutcome;
pub use tensor::{Electrostriction, Lame, Voigt4};
pub use tensors::{CHomMode, EffectiveTensors, TensorDomain};
pub use verification::{run_convergence_study, ConvergenceReport, StudyConfig};
