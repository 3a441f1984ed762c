//! Source-alignment criteria for package upgrade problems over CUDF
//! universes: measures, MILP / pseudo-Boolean / MaxSAT encodings, and a
//! small exact solver.

pub mod cli;
pub mod criteria;
pub mod criteria_spec;
pub mod cudf;
pub mod formats;
pub mod gen;
pub mod milp;
pub mod sat;
pub mod solver;

pub use criteria::{measure_all, ClusterRestriction, CriterionKind, MeasureReport};
pub use criteria_spec::{parse_criteria, Criterion, CriterionSpec, Sign, SpecError};
pub use cudf::{
    build_cluster_index, parse_cudf, reduced_sources, Installation, PackageUnit, PkgId, Request,
    SourceClusterIndex, Universe,
};
pub use milp::{assemble, encode_base, EncodeError, LinearProgram};
pub use solver::{
    brute_force, solve_lex, solve_single, verify, SolveBudget, SolveResult, SolveStatus,
};
