//! Constraint-aware graph shrinking for penalized QUBO problems.
//!
//! A constrained problem (multidimensional knapsack, maximum independent
//! set or quadratic assignment) is written as a penalized QUBO, reduced to
//! weighted Max-Cut, and shrunk by merging strongly correlated nodes, with
//! correlations taken from a low-rank SDP relaxation. The small residual
//! problem is solved, lifted back through the merge log, and repaired to
//! feasibility.

pub mod error;
pub mod exec;
pub mod feasibility;
pub mod instances;
pub mod maxcut;
pub mod pipeline;
pub mod qubo;
pub mod reconstruct;
pub mod rng;
pub mod sdp;
pub mod shrink;
pub mod solvers;
pub mod spectral;

pub use error::{Error, Result};
pub use exec::Execution;
pub use instances::{MdkpInstance, MisInstance, ProblemInstance, ProblemKind, QapInstance};
pub use maxcut::{MaxCutGraph, SpinAssignment};
pub use pipeline::{run_pipeline, PipelineConfig, Report, Strategy};
pub use qubo::{evaluate_qubo, QuboModel, VarSemantics};
pub use shrink::{run_shrink, ShrinkConfig, ShrinkResult};
pub use solvers::{QuboSolver, Solution, SolverConfig};
