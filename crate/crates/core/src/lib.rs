//! Periodic steady states and particle currents of a single-site fermionic
//! junction coupled to two thermal leads and driven by pair-conversion fields.

pub mod bath;
pub mod floquet;
pub mod linalg;
pub mod liouvillian;
pub mod model;
pub mod observables;
pub mod solvers;
pub mod problem;

pub use problem::{JunctionSetup, PreparedJunction, SolveOptions, Solved};
pub use solvers::{DegeneracyPolicy, KmaxPolicy, Method};

/// Any failure between parameters and currents.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Model(#[from] model::ModelError),
    #[error(transparent)]
    Floquet(#[from] floquet::FloquetError),
    #[error(transparent)]
    Bath(#[from] bath::BathError),
    #[error(transparent)]
    Liouvillian(#[from] liouvillian::LiouvillianError),
    #[error(transparent)]
    Solver(#[from] solvers::SolverError),
    #[error(transparent)]
    Observable(#[from] observables::ObservableError),
    #[error("{0}")]
    InvalidInput(String),
}
