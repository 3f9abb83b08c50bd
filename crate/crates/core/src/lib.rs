//! Boundary-feedback stabilization toolkit for the linear
//! Vlasov-Fokker-Planck equation.
//!
//! The crate evolves the weighted kinetic unknown h = f/sqrt(M) on
//! [0,1] x [-V, V] under feedback boundary matrices, tracks the Lyapunov
//! energy and boundary functionals, checks the stabilization conditions on
//! the feedback matrix and the electric field, verifies the exponential
//! decay envelope, and compares kinetic runs against the drift-diffusion
//! limit across Knudsen numbers.
//!
//! Module map:
//! - [`grid`]: phase-space discretization, Maxwellian weight, norms
//! - [`operators`]: collision operator, equilibrium projection, moments
//! - [`boundary`]: feedback traces, boundary functionals, matrix constraints
//! - [`stability`]: field validation, admissible coupling interval, decay rate
//! - [`solver`]: IMEX integration of the kinetic equation
//! - [`macroscopic`]: finite-volume drift-diffusion reference solver
//! - [`analysis`]: decay fits, envelope checks, Knudsen sweeps
//! - [`config`], [`report`], [`cli`]: file formats and the command line

pub mod analysis;
pub mod boundary;
pub mod cli;
pub mod config;
pub mod error;
pub mod grid;
pub mod macroscopic;
pub mod operators;
pub mod report;
pub mod solver;
pub mod stability;

pub use boundary::FeedbackMatrix;
pub use error::{Error, Result};
pub use grid::{build_grid, maxwellian, norms, PhaseGrid, WeightedNormReport};
pub use operators::{moments, project_pi, DistributionState, MacroState};
pub use solver::{run, EnergyRecord, RunResult, SimConfig};
pub use stability::{compute_xi, decay_envelope, FieldSpec, StabilityConstants};
