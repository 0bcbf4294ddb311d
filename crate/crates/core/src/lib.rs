//! Semantic numeration systems as discrete dynamical systems.
//!
//! A cardinal abstract object (CAO) is a set of entities, each holding a
//! non-negative cardinal, wired together by L, D, F and M operators. One step
//! of the transformation fires every operator against the same snapshot:
//! each input gives up whole multiples of its radix, and every output
//! receives the common carry times its conversion coefficient.
//!
//! Two engines advance the state. [`matrix`] evaluates the state equation
//! `#(k+1) = #(k) + (Rᵀ − N)·Λ[N⁻ #(k)]` with exact integer and rational
//! arithmetic; [`operational`] executes the operator procedures directly.
//! [`simulator`] runs either (or both, cross-checked) to a fixed point.

pub mod dsl;
pub mod fuzz;
pub mod linalg;
pub mod matrix;
pub mod model;
pub mod operational;
pub mod presets;
pub mod simulator;
pub mod state;

pub use matrix::{derive, DerivedOperators, EngineError, ParameterSchedule, Transition};
pub use model::{validate, CaoSpec, ConfigurationMatrix, Multinumber, OperatorForm, RawCao, ValidateOptions};
pub use simulator::{run, CstTrace, Engine, RunConfig, SimError, Termination};
pub use state::{CarryVector, StateVector};
