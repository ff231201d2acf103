//! Delay-induced Hopf bifurcation analysis of a two-information interaction
//! model with a discrete delay and an exponentially distributed memory.
//!
//! The pipeline runs bottom-up:
//!
//! - [`model`]: parameters, equilibria and right-hand sides,
//! - [`stability`]: characteristic equation at `E*`, critical delays,
//! - [`normal_form`]: multiple-scales amplitude equation and bifurcation direction,
//! - [`integrator`]: method-of-steps simulation and limit-cycle metrics.
//!
//! Everything is generic over [`Scalar`] (`f32` or `f64`); the `*F64` and
//! `*F32` aliases below fix the precision.

// `!(x < y)` is used on purpose so that NaN fails the check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cubic;
pub mod error;
pub mod integrator;
pub mod linalg;
pub mod model;
pub mod normal_form;
pub mod scalar;
pub mod stability;

pub use error::{Error, Result};
pub use integrator::{
    cycle_metrics, simulate, simulate_distributed, CycleClass, CycleMetrics, HistoryKind, HistorySpec, Trajectory,
    W0Policy,
};
pub use model::{
    distributed_w_oracle, equilibria, positive_equilibrium, reduced_rhs, Equilibrium, EquilibriumLabel, MemoryIntegral,
    ModelParams, Stability, State, UvSample,
};
pub use normal_form::{classify, Direction, Linearization, NormalForm};
pub use scalar::Scalar;
pub use stability::{
    char_coeffs, char_value, h1_holds, hopf_candidates, s0, transversality_sign, CharCoeffs, CriticalDelay, GCubic,
    HopfCandidate, TransversalitySign,
};

pub type ModelParamsF64 = ModelParams<f64>;
pub type ModelParamsF32 = ModelParams<f32>;
pub type StateF64 = State<f64>;
pub type StateF32 = State<f32>;
pub type EquilibriumF64 = Equilibrium<f64>;
pub type CharCoeffsF64 = CharCoeffs<f64>;
pub type HopfCandidateF64 = HopfCandidate<f64>;
pub type NormalFormF64 = NormalForm<f64>;
pub type NormalFormF32 = NormalForm<f32>;
pub type TrajectoryF64 = Trajectory<f64>;
pub type TrajectoryF32 = Trajectory<f32>;
pub type CycleMetricsF64 = CycleMetrics<f64>;
