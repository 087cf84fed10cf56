//! Biased zeroth-order optimization of variational quantum circuits.
//!
//! The crate is organized bottom-up:
//!
//! * [`sim`] dense density-matrix simulation with parameterized gates and
//!   Kraus channels (little-endian qubit order: qubit 0 is the least
//!   significant bit of a basis index).
//! * [`noise`] read-out assignment matrices, finite-shot sampling and
//!   mixture-model bias estimation.
//! * [`objective`] the QAOA MAX-CUT circuit and the noisy objective
//!   `F(θ, ξ)` alongside its ideal counterpart `f(θ)`.
//! * [`optim`] SPSA, two-point Gaussian smoothing and parameter-shift
//!   gradient estimators plus the stochastic-approximation loop.
//! * [`bounds`] closed-form convergence bounds and the empirical constants
//!   (bias, Lipschitz modulus, variance, objective gap) that feed them.

pub mod bounds;
mod error;
pub mod linalg;
pub mod noise;
pub mod objective;
pub mod optim;
pub mod seed;
pub mod sim;
mod tolerance;

pub use error::{Error, Result};
pub use tolerance::Tolerances;

pub use bounds::{BoundParams, BoundValue, Regime};
pub use noise::{MixtureFit, ReadoutModel};
pub use objective::{Graph, NoiseConfig, NoisyObjective, Observable, Shots};
pub use optim::{GradEstimator, Objective, PerturbationDist, StepSchedule, Trajectory};
pub use sim::{DensityMatrix, Gate, GateKind, KrausChannel, ParamCircuit, StateVector};
