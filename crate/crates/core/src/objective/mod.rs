//! The QAOA MAX-CUT objective and its noisy evaluation.

mod graph;
mod noisy;
mod observable;
mod qaoa;

pub use graph::Graph;
pub use noisy::{NoiseConfig, NoisyObjective, Shots};
pub use observable::{expectation, Observable};
pub use qaoa::{bell_circuit, qaoa_circuit};
