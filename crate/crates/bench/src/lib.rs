//! Fixtures shared by the benchmarks.

use vqa_core::objective::qaoa_circuit;
use vqa_core::{Graph, NoiseConfig, NoisyObjective, Observable, ReadoutModel, Shots};

/// QAOA MAX-CUT on the 4-cycle.
pub fn qaoa(layers: usize, noise: NoiseConfig, shots: Shots) -> NoisyObjective {
    let g = Graph::cycle(4).expect("4-cycle");
    NoisyObjective::new(
        qaoa_circuit(&g, layers).expect("circuit"),
        Observable::maxcut(&g).expect("observable"),
        noise,
        shots,
        1,
    )
    .expect("objective")
}

/// Gate noise plus the reference random read-out.
pub fn full_noise() -> NoiseConfig {
    NoiseConfig {
        readout: Some(ReadoutModel::reference_random()),
        ..NoiseConfig::gate_defaults()
    }
}
