//! Benchmark fixtures shared by the criterion benches.

use pulsedose_core::design::design_modulation;
use pulsedose_core::{CycleTarget, ModulationConfig, PlantParams, SaturationBounds, SlopePair};

/// The reference 1-cycle: 200 μg/kg every 20 min.
pub fn reference_target() -> CycleTarget {
    CycleTarget::new(20.0, 200.0).expect("valid target")
}

/// The rate-optimal joint design for the population-mean patient.
pub fn case_two_config() -> ModulationConfig {
    let slopes = SlopePair::new(-2.0, 0.7).expect("admissible slopes");
    design_modulation(
        &PlantParams::population_mean(),
        &reference_target(),
        &slopes,
        &SaturationBounds::default(),
    )
    .expect("stable design")
    .config
}
