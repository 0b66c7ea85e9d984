//! Shared fixtures for the benchmarks.

use thzlab::{FptOptions, MobilityParams, Model, SystemConfig};

/// The reference link: 10 m, 100×100 AP, 20×20 UE, `Δx = 0.1 m`, `Δφ = 3°`.
pub fn reference_model(options: FptOptions) -> Model {
    Model::new(
        SystemConfig::default(),
        MobilityParams::symmetric(0.1, 3.0),
        options,
    )
}
