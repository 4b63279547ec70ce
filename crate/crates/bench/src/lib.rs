//! Shared workloads for the solver benchmarks.

use cqsim_core::{InitialCondition, ModelParams, MomentumGrid, Observable, QubitDensity, SdeConfig, WignerField};

/// Saturating parameters with σ_z coupling, λ = 1 and γ_C = γ_Q = 1/4.
pub fn saturation() -> ModelParams {
    ModelParams::new(1.0, 0.25, 0.25, 0.0, Observable::sigma_z()).expect("valid parameters")
}

pub fn plus_gaussian() -> InitialCondition {
    InitialCondition::gaussian(QubitDensity::plus(), 0.0, 1.0).expect("valid initial condition")
}

pub fn grid(n: usize) -> MomentumGrid {
    MomentumGrid::new(-20.0, 20.0, n).expect("valid grid")
}

pub fn initial_field(n: usize) -> WignerField {
    cqsim_core::product_field(&plus_gaussian(), &grid(n), 0.0).expect("product field")
}

pub fn sde_config(t_final: f64) -> SdeConfig {
    SdeConfig {
        dt: 1e-3,
        t_final,
        record_stride: 100,
        ..SdeConfig::default()
    }
}
