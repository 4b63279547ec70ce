//! Embedded named configurations.

pub const NAMES: [&str; 3] = ["fig1", "negativity-demo", "page-geilker"];

/// Measurement-type collapse of |+⟩ at the trade-off boundary, with λ < 0 so
/// that |0⟩ is pushed towards positive momentum.
const FIG1: &str = r#"
[model]
lambda = -1.0
gamma_c = 0.25
gamma_q = 0.25
q = 0.0
observable = "sigma_z"

[grid]
p_min = -40.0
p_max = 40.0
n = 2048

[initial]
state = "plus"
p_dist = "delta"
p0 = 0.0

[sde]
dt = 1e-3
t_final = 10.0
record_stride = 100
n_traj = 4000
seed = 1
born_threshold = 0.99
positivity_abort_threshold = -1e-2

[output]
snapshots = 6
series_points = 51
trajectories = 16
reconstruct_n = 128
"#;

/// Closed dynamics of |+⟩ ⊗ N(0, 1): the field loses positivity immediately.
const NEGATIVITY_DEMO: &str = r#"
[model]
lambda = 1.0
gamma_c = 0.0
gamma_q = 0.0
q = 0.0
observable = "sigma_z"

[initial]
state = "plus"
p_dist = "gaussian"
p0 = 0.0
sigma = 1.0

[sde]
t_final = 3.0
seed = 2

[output]
snapshots = 4
series_points = 61
"#;

/// Strong qubit dephasing with the smallest momentum diffusion the trade-off
/// allows, acting on an incoherent mixture of Â eigenstates.
const PAGE_GEILKER: &str = r#"
[model]
lambda = 1.0
gamma_c = 6.25e-4
gamma_q = 100.0
q = 0.0
observable = "sigma_z"

[initial]
state = "mixed"
p_dist = "gaussian"
p0 = 0.0
sigma = 1.0

[sde]
dt = 1e-5
t_final = 0.1
record_stride = 1000
n_traj = 500
seed = 3
born_threshold = 0.99

[output]
snapshots = 3
series_points = 11
trajectories = 4
"#;

pub fn get(name: &str) -> Option<&'static str> {
    match name {
        "fig1" => Some(FIG1),
        "negativity-demo" => Some(NEGATIVITY_DEMO),
        "page-geilker" => Some(PAGE_GEILKER),
        _ => None,
    }
}
