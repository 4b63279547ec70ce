//! Hybrid classical-quantum dynamics of a qubit coupled linearly to the
//! momentum of a heavy particle through H = λ q̂ ⊗ Â.
//!
//! The crate provides three views of the same model:
//!
//! * exact propagation of the partial-Wigner field, closed ([`closed`]) and
//!   with the two dephasing channels ([`master`]);
//! * deterministic mean-field semi-classics ([`meanfield`]);
//! * a stochastic unravelling into classical-quantum trajectories ([`unravel`]).
//!
//! [`oracle`] holds closed-form solutions used to check all of them, and
//! [`validity`] evaluates when mean-field is an acceptable shortcut.
//!
//! ```
//! use cqsim_core::{check_tradeoff, ModelParams, Observable};
//!
//! let params = ModelParams::new(1.0, 0.25, 0.25, 0.0, Observable::sigma_z()).unwrap();
//! let t = check_tradeoff(&params);
//! assert!(t.holds && t.margin == 0.0);
//! ```

pub mod closed;
pub mod error;
pub mod io;
pub mod master;
pub mod meanfield;
pub mod model;
pub mod oracle;
pub mod qmat;
pub mod spectral;
pub mod unravel;
pub mod validity;

pub use closed::{negativity_onset, propagate_closed, ClosedPropagator, NegativityPoint};
pub use error::{Error, Result};
pub use master::{evolve_qubit_marginal, positivity_scan, propagate_open, OpenPropagator, PositivityPoint};
pub use meanfield::{run_meanfield, step_meanfield, MeanFieldState};
pub use model::{product_field, InitialCondition, ModelParams, MomentumGrid, PDist, TrajectoryState, WignerField};
pub use qmat::{expectation, min_eigenvalue, purity, trace_distance, ComplexMat2, Observable, QubitDensity, C64};
pub use unravel::{
    born_statistics, reconstruct_field, run_ensemble, run_trajectory, step_sde, BornStatistics, EnsembleResult,
    EnsembleSpec, SdeConfig, Unraveling,
};
pub use validity::{check_tradeoff, timescale_window, window_sweep, Tradeoff, ValidityReport};
