//! Standard mean-field semi-classics: the particle feels the average force
//! −λ⟨Â⟩ while the qubit evolves unitarily under λqÂ.

use crate::error::{Error, Result};
use crate::model::{InitialCondition, ModelParams};
use crate::qmat::{expectation, QubitDensity};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeanFieldState {
    pub t: f64,
    pub p: f64,
    pub rho: QubitDensity,
}

/// One explicit step. ⟨Â⟩ is taken from the pre-step state; the qubit update is
/// the exact unitary exp(−iλqÂ·dt/ħ).
pub fn step_meanfield(state: &MeanFieldState, params: &ModelParams, dt: f64) -> MeanFieldState {
    let force = -params.lambda * expectation(&params.a_op, &state.rho);
    let u = params.a_op.exp_i(params.lambda * params.q * dt / params.hbar);
    let rho = (u * *state.rho.matrix() * u.adjoint()).hermitian_part();
    MeanFieldState {
        t: state.t + dt,
        p: state.p + force * dt,
        rho: QubitDensity::from_matrix_unchecked(rho),
    }
}

/// Runs from the mean of the initial momentum distribution. Returns the state at
/// every step, starting with t = 0.
pub fn run_meanfield(
    init: &InitialCondition,
    params: &ModelParams,
    t_final: f64,
    dt: f64,
) -> Result<Vec<MeanFieldState>> {
    if !(t_final > 0.0 && dt > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need t_final > 0 and dt > 0 (got {t_final}, {dt})"
        )));
    }
    let steps = ((t_final / dt).round() as usize).max(1);
    let mut out = Vec::with_capacity(steps + 1);
    let mut state = MeanFieldState {
        t: 0.0,
        p: init.p_dist.mean(),
        rho: init.rho0,
    };
    out.push(state);
    for k in 1..=steps {
        state = step_meanfield(&state, params, dt);
        // Keep the clock free of accumulated rounding.
        state.t = k as f64 * dt;
        out.push(state);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::{purity, ComplexMat2, Observable};

    fn params(lambda: f64, q: f64) -> ModelParams {
        ModelParams::new(lambda, 0.25, 0.25, q, Observable::sigma_z()).unwrap()
    }

    #[test]
    fn superposition_feels_no_force() {
        let init = InitialCondition::delta(QubitDensity::plus(), 0.4);
        let run = run_meanfield(&init, &params(1.0, 1.3), 50.0, 1e-2).unwrap();
        for s in &run {
            assert!((s.p - 0.4).abs() < 1e-10);
        }
    }

    #[test]
    fn eigenstate_drifts_linearly() {
        let init = InitialCondition::delta(QubitDensity::zero(), 0.0);
        let run = run_meanfield(&init, &params(1.0, 0.5), 3.0, 1e-3).unwrap();
        for s in &run {
            assert!((s.p + s.t).abs() < 1e-9);
        }
        let init = InitialCondition::delta(QubitDensity::one(), 0.2);
        let last = *run_meanfield(&init, &params(1.0, 0.5), 4.0, 1e-3)
            .unwrap()
            .last()
            .unwrap();
        assert!((last.t - 4.0).abs() < 1e-3);
        assert!((last.p - (0.2 + last.t)).abs() < 1e-9);
    }

    #[test]
    fn half_steps_compose() {
        let s0 = MeanFieldState {
            t: 0.0,
            p: 1.0,
            rho: QubitDensity::one(),
        };
        let p = params(0.7, 2.0);
        let full = step_meanfield(&s0, &p, 0.2);
        let half = step_meanfield(&step_meanfield(&s0, &p, 0.1), &p, 0.1);
        assert!((full.p - half.p).abs() < 1e-12);
        assert!((*full.rho.matrix() - *half.rho.matrix()).norm() < 1e-12);
    }

    #[test]
    fn purity_and_expectation_conserved() {
        let rho0 = QubitDensity::bloch_angles(0.7, 0.2).unwrap();
        let init = InitialCondition::gaussian(rho0, 0.0, 1.0).unwrap();
        let p = params(1.0, 1.7);
        let run = run_meanfield(&init, &p, 5.0, 1e-3).unwrap();
        let a0 = expectation(&p.a_op, &rho0);
        for s in &run {
            assert!((purity(&s.rho) - 1.0).abs() < 1e-10);
            assert!((expectation(&p.a_op, &s.rho) - a0).abs() < 1e-10);
            assert!((s.p - (0.0 - a0 * s.t)).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_position_freezes_qubit() {
        let init = InitialCondition::delta(QubitDensity::plus(), 0.0);
        let run = run_meanfield(&init, &params(1.0, 0.0), 1.0, 1e-2).unwrap();
        let m0: ComplexMat2 = *run[0].rho.matrix();
        assert!(run.iter().all(|s| (*s.rho.matrix() - m0).norm() < 1e-14));
    }

    #[test]
    fn rejects_bad_horizon() {
        let init = InitialCondition::delta(QubitDensity::plus(), 0.0);
        assert!(run_meanfield(&init, &params(1.0, 0.0), 0.0, 1e-2).is_err());
        assert!(run_meanfield(&init, &params(1.0, 0.0), 1.0, -1e-2).is_err());
    }
}
