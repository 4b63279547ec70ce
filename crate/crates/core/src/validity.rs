//! The decoherence-diffusion trade-off and the timescale window over which
//! mean-field dynamics can stand in for the exact open dynamics.
//!
//! The window is bounded below by τ > χ·γ_C/(λ²⟨Â⟩²) (noise invisible against
//! the mean force) and above by τ < (1/χ)·γ_Q⁻¹/Var(Â) (shorter than the
//! decoherence time). The asymptotic "≫" of both bounds is replaced by the
//! separation factor χ, reported alongside every result.

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::qmat::{expectation, QubitDensity};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Tradeoff {
    pub holds: bool,
    /// γ_C·γ_Q − λ²/16.
    pub margin: f64,
}

/// γ_C·γ_Q ≥ λ²/16, with equality counting as holding.
pub fn check_tradeoff(params: &ModelParams) -> Tradeoff {
    let margin = params.gamma_c * params.gamma_q - params.lambda * params.lambda / 16.0;
    Tradeoff {
        holds: margin >= 0.0,
        margin,
    }
}

/// The inequality chain ⟨Â⟩² ≫ γ_C/(λ²τ) ≥ 1/(16γ_Qτ) ≫ Var(Â) evaluated at a probe τ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InequalityChain {
    pub tau: f64,
    pub mean_a_sq: f64,
    pub noise_term: f64,
    #[serde(serialize_with = "ser_extended")]
    pub decoherence_term: f64,
    pub variance_a: f64,
    pub state_dominates_noise: bool,
    pub noise_dominates_decoherence: bool,
    pub decoherence_dominates_variance: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ValidityReport {
    pub tradeoff_holds: bool,
    pub tradeoff_margin: f64,
    pub mean_a: f64,
    pub mean_a_sq: f64,
    pub variance_a: f64,
    /// None when ⟨Â⟩ = 0: no timescale makes the noise negligible.
    pub tau_lower: Option<f64>,
    #[serde(serialize_with = "ser_extended")]
    pub tau_upper: f64,
    pub window_nonempty: bool,
    pub separation_factor_used: f64,
    /// λ = 0: no back-reaction, mean-field is exact at all times.
    pub no_backreaction: bool,
    /// Probe time: midpoint of the two bounds, or 2·tau_lower if the upper one is infinite.
    pub probe_time: Option<f64>,
    pub chain: Option<InequalityChain>,
}

fn ser_extended<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if x.is_infinite() {
        s.serialize_str(if *x > 0.0 { "inf" } else { "-inf" })
    } else {
        s.serialize_f64(*x)
    }
}

pub const DEFAULT_SEPARATION: f64 = 10.0;

pub fn timescale_window(params: &ModelParams, rho: &QubitDensity, chi: f64) -> Result<ValidityReport> {
    if !(chi > 1.0 && chi.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "separation factor chi = {chi} must exceed 1"
        )));
    }
    let trade = check_tradeoff(params);
    let mean_a = expectation(&params.a_op, rho);
    let mean_a_sq = mean_a * mean_a;
    let second = (params.a_op.square() * *rho.matrix()).trace().re;
    let variance_a = (second - mean_a_sq).max(0.0);

    let base = ValidityReport {
        tradeoff_holds: trade.holds,
        tradeoff_margin: trade.margin,
        mean_a,
        mean_a_sq,
        variance_a,
        tau_lower: None,
        tau_upper: f64::INFINITY,
        window_nonempty: false,
        separation_factor_used: chi,
        no_backreaction: false,
        probe_time: None,
        chain: None,
    };

    if params.lambda == 0.0 {
        return Ok(ValidityReport {
            tau_lower: Some(0.0),
            window_nonempty: true,
            no_backreaction: true,
            ..base
        });
    }

    let lambda_sq = params.lambda * params.lambda;
    let tau_upper = if variance_a == 0.0 || params.gamma_q == 0.0 {
        f64::INFINITY
    } else {
        1.0 / (chi * params.gamma_q * variance_a)
    };
    let tau_lower = (mean_a_sq > 0.0).then(|| chi * params.gamma_c / (lambda_sq * mean_a_sq));
    let window_nonempty = tau_lower.is_some_and(|lo| tau_upper > lo);
    let probe_time = tau_lower.map(|lo| {
        if tau_upper.is_finite() {
            0.5 * (lo + tau_upper)
        } else if lo > 0.0 {
            2.0 * lo
        } else {
            1.0
        }
    });
    let chain = probe_time.map(|tau| {
        let noise_term = params.gamma_c / (lambda_sq * tau);
        let decoherence_term = if params.gamma_q > 0.0 {
            1.0 / (16.0 * params.gamma_q * tau)
        } else {
            f64::INFINITY
        };
        InequalityChain {
            tau,
            mean_a_sq,
            noise_term,
            decoherence_term,
            variance_a,
            state_dominates_noise: mean_a_sq >= chi * noise_term,
            noise_dominates_decoherence: noise_term >= decoherence_term,
            decoherence_dominates_variance: decoherence_term >= chi * variance_a,
        }
    });

    Ok(ValidityReport {
        tau_lower,
        tau_upper,
        window_nonempty,
        probe_time,
        chain,
        ..base
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub theta: f64,
    pub mean_a: f64,
    pub variance_a: f64,
    pub tau_lower: Option<f64>,
    #[serde(serialize_with = "ser_extended")]
    pub tau_upper: f64,
    /// tau_upper − tau_lower (+inf for an eigenstate, None when tau_lower is undefined).
    pub width: Option<f64>,
    pub window_nonempty: bool,
}

/// The window for every pure state cos(θ/2)|0⟩ + sin(θ/2)|1⟩.
pub fn window_sweep(params: &ModelParams, angles: &[f64], chi: f64) -> Result<Vec<SweepRow>> {
    angles
        .iter()
        .map(|&theta| {
            if !(0.0..=std::f64::consts::PI).contains(&theta) {
                return Err(Error::InvalidArgument(format!("angle {theta} outside [0, π]")));
            }
            let rho = QubitDensity::bloch_angles(theta, 0.0)?;
            let r = timescale_window(params, &rho, chi)?;
            Ok(SweepRow {
                theta,
                mean_a: r.mean_a,
                variance_a: r.variance_a,
                tau_lower: r.tau_lower,
                tau_upper: r.tau_upper,
                width: r.tau_lower.map(|lo| r.tau_upper - lo),
                window_nonempty: r.window_nonempty,
            })
        })
        .collect()
}
