//! Closed-form fields for an observable with eigenvalues ±1.
//!
//! In the eigenbasis of Â the populations are rigidly transported along
//! p ↦ p + λat while the coherence stays centred and only picks up a phase:
//!
//! ```text
//! ϱ_aa(p, t) = ρ_aa(0) · G_t(p + λat)
//! ϱ_01(p, t) = ρ_01(0) · G_t(p) · exp(−2iλqt/ħ − 4γ_Q t)
//! ```
//!
//! where G_t is the normal density of variance σ² + 2γ_C t. For any other
//! ±1 observable the answer is rotated back with the eigenbasis unitary.
//! Nothing here calls a solver.

use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::model::{gaussian_density, InitialCondition, ModelParams, MomentumGrid, PDist, WignerField};
use crate::qmat::{ComplexMat2, C64};

const PM_ONE_TOL: f64 = 1e-12;

fn require_pm_one(params: &ModelParams) -> Result<()> {
    let [a0, a1] = params.a_op.eigenvalues();
    if (a0 - 1.0).abs() > PM_ONE_TOL || (a1 + 1.0).abs() > PM_ONE_TOL {
        return Err(Error::UnsupportedObservable(format!(
            "oracles need eigenvalues (+1, −1), got ({a0}, {a1})"
        )));
    }
    Ok(())
}

fn require_gaussian(init: &InitialCondition) -> Result<(f64, f64)> {
    match init.p_dist {
        PDist::Gaussian { p0, sigma } => Ok((p0, sigma)),
        PDist::Delta { .. } => Err(Error::InvalidArgument(
            "field oracles need a gaussian momentum distribution".into(),
        )),
    }
}

/// Field value at (p, t) of the open dynamics. Reduces to the closed one when
/// γ_C = γ_Q = 0.
pub fn open_solution(p: f64, t: f64, init: &InitialCondition, params: &ModelParams) -> Result<ComplexMat2> {
    require_pm_one(params)?;
    let (p0, sigma) = require_gaussian(init)?;
    if t < 0.0 {
        return Err(Error::InvalidArgument(format!("negative time {t}")));
    }
    let var = sigma * sigma + 2.0 * params.gamma_c * t;
    let r = params.a_op.to_eigenbasis(init.rho0.matrix());
    let lt = params.lambda * t;
    let g_up = gaussian_density(p + lt, p0, var);
    let g_dn = gaussian_density(p - lt, p0, var);
    let g0 = gaussian_density(p, p0, var);
    let decay = (-4.0 * params.gamma_q * t).exp();
    let phase = C64::from_polar(decay, -2.0 * params.lambda * params.q * t / params.hbar);
    let c = r.m[0][1] * phase * g0;
    let eig = ComplexMat2::new(r.m[0][0] * g_up, c, c.conj(), r.m[1][1] * g_dn);
    Ok(params.a_op.from_eigenbasis(&eig))
}

/// Field value at (p, t) of the closed dynamics.
pub fn closed_solution(p: f64, t: f64, init: &InitialCondition, params: &ModelParams) -> Result<ComplexMat2> {
    open_solution(p, t, init, &params.without_dissipation())
}

/// Samples [`open_solution`] on every grid point.
pub fn open_field(grid: &MomentumGrid, t: f64, init: &InitialCondition, params: &ModelParams) -> Result<WignerField> {
    let values = grid
        .points()
        .map(|p| open_solution(p, t, init, params))
        .collect::<Result<Vec<_>>>()?;
    WignerField::from_values_unchecked(grid.clone(), values, params.q)
}

/// Determinant of the closed field, G(p)²·(ρ00·ρ11·exp(−λ²t²/σ²) − |ρ01|²).
/// For a pure initial state this is negative at every p once t > 0.
pub fn closed_determinant(p: f64, t: f64, init: &InitialCondition, params: &ModelParams) -> Result<f64> {
    require_pm_one(params)?;
    let (p0, sigma) = require_gaussian(init)?;
    let r = params.a_op.to_eigenbasis(init.rho0.matrix());
    let g0 = gaussian_density(p, p0, sigma * sigma);
    let lt = params.lambda * t;
    let pops = r.m[0][0].re * r.m[1][1].re;
    let e = (-(lt * lt) / (sigma * sigma)).exp();
    Ok(g0 * g0 * (pops * e - r.m[0][1].norm_sqr()))
}

/// Momentum density of an eigenstate run with ⟨Â⟩ frozen at `a`:
/// N(p0 − λat, σ0² + 2γ_C t). A delta start at t = 0 or with γ_C = 0 has no
/// density and returns +∞ on the atom and 0 elsewhere.
pub fn drift_diffusion_marginal(p: f64, t: f64, a: f64, init: &InitialCondition, params: &ModelParams) -> f64 {
    let mean = init.p_dist.mean() - params.lambda * a * t;
    let var = init.p_dist.variance() + 2.0 * params.gamma_c * t;
    if var == 0.0 {
        return if p == mean { f64::INFINITY } else { 0.0 };
    }
    gaussian_density(p, mean, var)
}

/// Probability mass in each grid cell [p_j − dp/2, p_j + dp/2] under the
/// drift-diffusion law. A zero-variance law puts all its mass in one cell.
pub fn drift_diffusion_bin_masses(
    grid: &MomentumGrid,
    t: f64,
    a: f64,
    init: &InitialCondition,
    params: &ModelParams,
) -> Vec<f64> {
    let mean = init.p_dist.mean() - params.lambda * a * t;
    let var = init.p_dist.variance() + 2.0 * params.gamma_c * t;
    let mut out = vec![0.0; grid.len()];
    if var == 0.0 {
        if let Some(j) = grid.bin_index(mean) {
            out[j] = 1.0;
        }
        return out;
    }
    let normal = Normal::new(mean, var.sqrt()).expect("positive variance");
    let h = 0.5 * grid.dp();
    for (j, p) in grid.points().enumerate() {
        out[j] = normal.cdf(p + h) - normal.cdf(p - h);
    }
    out
}
