//! Exact propagation of the closed partial-Wigner equation
//!
//! ```text
//! ∂ϱ/∂t = −(i/ħ)[λqÂ, ϱ] + (λ/2){Â, ∂ϱ/∂p}
//! ```
//!
//! and the negativity witness showing that it does not preserve positivity.
//!
//! In the eigenbasis of Â the component ϱ_ab obeys a scalar transport equation
//! with Fourier symbol `−iλq(a − b)/ħ + iuλ(a + b)/2`, so each mode is advanced
//! by a single exponential. This module is kept separate from [`crate::master`]
//! so the two can be cross-checked at zero dissipation.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{check_boundary_guard, product_field, InitialCondition, ModelParams, MomentumGrid, WignerField};
use crate::qmat::{tol, C64};
use crate::spectral::{self, SpectralPlan, Symbols};

pub struct ClosedPropagator {
    params: ModelParams,
    grid: MomentumGrid,
    symbols: Symbols,
    plan: SpectralPlan,
}

impl ClosedPropagator {
    pub fn new(params: &ModelParams, grid: &MomentumGrid) -> Self {
        let u = spectral::odd_wavenumbers(grid);
        let ev = params.a_op.eigenvalues();
        let phase = params.lambda * params.q / params.hbar;
        let symbols: Symbols = std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                let (a, b) = (ev[i], ev[j]);
                u.iter()
                    .map(|&u| C64::new(0.0, -phase * (a - b) + 0.5 * u * params.lambda * (a + b)))
                    .collect()
            })
        });
        Self {
            params: params.clone(),
            grid: grid.clone(),
            symbols,
            plan: SpectralPlan::new(grid.len()),
        }
    }

    /// Fourier symbols `[a][b][k]`.
    pub fn symbols(&self) -> &Symbols {
        &self.symbols
    }

    pub fn propagate(&self, field: &WignerField, t: f64) -> Result<WignerField> {
        if field.grid() != &self.grid {
            return Err(Error::InvalidArgument("field grid differs from propagator grid".into()));
        }
        let integral = field.normalization();
        if (integral - 1.0).abs() > tol::FIELD_NORM {
            return Err(Error::NotNormalized { integral });
        }
        check_boundary_guard(field, &self.params, t)?;
        if t == 0.0 {
            return Ok(field.clone());
        }
        let a = &self.params.a_op;
        let mut comps = spectral::split_components(field, a);
        spectral::apply_symbols(&self.plan, &mut comps, &self.symbols, t);
        let values = spectral::join_components(&comps, a)
            .into_iter()
            .map(|v| v.hermitian_part())
            .collect();
        let out = WignerField::from_values_unchecked(self.grid.clone(), values, field.q())?;
        out.check_invariants()
            .map_err(|e| Error::Invariant(format!("closed propagation: {e}")))?;
        Ok(out)
    }
}

/// Evolves `field` for time `t` under the closed dynamics (γ_C and γ_Q ignored).
pub fn propagate_closed(field: &WignerField, params: &ModelParams, t: f64) -> Result<WignerField> {
    ClosedPropagator::new(params, field.grid()).propagate(field, t)
}

/// One point of the negativity witness series.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NegativityPoint {
    pub t: f64,
    pub min_eigenvalue: f64,
    pub p_at: f64,
}

/// Minimum field eigenvalue along the closed evolution of a positive product state.
pub fn negativity_onset(
    init: &InitialCondition,
    params: &ModelParams,
    grid: &MomentumGrid,
    times: &[f64],
) -> Result<Vec<NegativityPoint>> {
    let field0 = product_field(&init.for_spectral(grid), grid, params.q)?;
    let (lo, _) = field0.min_eigenvalue();
    if lo < -tol::PSD_SLACK {
        return Err(Error::InvalidArgument(format!(
            "initial product state is not positive (min eigenvalue {lo:.3e})"
        )));
    }
    let prop = ClosedPropagator::new(params, grid);
    times
        .iter()
        .map(|&t| {
            let f = prop.propagate(&field0, t)?;
            let (min_eigenvalue, p_at) = f.min_eigenvalue();
            Ok(NegativityPoint {
                t,
                min_eigenvalue,
                p_at,
            })
        })
        .collect()
}
