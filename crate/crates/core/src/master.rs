//! Exact propagation of the open partial-Wigner master equation
//!
//! ```text
//! ∂ϱ/∂t = −(i/ħ)[λqÂ, ϱ] + (λ/2){Â, ∂ϱ/∂p} + γ_C ∂²ϱ/∂p² − γ_Q[Â, [Â, ϱ]]
//! ```
//!
//! This is the ground truth the other two descriptions are judged against.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{check_boundary_guard, product_field, InitialCondition, ModelParams, MomentumGrid, WignerField};
use crate::qmat::{tol, ComplexMat2, QubitDensity, C64};
use crate::spectral::{self, SpectralPlan, Symbols};

pub struct OpenPropagator {
    params: ModelParams,
    grid: MomentumGrid,
    symbols: Symbols,
    plan: SpectralPlan,
}

impl OpenPropagator {
    pub fn new(params: &ModelParams, grid: &MomentumGrid) -> Self {
        let u_odd = spectral::odd_wavenumbers(grid);
        let u = grid.wavenumbers();
        let ev = params.a_op.eigenvalues();
        let symbols: Symbols = std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                let (a, b) = (ev[i], ev[j]);
                u.iter()
                    .zip(&u_odd)
                    .map(|(&u, &uo)| open_symbol(params, a, b, u, uo))
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

    pub fn symbols(&self) -> &Symbols {
        &self.symbols
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn propagate(&self, field: &WignerField, t: f64) -> Result<WignerField> {
        if field.grid() != &self.grid {
            return Err(Error::InvalidArgument("field grid differs from propagator grid".into()));
        }
        let integral = field.normalization();
        if (integral - 1.0).abs() > tol::FIELD_NORM {
            return Err(Error::NotNormalized { integral });
        }
        if t < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "dissipative evolution runs forward only (t = {t})"
            )));
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
            .map_err(|e| Error::Invariant(format!("open propagation: {e}")))?;
        Ok(out)
    }
}

/// Fourier symbol of component (a, b) at wavenumber u. `u_odd` is the wavenumber
/// used in the first-derivative term (zero at the Nyquist mode).
fn open_symbol(params: &ModelParams, a: f64, b: f64, u: f64, u_odd: f64) -> C64 {
    let gap = a - b;
    C64::new(
        -params.gamma_c * u * u - params.gamma_q * gap * gap,
        -params.lambda * params.q * gap / params.hbar + 0.5 * u_odd * params.lambda * (a + b),
    )
}

/// Evolves `field` for time `t` under the open dynamics.
pub fn propagate_open(field: &WignerField, params: &ModelParams, t: f64) -> Result<WignerField> {
    OpenPropagator::new(params, field.grid()).propagate(field, t)
}

/// The momentum-integrated master equation, dρ/dt = −(i/ħ)[λqÂ, ρ] − γ_Q[Â, [Â, ρ]],
/// solved in the eigenbasis: ρ_ab(t) = ρ_ab(0)·exp(−iλq(a − b)t/ħ − γ_Q(a − b)²t).
///
/// The qubit marginal of [`propagate_open`] follows this law for any momentum
/// distribution, since the p-derivative terms integrate to zero.
pub fn evolve_qubit_marginal(rho0: &QubitDensity, params: &ModelParams, t: f64) -> QubitDensity {
    let a = &params.a_op;
    let ev = a.eigenvalues();
    let mut e = a.to_eigenbasis(rho0.matrix());
    let gap = ev[0] - ev[1];
    let factor = C64::new(
        -params.gamma_q * gap * gap,
        -params.lambda * params.q * gap / params.hbar,
    ) * t;
    e.m[0][1] *= factor.exp();
    e.m[1][0] = e.m[0][1].conj();
    let m: ComplexMat2 = a.from_eigenbasis(&e).hermitian_part();
    QubitDensity::from_matrix_unchecked(m)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PositivityPoint {
    pub t: f64,
    pub min_eigenvalue: f64,
    pub p_at: f64,
}

/// Minimum field eigenvalue along the open evolution of a positive product state.
pub fn positivity_scan(
    init: &InitialCondition,
    params: &ModelParams,
    grid: &MomentumGrid,
    times: &[f64],
) -> Result<Vec<PositivityPoint>> {
    let field0 = product_field(&init.for_spectral(grid), grid, params.q)?;
    let (lo, _) = field0.min_eigenvalue();
    if lo < -tol::PSD_SLACK {
        return Err(Error::InvalidArgument(format!(
            "initial product state is not positive (min eigenvalue {lo:.3e})"
        )));
    }
    let prop = OpenPropagator::new(params, grid);
    times
        .iter()
        .map(|&t| {
            let f = prop.propagate(&field0, t)?;
            let (min_eigenvalue, p_at) = f.min_eigenvalue();
            Ok(PositivityPoint {
                t,
                min_eigenvalue,
                p_at,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed::propagate_closed;
    use crate::model::gaussian_density;
    use crate::qmat::{anticommutator, commutator, purity, Observable};

    fn grid() -> MomentumGrid {
        MomentumGrid::default()
    }

    fn tilted_observable() -> Observable {
        let m = ComplexMat2::pauli_x() * 0.3 + ComplexMat2::pauli_z() * 0.8 + ComplexMat2::identity() * 0.2;
        Observable::new(m).unwrap()
    }

    fn field(rho: QubitDensity, p0: f64, sigma: f64, q: f64) -> WignerField {
        let init = InitialCondition::gaussian(rho, p0, sigma).unwrap();
        product_field(&init, &grid(), q).unwrap()
    }

    /// A smooth but otherwise arbitrary normalized Hermitian field.
    fn bumpy_field(q: f64) -> WignerField {
        let g = grid();
        let bumps = [
            (
                -1.5,
                0.8,
                ComplexMat2::new(C64::from(0.7), C64::new(0.2, 0.3), C64::new(0.2, -0.3), C64::from(0.1)),
            ),
            (
                0.5,
                1.1,
                ComplexMat2::new(
                    C64::from(0.2),
                    C64::new(-0.4, 0.1),
                    C64::new(-0.4, -0.1),
                    C64::from(0.5),
                ),
            ),
            (
                2.0,
                0.6,
                ComplexMat2::new(C64::from(-0.1), C64::new(0.0, 0.2), C64::new(0.0, -0.2), C64::from(0.3)),
            ),
        ];
        let values: Vec<ComplexMat2> = g
            .points()
            .map(|p| {
                bumps.iter().fold(ComplexMat2::zero(), |acc, (c, s, m)| {
                    acc + *m * gaussian_density(p, *c, s * s)
                })
            })
            .collect();
        let norm: f64 = values.iter().map(|v| v.trace().re).sum::<f64>() * g.dp();
        let values = values.into_iter().map(|v| v * (1.0 / norm)).collect();
        WignerField::new(g, values, q).unwrap()
    }

    fn field_dist(a: &WignerField, b: &WignerField) -> f64 {
        a.values()
            .iter()
            .zip(b.values())
            .map(|(x, y)| (*x - *y).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn heat_flow_variance() {
        let params = ModelParams::new(0.0, 0.3, 0.0, 0.0, Observable::sigma_z()).unwrap();
        let f = field(QubitDensity::plus(), 0.0, 0.9, 0.0);
        let t = 2.0;
        let out = propagate_open(&f, &params, t).unwrap();
        let (_, var) = out.momentum_moments();
        assert!((var - (0.81 + 2.0 * 0.3 * t)).abs() < 1e-6, "variance {var}");
    }

    #[test]
    fn qubit_coherence_decays_and_rotates() {
        let gq = 0.25;
        let params = ModelParams::new(1.0, 0.25, gq, 1.0, Observable::sigma_z()).unwrap();
        let f = field(QubitDensity::plus(), 0.0, 1.0, 1.0);
        for t in [0.5, 1.0, 2.0] {
            let rho = propagate_open(&f, &params, t).unwrap().qubit_marginal().unwrap();
            let expected = C64::new(-4.0 * gq * t, -2.0 * t).exp() * 0.5;
            assert!((rho.matrix().m[0][1] - expected).norm() < 1e-8, "t = {t}");
        }
    }

    #[test]
    fn zero_time_identity_and_reverse_time_rejected() {
        let params = ModelParams::new(1.0, 0.25, 0.25, 1.0, Observable::sigma_z()).unwrap();
        let f = field(QubitDensity::plus(), 0.0, 1.0, 1.0);
        assert!(field_dist(&f, &propagate_open(&f, &params, 0.0).unwrap()) <= 1e-12);
        assert!(propagate_open(&f, &params, -1.0).is_err());
    }

    #[test]
    fn symbols_dissipate_and_reduce_to_closed() {
        let params = ModelParams::new(0.8, 0.3, 0.2, 1.1, tilted_observable()).unwrap();
        let open = OpenPropagator::new(&params, &grid());
        for row in open.symbols() {
            for s in row {
                assert!(s.iter().all(|z| z.re <= 0.0));
            }
        }
        let lim = OpenPropagator::new(&params.without_dissipation(), &grid());
        let closed = crate::closed::ClosedPropagator::new(&params, &grid());
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(lim.symbols()[i][j], closed.symbols()[i][j]);
            }
        }
    }

    #[test]
    fn zero_dissipation_matches_closed_module() {
        let params = ModelParams::new(0.8, 0.0, 0.0, 1.1, tilted_observable()).unwrap();
        let f = bumpy_field(1.1);
        for t in [0.3, 1.7] {
            let a = propagate_open(&f, &params, t).unwrap();
            let b = propagate_closed(&f, &params, t).unwrap();
            assert!(field_dist(&a, &b) < 1e-10);
        }
    }

    #[test]
    fn trace_preserved_and_purity_monotone() {
        let params = ModelParams::new(1.0, 0.25, 0.25, 2.3, Observable::sigma_z()).unwrap();
        let f = field(QubitDensity::bloch_angles(1.0, 0.3).unwrap(), 0.0, 1.0, 2.3);
        let prop = OpenPropagator::new(&params, &grid());
        let mut last = f64::INFINITY;
        for k in 0..=10 {
            let t = 0.4 * k as f64;
            let out = prop.propagate(&f, t).unwrap();
            let sum = out.values().iter().fold(ComplexMat2::zero(), |acc, v| acc + *v) * grid().dp();
            assert!((sum.trace().re - 1.0).abs() < 1e-9);
            let pur = purity(&out.qubit_marginal().unwrap());
            assert!(pur <= last + 1e-12);
            last = pur;
        }
    }

    #[test]
    fn semigroup() {
        let params = ModelParams::new(0.6, 0.2, 0.4, -0.7, tilted_observable()).unwrap();
        let prop = OpenPropagator::new(&params, &grid());
        let f = bumpy_field(-0.7);
        let two = prop.propagate(&prop.propagate(&f, 0.9).unwrap(), 0.6).unwrap();
        let one = prop.propagate(&f, 1.5).unwrap();
        assert!(field_dist(&one, &two) < 1e-9);
    }

    #[test]
    fn finite_difference_matches_right_side() {
        let params = ModelParams::new(0.9, 0.3, 0.4, 0.6, tilted_observable()).unwrap();
        let f = bumpy_field(0.6);
        let dt = 1e-4;
        let stepped = propagate_open(&f, &params, dt).unwrap();
        let d1 = crate::spectral::field_derivative(&f, 1);
        let d2 = crate::spectral::field_derivative(&f, 2);
        let a = *params.a_op.matrix();
        let h = a * (params.lambda * params.q);
        let (mut num, mut den) = (0.0, 0.0);
        for (((v, v1), d1), d2) in f.values().iter().zip(stepped.values()).zip(&d1).zip(&d2) {
            let rhs = commutator(&h, v) * C64::new(0.0, -1.0 / params.hbar)
                + anticommutator(&a, d1) * (0.5 * params.lambda)
                + *d2 * params.gamma_c
                - commutator(&a, &commutator(&a, v)) * params.gamma_q;
            let fd = (*v1 - *v) * (1.0 / dt);
            num += (fd - rhs).norm_sqr();
            den += rhs.norm_sqr();
        }
        let rel = (num / den).sqrt();
        assert!(rel <= 1e-3, "relative residual {rel}");
    }

    #[test]
    fn marginal_law_matches_field_solver() {
        let params = ModelParams::new(0.7, 0.2, 0.3, 1.4, tilted_observable()).unwrap();
        let rho0 = QubitDensity::bloch_angles(0.9, 1.2).unwrap();
        let f = field(rho0, 0.3, 1.0, 1.4);
        let t = 1.3;
        let via_field = propagate_open(&f, &params, t).unwrap().qubit_marginal().unwrap();
        let direct = evolve_qubit_marginal(&rho0, &params, t);
        assert!((*via_field.matrix() - *direct.matrix()).norm() < 1e-9);
    }

    #[test]
    fn positivity_at_saturation_and_violation() {
        let init = InitialCondition::gaussian(QubitDensity::plus(), 0.0, 1.0).unwrap();
        let times: Vec<f64> = (0..=20).map(|k| 0.25 * k as f64).collect();
        let sat = ModelParams::new(1.0, 0.25, 0.25, 0.0, Observable::sigma_z()).unwrap();
        let scan = positivity_scan(&init, &sat, &grid(), &times).unwrap();
        assert!(scan.iter().all(|p| p.min_eigenvalue >= -tol::SPECTRAL_PSD));
        let weak = ModelParams::new(1.0, 0.25, 0.0025, 0.0, Observable::sigma_z()).unwrap();
        let scan = positivity_scan(&init, &weak, &grid(), &times).unwrap();
        assert!(scan.iter().any(|p| p.min_eigenvalue < -1e-4));
        let uncoupled = ModelParams::new(0.0, 5.0, 5.0, 0.0, Observable::sigma_z()).unwrap();
        let scan = positivity_scan(&init, &uncoupled, &grid(), &[0.0, 0.25, 0.5]).unwrap();
        assert!(scan.iter().all(|p| p.min_eigenvalue >= -tol::PSD_SLACK));
    }
}
