//! Model parameters, the momentum grid and the operator-valued partial Wigner field.

use std::f64::consts::{PI, SQRT_2};

use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::qmat::{self, tol, ComplexMat2, Observable, QubitDensity};

/// The toy model: coupling λ·q̂·Â plus position dephasing on the particle (rate γ_C)
/// and Â-dephasing on the qubit (rate γ_Q).
///
/// Units: λ is momentum per time per unit of Â, γ_C is momentum² per time,
/// γ_Q is per time, q is a length. The kinetic term is dropped, so q never moves.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    pub lambda: f64,
    pub hbar: f64,
    pub gamma_c: f64,
    pub gamma_q: f64,
    pub q: f64,
    pub a_op: Observable,
}

impl ModelParams {
    pub fn new(lambda: f64, gamma_c: f64, gamma_q: f64, q: f64, a_op: Observable) -> Result<Self> {
        Self {
            lambda,
            hbar: 1.0,
            gamma_c,
            gamma_q,
            q,
            a_op,
        }
        .validated()
    }

    /// Closed-system parameters (no dephasing on either side).
    pub fn closed(lambda: f64, q: f64, a_op: Observable) -> Result<Self> {
        Self::new(lambda, 0.0, 0.0, q, a_op)
    }

    pub fn with_hbar(mut self, hbar: f64) -> Result<Self> {
        self.hbar = hbar;
        self.validated()
    }

    pub fn validated(self) -> Result<Self> {
        let finite = [self.lambda, self.hbar, self.gamma_c, self.gamma_q, self.q]
            .iter()
            .all(|x| x.is_finite());
        if !finite {
            return Err(Error::InvalidParams("parameters must be finite".into()));
        }
        if self.hbar <= 0.0 {
            return Err(Error::InvalidParams(format!("hbar = {} must be > 0", self.hbar)));
        }
        if self.gamma_c < 0.0 || self.gamma_q < 0.0 {
            return Err(Error::InvalidParams(format!(
                "decoherence rates must be non-negative (gamma_c = {}, gamma_q = {})",
                self.gamma_c, self.gamma_q
            )));
        }
        Ok(self)
    }

    /// The same model with both dephasing channels switched off.
    pub fn without_dissipation(&self) -> Self {
        Self {
            gamma_c: 0.0,
            gamma_q: 0.0,
            ..self.clone()
        }
    }

    /// Largest momentum drift speed, |λ|·max|a|.
    pub fn max_drift_speed(&self) -> f64 {
        self.lambda.abs() * self.a_op.max_abs_eigenvalue()
    }
}

/// A periodic momentum grid p_j = p_min + j·dp, j = 0..n, with dp = (p_max − p_min)/n.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentumGrid {
    p_min: f64,
    p_max: f64,
    n: usize,
}

impl Default for MomentumGrid {
    fn default() -> Self {
        Self {
            p_min: -20.0,
            p_max: 20.0,
            n: 1024,
        }
    }
}

impl MomentumGrid {
    pub const MIN_POINTS: usize = 64;

    pub fn new(p_min: f64, p_max: f64, n: usize) -> Result<Self> {
        if !(p_min.is_finite() && p_max.is_finite() && p_max > p_min) {
            return Err(Error::InvalidGrid(format!(
                "bounds [{p_min}, {p_max}] must be finite and increasing"
            )));
        }
        if n < Self::MIN_POINTS || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "point count {n} must be a power of two >= {}",
                Self::MIN_POINTS
            )));
        }
        Ok(Self { p_min, p_max, n })
    }

    pub fn p_min(&self) -> f64 {
        self.p_min
    }

    pub fn p_max(&self) -> f64 {
        self.p_max
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn length(&self) -> f64 {
        self.p_max - self.p_min
    }

    pub fn dp(&self) -> f64 {
        self.length() / self.n as f64
    }

    #[inline]
    pub fn p(&self, j: usize) -> f64 {
        self.p_min + j as f64 * self.dp()
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(|j| self.p(j))
    }

    /// Angular wavenumbers in FFT order: 0, 1, …, n/2 − 1, −n/2, …, −1 (times 2π/L).
    pub fn wavenumbers(&self) -> Vec<f64> {
        let base = 2.0 * PI / self.length();
        (0..self.n)
            .map(|k| {
                let k = if k < self.n / 2 {
                    k as isize
                } else {
                    k as isize - self.n as isize
                };
                base * k as f64
            })
            .collect()
    }

    /// Index of the histogram bin centred on p_j that contains `p`. The bin
    /// straddling p_max wraps to j = 0; anything further out is `None`.
    pub fn bin_index(&self, p: f64) -> Option<usize> {
        let x = ((p - self.p_min) / self.dp()).round();
        if !(-0.0..=self.n as f64).contains(&x) {
            return None;
        }
        Some(x as usize % self.n)
    }
}

/// Momentum distribution of the initial product state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PDist {
    Delta { p0: f64 },
    Gaussian { p0: f64, sigma: f64 },
}

impl PDist {
    pub fn mean(&self) -> f64 {
        match *self {
            PDist::Delta { p0 } | PDist::Gaussian { p0, .. } => p0,
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            PDist::Delta { .. } => 0.0,
            PDist::Gaussian { sigma, .. } => sigma * sigma,
        }
    }
}

/// Product initial state ρ0 ⊗ W(p).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InitialCondition {
    pub rho0: QubitDensity,
    pub p_dist: PDist,
}

impl InitialCondition {
    pub fn new(rho0: QubitDensity, p_dist: PDist) -> Result<Self> {
        if let PDist::Gaussian { sigma, p0 } = p_dist {
            if !(sigma > 0.0 && sigma.is_finite() && p0.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "gaussian momentum width {sigma} must be positive"
                )));
            }
        }
        Ok(Self { rho0, p_dist })
    }

    pub fn gaussian(rho0: QubitDensity, p0: f64, sigma: f64) -> Result<Self> {
        Self::new(rho0, PDist::Gaussian { p0, sigma })
    }

    pub fn delta(rho0: QubitDensity, p0: f64) -> Self {
        Self {
            rho0,
            p_dist: PDist::Delta { p0 },
        }
    }

    /// Band-limited stand-in for spectral solvers: a delta becomes a Gaussian of
    /// width 4·dp.
    pub fn for_spectral(&self, grid: &MomentumGrid) -> Self {
        match self.p_dist {
            PDist::Delta { p0 } => Self {
                rho0: self.rho0,
                p_dist: PDist::Gaussian {
                    p0,
                    sigma: 4.0 * grid.dp(),
                },
            },
            PDist::Gaussian { .. } => *self,
        }
    }
}

/// Default limit on initial probability mass outside the grid.
pub const BOUNDARY_MASS_GUARD: f64 = 1e-12;

pub(crate) fn gaussian_density(p: f64, mean: f64, var: f64) -> f64 {
    (-(p - mean).powi(2) / (2.0 * var)).exp() / (2.0 * PI * var).sqrt()
}

/// The operator-valued partial Wigner field ϱ^W(q, p) on a momentum grid at fixed q.
#[derive(Clone, Debug, PartialEq)]
pub struct WignerField {
    grid: MomentumGrid,
    values: Vec<ComplexMat2>,
    q: f64,
}

impl WignerField {
    /// Builds a field, checking Hermiticity and normalization.
    pub fn new(grid: MomentumGrid, values: Vec<ComplexMat2>, q: f64) -> Result<Self> {
        let field = Self::from_values_unchecked(grid, values, q)?;
        field.check_invariants()?;
        Ok(field)
    }

    pub(crate) fn from_values_unchecked(grid: MomentumGrid, values: Vec<ComplexMat2>, q: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "{} field values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values, q })
    }

    pub fn grid(&self) -> &MomentumGrid {
        &self.grid
    }

    pub fn values(&self) -> &[ComplexMat2] {
        &self.values
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// Σ_j tr(values[j])·dp.
    pub fn normalization(&self) -> f64 {
        self.values.iter().map(|v| v.trace().re).sum::<f64>() * self.grid.dp()
    }

    /// Largest value norm on the grid.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Σ_j tr(values[j]²)·dp, conserved by the closed dynamics.
    pub fn hilbert_schmidt_norm_sq(&self) -> f64 {
        self.values.iter().map(|v| (*v * *v).trace().re).sum::<f64>() * self.grid.dp()
    }

    pub fn check_invariants(&self) -> Result<()> {
        let scale = self.sup_norm().max(1.0);
        for v in &self.values {
            let res = v.hermiticity_residual();
            if res > tol::FIELD_HERMITIAN * scale {
                return Err(Error::NotHermitian { residual: res });
            }
        }
        let integral = self.normalization();
        if (integral - 1.0).abs() > tol::FIELD_NORM {
            return Err(Error::NotNormalized { integral });
        }
        Ok(())
    }

    /// w_j = tr(values[j]), the momentum distribution of the particle.
    pub fn momentum_marginal(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.trace().re).collect()
    }

    /// (mean, variance) of the momentum marginal.
    pub fn momentum_moments(&self) -> (f64, f64) {
        let w = self.momentum_marginal();
        let dp = self.grid.dp();
        let norm: f64 = w.iter().sum::<f64>() * dp;
        let mean = self.grid.points().zip(&w).map(|(p, w)| p * w).sum::<f64>() * dp / norm;
        let var = self
            .grid
            .points()
            .zip(&w)
            .map(|(p, w)| (p - mean).powi(2) * w)
            .sum::<f64>()
            * dp
            / norm;
        (mean, var)
    }

    /// Σ_j values[j]·dp, renormalized to unit trace.
    pub fn qubit_marginal(&self) -> Result<QubitDensity> {
        let integral = self.normalization();
        if (integral - 1.0).abs() > tol::FIELD_NORM {
            return Err(Error::NotNormalized { integral });
        }
        let sum = self.values.iter().fold(ComplexMat2::zero(), |acc, v| acc + *v) * self.grid.dp();
        let tr = sum.trace().re;
        QubitDensity::new((sum * (1.0 / tr)).hermitian_part())
    }

    /// The most negative eigenvalue over the grid and the momentum where it
    /// occurs. Ties go to the smallest p.
    pub fn min_eigenvalue(&self) -> (f64, f64) {
        let mut best = (f64::INFINITY, self.grid.p_min());
        for (j, v) in self.values.iter().enumerate() {
            let lo = v.hermitian_eigenvalues()[0];
            if lo < best.0 {
                best = (lo, self.grid.p(j));
            }
        }
        best
    }

    /// Σ_j ‖values[j] − other[j]‖_tr · dp, the trace-norm L1 distance.
    pub fn l1_distance(&self, other: &WignerField) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::InvalidArgument("fields live on different grids".into()));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| {
                let [lo, hi] = (*a - *b).hermitian_eigenvalues();
                lo.abs() + hi.abs()
            })
            .sum::<f64>()
            * self.grid.dp())
    }

    /// Bin averages of this field over the cells of a coarser grid whose points
    /// coincide with every `k`-th point of this one. Each coarse cell is
    /// integrated with the trapezoid rule over the fine samples it spans.
    pub fn coarse_grain(&self, coarse: &MomentumGrid) -> Result<WignerField> {
        let fine = &self.grid;
        let ratio = fine.len() / coarse.len().max(1);
        let aligned = coarse.len() * ratio == fine.len()
            && ratio.is_multiple_of(2)
            && (coarse.p_min() - fine.p_min()).abs() <= 1e-12 * fine.length()
            && (coarse.p_max() - fine.p_max()).abs() <= 1e-12 * fine.length();
        if !aligned {
            return Err(Error::InvalidGrid(
                "coarse grid must share bounds and divide the fine grid by an even factor".into(),
            ));
        }
        let n = fine.len() as isize;
        let half = (ratio / 2) as isize;
        let values = (0..coarse.len())
            .map(|jc| {
                let centre = (jc * ratio) as isize;
                let mut acc = ComplexMat2::zero();
                for off in -half..=half {
                    let w = if off.abs() == half { 0.5 } else { 1.0 };
                    acc += self.values[(centre + off).rem_euclid(n) as usize] * w;
                }
                acc * (1.0 / ratio as f64)
            })
            .collect();
        WignerField::from_values_unchecked(coarse.clone(), values, self.q)
    }

    /// Applies `f` to every value, keeping grid and q.
    pub fn map_values(&self, f: impl Fn(&ComplexMat2) -> ComplexMat2) -> WignerField {
        WignerField {
            grid: self.grid.clone(),
            values: self.values.iter().map(f).collect(),
            q: self.q,
        }
    }
}

/// Probability mass of N(p0, σ²) outside [p_min, p_max].
pub fn gaussian_tail_mass(p0: f64, sigma: f64, grid: &MomentumGrid) -> f64 {
    let below = 0.5 * erfc((p0 - grid.p_min()) / (sigma * SQRT_2));
    let above = 0.5 * erfc((grid.p_max() - p0) / (sigma * SQRT_2));
    below + above
}

/// ρ0 ⊗ W(p) sampled on the grid. A delta lands in the single bin containing p0.
pub fn product_field(init: &InitialCondition, grid: &MomentumGrid, q: f64) -> Result<WignerField> {
    let rho0 = *init.rho0.matrix();
    let values = match init.p_dist {
        PDist::Delta { p0 } => {
            let j = grid.bin_index(p0).ok_or(Error::BoundaryMass {
                mass: 1.0,
                p_min: grid.p_min(),
                p_max: grid.p_max(),
            })?;
            let mut values = vec![ComplexMat2::zero(); grid.len()];
            values[j] = rho0 * (1.0 / grid.dp());
            values
        }
        PDist::Gaussian { p0, sigma } => {
            let mass = gaussian_tail_mass(p0, sigma, grid);
            if mass >= BOUNDARY_MASS_GUARD {
                return Err(Error::BoundaryMass {
                    mass,
                    p_min: grid.p_min(),
                    p_max: grid.p_max(),
                });
            }
            grid.points()
                .map(|p| rho0 * gaussian_density(p, p0, sigma * sigma))
                .collect()
        }
    };
    WignerField::new(grid.clone(), values, q)
}

/// Rejects a propagation whose drift-plus-diffusion support would wrap around
/// the periodic domain: the momentum marginal's mean ± (|λ|·max|a|·t +
/// 6·√(σ² + 2γ_C·t)) must stay inside [p_min, p_max].
pub fn check_boundary_guard(field: &WignerField, params: &ModelParams, t: f64) -> Result<()> {
    let grid = field.grid();
    let (mean, var) = field.momentum_moments();
    let reach = params.max_drift_speed() * t.abs() + 6.0 * (var.max(0.0) + 2.0 * params.gamma_c * t.abs()).sqrt();
    let (lo, hi) = (mean - reach, mean + reach);
    if !(lo >= grid.p_min() && hi <= grid.p_max()) {
        return Err(Error::BoundaryGuard {
            lo,
            hi,
            p_min: grid.p_min(),
            p_max: grid.p_max(),
            t,
        });
    }
    Ok(())
}

/// One sample of the stochastic unraveling: time, momentum and qubit state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectoryState {
    pub t: f64,
    pub p: f64,
    pub rho: QubitDensity,
}

impl TrajectoryState {
    pub fn purity(&self) -> f64 {
        qmat::purity(&self.rho)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.rho.matrix().hermitian_eigenvalues()[0]
    }
}

/// Applies a unitary to every field value: U·v·U†.
pub fn conjugate_field(field: &WignerField, u: &ComplexMat2) -> WignerField {
    let ud = u.adjoint();
    field.map_values(|v| *u * *v * ud)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid() -> MomentumGrid {
        MomentumGrid::default()
    }

    #[test]
    fn grid_validation() {
        assert!(MomentumGrid::new(-1.0, 1.0, 32).is_err());
        assert!(MomentumGrid::new(-1.0, 1.0, 100).is_err());
        assert!(MomentumGrid::new(1.0, -1.0, 64).is_err());
        let g = MomentumGrid::new(-1.0, 1.0, 64).unwrap();
        let u = g.wavenumbers();
        assert_eq!(u[0], 0.0);
        assert!((u[1] - PI).abs() < 1e-14);
        assert!((u[63] + PI).abs() < 1e-14);
        assert!(u[32] < 0.0);
    }

    #[test]
    fn bin_index_wraps_at_upper_edge() {
        let g = grid();
        assert_eq!(g.bin_index(0.0), Some(512));
        assert_eq!(g.bin_index(-20.0), Some(0));
        assert_eq!(g.bin_index(19.99), Some(0));
        assert_eq!(g.bin_index(25.0), None);
        assert_eq!(g.bin_index(-20.5), None);
    }

    #[test]
    fn delta_product_field_is_single_bin() {
        let g = grid();
        let init = InitialCondition::delta(QubitDensity::plus(), 1.3);
        let f = product_field(&init, &g, 0.0).unwrap();
        let j = g.bin_index(1.3).unwrap();
        let w = f.momentum_marginal();
        assert!((w[j] - 1.0 / g.dp()).abs() < 1e-12);
        assert_eq!(w.iter().filter(|x| **x != 0.0).count(), 1);
    }

    #[test]
    fn gaussian_product_field_is_positive() {
        let g = grid();
        let init = InitialCondition::gaussian(QubitDensity::plus(), 0.0, 1.0).unwrap();
        let f = product_field(&init, &g, 0.0).unwrap();
        for (p, v) in g.points().zip(f.values()) {
            let expected = ComplexMat2::from_real(0.5, 0.5, 0.5, 0.5) * gaussian_density(p, 0.0, 1.0);
            assert!((*v - expected).norm() < 1e-15);
        }
        assert!(f.min_eigenvalue().0 >= -tol::PSD_SLACK);
    }

    #[test]
    fn gaussian_normalization_quadrature() {
        let init = InitialCondition::gaussian(QubitDensity::zero(), 2.0, 0.5).unwrap();
        let f = product_field(&init, &grid(), 0.0).unwrap();
        assert!((f.normalization() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn boundary_mass_rejected() {
        let init = InitialCondition::gaussian(QubitDensity::zero(), 15.0, 1.0).unwrap();
        assert!(matches!(
            product_field(&init, &grid(), 0.0),
            Err(Error::BoundaryMass { .. })
        ));
        assert!(InitialCondition::gaussian(QubitDensity::zero(), 0.0, 0.0).is_err());
    }

    #[test]
    fn marginals_of_product_field() {
        let rho = QubitDensity::new(ComplexMat2::diag(1.0, 0.0)).unwrap();
        let init = InitialCondition::gaussian(rho, 0.5, 1.2).unwrap();
        let g = grid();
        let f = product_field(&init, &g, 0.0).unwrap();
        let back = f.qubit_marginal().unwrap();
        assert!((*back.matrix() - ComplexMat2::diag(1.0, 0.0)).norm() < 1e-8);
        let w = f.momentum_marginal();
        for (p, w) in g.points().zip(&w) {
            assert!((w - gaussian_density(p, 0.5, 1.44)).abs() < 1e-15);
        }
    }

    #[test]
    fn unnormalized_field_rejected() {
        let g = grid();
        let values = vec![ComplexMat2::diag(1.0, 0.0); g.len()];
        assert!(matches!(
            WignerField::new(g, values, 0.0),
            Err(Error::NotNormalized { .. })
        ));
    }

    #[test]
    fn coarse_grain_preserves_normalization() {
        let init = InitialCondition::gaussian(QubitDensity::plus(), 0.3, 1.0).unwrap();
        let f = product_field(&init, &grid(), 0.0).unwrap();
        let coarse = MomentumGrid::new(-20.0, 20.0, 64).unwrap();
        let c = f.coarse_grain(&coarse).unwrap();
        assert!((c.normalization() - 1.0).abs() < 1e-12);
        assert!(f.coarse_grain(&MomentumGrid::new(-10.0, 10.0, 64).unwrap()).is_err());
    }

    fn arb_density() -> impl Strategy<Value = QubitDensity> {
        (0.0..1.0f64, 0.0..PI, 0.0..std::f64::consts::TAU).prop_map(|(r, th, ph)| {
            QubitDensity::from_bloch([r * th.sin() * ph.cos(), r * th.sin() * ph.sin(), r * th.cos()]).unwrap()
        })
    }

    fn random_unitary(a: f64, b: f64, c: f64) -> ComplexMat2 {
        // exp(−i(aσ_x + bσ_y + cσ_z)) via a Hermitian observable.
        let h = ComplexMat2::pauli_x() * a + ComplexMat2::pauli_y() * b + ComplexMat2::pauli_z() * c;
        Observable::new(h).unwrap().exp_i(1.0)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn product_then_marginal_is_identity(rho in arb_density(), p0 in -5.0..5.0f64, s in 0.3..2.0f64) {
            let init = InitialCondition::gaussian(rho, p0, s).unwrap();
            let f = product_field(&init, &grid(), 0.0).unwrap();
            let back = f.qubit_marginal().unwrap();
            prop_assert!((*back.matrix() - *rho.matrix()).norm() < 1e-8);
            let w = f.momentum_marginal();
            prop_assert!((w.iter().sum::<f64>() * grid().dp() - 1.0).abs() < 1e-8);
            prop_assert!(w.iter().all(|x| *x >= -1e-12));
        }

        #[test]
        fn min_eigenvalue_is_basis_independent(
            rho in arb_density(), a in -2.0..2.0f64, b in -2.0..2.0f64, c in -2.0..2.0f64
        ) {
            let init = InitialCondition::gaussian(rho, 0.0, 1.0).unwrap();
            let f = product_field(&init, &grid(), 0.0).unwrap();
            // Make the field indefinite somewhere so the minimum is not trivially zero.
            let f = f.map_values(|v| *v - ComplexMat2::diag(0.05, 0.0));
            let u = random_unitary(a, b, c);
            let g = conjugate_field(&f, &u);
            prop_assert!((f.min_eigenvalue().0 - g.min_eigenvalue().0).abs() < 1e-10);
        }
    }
}
