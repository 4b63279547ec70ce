//! Stochastic classical-quantum unraveling of the open dynamics.
//!
//! Each trajectory carries a momentum p and a qubit state ρ driven by one shared
//! Wiener increment dW per step:
//!
//! ```text
//! dp = −λ⟨Â⟩ dt + √(2γ_C) dW
//! dρ = −(i/ħ)[λqÂ, ρ] dt − γ_Q[Â, [Â, ρ]] dt − (λ/√(8γ_C)) (Âρ + ρÂ − 2⟨Â⟩ρ) dW
//! ```
//!
//! With these coefficients E[ρ_t δ(p_t − p)] solves the open master equation
//! exactly: the momentum noise has variance 2γ_C·dt to match γ_C ∂²/∂p², and the
//! product of the two noise amplitudes is −λ/2, which cancels the nonlinear ⟨Â⟩
//! terms and leaves (λ/2){Â, ∂ϱ/∂p}.
//!
//! The default [`Scheme::Milstein`] adds the ½·b′b·(dW² − dt) correction to
//! the qubit update, which makes pathwise errors (purity loss, negative
//! eigenvalues) scale linearly in dt. Plain Euler–Maruyama is still available.
//!
//! Trajectories draw their increments from ChaCha8 streams keyed by
//! `(seed, trajectory index)`, so every trajectory can be replayed in isolation
//! and the ensemble is bitwise identical however it is scheduled.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{InitialCondition, ModelParams, MomentumGrid, PDist, TrajectoryState, WignerField};
use crate::qmat::{self, ComplexMat2, Observable, QubitDensity, C64};
use crate::validity::check_tradeoff;

/// Time discretization of one trajectory.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SdeConfig {
    pub dt: f64,
    pub t_final: f64,
    /// Steps between recorded snapshots.
    pub record_stride: usize,
    /// Symmetrize and renormalize the trace of ρ after every step.
    pub renormalize: bool,
    /// A trajectory whose ρ eigenvalue drops below this is flagged.
    pub positivity_abort_threshold: f64,
    pub scheme: Scheme,
}

/// Time-stepping rule for the shared-noise SDE.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    /// Plain Euler–Maruyama: strong order ½.
    #[serde(rename = "euler")]
    EulerMaruyama,
    /// Euler–Maruyama plus the ½·b′b·(dW² − dt) correction: strong order 1 for
    /// this single-noise system.
    #[default]
    #[serde(rename = "milstein")]
    Milstein,
}

impl Default for SdeConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_final: 1.0,
            record_stride: 100,
            renormalize: true,
            positivity_abort_threshold: -1e-3,
            scheme: Scheme::default(),
        }
    }
}

impl SdeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidArgument(format!("dt = {} must be > 0", self.dt)));
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "t_final = {} must be >= 0",
                self.t_final
            )));
        }
        if self.record_stride == 0 {
            return Err(Error::InvalidArgument("record_stride must be >= 1".into()));
        }
        Ok(())
    }

    /// Number of integration steps, t_final/dt rounded to the nearest integer.
    pub fn steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }

    /// Step indices at which snapshots are taken (always including the last).
    pub fn recorded_steps(&self) -> Vec<usize> {
        let n = self.steps();
        let mut ks: Vec<usize> = (0..=n).step_by(self.record_stride).collect();
        if ks.last() != Some(&n) {
            ks.push(n);
        }
        ks
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnsembleSpec {
    pub n_traj: usize,
    pub seed: u64,
    pub config: SdeConfig,
    /// Proceed (with a warning) when the trade-off inequality fails.
    pub allow_tradeoff_violation: bool,
}

impl EnsembleSpec {
    pub fn new(n_traj: usize, seed: u64, config: SdeConfig) -> Self {
        Self {
            n_traj,
            seed,
            config,
            allow_tradeoff_violation: false,
        }
    }
}

/// Noise stream of trajectory `index`.
pub fn noise_stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Precomputed coefficients of the unraveling for one parameter set.
#[derive(Clone, Debug)]
pub struct Unraveling {
    a: ComplexMat2,
    hamiltonian: ComplexMat2,
    lambda: f64,
    gamma_q: f64,
    momentum_noise: f64,
    measurement: f64,
}

impl Unraveling {
    pub fn new(params: &ModelParams) -> Result<Self> {
        let measurement = if params.lambda == 0.0 {
            0.0
        } else if params.gamma_c > 0.0 {
            -params.lambda / (8.0 * params.gamma_c).sqrt()
        } else {
            return Err(Error::UndefinedMeasurementCoefficient);
        };
        Ok(Self {
            a: *params.a_op.matrix(),
            hamiltonian: *params.a_op.matrix() * (params.lambda * params.q / params.hbar),
            lambda: params.lambda,
            gamma_q: params.gamma_q,
            momentum_noise: (2.0 * params.gamma_c).sqrt(),
            measurement,
        })
    }

    /// Amplitude multiplying dW in the momentum update.
    pub fn momentum_noise(&self) -> f64 {
        self.momentum_noise
    }

    /// Amplitude multiplying (Âρ + ρÂ − 2⟨Â⟩ρ) dW in the qubit update.
    pub fn measurement_strength(&self) -> f64 {
        self.measurement
    }

    #[inline]
    fn expectation(&self, rho: &ComplexMat2) -> f64 {
        (self.a * *rho).trace().re
    }

    #[inline]
    fn innovation(&self, rho: &ComplexMat2, mean_a: f64) -> ComplexMat2 {
        (self.a * *rho + *rho * self.a - *rho * (2.0 * mean_a)) * self.measurement
    }

    /// Raw increments (dp, dρ) of one step, before any symmetrization or
    /// renormalization.
    #[inline]
    pub fn increment(&self, rho: &ComplexMat2, dt: f64, dw: f64, scheme: Scheme) -> (f64, ComplexMat2) {
        let mean_a = self.expectation(rho);
        let dp = -self.lambda * mean_a * dt + self.momentum_noise * dw;

        let unitary = qmat::commutator(&self.hamiltonian, rho) * C64::new(0.0, -dt);
        let inner = qmat::commutator(&self.a, rho);
        let dephasing = qmat::commutator(&self.a, &inner) * (-self.gamma_q * dt);
        let b = self.innovation(rho, mean_a);
        let mut drho = unitary + dephasing + b * dw;
        if scheme == Scheme::Milstein {
            // Directional derivative of the innovation along itself.
            let b_mean = (self.a * b).trace().re;
            let bb = (self.a * b + b * self.a - *rho * (2.0 * b_mean) - b * (2.0 * mean_a)) * self.measurement;
            drho += bb * (0.5 * (dw * dw - dt));
        }
        (dp, drho)
    }

    #[inline]
    pub fn step(
        &self,
        state: &TrajectoryState,
        dt: f64,
        dw: f64,
        scheme: Scheme,
        renormalize: bool,
    ) -> TrajectoryState {
        let (dp, drho) = self.increment(state.rho.matrix(), dt, dw, scheme);
        let mut rho = *state.rho.matrix() + drho;
        if renormalize {
            rho = rho.hermitian_part();
            rho = rho * (1.0 / rho.trace().re);
        }
        TrajectoryState {
            t: state.t + dt,
            p: state.p + dp,
            rho: QubitDensity::from_matrix_unchecked(rho),
        }
    }
}

/// One renormalized Euler–Maruyama step with a caller-supplied increment dW.
pub fn step_sde(state: &TrajectoryState, params: &ModelParams, dt: f64, dw: f64) -> Result<TrajectoryState> {
    if dt.is_nan() || dt <= 0.0 {
        return Err(Error::InvalidArgument(format!("dt = {dt} must be > 0")));
    }
    Ok(Unraveling::new(params)?.step(state, dt, dw, Scheme::EulerMaruyama, true))
}

/// A recorded snapshot: momentum and the full qubit matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sample {
    pub p: f64,
    pub rho: ComplexMat2,
}

impl Sample {
    pub fn bloch(&self) -> [f64; 3] {
        QubitDensity::from_matrix_unchecked(self.rho).bloch()
    }

    pub fn purity(&self) -> f64 {
        qmat::matrix_purity(&self.rho)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.rho.hermitian_eigenvalues()[0]
    }

    pub fn expectation(&self, a: &Observable) -> f64 {
        (*a.matrix() * self.rho).trace().re
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryRecord {
    pub samples: Vec<Sample>,
    /// Smallest ρ eigenvalue over every step, recorded or not.
    pub min_eigenvalue: f64,
    /// Largest 1 − tr ρ² over every step.
    pub max_purity_deficit: f64,
    pub flagged: bool,
}

/// Integrates one trajectory with stream `index`.
pub fn run_trajectory(
    unraveling: &Unraveling,
    init: &InitialCondition,
    config: &SdeConfig,
    seed: u64,
    index: u64,
) -> TrajectoryRecord {
    let mut rng = noise_stream(seed, index);
    let p0 = match init.p_dist {
        PDist::Delta { p0 } => p0,
        PDist::Gaussian { p0, sigma } => p0 + sigma * rng.sample::<f64, _>(StandardNormal),
    };
    let steps = config.steps();
    let recorded = config.recorded_steps();
    let sqrt_dt = config.dt.sqrt();

    let mut state = TrajectoryState {
        t: 0.0,
        p: p0,
        rho: init.rho0,
    };
    let mut samples = Vec::with_capacity(recorded.len());
    let mut next = recorded.iter().copied().peekable();
    let mut min_eig = state.min_eigenvalue();
    let mut max_deficit = 1.0 - state.purity();

    if next.peek() == Some(&0) {
        samples.push(Sample {
            p: state.p,
            rho: *state.rho.matrix(),
        });
        next.next();
    }
    for k in 1..=steps {
        let dw = sqrt_dt * rng.sample::<f64, _>(StandardNormal);
        state = unraveling.step(&state, config.dt, dw, config.scheme, config.renormalize);
        state.t = k as f64 * config.dt;
        min_eig = min_eig.min(state.min_eigenvalue());
        max_deficit = max_deficit.max(1.0 - state.purity());
        if next.peek() == Some(&k) {
            samples.push(Sample {
                p: state.p,
                rho: *state.rho.matrix(),
            });
            next.next();
        }
    }
    TrajectoryRecord {
        samples,
        min_eigenvalue: min_eig,
        max_purity_deficit: max_deficit,
        flagged: min_eig < config.positivity_abort_threshold,
    }
}

/// Runs `spec.n_traj` independent trajectories in parallel. The output depends
/// only on the arguments, never on the thread count.
pub fn run_ensemble(spec: &EnsembleSpec, init: &InitialCondition, params: &ModelParams) -> Result<EnsembleResult> {
    spec.config.validate()?;
    if spec.n_traj == 0 {
        return Err(Error::InvalidArgument("n_traj must be >= 1".into()));
    }
    let tradeoff = check_tradeoff(params);
    if !tradeoff.holds {
        if spec.allow_tradeoff_violation {
            log::warn!(
                "trade-off violated (margin {:.3e}); trajectories may leave the density cone",
                tradeoff.margin
            );
        } else {
            return Err(Error::TradeoffViolated {
                margin: tradeoff.margin,
            });
        }
    }
    let unraveling = Unraveling::new(params)?;
    let trajectories: Vec<TrajectoryRecord> = (0..spec.n_traj as u64)
        .into_par_iter()
        .map(|i| run_trajectory(&unraveling, init, &spec.config, spec.seed, i))
        .collect();
    let times = spec
        .config
        .recorded_steps()
        .into_iter()
        .map(|k| k as f64 * spec.config.dt)
        .collect();
    Ok(EnsembleResult {
        times,
        trajectories,
        params: params.clone(),
        spec: spec.clone(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleResult {
    times: Vec<f64>,
    trajectories: Vec<TrajectoryRecord>,
    params: ModelParams,
    spec: EnsembleSpec,
}

/// Per-time ensemble statistics.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Moments {
    pub t: f64,
    pub mean_p: f64,
    pub var_p: f64,
    pub mean_bloch: [f64; 3],
    pub mean_purity: f64,
    pub mean_expectation: f64,
    pub stderr_expectation: f64,
    pub min_eigenvalue: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BornStatistics {
    pub threshold: f64,
    pub frac_up: f64,
    pub frac_down: f64,
    pub unresolved: f64,
    /// Mean final momentum of trajectories that collapsed onto a0 (None if none did).
    pub mean_p_up: Option<f64>,
    pub mean_p_down: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Diagnostics {
    pub min_eigenvalue_seen: f64,
    pub max_purity_deficit: f64,
    pub abort_count: usize,
}

impl EnsembleResult {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn trajectories(&self) -> &[TrajectoryRecord] {
        &self.trajectories
    }

    pub fn n_traj(&self) -> usize {
        self.trajectories.len()
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn spec(&self) -> &EnsembleSpec {
        &self.spec
    }

    /// Index of the recorded time `at`.
    pub fn record_index(&self, at: f64) -> Result<usize> {
        let tol = 1e-9 * at.abs().max(1.0);
        self.times
            .iter()
            .position(|t| (t - at).abs() <= tol)
            .ok_or(Error::UnrecordedTime(at))
    }

    pub fn samples_at(&self, k: usize) -> impl Iterator<Item = &Sample> + '_ {
        self.trajectories.iter().map(move |tr| &tr.samples[k])
    }

    /// E[ρ_t] at recorded index `k`.
    pub fn mean_state(&self, k: usize) -> ComplexMat2 {
        let sum = self.samples_at(k).fold(ComplexMat2::zero(), |acc, s| acc + s.rho);
        sum * (1.0 / self.n_traj() as f64)
    }

    pub fn moments(&self, k: usize) -> Moments {
        let n = self.n_traj() as f64;
        let a = &self.params.a_op;
        let mut mean_p = 0.0;
        let mut mean_e = 0.0;
        let mut mean_pur = 0.0;
        let mut bloch = [0.0; 3];
        let mut min_eig = f64::INFINITY;
        for s in self.samples_at(k) {
            mean_p += s.p;
            mean_e += s.expectation(a);
            mean_pur += s.purity();
            for (b, x) in bloch.iter_mut().zip(s.bloch()) {
                *b += x;
            }
            min_eig = min_eig.min(s.min_eigenvalue());
        }
        mean_p /= n;
        mean_e /= n;
        mean_pur /= n;
        bloch.iter_mut().for_each(|b| *b /= n);
        let (mut var_p, mut var_e) = (0.0, 0.0);
        for s in self.samples_at(k) {
            var_p += (s.p - mean_p).powi(2);
            var_e += (s.expectation(a) - mean_e).powi(2);
        }
        let denom = (n - 1.0).max(1.0);
        Moments {
            t: self.times[k],
            mean_p,
            var_p: var_p / denom,
            mean_bloch: bloch,
            mean_purity: mean_pur,
            mean_expectation: mean_e,
            stderr_expectation: (var_e / denom / n).sqrt(),
            min_eigenvalue: min_eig,
        }
    }

    pub fn diagnostics(&self) -> Diagnostics {
        Diagnostics {
            min_eigenvalue_seen: self
                .trajectories
                .iter()
                .map(|t| t.min_eigenvalue)
                .fold(f64::INFINITY, f64::min),
            max_purity_deficit: self
                .trajectories
                .iter()
                .map(|t| t.max_purity_deficit)
                .fold(f64::NEG_INFINITY, f64::max),
            abort_count: self.trajectories.iter().filter(|t| t.flagged).count(),
        }
    }
}

/// Histogram estimator of the partial Wigner field at a recorded time:
/// values[j] = Σ_{p_t ∈ bin j} ρ_t / (n_traj·dp), with bins centred on the grid points.
pub fn reconstruct_field(result: &EnsembleResult, grid: &MomentumGrid, at: f64) -> Result<WignerField> {
    let k = result.record_index(at)?;
    let mut values = vec![ComplexMat2::zero(); grid.len()];
    let mut outside = 0usize;
    for s in result.samples_at(k) {
        match grid.bin_index(s.p) {
            Some(j) => values[j] += s.rho,
            None => outside += 1,
        }
    }
    if outside > 0 {
        return Err(Error::BoundaryMass {
            mass: outside as f64 / result.n_traj() as f64,
            p_min: grid.p_min(),
            p_max: grid.p_max(),
        });
    }
    let w = 1.0 / (result.n_traj() as f64 * grid.dp());
    let values = values.into_iter().map(|v| v * w).collect();
    WignerField::from_values_unchecked(grid.clone(), values, result.params.q)
}

/// Collapse statistics at the final recorded time. With a0 > a1 the eigenvalues of
/// Â, a trajectory counts as "up" when (⟨Â⟩ − mid)/half_gap > threshold and "down"
/// when it is below −threshold.
pub fn born_statistics(result: &EnsembleResult, threshold: f64) -> Result<BornStatistics> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "threshold {threshold} must lie in (0, 1)"
        )));
    }
    let [e0, e1] = result.params.a_op.eigenvalues();
    let (hi, lo) = (e0.max(e1), e0.min(e1));
    let mid = 0.5 * (hi + lo);
    let half_gap = 0.5 * (hi - lo);
    let k = result.times.len() - 1;
    let (mut up, mut down) = (0usize, 0usize);
    let (mut p_up, mut p_down) = (0.0, 0.0);
    for s in result.samples_at(k) {
        if half_gap == 0.0 {
            continue;
        }
        let x = (s.expectation(&result.params.a_op) - mid) / half_gap;
        if x > threshold {
            up += 1;
            p_up += s.p;
        } else if x < -threshold {
            down += 1;
            p_down += s.p;
        }
    }
    let n = result.n_traj() as f64;
    Ok(BornStatistics {
        threshold,
        frac_up: up as f64 / n,
        frac_down: down as f64 / n,
        unresolved: (result.n_traj() - up - down) as f64 / n,
        mean_p_up: (up > 0).then(|| p_up / up as f64),
        mean_p_down: (down > 0).then(|| p_down / down as f64),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::{expectation, trace_distance};

    fn sat(lambda: f64, q: f64) -> ModelParams {
        ModelParams::new(lambda, 0.25, 0.25, q, Observable::sigma_z()).unwrap()
    }

    fn state(rho: QubitDensity) -> TrajectoryState {
        TrajectoryState { t: 0.0, p: 0.3, rho }
    }

    #[test]
    fn eigenstate_is_not_kicked() {
        let params = sat(1.0, 0.7);
        let s0 = state(QubitDensity::zero());
        let (dt, dw) = (1e-3, 0.02);
        let s1 = step_sde(&s0, &params, dt, dw).unwrap();
        assert!((*s1.rho.matrix() - *s0.rho.matrix()).norm() < 1e-15);
        let expected = 0.3 - dt + (2.0 * 0.25f64).sqrt() * dw;
        assert!((s1.p - expected).abs() < 1e-15);
    }

    #[test]
    fn deterministic_substep_dephases() {
        let params = sat(1.0, 0.0);
        let s0 = state(QubitDensity::plus());
        let dt = 1e-3;
        let s1 = step_sde(&s0, &params, dt, 0.0).unwrap();
        assert_eq!(s1.p, s0.p);
        let expected = 0.5 * (1.0 - 4.0 * 0.25 * dt);
        assert!((s1.rho.matrix().m[0][1].re - expected).abs() < 1e-15);
        assert!((s1.rho.matrix().m[0][0].re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn milstein_correction_balances_dephasing_at_saturation() {
        // With dW = 0 the −½·b′b·dt term exactly undoes the residual-free dephasing on |+⟩.
        let u = Unraveling::new(&sat(1.0, 0.0)).unwrap();
        let s1 = u.step(&state(QubitDensity::plus()), 1e-3, 0.0, Scheme::Milstein, true);
        assert!((s1.rho.matrix().m[0][1].re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn schemes_agree_to_second_order() {
        let u = Unraveling::new(&sat(-1.0, 0.4)).unwrap();
        let rho = QubitDensity::bloch_angles(1.0, 0.3).unwrap();
        for (dt, dw) in [(1e-3, 0.03), (1e-4, -0.01)] {
            let (_, em) = u.increment(rho.matrix(), dt, dw, Scheme::EulerMaruyama);
            let (_, mil) = u.increment(rho.matrix(), dt, dw, Scheme::Milstein);
            assert!((em - mil).norm() <= 2.0 * (dw * dw + dt));
        }
    }

    #[test]
    fn raw_increment_is_traceless() {
        let params = ModelParams::new(0.8, 0.3, 0.5, 1.2, Observable::sigma_x()).unwrap();
        let u = Unraveling::new(&params).unwrap();
        let mut rng = noise_stream(7, 0);
        for _ in 0..500 {
            let r: [f64; 3] = std::array::from_fn(|_| rng.random_range(-0.57..0.57));
            let rho = QubitDensity::from_bloch(r).unwrap();
            let dw: f64 = rng.sample(StandardNormal);
            for scheme in [Scheme::EulerMaruyama, Scheme::Milstein] {
                let (_, d) = u.increment(rho.matrix(), 1e-2, 0.1 * dw, scheme);
                assert!(d.trace().norm() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_diffusion_rejected() {
        let params = ModelParams::new(1.0, 0.0, 0.25, 0.0, Observable::sigma_z()).unwrap();
        assert_eq!(
            Unraveling::new(&params).unwrap_err(),
            Error::UndefinedMeasurementCoefficient
        );
        let spec = EnsembleSpec {
            allow_tradeoff_violation: true,
            ..EnsembleSpec::new(1, 0, SdeConfig::default())
        };
        let init = InitialCondition::delta(QubitDensity::zero(), 0.0);
        assert!(run_ensemble(&spec, &init, &params).is_err());
        // Without coupling the coefficient is never needed.
        let free = ModelParams::new(0.0, 0.0, 0.25, 0.0, Observable::sigma_z()).unwrap();
        assert!(Unraveling::new(&free).is_ok());
    }

    #[test]
    fn tradeoff_violation_needs_opt_in() {
        let params = ModelParams::new(1.0, 0.25, 0.01, 0.0, Observable::sigma_z()).unwrap();
        let init = InitialCondition::delta(QubitDensity::plus(), 0.0);
        let cfg = SdeConfig {
            t_final: 0.01,
            ..SdeConfig::default()
        };
        let spec = EnsembleSpec::new(4, 1, cfg);
        assert!(matches!(
            run_ensemble(&spec, &init, &params),
            Err(Error::TradeoffViolated { .. })
        ));
        let spec = EnsembleSpec {
            allow_tradeoff_violation: true,
            ..spec
        };
        assert!(run_ensemble(&spec, &init, &params).is_ok());
    }

    #[test]
    fn recorded_times_include_final_step() {
        let cfg = SdeConfig {
            dt: 0.1,
            t_final: 1.05,
            record_stride: 4,
            ..SdeConfig::default()
        };
        assert_eq!(cfg.steps(), 11);
        assert_eq!(cfg.recorded_steps(), vec![0, 4, 8, 11]);
    }

    #[test]
    fn single_trajectory_reconstruction() {
        let params = sat(1.0, 0.0);
        let init = InitialCondition::delta(QubitDensity::plus(), 0.0);
        let spec = EnsembleSpec::new(1, 3, SdeConfig::default());
        let res = run_ensemble(&spec, &init, &params).unwrap();
        let grid = MomentumGrid::default();
        let f = reconstruct_field(&res, &grid, 1.0).unwrap();
        assert_eq!(f.values().iter().filter(|v| v.norm() > 0.0).count(), 1);
        assert!((f.normalization() - 1.0).abs() < 1e-8);
        assert!(matches!(
            reconstruct_field(&res, &grid, 0.5005),
            Err(Error::UnrecordedTime(_))
        ));
    }

    #[test]
    fn trajectory_replays_in_isolation() {
        let params = sat(-1.0, 0.4);
        let init = InitialCondition::gaussian(QubitDensity::plus(), 0.0, 1.0).unwrap();
        let cfg = SdeConfig {
            t_final: 0.5,
            record_stride: 50,
            ..SdeConfig::default()
        };
        let res = run_ensemble(&EnsembleSpec::new(16, 99, cfg.clone()), &init, &params).unwrap();
        let u = Unraveling::new(&params).unwrap();
        let alone = run_trajectory(&u, &init, &cfg, 99, 11);
        assert_eq!(alone, res.trajectories()[11]);
        let again = run_ensemble(&EnsembleSpec::new(16, 99, cfg), &init, &params).unwrap();
        assert_eq!(res, again);
    }

    #[test]
    fn eigenstate_born_statistics() {
        let params = sat(1.0, 0.0);
        let init = InitialCondition::delta(QubitDensity::zero(), 0.0);
        let spec = EnsembleSpec::new(
            20,
            5,
            SdeConfig {
                t_final: 0.2,
                ..SdeConfig::default()
            },
        );
        let res = run_ensemble(&spec, &init, &params).unwrap();
        let born = born_statistics(&res, 0.99).unwrap();
        assert_eq!(born.frac_up, 1.0);
        assert!(born_statistics(&res, 1.5).is_err());
    }

    #[test]
    fn ensemble_mean_follows_marginal_law_short_time() {
        let params = sat(1.0, 1.0);
        let init = InitialCondition::gaussian(QubitDensity::plus(), 0.0, 1.0).unwrap();
        let spec = EnsembleSpec::new(
            2000,
            17,
            SdeConfig {
                t_final: 0.5,
                record_stride: 250,
                ..SdeConfig::default()
            },
        );
        let res = run_ensemble(&spec, &init, &params).unwrap();
        let k = res.record_index(0.5).unwrap();
        let mean = QubitDensity::from_matrix_unchecked(res.mean_state(k));
        let exact = crate::master::evolve_qubit_marginal(&init.rho0, &params, 0.5);
        assert!(trace_distance(&mean, &exact) < 5.0 / (2000f64).sqrt());
        assert!((expectation(&params.a_op, &mean)).abs() < 0.1);
    }
}
