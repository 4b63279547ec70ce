use cqsim_core::oracle::{closed_solution, drift_diffusion_bin_masses, open_field, open_solution};
use cqsim_core::*;

fn sup_dist(a: &WignerField, b: &WignerField) -> f64 {
    a.values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (*x - *y).norm())
        .fold(0.0, f64::max)
}

fn tilted() -> QubitDensity {
    QubitDensity::bloch_angles(0.9, 0.6).unwrap()
}

#[test]
fn closed_propagator_matches_oracle() {
    let grid = MomentumGrid::default();
    let init = InitialCondition::gaussian(tilted(), 0.5, 1.0).unwrap();
    for a in [Observable::sigma_z(), Observable::sigma_x(), Observable::sigma_y()] {
        let params = ModelParams::closed(1.0, 0.8, a).unwrap();
        let f0 = product_field(&init, &grid, params.q).unwrap();
        for t in [0.3, 1.0, 4.0] {
            let num = propagate_closed(&f0, &params, t).unwrap();
            let values = grid
                .points()
                .map(|p| closed_solution(p, t, &init, &params).unwrap())
                .collect();
            let exact = WignerField::new(grid.clone(), values, params.q).unwrap();
            assert!(sup_dist(&num, &exact) < 1e-10, "t = {t}");
        }
    }
}

#[test]
fn open_propagator_matches_oracle() {
    let grid = MomentumGrid::default();
    let init = InitialCondition::gaussian(tilted(), -0.5, 1.2).unwrap();
    let rotated = Observable::new(ComplexMat2::pauli_x() * 0.6 + ComplexMat2::pauli_z() * 0.8).unwrap();
    for a in [Observable::sigma_z(), rotated] {
        let params = ModelParams::new(-0.7, 0.3, 0.4, 1.1, a).unwrap();
        let f0 = product_field(&init, &grid, params.q).unwrap();
        for t in [0.5, 2.0, 5.0] {
            let num = propagate_open(&f0, &params, t).unwrap();
            let exact = open_field(&grid, t, &init, &params).unwrap();
            assert!(sup_dist(&num, &exact) < 1e-10, "t = {t}");
        }
    }
}

#[test]
fn qubit_marginal_law_matches_field() {
    let grid = MomentumGrid::default();
    let init = InitialCondition::gaussian(tilted(), 0.0, 1.0).unwrap();
    let params = ModelParams::new(1.0, 0.25, 0.25, 0.6, Observable::sigma_z()).unwrap();
    for t in [0.5, 1.0, 2.0] {
        let rho = open_field(&grid, t, &init, &params).unwrap().qubit_marginal().unwrap();
        let law = evolve_qubit_marginal(&init.rho0, &params, t);
        assert!(trace_distance(&rho, &law) < 1e-10);
        let p = 0.3;
        assert!(open_solution(p, t, &init, &params).unwrap().is_hermitian(1e-15));
    }
}

#[test]
fn eigenstate_ensemble_follows_drift_diffusion() {
    let params = ModelParams::new(1.0, 0.25, 0.25, 0.0, Observable::sigma_z()).unwrap();
    let init = InitialCondition::gaussian(QubitDensity::one(), 0.0, 1.0).unwrap();
    let n = 4000;
    let cfg = SdeConfig {
        dt: 1e-3,
        t_final: 2.0,
        record_stride: 500,
        ..SdeConfig::default()
    };
    let res = run_ensemble(&EnsembleSpec::new(n, 21, cfg), &init, &params).unwrap();
    let coarse = MomentumGrid::new(-20.0, 20.0, 64).unwrap();
    let f = reconstruct_field(&res, &coarse, 2.0).unwrap();
    let masses = drift_diffusion_bin_masses(&coarse, 2.0, -1.0, &init, &params);
    let mut l1 = 0.0;
    for (v, m) in f.values().iter().zip(&masses) {
        assert!(v.m[0][1].norm() < 1e-12 && v.m[0][0].re.abs() < 1e-12);
        l1 += (v.m[1][1].re * coarse.dp() - m).abs();
    }
    assert!(l1 <= 5.0 / (n as f64).sqrt(), "L1 = {l1}");
}

#[test]
fn tilted_state_obeys_born_rule() {
    let params = ModelParams::new(1.0, 0.25, 0.25, 0.0, Observable::sigma_z()).unwrap();
    let rho0 = QubitDensity::from_bloch([0.8, 0.0, 0.6]).unwrap();
    let init = InitialCondition::delta(rho0, 0.0);
    let n = 10_000;
    let cfg = SdeConfig {
        dt: 2e-3,
        t_final: 10.0,
        record_stride: 5000,
        ..SdeConfig::default()
    };
    let res = run_ensemble(&EnsembleSpec::new(n, 5, cfg), &init, &params).unwrap();
    let born = born_statistics(&res, 0.9).unwrap();
    let band = 3.0 * (0.16 / n as f64).sqrt();
    assert!((born.frac_up - 0.8).abs() <= band, "{born:?}");
    assert!(born.unresolved < 0.01);
}

#[test]
fn ensemble_is_independent_of_thread_count() {
    let params = ModelParams::new(-1.0, 0.25, 0.25, 0.5, Observable::sigma_z()).unwrap();
    let init = InitialCondition::gaussian(QubitDensity::plus(), 0.0, 1.0).unwrap();
    let cfg = SdeConfig {
        t_final: 0.5,
        record_stride: 50,
        ..SdeConfig::default()
    };
    let spec = EnsembleSpec::new(64, 99, cfg);
    let run = |k| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .unwrap()
            .install(|| run_ensemble(&spec, &init, &params).unwrap())
    };
    assert_eq!(run(1), run(3));
}
