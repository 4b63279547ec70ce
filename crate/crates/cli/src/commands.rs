use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use cqsim_core::io::{write_field, write_meanfield, write_table, write_trajectory};
use cqsim_core::validity::window_sweep;
use cqsim_core::{
    born_statistics, check_tradeoff, evolve_qubit_marginal, negativity_onset, positivity_scan, product_field,
    reconstruct_field, run_ensemble, run_meanfield, timescale_window, trace_distance, ClosedPropagator, EnsembleResult,
    Error, ModelParams, OpenPropagator, QubitDensity, WignerField,
};

use crate::config::{Config, ConfigError};

/// A failed command together with its exit code.
#[derive(Debug)]
pub enum Failure {
    Io(String),
    Config(String),
    Precondition(String),
    Invariant(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Io(_) => 1,
            Failure::Config(_) => 2,
            Failure::Precondition(_) => 3,
            Failure::Invariant(_) => 4,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Io(m) | Failure::Config(m) | Failure::Precondition(m) | Failure::Invariant(m) => m,
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.0)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_invariant_breach() {
            Failure::Invariant(e.to_string())
        } else {
            Failure::Precondition(e.to_string())
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

impl From<cqsim_core::io::IoError> for Failure {
    fn from(e: cqsim_core::io::IoError) -> Self {
        Failure::Io(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

/// Output directory of one run.
struct RunDir {
    root: PathBuf,
}

impl RunDir {
    fn create(root: &Path, cfg: &Config) -> Result<Self, Failure> {
        fs::create_dir_all(root)?;
        fs::write(root.join("config.toml"), cfg.to_toml())?;
        Ok(Self {
            root: root.to_path_buf(),
        })
    }

    fn file(&self, rel: &str) -> Result<fs::File, Failure> {
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        Ok(fs::File::create(path)?)
    }

    fn json(&self, rel: &str, value: &impl Serialize) -> Outcome {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| Failure::Io(e.to_string()))?;
        text.push('\n');
        fs::write(self.root.join(rel), text)?;
        Ok(())
    }
}

fn echo(params: &ModelParams) -> Vec<(String, String)> {
    let a = params.a_op.matrix();
    vec![
        ("lambda".into(), params.lambda.to_string()),
        ("gamma_c".into(), params.gamma_c.to_string()),
        ("gamma_q".into(), params.gamma_q.to_string()),
        ("hbar".into(), params.hbar.to_string()),
        ("observable".into(), format!("{a:?}")),
    ]
}

fn field_name(k: usize) -> String {
    format!("fields/field_{k:03}.csv")
}

struct Snapshot {
    t: f64,
    field: WignerField,
}

fn snapshot_summary(snaps: &[Snapshot]) -> Value {
    Value::Array(
        snaps
            .iter()
            .enumerate()
            .map(|(k, s)| {
                let (lo, at) = s.field.min_eigenvalue();
                let (mean, var) = s.field.momentum_moments();
                json!({
                    "t": s.t,
                    "file": field_name(k),
                    "normalization": s.field.normalization(),
                    "min_eigenvalue": lo,
                    "p_at_min": at,
                    "mean_p": mean,
                    "var_p": var,
                })
            })
            .collect(),
    )
}

fn write_snapshots(dir: &RunDir, snaps: &[Snapshot], params: &ModelParams) -> Outcome {
    let e = echo(params);
    for (k, s) in snaps.iter().enumerate() {
        write_field(dir.file(&field_name(k))?, &s.field, s.t, &e)?;
    }
    Ok(())
}

pub fn closed(cfg: &Config, out: &Path) -> Outcome {
    let params = cfg.params()?.without_dissipation();
    let grid = cfg.grid()?;
    let init = cfg.initial()?;
    let times = cfg.snapshot_times()?;
    let series = cfg.series_times();
    let dir = RunDir::create(out, cfg)?;

    let field0 = product_field(&init.for_spectral(&grid), &grid, params.q)?;
    let prop = ClosedPropagator::new(&params, &grid);
    let snaps = times
        .iter()
        .map(|&t| {
            Ok(Snapshot {
                t,
                field: prop.propagate(&field0, t)?,
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let neg = negativity_onset(&init, &params, &grid, &series)?;

    write_snapshots(&dir, &snaps, &params)?;
    let rows: Vec<Vec<f64>> = neg.iter().map(|n| vec![n.t, n.min_eigenvalue, n.p_at]).collect();
    write_table(dir.file("negativity.csv")?, &["t", "min_eig", "p_at"], &rows)?;
    dir.json(
        "summary.json",
        &json!({
            "command": "closed",
            "model": cfg.model,
            "snapshots": snapshot_summary(&snaps),
            "negativity": neg,
        }),
    )
}

pub fn master(cfg: &Config, out: &Path) -> Outcome {
    let params = cfg.params()?;
    let grid = cfg.grid()?;
    let init = cfg.initial()?;
    let times = cfg.snapshot_times()?;
    let series = cfg.series_times();
    let dir = RunDir::create(out, cfg)?;

    let field0 = product_field(&init.for_spectral(&grid), &grid, params.q)?;
    let prop = OpenPropagator::new(&params, &grid);
    let snaps = times
        .iter()
        .map(|&t| {
            Ok(Snapshot {
                t,
                field: prop.propagate(&field0, t)?,
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let pos = positivity_scan(&init, &params, &grid, &series)?;

    write_snapshots(&dir, &snaps, &params)?;
    let rows: Vec<Vec<f64>> = pos.iter().map(|n| vec![n.t, n.min_eigenvalue, n.p_at]).collect();
    write_table(dir.file("positivity.csv")?, &["t", "min_eig", "p_at"], &rows)?;
    let mut marg = Vec::with_capacity(snaps.len());
    for s in &snaps {
        let rho = s.field.qubit_marginal()?;
        let m = rho.matrix().m;
        marg.push(vec![
            s.t,
            m[0][0].re,
            m[0][1].re,
            m[0][1].im,
            m[1][1].re,
            cqsim_core::purity(&rho),
        ]);
    }
    write_table(
        dir.file("qubit_marginal.csv")?,
        &["t", "re00", "re01", "im01", "re11", "purity"],
        &marg,
    )?;
    dir.json(
        "summary.json",
        &json!({
            "command": "master",
            "model": cfg.model,
            "tradeoff": check_tradeoff(&params),
            "snapshots": snapshot_summary(&snaps),
            "positivity": pos,
        }),
    )
}

pub fn meanfield(cfg: &Config, out: &Path) -> Outcome {
    let params = cfg.params()?;
    let init = cfg.initial()?;
    let sde = cfg.sde()?;
    let dir = RunDir::create(out, cfg)?;
    let run = run_meanfield(&init, &params, sde.t_final, sde.dt)?;
    write_meanfield(dir.file("meanfield.csv")?, &run)?;
    let last = run.last().expect("at least one state");
    dir.json(
        "summary.json",
        &json!({
            "command": "meanfield",
            "model": cfg.model,
            "steps": run.len() - 1,
            "final": { "t": last.t, "p": last.p, "bloch": last.rho.bloch(), "purity": cqsim_core::purity(&last.rho) },
        }),
    )
}

fn reconstruction_report(cfg: &Config, res: &EnsembleResult, at: f64) -> Result<Value, Failure> {
    let grid = cfg.grid()?;
    let coarse = cfg.coarse_grid()?;
    let init = cfg.initial()?;
    let recon = match reconstruct_field(res, &coarse, at) {
        Ok(f) => f,
        Err(e) => return Ok(json!({ "t": at, "skipped": e.to_string() })),
    };
    let field0 = product_field(&init.for_spectral(&grid), &grid, res.params().q)?;
    match OpenPropagator::new(res.params(), &grid).propagate(&field0, at) {
        Ok(exact) => {
            let l1 = recon.l1_distance(&exact.coarse_grain(&coarse)?)?;
            Ok(json!({
                "t": at,
                "grid_points": coarse.len(),
                "l1_to_master": l1,
                "reference_5_over_sqrt_n": 5.0 / (res.n_traj() as f64).sqrt(),
            }))
        }
        Err(e @ (Error::BoundaryGuard { .. } | Error::BoundaryMass { .. })) => {
            Ok(json!({ "t": at, "skipped": e.to_string() }))
        }
        Err(e) => Err(e.into()),
    }
}

pub fn ensemble(cfg: &Config, out: &Path) -> Outcome {
    let params = cfg.params()?;
    let init = cfg.initial()?;
    let spec = cfg.ensemble()?;
    let dir = RunDir::create(out, cfg)?;
    let res = run_ensemble(&spec, &init, &params)?;
    let born = born_statistics(&res, cfg.sde.born_threshold).map_err(|e| Failure::Config(format!("[sde] {e}")))?;
    let moments: Vec<_> = (0..res.times().len()).map(|k| res.moments(k)).collect();

    for (i, tr) in res.trajectories().iter().take(cfg.output.trajectories).enumerate() {
        write_trajectory(
            dir.file(&format!("trajectories/traj_{i:04}.csv"))?,
            res.times(),
            &tr.samples,
        )?;
    }
    let rows: Vec<Vec<f64>> = moments
        .iter()
        .map(|m| {
            let [x, y, z] = m.mean_bloch;
            vec![
                m.t,
                m.mean_p,
                m.var_p,
                x,
                y,
                z,
                m.mean_purity,
                m.mean_expectation,
                m.stderr_expectation,
                m.min_eigenvalue,
            ]
        })
        .collect();
    write_table(
        dir.file("moments.csv")?,
        &[
            "t",
            "mean_p",
            "var_p",
            "bloch_x",
            "bloch_y",
            "bloch_z",
            "mean_purity",
            "mean_a",
            "stderr_a",
            "min_eig",
        ],
        &rows,
    )?;
    let t_last = *res.times().last().expect("at least one recorded time");
    let recon = reconstruction_report(cfg, &res, t_last)?;
    dir.json(
        "summary.json",
        &json!({
            "command": "ensemble",
            "model": cfg.model,
            "seed": spec.seed,
            "n_traj": spec.n_traj,
            "sde": spec.config,
            "tradeoff": check_tradeoff(&params),
            "born": born,
            "diagnostics": res.diagnostics(),
            "moments": moments,
            "reconstruction": recon,
        }),
    )
}

pub fn validity(cfg: &Config, out: &Path) -> Outcome {
    let params = cfg.params()?;
    let rho0 = cfg.rho0()?;
    let chi = cfg.validity.chi;
    let n = cfg.validity.sweep_points.max(2);
    let angles: Vec<f64> = (0..n)
        .map(|k| std::f64::consts::PI * k as f64 / (n - 1) as f64)
        .collect();
    let report = timescale_window(&params, &rho0, chi).map_err(|e| Failure::Config(format!("[validity] {e}")))?;
    let sweep = window_sweep(&params, &angles, chi).map_err(|e| Failure::Config(format!("[validity] {e}")))?;
    let dir = RunDir::create(out, cfg)?;
    let rows: Vec<Vec<f64>> = sweep
        .iter()
        .map(|r| {
            vec![
                r.theta,
                r.mean_a,
                r.variance_a,
                r.tau_lower.unwrap_or(f64::NAN),
                r.tau_upper,
                r.width.unwrap_or(f64::NAN),
                f64::from(u8::from(r.window_nonempty)),
            ]
        })
        .collect();
    write_table(
        dir.file("sweep.csv")?,
        &[
            "theta",
            "mean_a",
            "variance_a",
            "tau_lower",
            "tau_upper",
            "width",
            "window_nonempty",
        ],
        &rows,
    )?;
    dir.json(
        "validity.json",
        &json!({
            "command": "validity",
            "model": cfg.model,
            "tradeoff": check_tradeoff(&params),
            "report": report,
            "sweep": sweep,
        }),
    )
}

fn meanfield_rho(cfg: &Config, params: &ModelParams, t: f64) -> Result<QubitDensity, Failure> {
    let init = cfg.initial()?;
    if t == 0.0 {
        return Ok(init.rho0);
    }
    let steps = (t / cfg.sde.dt).ceil().max(1.0);
    let run = run_meanfield(&init, params, t, t / steps)?;
    Ok(run.last().expect("at least one state").rho)
}

pub fn compare(cfg: &Config, out: &Path) -> Outcome {
    let params = cfg.params()?;
    let init = cfg.initial()?;
    let grid = cfg.grid()?;
    let coarse = cfg.coarse_grid()?;
    let spec = cfg.ensemble()?;
    let times = cfg.snapshot_times()?;
    let recorded: Vec<f64> = spec
        .config
        .recorded_steps()
        .into_iter()
        .map(|k| k as f64 * spec.config.dt)
        .collect();
    for &t in &times {
        if !recorded.iter().any(|r| (r - t).abs() <= 1e-9 * t.max(1.0)) {
            return Err(Failure::Config(format!(
                "inconsistent configuration: output time {t} is not a recorded SDE time \
                 (multiples of dt·record_stride up to t_final)"
            )));
        }
    }
    let report = timescale_window(&params, &init.rho0, cfg.validity.chi)
        .map_err(|e| Failure::Config(format!("[validity] {e}")))?;
    let dir = RunDir::create(out, cfg)?;

    let res = run_ensemble(&spec, &init, &params)?;
    let field0 = product_field(&init.for_spectral(&grid), &grid, params.q)?;
    let prop = OpenPropagator::new(&params, &grid);
    let var_a0 = report.variance_a;
    let mut rows = Vec::with_capacity(times.len());
    for &t in &times {
        let k = res.record_index(t)?;
        let exact = evolve_qubit_marginal(&init.rho0, &params, t);
        let mf = meanfield_rho(cfg, &params, t)?;
        let ens = QubitDensity::from_matrix_unchecked(res.mean_state(k));
        let m = res.moments(k);
        let (master_var, l1) = match prop.propagate(&field0, t) {
            Ok(f) => {
                let l1 = reconstruct_field(&res, &coarse, t)
                    .and_then(|r| r.l1_distance(&f.coarse_grain(&coarse)?))
                    .ok();
                (Some(f.momentum_moments().1), l1)
            }
            Err(Error::BoundaryGuard { .. }) => (None, None),
            Err(e) => return Err(e.into()),
        };
        rows.push(json!({
            "t": t,
            "trace_distance_meanfield_exact": trace_distance(&mf, &exact),
            "trace_distance_ensemble_exact": trace_distance(&ens, &exact),
            "trace_distance_meanfield_ensemble": trace_distance(&mf, &ens),
            "var_p_meanfield": init.p_dist.variance(),
            "var_p_master": master_var,
            "var_p_ensemble": m.var_p,
            "predicted_var_gap": params.lambda.powi(2) * t * t * var_a0 + 2.0 * params.gamma_c * t,
            "l1_reconstruction_master": l1,
        }));
    }

    let mut probes = Vec::new();
    let mut probe = |label: &str, t: f64| -> Outcome {
        if t.is_finite() && t >= 0.0 {
            let exact = evolve_qubit_marginal(&init.rho0, &params, t);
            let mf = meanfield_rho(cfg, &params, t)?;
            probes
                .push(json!({ "label": label, "t": t, "trace_distance_meanfield_exact": trace_distance(&mf, &exact) }));
        }
        Ok(())
    };
    if let Some(mid) = report.probe_time {
        probe("window_midpoint", mid)?;
    }
    probe("half_tau_upper", 0.5 * report.tau_upper)?;
    probe("ten_tau_upper", 10.0 * report.tau_upper)?;

    let tol = 5.0 / (spec.n_traj as f64).sqrt();
    dir.json(
        "compare.json",
        &json!({
            "command": "compare",
            "model": cfg.model,
            "seed": spec.seed,
            "n_traj": spec.n_traj,
            "agreement_tolerance_5_over_sqrt_n": tol,
            "times": rows,
            "validity": report,
            "window_empty": !report.window_nonempty,
            "probes": probes,
            "diagnostics": res.diagnostics(),
        }),
    )
}
