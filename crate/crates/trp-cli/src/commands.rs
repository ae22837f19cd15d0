//! The five CLI commands. Every output file is written atomically
//! (temp-then-rename); physics outputs are byte-reproducible for identical
//! configs, and timing lives only in the sweep metadata sidecar.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::json;

use trp::{
    evolve, experimental_twist_for_eta, eta_from_experiment, gate_fidelity, ideal_cnot,
    inversion_time_quartic, pi_pulse_duration, resonance_times, simulate_cnot,
    simulate_cnot_dimensionless, sweep_eta_with_workers, twist_from_eta, DynamicsError,
    SweepError, SweepSpec, Tau0Policy, FAULT_TOLERANCE_BENCHMARK,
};

use crate::config::RunConfig;
use crate::AppError;

pub struct Context {
    pub config: RunConfig,
    pub out_dir: PathBuf,
    pub workers: Option<usize>,
}

impl Context {
    fn write(&self, name: &str, contents: &str) -> Result<PathBuf, AppError> {
        fs::create_dir_all(&self.out_dir)
            .map_err(|e| AppError::Io(format!("cannot create {}: {e}", self.out_dir.display())))?;
        let path = self.out_dir.join(name);
        write_atomic(&path, contents)?;
        Ok(path)
    }
}

fn write_atomic(path: &Path, contents: &str) -> Result<(), AppError> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents).map_err(|e| AppError::Io(format!("write {}: {e}", tmp.display())))?;
    fs::rename(&tmp, path).map_err(|e| AppError::Io(format!("rename to {}: {e}", path.display())))
}

fn pretty(value: &serde_json::Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("JSON serialization cannot fail");
    text.push('\n');
    text
}

/// `0 → "0"`, otherwise signed with two decimals; matches the regime prints
/// of the resonance tables.
fn fmt_tau(tau: f64) -> String {
    if tau == 0.0 {
        "0".to_string()
    } else {
        format!("{tau:+.2}")
    }
}

pub fn cmd_resonances(ctx: &Context) -> Result<(), AppError> {
    let profile = ctx
        .config
        .profile
        .as_ref()
        .ok_or_else(|| AppError::Config("resonances requires a profile block".into()))?;
    let (n, _, eta) = profile.dimensionless()?;
    let set = resonance_times(n, eta)?;

    let plural = if set.count() == 1 { "resonance" } else { "resonances" };
    let times = set.times().iter().copied().map(fmt_tau).collect::<Vec<_>>().join(", ");
    println!("{} {}: {}", set.count(), plural, times);
    println!("regime: {}", set.regime());

    let path = ctx.write(
        "resonances.json",
        &pretty(&json!({
            "n": n,
            "eta": eta,
            "count": set.count(),
            "times": set.times(),
            "regime": set.regime().to_string(),
        })),
    )?;
    println!("wrote {}", path.display());
    Ok(())
}

pub fn cmd_simulate(ctx: &Context) -> Result<(), AppError> {
    let profile_cfg = ctx
        .config
        .profile
        .as_ref()
        .ok_or_else(|| AppError::Config("simulate requires a profile block".into()))?;
    let profile = profile_cfg.build()?;
    let settings = ctx.config.settings();
    settings.validate().map_err(AppError::from_config_side)?;

    let trajectory = evolve(&profile, &settings)?;
    let final_p = trajectory.final_probability();
    let norm_drift = trajectory.norm_drift();
    let d = profile.dimensionless();
    let res_times: Vec<f64> = resonance_times(profile.n(), d.eta)
        .map(|set| set.times().to_vec())
        .unwrap_or_default();

    let csv_path = ctx.write("trajectory.csv", &trajectory.to_csv())?;
    let summary = json!({
        "final_P": final_p,
        "norm_drift": norm_drift,
        "resonance_times": res_times,
        "fault_tolerant": final_p < FAULT_TOLERANCE_BENCHMARK,
        "n": profile.n(),
        "lambda": d.lambda,
        "eta": d.eta,
        "tau0": profile.tau0(),
        "grid_points": settings.grid_points,
    });
    let summary_path = ctx.write("summary.json", &pretty(&summary))?;

    println!(
        "final_P = {final_p:.6e}  norm_drift = {norm_drift:.3e}  fault_tolerant = {}",
        final_p < FAULT_TOLERANCE_BENCHMARK
    );
    println!("wrote {}", csv_path.display());
    println!("wrote {}", summary_path.display());
    Ok(())
}

pub fn cmd_sweep(ctx: &Context) -> Result<(), AppError> {
    let sweep_cfg = ctx
        .config
        .sweep
        .as_ref()
        .ok_or_else(|| AppError::Config("sweep requires a sweep block".into()))?;
    let spec = SweepSpec {
        n: sweep_cfg.n,
        lambda: sweep_cfg.lambda,
        eta_lo: sweep_cfg.eta_lo,
        eta_hi: sweep_cfg.eta_hi,
        steps: sweep_cfg.steps,
        settings: ctx.config.settings(),
        tau0: match sweep_cfg.tau0 {
            Some(t) => Tau0Policy::Fixed(t),
            None => Tau0Policy::Auto,
        },
    };
    let workers = ctx.workers.unwrap_or_else(rayon_default_workers);
    let result = sweep_eta_with_workers(&spec, workers).map_err(AppError::from_sweep)?;

    let csv_path = ctx.write("sweep.csv", &result.to_csv())?;
    let row_errors: Vec<serde_json::Value> = result
        .rows
        .iter()
        .filter_map(|r| r.error.as_ref().map(|e| json!({"eta": r.eta, "error": e})))
        .collect();
    let sidecar = json!({
        "meta": result.meta,
        "row_errors": row_errors,
        "generated_unix_ms": now_unix_ms(),
    });
    let meta_path = ctx.write("sweep_meta.json", &pretty(&sidecar))?;

    let failed = result.rows.iter().filter(|r| r.error.is_some()).count();
    println!("{} rows ({} failed)", result.rows.len(), failed);
    for row in &result.rows {
        println!("eta = {:+.6e}  P = {:.6e}  tau0 = {}", row.eta, row.p, row.tau0);
    }
    println!("wrote {}", csv_path.display());
    println!("wrote {}", meta_path.display());
    Ok(())
}

fn rayon_default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn now_unix_ms() -> u128 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0)
}

pub fn cmd_cnot(ctx: &Context) -> Result<(), AppError> {
    let system_cfg = ctx
        .config
        .system
        .as_ref()
        .ok_or_else(|| AppError::Config("cnot requires a system block".into()))?;
    let profile_cfg = ctx
        .config
        .profile
        .as_ref()
        .ok_or_else(|| AppError::Config("cnot requires a profile block".into()))?;
    let sys = system_cfg.build().map_err(AppError::from_cnot)?;
    let settings = ctx.config.settings();

    // tau0 = 0 is the degenerate no-sweep diagnostic; it cannot form a
    // valid SweepProfile, so it routes through the dimensionless entry.
    let outcome = if profile_cfg.tau0() == Some(0.0) {
        let (n, lambda, eta) = profile_cfg.dimensionless()?;
        simulate_cnot_dimensionless(&sys, n, lambda, eta, 0.0, &settings)
    } else {
        let profile = profile_cfg.build()?;
        simulate_cnot(&sys, &profile, &settings)
    }
    .map_err(AppError::from_cnot)?;

    let levels = sys.level_structure();
    let fidelity = gate_fidelity(&outcome.gate, &ideal_cnot());
    let gate_path = ctx.write("gate.json", &outcome.gate.to_json())?;
    let summary = json!({
        "fidelity": fidelity,
        "per_state_agreement": outcome.per_state_agreement,
        "column_phases": outcome.column_phases,
        "unitarity_error": outcome.unitarity_error,
        "radial_drift": outcome.radial_drift,
        "selectivity_warning": outcome.selectivity_warning,
        "detuning": outcome.detuning,
        "bandwidth": outcome.bandwidth,
        "omega_plus": levels.omega_plus,
        "omega_minus": levels.omega_minus,
        "energies": levels.energies,
    });
    let summary_path = ctx.write("cnot_summary.json", &pretty(&summary))?;

    println!(
        "fidelity = {fidelity:.6}  unitarity_error = {:.3e}  selective = {}",
        outcome.unitarity_error, !outcome.selectivity_warning
    );
    if outcome.selectivity_warning {
        println!(
            "warning: control-0 detuning {:.3} does not clear the swept band {:.3}; \
             the gate is not frequency selective",
            outcome.detuning, outcome.bandwidth
        );
    }
    println!("wrote {}", gate_path.display());
    println!("wrote {}", summary_path.display());
    Ok(())
}

pub fn cmd_translate(ctx: &Context) -> Result<(), AppError> {
    let exp_cfg = ctx
        .config
        .experimental
        .as_ref()
        .ok_or_else(|| AppError::Config("translate requires an experimental block".into()))?;
    let profile_cfg = ctx
        .config
        .profile
        .as_ref()
        .ok_or_else(|| AppError::Config("translate requires a profile block (n, lambda, eta)".into()))?;
    let (n, lambda, profile_eta) = profile_cfg.dimensionless()?;
    let exp = exp_cfg.build()?;

    // Either direction: a given B_exp determines eta, otherwise the target
    // eta (explicit or from the profile) determines B_exp.
    let (eta, twist_exp) = if let Some(b_exp) = exp_cfg.b_exp {
        (eta_from_experiment(n, &exp)?, b_exp)
    } else {
        let target = exp_cfg.target_eta.unwrap_or(profile_eta);
        (target, experimental_twist_for_eta(n, &exp, target)?)
    };

    // Canonical dimensional representative of (lambda, eta): b = 1, a = lambda.
    let twist_theory = twist_from_eta(n, lambda, 1.0, eta);
    let t4 = inversion_time_quartic(exp.inversion_rate, exp.omega1, lambda);
    let t_pi = pi_pulse_duration(exp.omega1);

    println!("theory:       n = {n}  lambda = {lambda}  eta_{n} = {eta:.6e}  (b = 1, a = {lambda}, B = {twist_theory:.6e})");
    println!(
        "experimental: A = {} Hz  delta = {} Hz  omega1 = {} Hz  B_exp = {twist_exp:.6e}",
        exp.inversion_rate, exp.delta, exp.omega1
    );
    println!("T4 (quartic inversion time) = {t4:.6e} s");
    println!("pi-pulse baseline           = {t_pi:.6e} s");

    let path = ctx.write(
        "translate.json",
        &pretty(&json!({
            "n": n,
            "lambda": lambda,
            "eta": eta,
            "B_theory": twist_theory,
            "A_hz": exp.inversion_rate,
            "delta_hz": exp.delta,
            "omega1_hz": exp.omega1,
            "B_exp": twist_exp,
            "T4_s": t4,
            "pi_pulse_s": t_pi,
        })),
    )?;
    println!("wrote {}", path.display());
    Ok(())
}

impl AppError {
    /// Sweep rows record their own integrator failures; an error out of the
    /// sweep machinery itself is a spec problem except for pool failures.
    fn from_sweep(err: SweepError) -> AppError {
        match err {
            SweepError::Dynamics(DynamicsError::StepUnderflow { .. }) => {
                AppError::Numeric(err.to_string())
            }
            other => AppError::Config(other.to_string()),
        }
    }

    fn from_cnot(err: trp::CnotError) -> AppError {
        match err {
            trp::CnotError::Dynamics(DynamicsError::StepUnderflow { .. }) => {
                AppError::Numeric(err.to_string())
            }
            other => AppError::Config(other.to_string()),
        }
    }

    fn from_config_side(err: DynamicsError) -> AppError {
        AppError::Config(err.to_string())
    }
}
