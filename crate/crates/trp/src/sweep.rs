//! Twist-strength scans, minimum search, and window-convergence checks.
//!
//! Rows of a scan are independent pure evaluations of the dynamics engine, so
//! they may run on any number of worker threads; results are assembled in
//! grid order and are bit-identical regardless of parallelism. Wall-clock
//! times are carried along as diagnostics and are the only
//! non-reproducible field.

use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::dynamics::{evolve_dimensionless, DynamicsError, IntegratorSettings};
use crate::profile::default_window;

/// Successive window doublings changing the final probability by no more
/// than this count as converged.
pub const CONVERGENCE_DELTA: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SweepError {
    #[error("invalid sweep spec: {0}")]
    InvalidSpec(String),
    #[error("no interior minimum of P(eta) in [{lo}, {hi}]")]
    NoInteriorMinimum { lo: f64, hi: f64 },
    #[error("worker pool: {0}")]
    Pool(String),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

/// How each row of a scan chooses its sweep window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Tau0Policy {
    /// Per-row [`default_window`]: resonances move with η, so the window is
    /// resolved for each row and recorded alongside it.
    Auto,
    /// One fixed window for every row.
    Fixed(f64),
}

impl Tau0Policy {
    fn resolve(&self, n: u32, eta: f64) -> f64 {
        match *self {
            Tau0Policy::Auto => default_window(n, eta),
            Tau0Policy::Fixed(tau0) => tau0,
        }
    }
}

/// A uniform scan of the final transition probability over a twist-strength
/// interval.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSpec {
    pub n: u32,
    pub lambda: f64,
    pub eta_lo: f64,
    pub eta_hi: f64,
    /// Number of grid points. A single-point scan (`steps = 1`) requires
    /// `eta_lo == eta_hi`; otherwise `steps ≥ 2` and `eta_lo < eta_hi`.
    pub steps: usize,
    pub settings: IntegratorSettings,
    pub tau0: Tau0Policy,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), SweepError> {
        if self.n < 1 {
            return Err(SweepError::InvalidSpec(format!("twist order n = {} (need n >= 1)", self.n)));
        }
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(SweepError::InvalidSpec(format!("lambda = {} (need > 0)", self.lambda)));
        }
        if !self.eta_lo.is_finite() || !self.eta_hi.is_finite() {
            return Err(SweepError::InvalidSpec("eta bounds must be finite".into()));
        }
        let single = self.steps == 1 && self.eta_lo == self.eta_hi;
        let range = self.steps >= 2 && self.eta_lo < self.eta_hi;
        if !(single || range) {
            return Err(SweepError::InvalidSpec(format!(
                "need steps >= 2 with eta_lo < eta_hi, or a single point with eta_lo == eta_hi; \
                 got steps = {}, eta_lo = {}, eta_hi = {}",
                self.steps, self.eta_lo, self.eta_hi
            )));
        }
        if let Tau0Policy::Fixed(tau0) = self.tau0 {
            if !(tau0.is_finite() && tau0 > 0.0) {
                return Err(SweepError::InvalidSpec(format!("fixed tau0 = {tau0} (need > 0)")));
            }
        }
        self.settings.validate()?;
        Ok(())
    }

    /// The η grid, endpoints included.
    pub fn grid(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.eta_lo];
        }
        let span = self.eta_hi - self.eta_lo;
        (0..self.steps)
            .map(|k| {
                if k == self.steps - 1 {
                    self.eta_hi
                } else {
                    self.eta_lo + span * k as f64 / (self.steps - 1) as f64
                }
            })
            .collect()
    }

    /// Deterministic fingerprint of everything that determines the rows.
    pub fn settings_hash(&self) -> String {
        let canon = format!(
            "n={};lambda={:.17e};eta_lo={:.17e};eta_hi={:.17e};steps={};tau0={:?};\
             rtol={:.17e};atol={:.17e};max_step={:.17e};grid={}",
            self.n,
            self.lambda,
            self.eta_lo,
            self.eta_hi,
            self.steps,
            self.tau0,
            self.settings.rtol,
            self.settings.atol,
            self.settings.max_step,
            self.settings.grid_points,
        );
        format!("{:016x}", fnv1a(canon.as_bytes()))
    }
}

fn fnv1a(data: &[u8]) -> u64 {
    let mut hash = 0xcbf29ce484222325u64;
    for &byte in data {
        hash ^= byte as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

/// One row of a scan. A failed integration leaves `p` and `norm_drift` NaN
/// with the failure recorded in `error`; it does not abort the scan.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub eta: f64,
    pub p: f64,
    pub norm_drift: f64,
    pub tau0: f64,
    pub wall_ms: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepMeta {
    pub n: u32,
    pub lambda: f64,
    pub eta_lo: f64,
    pub eta_hi: f64,
    pub steps: usize,
    pub tau0: Tau0Policy,
    pub settings: IntegratorSettings,
    pub settings_hash: String,
    pub workers: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub meta: SweepMeta,
}

impl SweepResult {
    /// CSV export: `eta,P,norm_drift,tau0,wall_ms`. All physics columns carry
    /// 17 significant digits; `wall_ms` is timing diagnostics only.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.rows.len() * 100 + 40);
        out.push_str("eta,P,norm_drift,tau0,wall_ms\n");
        for row in &self.rows {
            let _ = writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.3}",
                row.eta, row.p, row.norm_drift, row.tau0, row.wall_ms
            );
        }
        out
    }
}

fn evaluate_row(spec: &SweepSpec, eta: f64) -> SweepRow {
    let tau0 = spec.tau0.resolve(spec.n, eta);
    let clock = Instant::now();
    match evolve_dimensionless(spec.n, spec.lambda, eta, tau0, &spec.settings) {
        Ok(traj) => SweepRow {
            eta,
            p: traj.final_probability(),
            norm_drift: traj.norm_drift(),
            tau0,
            wall_ms: clock.elapsed().as_secs_f64() * 1e3,
            error: None,
        },
        Err(err) => SweepRow {
            eta,
            p: f64::NAN,
            norm_drift: f64::NAN,
            tau0,
            wall_ms: clock.elapsed().as_secs_f64() * 1e3,
            error: Some(err.to_string()),
        },
    }
}

/// Runs the scan on the current rayon pool. Rows are evaluated independently
/// and assembled in grid order.
pub fn sweep_eta(spec: &SweepSpec) -> Result<SweepResult, SweepError> {
    spec.validate()?;
    let grid = spec.grid();
    let rows: Vec<SweepRow> = grid.par_iter().map(|&eta| evaluate_row(spec, eta)).collect();
    Ok(SweepResult {
        rows,
        meta: SweepMeta {
            n: spec.n,
            lambda: spec.lambda,
            eta_lo: spec.eta_lo,
            eta_hi: spec.eta_hi,
            steps: spec.steps,
            tau0: spec.tau0,
            settings: spec.settings,
            settings_hash: spec.settings_hash(),
            workers: rayon::current_num_threads(),
        },
    })
}

/// [`sweep_eta`] on a dedicated pool of `workers` threads.
pub fn sweep_eta_with_workers(spec: &SweepSpec, workers: usize) -> Result<SweepResult, SweepError> {
    if workers == 0 {
        return Err(SweepError::InvalidSpec("workers must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| SweepError::Pool(e.to_string()))?;
    pool.install(|| sweep_eta(spec))
}

/// Derivative-free minimum search: a coarse scan brackets the minimum, then
/// golden-section refinement localizes it. The objective is evaluated through
/// an ODE solve, so no gradients are formed.
///
/// Fails with [`SweepError::NoInteriorMinimum`] when the coarse scan finds
/// the smallest value at a bracket endpoint.
pub fn find_minimum(
    n: u32,
    lambda: f64,
    bracket: (f64, f64),
    tolerance: f64,
    settings: &IntegratorSettings,
) -> Result<(f64, f64), SweepError> {
    let objective = |eta: f64| -> Result<f64, SweepError> {
        let tau0 = default_window(n, eta);
        Ok(evolve_dimensionless(n, lambda, eta, tau0, settings)?.final_probability())
    };
    minimize_scalar(objective, bracket, tolerance, 17)
}

/// Grid-then-golden-section minimization of an arbitrary scalar objective on
/// `[lo, hi]`. `coarse` points bracket the minimum; the returned minimizer is
/// localized to within `tolerance`.
pub fn minimize_scalar<F>(
    mut f: F,
    (lo, hi): (f64, f64),
    tolerance: f64,
    coarse: usize,
) -> Result<(f64, f64), SweepError>
where
    F: FnMut(f64) -> Result<f64, SweepError>,
{
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(SweepError::InvalidSpec(format!("invalid bracket [{lo}, {hi}]")));
    }
    if !(tolerance.is_finite() && tolerance > 0.0) {
        return Err(SweepError::InvalidSpec(format!("invalid tolerance {tolerance}")));
    }
    let coarse = coarse.max(3);

    let xs: Vec<f64> = (0..coarse)
        .map(|k| lo + (hi - lo) * k as f64 / (coarse - 1) as f64)
        .collect();
    let mut best = (0usize, f64::INFINITY);
    let mut values = Vec::with_capacity(coarse);
    for (k, &x) in xs.iter().enumerate() {
        let v = f(x)?;
        values.push(v);
        if v < best.1 {
            best = (k, v);
        }
    }
    if best.0 == 0 || best.0 == coarse - 1 {
        return Err(SweepError::NoInteriorMinimum { lo, hi });
    }

    // Golden-section on the bracketing neighbors of the best coarse point.
    let inv_phi = 0.618_033_988_749_894_9_f64;
    let mut a = xs[best.0 - 1];
    let mut b = xs[best.0 + 1];
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while b - a > tolerance {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2)?;
        }
    }
    let x_star = if f1 <= f2 { x1 } else { x2 };
    let p_star = f(x_star)?;
    Ok((x_star, p_star))
}

/// Final probability of one sweep point across a ladder of windows.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceEntry {
    pub tau0: f64,
    pub p: f64,
    /// `|P − P_previous|`; absent for the first rung.
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub entries: Vec<ConvergenceEntry>,
    /// Whether the last rung moved by at most [`CONVERGENCE_DELTA`]; absent
    /// for single-rung ladders.
    pub converged: Option<bool>,
}

/// Evaluates the final probability of `(n, λ, η)` at each window of a
/// strictly increasing ladder and flags convergence of successive rungs.
pub fn convergence_report(
    n: u32,
    lambda: f64,
    eta: f64,
    ladder: &[f64],
    settings: &IntegratorSettings,
) -> Result<ConvergenceReport, SweepError> {
    if ladder.is_empty() {
        return Err(SweepError::InvalidSpec("empty tau0 ladder".into()));
    }
    if !ladder.windows(2).all(|w| w[0] < w[1]) {
        return Err(SweepError::InvalidSpec("tau0 ladder must be strictly increasing".into()));
    }
    let mut entries: Vec<ConvergenceEntry> = Vec::with_capacity(ladder.len());
    for &tau0 in ladder {
        let p = evolve_dimensionless(n, lambda, eta, tau0, settings)?.final_probability();
        let delta = entries.last().map(|prev| (p - prev.p).abs());
        entries.push(ConvergenceEntry { tau0, p, delta });
    }
    let converged = entries.last().and_then(|e| e.delta).map(|d| d <= CONVERGENCE_DELTA);
    Ok(ConvergenceReport { entries, converged })
}
