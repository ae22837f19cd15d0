//! Schrödinger dynamics of one qubit under a TRP sweep.
//!
//! The state is integrated in the fixed lab basis in the dimensionless time
//! `τ = (a/b)·t`, where the Hamiltonian of a sweep with parameters
//! `(n, λ, η)` is
//!
//! ```text
//!     H(τ) = -(1/λ) · [ cos φ(τ)·σx − sin φ(τ)·σy + τ·σz ],
//!     φ(τ) = (2/n)·(η/λ)·τⁿ.
//! ```
//!
//! Orientation convention: the transverse component rotates clockwise about
//! `+z` for positive twist. With `H = −σ·F` this is the orientation for which
//! the frame co-rotating with the drive sees the longitudinal field
//! `(τ − η·τ^{n-1})/λ`, matching
//! [`SweepProfile::rotating_frame_field`](crate::profile::SweepProfile::rotating_frame_field)
//! and the resonance classification of [`crate::profile::resonance_times`];
//! the opposite sense would flip the sign convention of the twist regimes.
//! The sign of `F_y` is unobservable in every exported quantity.
//!
//! At each output grid point the state is projected onto the instantaneous
//! eigenbasis (the adiabatic frame) to obtain the amplitudes `S` (lower
//! level) and `I` (upper level) and the transition probability `P = |I|²`.
//! A sweep that follows the field adiabatically keeps `P` small; `P` at the
//! end of the window is the gate error of the rapid-passage NOT operation.

mod ode;

use std::fmt::Write as _;

use num_complex::Complex64 as C64;
use serde::Serialize;
use thiserror::Error;

use crate::profile::{default_window, ProfileError, SweepProfile, MIN_TAU0};
use ode::{Dopri5, StepState};

/// Error probability below which a gate operation counts as fault tolerant.
pub const FAULT_TOLERANCE_BENCHMARK: f64 = 1e-4;

/// Errors from sweep integration.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("integration step size underflow at tau = {tau}")]
    StepUnderflow { tau: f64 },
    #[error("invalid integrator settings: {0}")]
    InvalidSettings(String),
    #[error(transparent)]
    Profile(#[from] ProfileError),
}

/// Two-component complex state in the fixed `σz` basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spinor {
    pub up: C64,
    pub down: C64,
}

impl Spinor {
    pub const fn new(up: C64, down: C64) -> Self {
        Spinor { up, down }
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Spinor) -> C64 {
        self.up.conj() * other.up + self.down.conj() * other.down
    }

    pub fn norm_sqr(&self) -> f64 {
        self.up.norm_sqr() + self.down.norm_sqr()
    }
}

impl std::ops::Add for Spinor {
    type Output = Spinor;
    fn add(self, rhs: Spinor) -> Spinor {
        Spinor { up: self.up + rhs.up, down: self.down + rhs.down }
    }
}

impl std::ops::Mul<f64> for Spinor {
    type Output = Spinor;
    fn mul(self, rhs: f64) -> Spinor {
        Spinor { up: self.up * rhs, down: self.down * rhs }
    }
}

impl std::ops::Mul<C64> for Spinor {
    type Output = Spinor;
    fn mul(self, rhs: C64) -> Spinor {
        Spinor { up: self.up * rhs, down: self.down * rhs }
    }
}

/// Instantaneous eigenframe of `H = −σ·F`: energies and orthonormal
/// eigenspinors with a deterministic, smooth gauge.
///
/// The lower state's Bloch vector points along `+F̂`. The gauge keeps the
/// component along the reference spinor of each branch (`|↑⟩` for the lower
/// state, `|↓⟩` for the upper) real and non-negative, with the transverse
/// phase carried as a smooth function of the field direction, so eigenspinors
/// vary continuously along a sweep (the transverse field magnitude never
/// vanishes for a valid profile).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdiabaticFrame {
    pub lower_energy: f64,
    pub upper_energy: f64,
    pub lower: Spinor,
    pub upper: Spinor,
}

impl AdiabaticFrame {
    /// Eigenframe of `H = −σ·field`. The field must be nonzero.
    pub fn from_field(field: [f64; 3]) -> Self {
        let [fx, fy, fz] = field;
        let rho = fx.hypot(fy);
        let r = rho.hypot(fz);
        assert!(r > 0.0, "adiabatic frame undefined for a vanishing field");
        let u = if rho > 0.0 { C64::new(fx / rho, fy / rho) } else { C64::new(1.0, 0.0) };
        // Half-angle amplitudes, with the cancellation-free branch for each
        // hemisphere: c = cos(θ/2), s = sin(θ/2), cos θ = fz/r.
        let (c2, s2) = if fz >= 0.0 {
            let c2 = (r + fz) / (2.0 * r);
            (c2, rho * rho / (2.0 * r * (r + fz)))
        } else {
            let s2 = (r - fz) / (2.0 * r);
            (rho * rho / (2.0 * r * (r - fz)), s2)
        };
        let c = c2.sqrt();
        let s = s2.sqrt();
        AdiabaticFrame {
            lower_energy: -r,
            upper_energy: r,
            lower: Spinor::new(C64::new(c, 0.0), u * s),
            upper: Spinor::new(-u.conj() * s, C64::new(c, 0.0)),
        }
    }

    /// Amplitudes `(S, I) = (⟨E₋|ψ⟩, ⟨E₊|ψ⟩)`.
    pub fn project(&self, psi: &Spinor) -> (C64, C64) {
        (self.lower.inner(psi), self.upper.inner(psi))
    }
}

/// Adiabatic frame of a profile's lab Hamiltonian at time `t`, using the
/// module's orientation convention for the transverse phase. Energies are
/// `∓√(b² + (a·t)²)`.
pub fn adiabatic_frame(profile: &SweepProfile, t: f64) -> AdiabaticFrame {
    let (sin_phi, cos_phi) = profile.phase(t).sin_cos();
    let b = profile.b();
    AdiabaticFrame::from_field([b * cos_phi, -b * sin_phi, profile.a() * t])
}

/// Adaptive-integration controls and the output grid size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegratorSettings {
    /// Relative tolerance, in `(0, 1e-6]`.
    pub rtol: f64,
    /// Absolute tolerance, in `(0, 1e-6]`.
    pub atol: f64,
    /// Largest dimensionless step the controller may take.
    pub max_step: f64,
    /// Number of uniformly spaced output points across the window.
    pub grid_points: usize,
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        IntegratorSettings { rtol: 1e-12, atol: 1e-14, max_step: 0.5, grid_points: 4096 }
    }
}

impl IntegratorSettings {
    pub fn validate(&self) -> Result<(), DynamicsError> {
        let tol_ok = |t: f64| t.is_finite() && t > 0.0 && t <= 1e-6;
        if !tol_ok(self.rtol) {
            return Err(DynamicsError::InvalidSettings(format!(
                "rtol must lie in (0, 1e-6], got {}",
                self.rtol
            )));
        }
        if !tol_ok(self.atol) {
            return Err(DynamicsError::InvalidSettings(format!(
                "atol must lie in (0, 1e-6], got {}",
                self.atol
            )));
        }
        if !(self.max_step.is_finite() && self.max_step > 0.0) {
            return Err(DynamicsError::InvalidSettings(format!(
                "max_step must be positive, got {}",
                self.max_step
            )));
        }
        if self.grid_points < 2 {
            return Err(DynamicsError::InvalidSettings(format!(
                "grid_points must be at least 2, got {}",
                self.grid_points
            )));
        }
        Ok(())
    }
}

/// State of a sweep at one output grid point: adiabatic-basis amplitudes and
/// the transition probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryPoint {
    pub tau: f64,
    /// Lower-level amplitude `S = ⟨E₋|ψ⟩`.
    pub s: C64,
    /// Upper-level amplitude `I = ⟨E₊|ψ⟩`.
    pub i: C64,
    /// Transition probability `P = |I|²`.
    pub p: f64,
}

/// A full sweep trajectory on the uniform output grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    points: Vec<TrajectoryPoint>,
}

impl Trajectory {
    pub fn points(&self) -> &[TrajectoryPoint] {
        &self.points
    }

    pub fn final_point(&self) -> &TrajectoryPoint {
        self.points.last().expect("trajectory has at least two points")
    }

    /// Transition probability at the end of the window.
    pub fn final_probability(&self) -> f64 {
        self.final_point().p
    }

    /// Worst deviation of `|S|² + |I|²` from one across the trajectory.
    pub fn norm_drift(&self) -> f64 {
        self.points
            .iter()
            .map(|pt| (1.0 - (pt.s.norm_sqr() + pt.i.norm_sqr())).abs())
            .fold(0.0, f64::max)
    }

    /// Mean of `P` over grid points with `τ ∈ [lo, hi]`. Averaging over a
    /// plateau suppresses the fast dynamical-phase ripple of the
    /// instantaneous-basis projection, which `p_variation` deliberately
    /// keeps.
    pub fn mean_p(&self, lo: f64, hi: f64) -> f64 {
        let mut sum = 0.0;
        let mut count = 0usize;
        for pt in &self.points {
            if pt.tau >= lo && pt.tau <= hi {
                sum += pt.p;
                count += 1;
            }
        }
        if count == 0 {
            0.0
        } else {
            sum / count as f64
        }
    }

    /// Spread (max − min) of `P` over grid points with `τ ∈ [lo, hi]`.
    pub fn p_variation(&self, lo: f64, hi: f64) -> f64 {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for pt in &self.points {
            if pt.tau >= lo && pt.tau <= hi {
                min = min.min(pt.p);
                max = max.max(pt.p);
            }
        }
        if min.is_finite() {
            max - min
        } else {
            0.0
        }
    }

    /// CSV export: header `tau,Re_S,Im_S,Re_I,Im_I,P`, one row per grid
    /// point, 17 significant digits throughout.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.points.len() * 120);
        out.push_str("tau,Re_S,Im_S,Re_I,Im_I,P\n");
        for pt in &self.points {
            let _ = writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                pt.tau, pt.s.re, pt.s.im, pt.i.re, pt.i.im, pt.p
            );
        }
        out
    }
}

/// The dimensionless lab-frame sweep Hamiltonian, plus an optional constant
/// longitudinal detuning (used by the two-qubit gate model).
pub(crate) struct SweepHamiltonian {
    inv_lambda: f64,
    phase_coeff: f64,
    n: i32,
    detuning: f64,
}

impl SweepHamiltonian {
    pub(crate) fn new(n: u32, lambda: f64, eta: f64, detuning: f64) -> Self {
        SweepHamiltonian {
            inv_lambda: 1.0 / lambda,
            phase_coeff: (2.0 / n as f64) * eta / lambda,
            n: n as i32,
            detuning,
        }
    }

    fn phase(&self, tau: f64) -> f64 {
        self.phase_coeff * tau.powi(self.n)
    }

    /// Field direction (unnormalized) whose `−σ·F` is the Hamiltonian, in
    /// units of `b`.
    fn field(&self, tau: f64) -> [f64; 3] {
        let (sin_phi, cos_phi) = self.phase(tau).sin_cos();
        [cos_phi, -sin_phi, tau + self.detuning]
    }

    fn frame(&self, tau: f64) -> AdiabaticFrame {
        AdiabaticFrame::from_field(self.field(tau))
    }

    /// Carries a state across `[from, to]` without trajectory output. Steps
    /// through the same segmentation as trajectory integration, so gate
    /// columns accumulate the same (grid-capped) local error as trajectories.
    pub(crate) fn propagate(
        &self,
        from: f64,
        to: f64,
        y0: Spinor,
        settings: &IntegratorSettings,
    ) -> Result<Spinor, DynamicsError> {
        let stepper =
            Dopri5 { rtol: settings.rtol, atol: settings.atol, max_step: settings.max_step };
        let slope = |tau: f64, y: Spinor| self.slope(tau, y);
        let mut state = stepper.start(&slope, from, y0, 1e-2);
        let segments = settings.grid_points.max(2) - 1;
        let span = to - from;
        for k in 0..segments {
            let a = from + span * k as f64 / segments as f64;
            let b = if k == segments - 1 { to } else { from + span * (k + 1) as f64 / segments as f64 };
            stepper
                .advance(&slope, a, b, &mut state)
                .map_err(|e| DynamicsError::StepUnderflow { tau: e.tau })?;
        }
        Ok(state.y)
    }

    /// `dψ/dτ = −i·H(τ)·ψ`.
    fn slope(&self, tau: f64, y: Spinor) -> Spinor {
        let (sin_phi, cos_phi) = self.phase(tau).sin_cos();
        let u = C64::new(cos_phi, sin_phi); // e^{i φ}
        let z = tau + self.detuning;
        let il = C64::new(0.0, self.inv_lambda);
        Spinor {
            up: il * (y.up * z + u * y.down),
            down: il * (u.conj() * y.up - y.down * z),
        }
    }
}

fn output_grid(tau0: f64, points: usize) -> Vec<f64> {
    let start = -tau0 / 2.0;
    let end = tau0 / 2.0;
    let step = tau0 / (points - 1) as f64;
    (0..points)
        .map(|k| if k == points - 1 { end } else { start + k as f64 * step })
        .collect()
}

fn integrate_on_grid<F>(
    slope: F,
    frame_at: impl Fn(f64) -> AdiabaticFrame,
    state_of: impl Fn(f64, &StepState) -> Spinor,
    grid: &[f64],
    y0: Spinor,
    settings: &IntegratorSettings,
) -> Result<Trajectory, DynamicsError>
where
    F: Fn(f64, Spinor) -> Spinor,
{
    let stepper = Dopri5 { rtol: settings.rtol, atol: settings.atol, max_step: settings.max_step };
    let mut state = stepper.start(&slope, grid[0], y0, 1e-2);
    let mut points = Vec::with_capacity(grid.len());

    let record = |tau: f64, state: &StepState, points: &mut Vec<TrajectoryPoint>| {
        let psi = state_of(tau, state);
        let (s, i) = frame_at(tau).project(&psi);
        points.push(TrajectoryPoint { tau, s, i, p: i.norm_sqr() });
    };

    record(grid[0], &state, &mut points);
    for k in 1..grid.len() {
        stepper
            .advance(&slope, grid[k - 1], grid[k], &mut state)
            .map_err(|e| DynamicsError::StepUnderflow { tau: e.tau })?;
        record(grid[k], &state, &mut points);
    }
    Ok(Trajectory { points })
}

/// Integrates a sweep given directly in dimensionless form, starting from the
/// lower adiabatic state at `τ = −τ₀/2`.
pub fn evolve_dimensionless(
    n: u32,
    lambda: f64,
    eta: f64,
    tau0: f64,
    settings: &IntegratorSettings,
) -> Result<Trajectory, DynamicsError> {
    settings.validate()?;
    if n < 1 {
        return Err(ProfileError::InvalidOrder(n).into());
    }
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(ProfileError::NonPositive { name: "lambda", value: lambda }.into());
    }
    if !eta.is_finite() {
        return Err(ProfileError::NonFinite { name: "eta", value: eta }.into());
    }
    if !tau0.is_finite() || tau0 < MIN_TAU0 {
        return Err(ProfileError::WindowTooShort(tau0).into());
    }

    let sys = SweepHamiltonian::new(n, lambda, eta, 0.0);
    let grid = output_grid(tau0, settings.grid_points);
    let y0 = sys.frame(grid[0]).lower;
    integrate_on_grid(
        |tau, y| sys.slope(tau, y),
        |tau| sys.frame(tau),
        |_, state| state.y,
        &grid,
        y0,
        settings,
    )
}

/// Integrates the time-dependent Schrödinger equation across the profile's
/// sweep window and reports the adiabatic-basis trajectory.
pub fn evolve(profile: &SweepProfile, settings: &IntegratorSettings) -> Result<Trajectory, DynamicsError> {
    let d = profile.dimensionless();
    evolve_dimensionless(profile.n(), d.lambda, d.eta, profile.tau0(), settings)
}

/// Same observables as [`evolve_dimensionless`], computed through an
/// independent route: the state is integrated in the frame co-rotating with
/// the twist, where `H̄ = −(1/λ)·[σx + (τ − η·τ^{n-1})·σz]`, and mapped back
/// with the frame phase `e^{∓iφ/2}` before projecting. Agreement with the
/// lab-basis route is an end-to-end integration cross-check.
pub fn evolve_rotating_frame(
    n: u32,
    lambda: f64,
    eta: f64,
    tau0: f64,
    settings: &IntegratorSettings,
) -> Result<Trajectory, DynamicsError> {
    settings.validate()?;
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(ProfileError::NonPositive { name: "lambda", value: lambda }.into());
    }
    if n < 1 {
        return Err(ProfileError::InvalidOrder(n).into());
    }
    if !eta.is_finite() {
        return Err(ProfileError::NonFinite { name: "eta", value: eta }.into());
    }
    if !tau0.is_finite() || tau0 < MIN_TAU0 {
        return Err(ProfileError::WindowTooShort(tau0).into());
    }

    let sys = SweepHamiltonian::new(n, lambda, eta, 0.0);
    let inv_lambda = 1.0 / lambda;
    let ni = n as i32;
    let slope = move |tau: f64, y: Spinor| -> Spinor {
        let w = tau - eta * tau.powi(ni - 1);
        let il = C64::new(0.0, inv_lambda);
        Spinor { up: il * (y.up * w + y.down), down: il * (y.up - y.down * w) }
    };

    // ψ̄ = diag(e^{-iφ/2}, e^{+iφ/2}) ψ
    let to_rotating = |tau: f64, psi: &Spinor| -> Spinor {
        let (s, c) = (0.5 * sys.phase(tau)).sin_cos();
        Spinor { up: C64::new(c, -s) * psi.up, down: C64::new(c, s) * psi.down }
    };
    let to_lab = |tau: f64, psi_bar: &Spinor| -> Spinor {
        let (s, c) = (0.5 * sys.phase(tau)).sin_cos();
        Spinor { up: C64::new(c, s) * psi_bar.up, down: C64::new(c, -s) * psi_bar.down }
    };

    let grid = output_grid(tau0, settings.grid_points);
    let y0 = to_rotating(grid[0], &sys.frame(grid[0]).lower);
    integrate_on_grid(
        slope,
        |tau| sys.frame(tau),
        |tau, state| to_lab(tau, &state.y),
        &grid,
        y0,
        settings,
    )
}

/// Final transition probability of a dimensionless sweep, with the window
/// chosen by [`default_window`].
pub fn final_probability(
    n: u32,
    lambda: f64,
    eta: f64,
    settings: &IntegratorSettings,
) -> Result<f64, DynamicsError> {
    if !eta.is_finite() {
        return Err(ProfileError::NonFinite { name: "eta", value: eta }.into());
    }
    let tau0 = default_window(n, eta);
    Ok(evolve_dimensionless(n, lambda, eta, tau0, settings)?.final_probability())
}

/// Landau–Zener transition probability `exp(−π/λ)` of a twistless linear
/// sweep: the analytic baseline every twisted sweep is compared against.
pub fn landau_zener(lambda: f64) -> f64 {
    assert!(lambda > 0.0, "landau_zener requires lambda > 0");
    (-std::f64::consts::PI / lambda).exp()
}

/// Duration of a resonant π-pulse with rf amplitude `ω₁`: `T = π/ω₁`. The
/// speed baseline for rapid-passage gates.
pub fn pi_pulse_duration(omega1: f64) -> f64 {
    assert!(omega1 > 0.0, "pi_pulse_duration requires omega1 > 0");
    std::f64::consts::PI / omega1
}

/// A sweep evaluated as a NOT gate: the final transition probability is the
/// per-operation error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NotGateAssessment {
    pub error_probability: f64,
    /// `error_probability < `[`FAULT_TOLERANCE_BENCHMARK`].
    pub fault_tolerant: bool,
    pub norm_drift: f64,
}

/// Runs the sweep and grades it against the fault-tolerance benchmark.
pub fn not_gate_error(
    profile: &SweepProfile,
    settings: &IntegratorSettings,
) -> Result<NotGateAssessment, DynamicsError> {
    let traj = evolve(profile, settings)?;
    let p = traj.final_probability();
    Ok(NotGateAssessment {
        error_probability: p,
        fault_tolerant: p < FAULT_TOLERANCE_BENCHMARK,
        norm_drift: traj.norm_drift(),
    })
}
