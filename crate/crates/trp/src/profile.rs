//! TRP sweep profiles: polynomial twist, resonance structure, and translation
//! between theoretical and experimental parameterizations.
//!
//! A twisted rapid passage (TRP) sweep inverts the longitudinal field
//! linearly, `F_z = a·t`, while a transverse field of magnitude `b` twists
//! through the azimuthal angle `φ_n(t) = (2/n)·B·tⁿ`. Everything here uses
//! `ħ = 1`, so all dimensional inputs are angular frequencies; experimental
//! quantities quoted in Hz are handled at the boundary (see
//! [`ExperimentalParams`]).
//!
//! The frame co-rotating with the twist sees a longitudinal field
//! `a·t − φ̇_n(t)/2`, whose zeros are the qubit resonances. In the
//! dimensionless time `τ = (a/b)·t` that field is `b·(τ − η_n·τ^{n-1})` with
//! `η_n = (B/a)·(b/a)^{n-2}` the dimensionless twist strength, so the
//! resonance structure depends only on `(n, η_n)`.

use std::fmt;

use thiserror::Error;

/// Minimum dimensionless sweep window `τ₀`. The sweep must start and end far
/// from resonance (`a·T/2 ≫ b`), which we enforce as `τ₀/2 ≥ 10`.
pub const MIN_TAU0: f64 = 20.0;

/// Errors from profile construction and parameter translation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProfileError {
    #[error("twist order must satisfy n >= 1, got {0}")]
    InvalidOrder(u32),
    #[error("{name} must be positive and finite, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("{name} must be finite, got {value}")]
    NonFinite { name: &'static str, value: f64 },
    #[error("sweep window tau0 = {0} is below the minimum {MIN_TAU0}")]
    WindowTooShort(f64),
    #[error("resonance structure requires twist order n >= 2, got {0}")]
    OrderBelowQuadratic(u32),
    #[error("experimental translation is defined only for n in {{3, 4}}, got {0}")]
    UnsupportedTranslationOrder(u32),
}

/// Dimensionless sweep parameters: all observable sweep physics is a function
/// of this pair (plus the twist order and window).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionlessParams {
    /// Inversion rate `λ = a/b²` (ħ = 1). Larger is less adiabatic.
    pub lambda: f64,
    /// Signed twist strength `η_n = (B/a)·(b/a)^{n-2}`.
    pub eta: f64,
}

/// One TRP pulse: twist order, field magnitudes, twist strength, and the
/// dimensionless sweep window.
///
/// The sweep covers `τ ∈ [−τ₀/2, +τ₀/2]` with `τ = (a/b)·t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepProfile {
    n: u32,
    b: f64,
    a: f64,
    twist: f64,
    tau0: f64,
}

impl SweepProfile {
    /// Builds a profile from the dimensional triple `(a, b, B)`.
    ///
    /// Requires `n ≥ 1`, `a > 0`, `b > 0`, and `tau0 ≥ `[`MIN_TAU0`].
    pub fn new(n: u32, b: f64, a: f64, twist: f64, tau0: f64) -> Result<Self, ProfileError> {
        if n < 1 {
            return Err(ProfileError::InvalidOrder(n));
        }
        check_positive("b", b)?;
        check_positive("a", a)?;
        check_finite("B", twist)?;
        check_finite("tau0", tau0)?;
        if tau0 < MIN_TAU0 {
            return Err(ProfileError::WindowTooShort(tau0));
        }
        Ok(SweepProfile { n, b, a, twist, tau0 })
    }

    /// Builds the canonical dimensional representative of `(λ, η_n)`:
    /// `b = 1`, `a = λ`, `B = η·λ^{n-1}`.
    pub fn from_dimensionless(n: u32, lambda: f64, eta: f64, tau0: f64) -> Result<Self, ProfileError> {
        check_positive("lambda", lambda)?;
        check_finite("eta", eta)?;
        if n < 1 {
            return Err(ProfileError::InvalidOrder(n));
        }
        let twist = twist_from_eta(n, lambda, 1.0, eta);
        SweepProfile::new(n, 1.0, lambda, twist, tau0)
    }

    /// Like [`SweepProfile::from_dimensionless`] with the window chosen by
    /// [`default_window`].
    pub fn from_dimensionless_auto(n: u32, lambda: f64, eta: f64) -> Result<Self, ProfileError> {
        let tau0 = default_window(n, eta);
        Self::from_dimensionless(n, lambda, eta, tau0)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Transverse field magnitude `b`.
    pub fn b(&self) -> f64 {
        self.b
    }

    /// Inversion rate `a`.
    pub fn a(&self) -> f64 {
        self.a
    }

    /// Twist strength `B` of `φ_n(t) = (2/n)·B·tⁿ`.
    pub fn twist(&self) -> f64 {
        self.twist
    }

    /// Dimensionless sweep window `τ₀`.
    pub fn tau0(&self) -> f64 {
        self.tau0
    }

    /// `τ = (a/b)·t`.
    pub fn tau_of_time(&self, t: f64) -> f64 {
        (self.a / self.b) * t
    }

    /// `t = (b/a)·τ`.
    pub fn time_of_tau(&self, tau: f64) -> f64 {
        (self.b / self.a) * tau
    }

    /// Azimuthal twist angle `φ_n(t) = (2/n)·B·tⁿ`.
    pub fn phase(&self, t: f64) -> f64 {
        (2.0 / self.n as f64) * self.twist * t.powi(self.n as i32)
    }

    /// Twist angular velocity `φ̇_n(t) = 2·B·t^{n-1}`.
    pub fn phase_rate(&self, t: f64) -> f64 {
        2.0 * self.twist * t.powi(self.n as i32 - 1)
    }

    /// Lab-frame field `(b·cos φ_n, b·sin φ_n, a·t)`.
    pub fn lab_frame_field(&self, t: f64) -> [f64; 3] {
        let (sin_phi, cos_phi) = self.phase(t).sin_cos();
        [self.b * cos_phi, self.b * sin_phi, self.a * t]
    }

    /// Field seen in the frame co-rotating with the twist:
    /// `(b, a·t − φ̇_n(t)/2)`.
    pub fn rotating_frame_field(&self, t: f64) -> [f64; 2] {
        [self.b, self.a * t - 0.5 * self.phase_rate(t)]
    }

    /// Instantaneous splitting `2·√(b² + F̄_z²)` of the co-rotating
    /// Hamiltonian. Attains its global minimum `2b` exactly at the resonance
    /// times.
    pub fn energy_gap(&self, t: f64) -> f64 {
        let [x, z] = self.rotating_frame_field(t);
        2.0 * x.hypot(z)
    }

    /// The dimensionless pair `(λ, η_n)` of this profile.
    pub fn dimensionless(&self) -> DimensionlessParams {
        eta_from_theory(self.n, self.a, self.b, self.twist)
            .expect("profile invariants guarantee valid dimensionless parameters")
    }

    /// Resonance times and regime of this profile. Requires `n ≥ 2`.
    pub fn resonance_set(&self) -> Result<ResonanceSet, ProfileError> {
        resonance_times(self.n, self.dimensionless().eta)
    }
}

/// Classification of the resonance structure by twist sign and order parity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TwistRegime {
    /// No twist: the only resonance is the central crossing at `τ = 0`.
    Twistless,
    /// `n = 2`: quadratic twist rescales the linear sweep, so only `τ = 0`
    /// remains.
    Quadratic,
    /// `n = 2` with `η₂ = 1` exactly: the co-rotating longitudinal field
    /// vanishes identically and every `τ` is resonant. Reported as a flag
    /// with the central time only.
    QuadraticDegenerate,
    /// Odd `n ≥ 3`, `η > 0`: resonances at `τ = 0` and `τ = +η^{-1/(n-2)}`.
    OddPositive,
    /// Odd `n ≥ 3`, `η < 0`: resonances at `τ = −|η|^{-1/(n-2)}` and `τ = 0`.
    OddNegative,
    /// Even `n ≥ 3`, `η > 0`: resonances at `τ = 0` and `τ = ±η^{-1/(n-2)}`.
    EvenPositive,
    /// Even `n ≥ 3`, `η < 0`: only the central resonance at `τ = 0`.
    EvenNegative,
}

impl fmt::Display for TwistRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TwistRegime::Twistless => "twistless",
            TwistRegime::Quadratic => "quadratic twist",
            TwistRegime::QuadraticDegenerate => "quadratic twist, degenerate (eta = 1)",
            TwistRegime::OddPositive => "odd order, positive twist",
            TwistRegime::OddNegative => "odd order, negative twist",
            TwistRegime::EvenPositive => "even order, positive twist",
            TwistRegime::EvenNegative => "even order, negative twist",
        };
        f.write_str(s)
    }
}

/// The real resonance times of a profile, in dimensionless units, with their
/// regime.
#[derive(Debug, Clone, PartialEq)]
pub struct ResonanceSet {
    times: Vec<f64>,
    regime: TwistRegime,
}

impl ResonanceSet {
    /// Sorted ascending; always contains `τ = 0`.
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn regime(&self) -> TwistRegime {
        self.regime
    }

    pub fn count(&self) -> usize {
        self.times.len()
    }

    /// Largest resonance magnitude, `max |τ*|`.
    pub fn max_abs_time(&self) -> f64 {
        self.times.iter().fold(0.0, |m, t| m.max(t.abs()))
    }
}

/// Real solutions of the resonance condition `τ − η_n·τ^{n-1} = 0`:
/// always `τ = 0`, plus the real branches of `τ^{n-2} = 1/η_n`.
///
/// The outer radius is evaluated in closed form as `|η|^{-1/(n-2)}` and
/// polished with one Newton step so the roots satisfy the resonance condition
/// to machine precision. Twist strengths too small to invert in f64
/// (`1/|η|` overflowing) are classified as twistless.
pub fn resonance_times(n: u32, eta: f64) -> Result<ResonanceSet, ProfileError> {
    if n < 2 {
        return Err(ProfileError::OrderBelowQuadratic(n));
    }
    check_finite("eta", eta)?;

    if eta == 0.0 {
        return Ok(ResonanceSet { times: vec![0.0], regime: TwistRegime::Twistless });
    }
    if n == 2 {
        let regime = if eta == 1.0 {
            TwistRegime::QuadraticDegenerate
        } else {
            TwistRegime::Quadratic
        };
        return Ok(ResonanceSet { times: vec![0.0], regime });
    }

    let radius = eta.abs().powf(-1.0 / (n - 2) as f64);
    if !radius.is_finite() {
        return Ok(ResonanceSet { times: vec![0.0], regime: TwistRegime::Twistless });
    }

    let even = n % 2 == 0;
    let (times, regime) = match (even, eta > 0.0) {
        (true, true) => (vec![-radius, 0.0, radius], TwistRegime::EvenPositive),
        (true, false) => (vec![0.0], TwistRegime::EvenNegative),
        (false, true) => (vec![0.0, radius], TwistRegime::OddPositive),
        (false, false) => (vec![-radius, 0.0], TwistRegime::OddNegative),
    };
    let times = times.into_iter().map(|t| polish_root(t, n, eta)).collect();
    Ok(ResonanceSet { times, regime })
}

/// One Newton step on `f(τ) = τ − η·τ^{n-1}` at a signed root estimate. `f'`
/// at an outer root is `2 − n`, safely away from zero for `n ≥ 3`.
fn polish_root(root: f64, n: u32, eta: f64) -> f64 {
    if root == 0.0 {
        return 0.0;
    }
    let f = root - eta * root.powi(n as i32 - 1);
    let df = 1.0 - eta * (n - 1) as f64 * root.powi(n as i32 - 2);
    let polished = root - f / df;
    if df != 0.0 && polished.is_finite() {
        polished
    } else {
        root
    }
}

/// Default dimensionless window: `max(240, 6·max|τ*|)`.
///
/// The resonance term keeps every crossing well inside the sweep. The floor
/// of 240 controls the finite-window tail: with twist present, the final
/// probability measured in the instantaneous eigenbasis oscillates around
/// its asymptote with envelope close to `4·√(P(1−P))/τ₀`, so a 240 window
/// pins probabilities at the few-times-10⁻² scale to a few percent. (A 120
/// floor leaves 20–35% excursions at that scale.)
pub fn default_window(n: u32, eta: f64) -> f64 {
    let span = if n >= 2 {
        match resonance_times(n, eta) {
            Ok(set) => 6.0 * set.max_abs_time(),
            Err(_) => 0.0,
        }
    } else {
        0.0
    };
    span.max(240.0)
}

/// `(λ, η_n)` from the dimensional triple: `λ = a/b²`,
/// `η_n = (B/a)·(b/a)^{n-2}` (ħ = 1).
pub fn eta_from_theory(n: u32, a: f64, b: f64, twist: f64) -> Result<DimensionlessParams, ProfileError> {
    if n < 1 {
        return Err(ProfileError::InvalidOrder(n));
    }
    check_positive("a", a)?;
    check_positive("b", b)?;
    check_finite("B", twist)?;
    let lambda = a / (b * b);
    let eta = twist / a * (b / a).powi(n as i32 - 2);
    Ok(DimensionlessParams { lambda, eta })
}

/// Inverse of [`eta_from_theory`] in the twist strength:
/// `B = η·a·(a/b)^{n-2}`.
pub fn twist_from_eta(n: u32, a: f64, b: f64, eta: f64) -> f64 {
    eta * a * (a / b).powi(n as i32 - 2)
}

/// Experimental sweep parameterization. Values are stored exactly as quoted
/// by the instrument (conventionally in Hz) and the translation formulas are
/// applied to them verbatim; see [`ExperimentalParams::to_angular`] for the
/// alternative reading.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentalParams {
    /// Inversion-rate parameter `A`.
    pub inversion_rate: f64,
    /// Sweep parameter `δ`.
    pub delta: f64,
    /// Rf amplitude parameter `ω₁`.
    pub omega1: f64,
    /// Experimental twist strength `B`.
    pub twist: f64,
    /// Larmor frequency `ω₀`.
    pub omega0: f64,
}

impl ExperimentalParams {
    /// Requires `A`, `δ`, `ω₁` positive and finite.
    pub fn new(
        inversion_rate: f64,
        delta: f64,
        omega1: f64,
        twist: f64,
        omega0: f64,
    ) -> Result<Self, ProfileError> {
        check_positive("A", inversion_rate)?;
        check_positive("delta", delta)?;
        check_positive("omega1", omega1)?;
        check_finite("B_exp", twist)?;
        check_finite("omega0", omega0)?;
        Ok(ExperimentalParams { inversion_rate, delta, omega1, twist, omega0 })
    }

    /// Re-reads the stored per-cycle (Hz) values as angular frequencies by
    /// scaling every rate by 2π. The default convention leaves values
    /// untouched, which reproduces quoted experimental numbers directly.
    pub fn to_angular(&self) -> ExperimentalParams {
        use std::f64::consts::TAU;
        ExperimentalParams {
            inversion_rate: TAU * self.inversion_rate,
            delta: TAU * self.delta,
            omega1: TAU * self.omega1,
            twist: TAU * self.twist,
            omega0: TAU * self.omega0,
        }
    }
}

/// Dimensionless twist strength from the experimental parameterization:
/// `η₃ = 3Bδω₁/(4A²)` for cubic twist, `η₄ = Bδω₁²/(2A³)` for quartic.
/// Only `n ∈ {3, 4}` have an experimental translation.
pub fn eta_from_experiment(n: u32, exp: &ExperimentalParams) -> Result<f64, ProfileError> {
    let a = exp.inversion_rate;
    match n {
        3 => Ok(3.0 * exp.twist * exp.delta * exp.omega1 / (4.0 * a * a)),
        4 => Ok(exp.twist * exp.delta * exp.omega1 * exp.omega1 / (2.0 * a * a * a)),
        _ => Err(ProfileError::UnsupportedTranslationOrder(n)),
    }
}

/// Inverse of [`eta_from_experiment`]: the experimental twist strength `B`
/// that realizes a target `η_n` at the given `(A, δ, ω₁)`.
pub fn experimental_twist_for_eta(
    n: u32,
    exp: &ExperimentalParams,
    target_eta: f64,
) -> Result<f64, ProfileError> {
    check_finite("eta", target_eta)?;
    let a = exp.inversion_rate;
    match n {
        3 => Ok(4.0 * a * a * target_eta / (3.0 * exp.delta * exp.omega1)),
        4 => Ok(2.0 * a * a * a * target_eta / (exp.delta * exp.omega1 * exp.omega1)),
        _ => Err(ProfileError::UnsupportedTranslationOrder(n)),
    }
}

/// Detector and rf frequency schedules of the swept-drive realization:
/// `ω_det(t) = ω₀ + 2·a·t` and `ω_rf(t) = ω_det(t) − φ̇_n(t)`.
///
/// `ω_rf − ω₀` is proportional to the co-rotating longitudinal field, so the
/// rf schedule crosses the Larmor frequency exactly at the resonance times.
pub fn frequency_schedules(profile: &SweepProfile, exp: &ExperimentalParams, t: f64) -> (f64, f64) {
    let omega_det = exp.omega0 + 2.0 * profile.a() * t;
    let omega_rf = omega_det - profile.phase_rate(t);
    (omega_det, omega_rf)
}

/// Inversion time of a quartic-twist sweep, `T₄ = 4A/(ω₁²·λ)`, evaluated
/// verbatim on the stored experimental values.
pub fn inversion_time_quartic(inversion_rate: f64, omega1: f64, lambda: f64) -> f64 {
    assert!(
        inversion_rate > 0.0 && omega1 > 0.0 && lambda > 0.0,
        "inversion_time_quartic requires positive A, omega1, lambda"
    );
    4.0 * inversion_rate / (omega1 * omega1 * lambda)
}

fn check_positive(name: &'static str, value: f64) -> Result<(), ProfileError> {
    if !value.is_finite() || value <= 0.0 {
        return Err(ProfileError::NonPositive { name, value });
    }
    Ok(())
}

fn check_finite(name: &'static str, value: f64) -> Result<(), ProfileError> {
    if !value.is_finite() {
        return Err(ProfileError::NonFinite { name, value });
    }
    Ok(())
}
