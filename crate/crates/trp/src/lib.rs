//! Twisted rapid passage (TRP) qubit control.
//!
//! Twisted rapid passage inverts a qubit's Bloch vector by sweeping the
//! longitudinal field through zero while the transverse field twists with a
//! polynomial azimuthal phase `φ_n(t) = (2/n)·B·tⁿ`. For twist orders
//! `n ≥ 3` the qubit crosses resonance more than once during a single
//! inversion, and the crossings interfere: tuning the twist strength moves
//! the final transition probability between strong enhancement and strong
//! suppression. Deep suppression turns the sweep into a NOT gate whose error
//! probability drops below the `10⁻⁴` fault-tolerance benchmark, and a
//! frequency-selective sweep on an Ising-coupled pair extends the same pulse
//! to a CNOT.
//!
//! - [`profile`] — sweep profiles, resonance times and regimes, parameter
//!   translation between theoretical and experimental conventions.
//! - [`dynamics`] — Schrödinger integration of a sweep, adiabatic-basis
//!   amplitudes `S`, `I` and the transition probability `P`, the
//!   Landau–Zener baseline, NOT-gate grading.
//! - [`cnot`] — two-qubit Ising level structure and the refocused TRP CNOT.
//! - [`sweep`] — twist-strength scans, minimum search, window convergence.

pub mod cnot;
pub mod dynamics;
pub mod profile;
pub mod sweep;

pub use cnot::{
    gate_fidelity, ideal_cnot, simulate_cnot, simulate_cnot_dimensionless, CnotError, CnotOutcome,
    GateMatrix, LevelStructure, TwoQubitSystem,
};
pub use dynamics::{
    adiabatic_frame, evolve, evolve_dimensionless, evolve_rotating_frame, final_probability,
    landau_zener, not_gate_error, pi_pulse_duration, AdiabaticFrame, DynamicsError,
    IntegratorSettings, NotGateAssessment, Spinor, Trajectory, TrajectoryPoint,
    FAULT_TOLERANCE_BENCHMARK,
};
pub use profile::{
    default_window, eta_from_experiment, eta_from_theory, experimental_twist_for_eta,
    frequency_schedules, inversion_time_quartic, resonance_times, twist_from_eta,
    DimensionlessParams, ExperimentalParams, ProfileError, ResonanceSet, SweepProfile,
    TwistRegime, MIN_TAU0,
};
pub use sweep::{
    convergence_report, find_minimum, minimize_scalar, sweep_eta, sweep_eta_with_workers,
    ConvergenceEntry, ConvergenceReport, SweepError, SweepMeta, SweepResult, SweepRow, SweepSpec,
    Tau0Policy,
};
