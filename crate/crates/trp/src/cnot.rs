//! A CNOT gate from a frequency-selective TRP sweep on an Ising-coupled
//! qubit pair.
//!
//! Two qubits with resonance frequencies `ω_c > ω_t` and Ising coupling `J`
//! have the (frequency-unit) Hamiltonian
//!
//! ```text
//!     H/ħ = −ω_c·Iz_c − ω_t·Iz_t + 2πJ·Iz_c·Iz_t,
//! ```
//!
//! diagonal in the computational basis `|00⟩, |01⟩, |10⟩, |11⟩` with
//! `|0⟩ = |↑⟩`. The target-qubit transition splits into `ω± = ω_t ± πJ`
//! depending on the control state. Sweeping through the `ω₊` resonance while
//! refocusing freezes the control qubit inverts the target only when the
//! control is `|1⟩` — a CNOT.
//!
//! The refocusing idealization drops the control-qubit terms outright, so
//! the gate factors into two independent single-qubit rapid-passage problems:
//! the control-1 block is swept through resonance, the control-0 block sees
//! the same sweep displaced by the constant detuning `2πJ`. The gate is
//! frequency selective only if that displacement clears the whole band the
//! rf schedule sweeps through ([`sweep_bandwidth`]); otherwise the control-0
//! block crosses resonance too and is flagged.

use num_complex::Complex64 as C64;
use serde_json::json;
use thiserror::Error;

use crate::dynamics::{DynamicsError, IntegratorSettings, Spinor, SweepHamiltonian};
use crate::profile::{ProfileError, SweepProfile};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CnotError {
    #[error("two-qubit system requires omega_c > omega_t > pi*J > 0, got omega_c = {omega_c}, omega_t = {omega_t}, J = {coupling}")]
    InvalidOrdering { omega_c: f64, omega_t: f64, coupling: f64 },
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
}

/// An Ising-coupled control/target qubit pair, `ω_c > ω_t > πJ > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoQubitSystem {
    omega_c: f64,
    omega_t: f64,
    coupling: f64,
}

impl TwoQubitSystem {
    pub fn new(omega_c: f64, omega_t: f64, coupling: f64) -> Result<Self, CnotError> {
        let ordered = omega_c.is_finite()
            && omega_t.is_finite()
            && coupling.is_finite()
            && coupling > 0.0
            && omega_t > std::f64::consts::PI * coupling
            && omega_c > omega_t;
        if !ordered {
            return Err(CnotError::InvalidOrdering { omega_c, omega_t, coupling });
        }
        Ok(TwoQubitSystem { omega_c, omega_t, coupling })
    }

    pub fn omega_c(&self) -> f64 {
        self.omega_c
    }

    pub fn omega_t(&self) -> f64 {
        self.omega_t
    }

    /// Ising coupling constant `J`.
    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    /// Eigenenergies and target transition frequencies.
    pub fn level_structure(&self) -> LevelStructure {
        let pi_j = std::f64::consts::PI * self.coupling;
        // Iz eigenvalue +1/2 for |0⟩ = |↑⟩, -1/2 for |1⟩ = |↓⟩.
        let energy = |mc: f64, mt: f64| -self.omega_c * mc - self.omega_t * mt + 2.0 * pi_j * mc * mt;
        LevelStructure {
            energies: [
                energy(0.5, 0.5),
                energy(0.5, -0.5),
                energy(-0.5, 0.5),
                energy(-0.5, -0.5),
            ],
            omega_plus: self.omega_t + pi_j,
            omega_minus: self.omega_t - pi_j,
        }
    }
}

/// Computational-basis energies (in frequency units, ordered
/// `|00⟩, |01⟩, |10⟩, |11⟩`) and the split target transition frequencies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelStructure {
    pub energies: [f64; 4],
    /// `|10⟩ ↔ |11⟩` gap, `ω₊ = ω_t + πJ`.
    pub omega_plus: f64,
    /// `|00⟩ ↔ |01⟩` gap, `ω₋ = ω_t − πJ`.
    pub omega_minus: f64,
}

/// A 4×4 gate in the ordered basis `(|00⟩, |01⟩, |10⟩, |11⟩)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateMatrix {
    rows: [[C64; 4]; 4],
}

impl GateMatrix {
    pub fn identity() -> Self {
        let mut rows = [[C64::new(0.0, 0.0); 4]; 4];
        for (k, row) in rows.iter_mut().enumerate() {
            row[k] = C64::new(1.0, 0.0);
        }
        GateMatrix { rows }
    }

    pub fn from_rows(rows: [[C64; 4]; 4]) -> Self {
        GateMatrix { rows }
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.rows[row][col]
    }

    pub fn column(&self, col: usize) -> [C64; 4] {
        [self.rows[0][col], self.rows[1][col], self.rows[2][col], self.rows[3][col]]
    }

    pub fn mul(&self, other: &GateMatrix) -> GateMatrix {
        let mut rows = [[C64::new(0.0, 0.0); 4]; 4];
        for r in 0..4 {
            for c in 0..4 {
                rows[r][c] = (0..4).map(|k| self.rows[r][k] * other.rows[k][c]).sum();
            }
        }
        GateMatrix { rows }
    }

    /// Largest element of `U†U − 1`.
    pub fn unitarity_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..4 {
            for c in 0..4 {
                let dot: C64 = (0..4).map(|k| self.rows[k][r].conj() * self.rows[k][c]).sum();
                let expect = if r == c { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
                worst = worst.max((dot - expect).norm());
            }
        }
        worst
    }

    /// Largest magnitude coupling the control-0 and control-1 blocks.
    pub fn off_block_magnitude(&self) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..4 {
            for c in 0..4 {
                if (r < 2) != (c < 2) {
                    worst = worst.max(self.rows[r][c].norm());
                }
            }
        }
        worst
    }

    /// JSON export: the ordered basis and the row-major matrix with complex
    /// entries as `[re, im]` pairs.
    pub fn to_json(&self) -> String {
        let rows: Vec<Vec<[f64; 2]>> = self
            .rows
            .iter()
            .map(|row| row.iter().map(|z| [z.re, z.im]).collect())
            .collect();
        let value = json!({
            "basis": ["00", "01", "10", "11"],
            "rows": rows,
        });
        serde_json::to_string_pretty(&value).expect("gate serialization cannot fail")
    }
}

/// The CNOT permutation: identity on the control-0 block, target swap on the
/// control-1 block.
pub fn ideal_cnot() -> GateMatrix {
    let o = C64::new(0.0, 0.0);
    let l = C64::new(1.0, 0.0);
    GateMatrix::from_rows([[l, o, o, o], [o, l, o, o], [o, o, o, l], [o, o, l, o]])
}

/// Phase-insensitive per-basis-state agreement:
/// `min_j |⟨U_ref e_j | U_sim e_j⟩|²`. Equals 1 exactly when the columns
/// match up to individual phases.
pub fn gate_fidelity(sim: &GateMatrix, reference: &GateMatrix) -> f64 {
    (0..4)
        .map(|j| {
            let a = reference.column(j);
            let b = sim.column(j);
            let overlap: C64 = a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum();
            overlap.norm_sqr()
        })
        .fold(f64::INFINITY, f64::min)
}

/// Result of a simulated TRP CNOT.
#[derive(Debug, Clone, PartialEq)]
pub struct CnotOutcome {
    pub gate: GateMatrix,
    /// [`gate_fidelity`] against [`ideal_cnot`].
    pub fidelity: f64,
    /// `|⟨U_ideal e_j | U e_j⟩|²` per basis state.
    pub per_state_agreement: [f64; 4],
    /// Phase of each column relative to the ideal target column. Rapid
    /// passage generically produces nontrivial per-column phases; they are
    /// reported rather than folded into the fidelity.
    pub column_phases: [f64; 4],
    pub unitarity_error: f64,
    /// Largest deviation of an integrated block column from unit norm before
    /// its projection back onto SU(2); the integrator's radial error.
    pub radial_drift: f64,
    /// Set when the control-0 detuning `πJ/b` does not clear the swept band;
    /// the gate is then not frequency selective.
    pub selectivity_warning: bool,
    /// Dimensionless control-0 detuning `πJ/b`.
    pub detuning: f64,
    /// Dimensionless swept band, [`sweep_bandwidth`].
    pub bandwidth: f64,
}

/// Half-width (in units of `b`) of the band covered by the co-rotating
/// longitudinal field over the window: `max |τ − η·τ^{n-1}|` over
/// `τ ∈ [−τ₀/2, τ₀/2]`. A constant detuning larger than this never crosses
/// resonance during the sweep.
pub fn sweep_bandwidth(n: u32, eta: f64, tau0: f64) -> f64 {
    let edge = tau0 / 2.0;
    let field = |tau: f64| (tau - eta * tau.powi(n as i32 - 1)).abs();
    let mut worst = field(edge).max(field(-edge));
    // interior critical points: 1 − η(n−1)τ^{n-2} = 0
    if n >= 3 && eta != 0.0 {
        let k = (n - 2) as f64;
        let root = (1.0 / (eta * (n - 1) as f64)).abs().powf(1.0 / k);
        for tau in [root, -root] {
            if tau.abs() <= edge {
                worst = worst.max(field(tau));
            }
        }
    }
    worst
}

/// Simulates the refocused TRP CNOT: both control blocks are evolved as
/// independent single-qubit sweeps (the control-0 block with the extra
/// detuning `2πJ`) and assembled into the two-qubit gate. The blocks never
/// mix, so the off-block entries are exactly zero.
pub fn simulate_cnot(
    sys: &TwoQubitSystem,
    profile: &SweepProfile,
    settings: &IntegratorSettings,
) -> Result<CnotOutcome, CnotError> {
    let d = profile.dimensionless();
    let detuning = std::f64::consts::PI * sys.coupling() / profile.b();
    simulate_with_window(profile.n(), d.lambda, d.eta, profile.tau0(), detuning, settings)
}

/// [`simulate_cnot`] with the sweep given directly in dimensionless form.
///
/// `tau0 = 0` is the degenerate no-sweep case and yields the identity gate;
/// it exists to exercise the gate-assembly plumbing.
pub fn simulate_cnot_dimensionless(
    sys: &TwoQubitSystem,
    n: u32,
    lambda: f64,
    eta: f64,
    tau0: f64,
    settings: &IntegratorSettings,
) -> Result<CnotOutcome, CnotError> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(ProfileError::NonPositive { name: "lambda", value: lambda }.into());
    }
    if !eta.is_finite() {
        return Err(ProfileError::NonFinite { name: "eta", value: eta }.into());
    }
    if !tau0.is_finite() || tau0 < 0.0 {
        return Err(ProfileError::WindowTooShort(tau0).into());
    }
    // dimensionless form has b = 1
    let detuning = std::f64::consts::PI * sys.coupling();
    simulate_with_window(n, lambda, eta, tau0, detuning, settings)
}

fn simulate_with_window(
    n: u32,
    lambda: f64,
    eta: f64,
    tau0: f64,
    detuning: f64,
    settings: &IntegratorSettings,
) -> Result<CnotOutcome, CnotError> {
    settings.validate().map_err(CnotError::Dynamics)?;
    let (gate, radial_drift) = if tau0 == 0.0 {
        (GateMatrix::identity(), 0.0)
    } else {
        // control = 1: swept through resonance; control = 0: detuned by 2πJ
        let (block1, drift1) = evolve_block(n, lambda, eta, tau0, 0.0, settings)?;
        let (block0, drift0) = evolve_block(n, lambda, eta, tau0, detuning, settings)?;
        let o = C64::new(0.0, 0.0);
        let gate = GateMatrix::from_rows([
            [block0[0][0], block0[0][1], o, o],
            [block0[1][0], block0[1][1], o, o],
            [o, o, block1[0][0], block1[0][1]],
            [o, o, block1[1][0], block1[1][1]],
        ]);
        (gate, drift1.max(drift0))
    };

    let ideal = ideal_cnot();
    let mut per_state_agreement = [0.0; 4];
    let mut column_phases = [0.0; 4];
    for j in 0..4 {
        let a = ideal.column(j);
        let b = gate.column(j);
        let overlap: C64 = a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum();
        per_state_agreement[j] = overlap.norm_sqr();
        column_phases[j] = overlap.arg();
    }
    let bandwidth = sweep_bandwidth(n, eta, tau0);
    Ok(CnotOutcome {
        gate,
        fidelity: per_state_agreement.iter().copied().fold(f64::INFINITY, f64::min),
        per_state_agreement,
        column_phases,
        unitarity_error: gate.unitarity_error(),
        radial_drift,
        selectivity_warning: detuning <= bandwidth,
        detuning,
        bandwidth,
    })
}

/// Evolves one target block through the sweep; returns the block unitary
/// `[[row], [col]]` in the `(|0⟩, |1⟩)` target basis with `|0⟩ = |↑⟩`, plus
/// the integrator's radial drift.
///
/// The sweep Hamiltonian is traceless, so the block propagator lies in
/// SU(2): the second column is determined exactly by the first,
/// `U = [[α, −β*], [β, α*]]`. A strongly detuned block accumulates ~1e5
/// radians of dynamical phase, and the integrator's systematic radial error
/// over that many steps is pure artifact (the exact propagator is unitary),
/// so the column is projected back onto the unit sphere; the discarded
/// radial component is returned for diagnostics.
fn evolve_block(
    n: u32,
    lambda: f64,
    eta: f64,
    tau0: f64,
    detuning: f64,
    settings: &IntegratorSettings,
) -> Result<([[C64; 2]; 2], f64), CnotError> {
    let sys = SweepHamiltonian::new(n, lambda, eta, detuning);
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let up = sys
        .propagate(-tau0 / 2.0, tau0 / 2.0, Spinor::new(one, zero), settings)
        .map_err(CnotError::Dynamics)?;
    let norm = up.norm_sqr().sqrt();
    let alpha = up.up / norm;
    let beta = up.down / norm;
    Ok(([[alpha, -beta.conj()], [beta, alpha.conj()]], (1.0 - norm).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const SETTINGS: IntegratorSettings =
        IntegratorSettings { rtol: 1e-12, atol: 1e-14, max_step: 0.5, grid_points: 2048 };

    #[test]
    fn level_structure_example() {
        let sys = TwoQubitSystem::new(500.0, 100.0, 10.0).unwrap();
        let levels = sys.level_structure();
        assert!((levels.energies[0] - (-284.29203673205103)).abs() < 1e-12);
        assert!((levels.omega_plus - 131.41592653589794).abs() < 1e-12);
        let gap_10_11 = levels.energies[3] - levels.energies[2];
        assert!((gap_10_11 - levels.omega_plus).abs() < 1e-12);
        let gap_00_01 = levels.energies[1] - levels.energies[0];
        assert!((gap_00_01 - levels.omega_minus).abs() < 1e-12);
    }

    #[test]
    fn omega_split_is_ising_coupling() {
        let sys = TwoQubitSystem::new(430.0, 210.0, 17.0).unwrap();
        let levels = sys.level_structure();
        let split = levels.omega_plus - levels.omega_minus;
        assert!((split - 2.0 * std::f64::consts::PI * 17.0).abs() < 1e-12);
    }

    #[test]
    fn ordering_is_enforced() {
        assert!(TwoQubitSystem::new(100.0, 500.0, 10.0).is_err());
        assert!(TwoQubitSystem::new(500.0, 100.0, -1.0).is_err());
        // omega_t < pi J
        assert!(TwoQubitSystem::new(500.0, 30.0, 10.0).is_err());
        assert!(TwoQubitSystem::new(500.0, 100.0, 10.0).is_ok());
    }

    #[test]
    fn ideal_cnot_action() {
        let u = ideal_cnot();
        assert_eq!(u.entry(0, 0), C64::new(1.0, 0.0));
        assert_eq!(u.entry(3, 2), C64::new(1.0, 0.0));
        assert_eq!(u.entry(2, 2), C64::new(0.0, 0.0));
        // order two
        let sq = u.mul(&u);
        assert!(gate_fidelity(&sq, &GateMatrix::identity()) > 1.0 - 1e-15);
        assert!(u.unitarity_error() < 1e-15);
    }

    #[test]
    fn fidelity_examples() {
        let u = ideal_cnot();
        assert_eq!(gate_fidelity(&u, &u), 1.0);
        assert_eq!(gate_fidelity(&GateMatrix::identity(), &u), 0.0);
    }

    #[test]
    fn fidelity_ignores_column_phases() {
        let u = ideal_cnot();
        let mut rows = [[C64::new(0.0, 0.0); 4]; 4];
        let phases = [0.3, -1.2, 2.2, 0.9];
        for r in 0..4 {
            for c in 0..4 {
                rows[r][c] = u.entry(r, c) * C64::from_polar(1.0, phases[c]);
            }
        }
        let twisted = GateMatrix::from_rows(rows);
        assert!((gate_fidelity(&twisted, &u) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_duration_sweep_is_identity() {
        let sys = TwoQubitSystem::new(500.0, 100.0, 10.0).unwrap();
        let out = simulate_cnot_dimensionless(&sys, 4, 5.0, 4.0e-3, 0.0, &SETTINGS).unwrap();
        assert!(gate_fidelity(&out.gate, &GateMatrix::identity()) > 1.0 - 1e-15);
        assert_eq!(gate_fidelity(&out.gate, &ideal_cnot()), 0.0);
    }

    #[test]
    fn bandwidth_twistless_is_half_window() {
        assert_eq!(sweep_bandwidth(4, 0.0, 120.0), 60.0);
        // quartic twist dominates the edges
        let bw = sweep_bandwidth(4, 4.0e-3, 120.0);
        assert!((bw - (4.0e-3 * 60.0f64.powi(3) - 60.0)).abs() < 1e-9, "bw = {bw}");
    }

    #[test]
    fn selective_gate_matches_cnot() {
        // detuning pi*J must clear the swept band (~804 for this profile)
        let sys = TwoQubitSystem::new(5000.0, 2000.0, 300.0).unwrap();
        let out = simulate_cnot_dimensionless(&sys, 4, 5.0, 4.0e-3, 120.0, &SETTINGS).unwrap();
        assert!(!out.selectivity_warning, "detuning {} vs bandwidth {}", out.detuning, out.bandwidth);
        assert!(out.unitarity_error < 1e-9, "unitarity {}", out.unitarity_error);
        assert_eq!(out.gate.off_block_magnitude(), 0.0);
        assert!(out.fidelity >= 0.99, "fidelity {}", out.fidelity);
    }

    #[test]
    fn unselective_gate_is_flagged() {
        let sys = TwoQubitSystem::new(500.0, 100.0, 10.0).unwrap();
        let out = simulate_cnot_dimensionless(&sys, 4, 5.0, 4.0e-3, 120.0, &SETTINGS).unwrap();
        assert!(out.selectivity_warning);
    }

    #[test]
    fn fidelity_monotone_in_coupling() {
        let ideal = ideal_cnot();
        let mut last = -1.0;
        for &j in &[150.0, 300.0, 600.0, 1200.0] {
            let sys = TwoQubitSystem::new(2.0e4, 1.0e4, j).unwrap();
            let out = simulate_cnot_dimensionless(&sys, 4, 5.0, 4.0e-3, 120.0, &SETTINGS).unwrap();
            let fid = gate_fidelity(&out.gate, &ideal);
            assert!(
                fid >= last - 1e-12,
                "fidelity dropped from {last} to {fid} at J = {j}"
            );
            last = fid;
        }
        assert!(last >= 0.99);
    }

    #[test]
    fn adiabatic_twistless_block_error_matches_landau_zener() {
        // Slow sweep: the control-1 block inverts with error exp(-pi/lambda).
        let sys = TwoQubitSystem::new(2.0e4, 1.0e4, 300.0).unwrap();
        let lambda = 0.8;
        let out = simulate_cnot_dimensionless(&sys, 4, lambda, 0.0, 120.0, &SETTINGS).unwrap();
        let lz = crate::dynamics::landau_zener(lambda);
        // |<11|U|10>|^2 = 1 - (block error)
        let agree = out.per_state_agreement[2];
        assert!((1.0 - agree - lz).abs() < 5e-3, "agree = {agree}, lz = {lz}");
    }

    #[test]
    fn gate_json_shape() {
        let s = ideal_cnot().to_json();
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["basis"][2], "10");
        assert_eq!(v["rows"][3][2][0], 1.0);
        assert_eq!(v["rows"][3][2][1], 0.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn omega_formulas_for_random_systems(
            omega_t in 1.0f64..1e4,
            gap in 1e-6f64..1e4,
            j_frac in 1e-6f64..0.999,
        ) {
            let coupling = omega_t * j_frac / std::f64::consts::PI;
            let sys = TwoQubitSystem::new(omega_t + gap, omega_t, coupling).unwrap();
            let levels = sys.level_structure();
            let pi_j = std::f64::consts::PI * coupling;
            prop_assert!((levels.omega_plus - (omega_t + pi_j)).abs() <= 1e-12 * omega_t.max(1.0));
            prop_assert!((levels.omega_minus - (omega_t - pi_j)).abs() <= 1e-12 * omega_t.max(1.0));
            let gap_11_10 = levels.energies[3] - levels.energies[2];
            prop_assert!((gap_11_10 - levels.omega_plus).abs() <= 1e-12 * omega_t.max(1.0));
        }
    }
}
