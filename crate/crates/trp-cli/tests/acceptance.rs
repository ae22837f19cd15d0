//! Acceptance suite: one test per numbered criterion, each printing a
//! pass/fail detail line (visible with `--nocapture`; cargo's own per-test
//! `ok`/`FAILED` lines give the summary either way).
//!
//! Run: `cargo test -p trp-cli --test acceptance -- --nocapture`

use std::fs;
use std::path::Path;
use std::process::Command;

use trp::{
    default_window, evolve_dimensionless, eta_from_experiment, eta_from_theory,
    experimental_twist_for_eta, find_minimum, gate_fidelity, ideal_cnot, inversion_time_quartic,
    landau_zener, resonance_times, simulate_cnot_dimensionless, sweep_eta_with_workers,
    twist_from_eta, ExperimentalParams, IntegratorSettings, SweepSpec, Tau0Policy, Trajectory,
    TwoQubitSystem, Tau0Policy::Auto,
};

fn settings() -> IntegratorSettings {
    IntegratorSettings::default()
}

/// Level change across a point: plateau means on either side of the ±3
/// transition window. Plateau averaging suppresses the fast
/// instantaneous-basis ripple while keeping genuine population jumps.
fn level_jump(traj: &Trajectory, center: f64) -> f64 {
    (traj.mean_p(center + 3.0, center + 9.0) - traj.mean_p(center - 9.0, center - 3.0)).abs()
}

#[test]
fn c01_twistless_baseline() {
    let traj = evolve_dimensionless(4, 5.0, 0.0, 120.0, &settings()).unwrap();
    let p = traj.final_probability();
    let lz = landau_zener(5.0);
    assert!((p - 0.533).abs() <= 0.005, "P = {p}");
    assert!((p - lz).abs() <= 0.005, "P = {p} vs LZ = {lz}");
    println!("criterion 1 PASS: twistless P = {p:.6} (reference 0.533, Landau-Zener {lz:.6})");
}

#[test]
fn c02_constructive_interference() {
    let eta = 4.6e-4;
    let tau0 = default_window(4, eta);
    let traj = evolve_dimensionless(4, 5.0, eta, tau0, &settings()).unwrap();
    let p = traj.final_probability();
    assert!((p - 0.88).abs() <= 0.01, "P = {p}");

    let set = resonance_times(4, eta).unwrap();
    let times = set.times();
    assert_eq!(times.len(), 3);
    for (found, expected) in times.iter().zip([-46.63, 0.0, 46.63]) {
        assert!((found - expected).abs() <= 0.05, "resonance {found} vs {expected}");
    }

    // Three localized jumps: a sizable level change across each resonance,
    // and nothing comparable anywhere at distance >= 10 from all of them.
    let mut near_min = f64::INFINITY;
    for &r in times {
        let jump = level_jump(&traj, r);
        assert!(jump >= 0.05, "jump at resonance {r} is only {jump:.3e}");
        near_min = near_min.min(jump);
    }
    let mut far_max = 0.0f64;
    let mut center = -tau0 / 2.0 + 9.5;
    while center <= tau0 / 2.0 - 9.5 {
        if times.iter().all(|&r| (center - r).abs() >= 19.0) {
            far_max = far_max.max(level_jump(&traj, center));
        }
        center += 1.0;
    }
    assert!(
        near_min >= 10.0 * far_max,
        "weakest resonance jump {near_min:.3e} vs strongest far change {far_max:.3e}"
    );
    println!(
        "criterion 2 PASS: P = {p:.4} (reference 0.88), jumps at -46.63/0/+46.63, \
         weakest jump {near_min:.3} >= 10 x strongest far change {far_max:.2e}"
    );
}

#[test]
fn c03_sign_asymmetry() {
    // The instantaneous-basis projection of a twisted sweep carries a
    // finite-window ripple with envelope ~ 4 sqrt(P(1-P)) / tau0; at
    // tau0 = 480 that is below the 5e-3 tolerance for P ~ 0.53, so the
    // comparison is window-converged by construction.
    let tau0 = 480.0;
    let twistless =
        evolve_dimensionless(4, 5.0, 0.0, tau0, &settings()).unwrap().final_probability();
    let mut report = String::new();
    for eta in [-4.6e-4, -1.6e-3] {
        assert_eq!(resonance_times(4, eta).unwrap().count(), 1);
        let p = evolve_dimensionless(4, 5.0, eta, tau0, &settings()).unwrap().final_probability();
        let dev = (p - twistless).abs();
        assert!(dev <= 0.005, "eta = {eta}: P = {p} deviates {dev:.3e} from twistless {twistless}");
        report += &format!("  P({eta:+.1e}) = {p:.5} (dev {dev:.1e})");
    }
    println!("criterion 3 PASS: single-resonance sweeps match twistless {twistless:.5}:{report}");
}

#[test]
fn c04_destructive_interference() {
    let eta = 1.6e-3;
    let tau0 = default_window(4, eta);
    let p = evolve_dimensionless(4, 5.0, eta, tau0, &settings()).unwrap().final_probability();
    let twistless =
        evolve_dimensionless(4, 5.0, 0.0, 240.0, &settings()).unwrap().final_probability();
    assert!(p <= 2.0e-3, "P = {p}");
    assert!(twistless / p >= 250.0, "suppression only {:.0}x", twistless / p);
    println!(
        "criterion 4 PASS: P = {p:.3e} (reported 6.93e-4), suppression {:.0}x vs twistless",
        twistless / p
    );
}

#[test]
fn c05_fault_tolerant_scan() {
    let reference = [2.0e-2, 1.3e-2, 6.8e-3, 3.6e-3, 9e-4, 4e-5, 8e-4, 3.9e-3, 1.0e-2, 1.7e-2];
    let spec = SweepSpec {
        n: 4,
        lambda: 5.0,
        eta_lo: 3.95e-3,
        eta_hi: 4.04e-3,
        steps: 10,
        settings: settings(),
        tau0: Auto,
    };
    let result = trp::sweep_eta(&spec).unwrap();
    assert_eq!(result.rows.len(), 10);

    // every reported entry above 1e-2 within +-15% relative
    let mut checked = 0;
    for (row, &p_ref) in result.rows.iter().zip(reference.iter()) {
        assert!(row.error.is_none(), "row {} failed: {:?}", row.eta, row.error);
        assert!(row.norm_drift <= 1e-9);
        if p_ref > 1.0e-2 {
            let rel = (row.p - p_ref).abs() / p_ref;
            assert!(rel <= 0.15, "eta = {}: P = {:.3e} vs {:.1e} ({:.0}%)", row.eta, row.p, p_ref, rel * 100.0);
            checked += 1;
        }
    }
    assert_eq!(checked, 3);

    // single interior minimum: strictly decreasing then strictly increasing
    let ps: Vec<f64> = result.rows.iter().map(|r| r.p).collect();
    let argmin = ps
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(k, _)| k)
        .unwrap();
    assert!(argmin > 0 && argmin < 9, "minimum at the scan edge");
    assert!(ps[..=argmin].windows(2).all(|w| w[0] > w[1]), "not strictly decreasing: {ps:?}");
    assert!(ps[argmin..].windows(2).all(|w| w[0] < w[1]), "not strictly increasing: {ps:?}");

    let (eta_star, p_star) = find_minimum(4, 5.0, (3.9e-3, 4.1e-3), 1e-6, &settings()).unwrap();
    assert!((eta_star - 4.00e-3).abs() <= 2.0e-5, "eta* = {eta_star}");
    assert!(p_star <= 1.0e-4, "P* = {p_star}");
    println!(
        "criterion 5 PASS: scan matches the reported table (interior minimum row {argmin}); \
         minimum P = {p_star:.2e} at eta = {eta_star:.5e} (fault tolerant, benchmark 1e-4)"
    );
}

#[test]
fn c06_resonance_classification() {
    let expected = [(2u32, 1usize, 1usize), (3, 2, 2), (4, 3, 1), (5, 2, 2), (6, 3, 1)];
    for &(n, count_pos, count_neg) in &expected {
        for &mag in &[1.0e-4, 0.5] {
            assert_eq!(resonance_times(n, mag).unwrap().count(), count_pos, "n = {n}, eta = +{mag}");
            assert_eq!(resonance_times(n, -mag).unwrap().count(), count_neg, "n = {n}, eta = -{mag}");
        }
        assert_eq!(resonance_times(n, 0.0).unwrap().count(), 1, "n = {n}, eta = 0");
    }
    for &eta in &[4.6e-4, 1.6e-3, 4.0e-3, 0.25] {
        let set = resonance_times(4, eta).unwrap();
        let outer = set.times()[2];
        let expected = 1.0 / eta.sqrt();
        assert!(
            (outer - expected).abs() <= 1e-12 * expected,
            "outer time {outer} vs 1/sqrt(eta) = {expected}"
        );
    }
    println!("criterion 6 PASS: resonance counts match the regime table for n = 2..6, both signs");
}

#[test]
fn c07_landau_zener_equivalence() {
    let mut report = String::new();
    for &lambda in &[0.5, 1.0, 2.0] {
        let p = evolve_dimensionless(4, lambda, 0.0, 120.0, &settings()).unwrap().final_probability();
        let lz = landau_zener(lambda);
        assert!((p - lz).abs() <= 5e-3, "lambda = {lambda}: P = {p} vs {lz}");
        report += &format!("  lambda {lambda}: |P-LZ| = {:.1e}", (p - lz).abs());
    }
    println!("criterion 7 PASS: analytic oracle matched:{report}");
}

#[test]
fn c08_norm_conservation() {
    let runs: &[(f64, f64, f64)] = &[
        (5.0, 0.0, 120.0),
        (5.0, 4.6e-4, default_window(4, 4.6e-4)),
        (5.0, -4.6e-4, 480.0),
        (5.0, -1.6e-3, 480.0),
        (5.0, 1.6e-3, default_window(4, 1.6e-3)),
        (5.0, 4.0e-3, default_window(4, 4.0e-3)),
        (0.5, 0.0, 120.0),
        (1.0, 0.0, 120.0),
        (2.0, 0.0, 120.0),
    ];
    let mut worst = 0.0f64;
    for &(lambda, eta, tau0) in runs {
        let drift = evolve_dimensionless(4, lambda, eta, tau0, &settings()).unwrap().norm_drift();
        assert!(drift <= 1e-9, "lambda = {lambda}, eta = {eta}: drift = {drift:.2e}");
        worst = worst.max(drift);
    }
    println!("criterion 8 PASS: worst trajectory norm drift {worst:.2e} <= 1e-9");
}

#[test]
fn c09_parameter_translation() {
    let t4 = inversion_time_quartic(40_000.0, 4_000.0, 5.0);
    assert_eq!(t4, 2.0e-3, "T4 = {t4}");

    // theory-side twist round trips
    for &(n, a, b) in &[(3u32, 1.0, 1.0), (4, 2.0, 0.7), (5, 0.3, 9.0), (6, 11.0, 2.0)] {
        for &eta in &[4.6e-4, -1.6e-3, 2.875581] {
            let twist = twist_from_eta(n, a, b, eta);
            let back = eta_from_theory(n, a, b, twist).unwrap().eta;
            assert!((back - eta).abs() <= 1e-12 * eta.abs(), "(n={n}, a={a}, b={b})");
        }
    }
    // caption-formula round trips
    let base = ExperimentalParams::new(50_000.0, 24.39, 393.0, 0.0, 0.0).unwrap();
    for n in [3u32, 4] {
        for &eta in &[4.6e-4, 4.0e-3, 2.875581] {
            let twist = experimental_twist_for_eta(n, &base, eta).unwrap();
            let exp = ExperimentalParams::new(50_000.0, 24.39, 393.0, twist, 0.0).unwrap();
            let back = eta_from_experiment(n, &exp).unwrap();
            assert!((back - eta).abs() <= 1e-12 * eta, "n = {n}, eta = {eta}");
        }
    }
    println!("criterion 9 PASS: T4 = 2.000 ms exactly; twist round-trips at 1e-12");
}

#[test]
fn c10_cnot_gate() {
    let profile = (4u32, 5.0, 4.0e-3, 120.0);
    let ideal = ideal_cnot();

    // Base point: the control-0 detuning pi*J clears the swept band
    // (max |tau - eta tau^3| = 804 over this window).
    let sys = TwoQubitSystem::new(2.0e4, 1.0e4, 300.0).unwrap();
    let out = simulate_cnot_dimensionless(&sys, profile.0, profile.1, profile.2, profile.3, &settings())
        .unwrap();
    assert!(!out.selectivity_warning, "detuning {} vs band {}", out.detuning, out.bandwidth);
    assert!(out.unitarity_error <= 1e-9, "unitarity error {:.2e}", out.unitarity_error);
    assert_eq!(out.gate.off_block_magnitude(), 0.0);
    for (j, agreement) in out.per_state_agreement.iter().enumerate() {
        assert!(*agreement >= 0.99, "basis state {j}: agreement {agreement}");
    }
    let base_fid = gate_fidelity(&out.gate, &ideal);
    assert!(base_fid >= 0.99);

    // Fidelity is monotone non-decreasing along a geometric coupling ladder.
    let mut last = -1.0;
    let mut fids = Vec::new();
    for &coupling in &[150.0, 300.0, 600.0, 1200.0] {
        let sys = TwoQubitSystem::new(2.0e4, 1.0e4, coupling).unwrap();
        let out =
            simulate_cnot_dimensionless(&sys, profile.0, profile.1, profile.2, profile.3, &settings())
                .unwrap();
        assert!(out.unitarity_error <= 1e-9);
        let fid = gate_fidelity(&out.gate, &ideal);
        assert!(fid >= last - 1e-12, "fidelity dropped from {last} to {fid} at J = {coupling}");
        last = fid;
        fids.push(format!("{fid:.5}"));
    }
    println!(
        "criterion 10 PASS: selective gate fidelity {base_fid:.5} (unitary to {:.1e}); \
         fidelity ladder over J x2 steps: {}",
        out.unitarity_error,
        fids.join(" -> ")
    );
}

#[test]
fn c11_determinism() {
    // Library level: repeated scans, serial vs parallel, are bit-identical.
    let spec = SweepSpec {
        n: 4,
        lambda: 5.0,
        eta_lo: 3.95e-3,
        eta_hi: 3.97e-3,
        steps: 3,
        settings: settings(),
        tau0: Tau0Policy::Auto,
    };
    let a = sweep_eta_with_workers(&spec, 1).unwrap();
    let b = sweep_eta_with_workers(&spec, 1).unwrap();
    let c = sweep_eta_with_workers(&spec, 4).unwrap();
    for ((ra, rb), rc) in a.rows.iter().zip(&b.rows).zip(&c.rows) {
        for (x, y) in [(ra, rb), (ra, rc)] {
            assert_eq!(x.eta.to_bits(), y.eta.to_bits());
            assert_eq!(x.p.to_bits(), y.p.to_bits());
            assert_eq!(x.norm_drift.to_bits(), y.norm_drift.to_bits());
            assert_eq!(x.tau0.to_bits(), y.tau0.to_bits());
        }
    }

    // CLI level: identical configs reproduce byte-identical physics outputs.
    let dir = tempdir();
    let config_path = dir.join("run.json");
    fs::write(
        &config_path,
        r#"{
            "profile": {"n": 4, "lambda": 5.0, "eta": 4.6e-4},
            "system": {"omega_c": 2.0e4, "omega_t": 1.0e4, "J": 300.0},
            "sweep": {"n": 4, "lambda": 5.0, "eta_lo": 0.0, "eta_hi": 1.0e-4, "steps": 2, "tau0": 120.0},
            "experimental": {"A_hz": 40000.0, "delta_hz": 24.39, "omega1_hz": 4000.0},
            "integrator": {"grid_points": 512}
        }"#,
    )
    .unwrap();

    let rerun = |cmd: &str, out: &str, extra: &[&str]| {
        let out_dir = dir.join(out);
        let mut args = vec![
            cmd.to_string(),
            "--config".into(),
            config_path.display().to_string(),
            "--out".into(),
            out_dir.display().to_string(),
        ];
        args.extend(extra.iter().map(|s| s.to_string()));
        let status = Command::new(env!("CARGO_BIN_EXE_trp")).args(&args).output().unwrap();
        assert!(status.status.success(), "{cmd} failed: {}", String::from_utf8_lossy(&status.stderr));
        out_dir
    };

    for (cmd, files) in [
        ("resonances", vec!["resonances.json"]),
        ("simulate", vec!["trajectory.csv", "summary.json"]),
        ("cnot", vec!["gate.json", "cnot_summary.json"]),
        ("translate", vec!["translate.json"]),
    ] {
        let first = rerun(cmd, &format!("{cmd}_a"), &[]);
        let second = rerun(cmd, &format!("{cmd}_b"), &[]);
        for file in files {
            let x = fs::read(first.join(file)).unwrap();
            let y = fs::read(second.join(file)).unwrap();
            assert_eq!(x, y, "{cmd}/{file} differs between identical runs");
        }
    }

    // sweep outputs are worker-count independent up to the wall_ms column
    let w1 = rerun("sweep", "sweep_w1", &["--workers", "1"]);
    let w4 = rerun("sweep", "sweep_w4", &["--workers", "4"]);
    let strip = |path: &Path| -> Vec<String> {
        fs::read_to_string(path)
            .unwrap()
            .lines()
            .map(|line| line.rsplit_once(',').map(|(head, _)| head.to_string()).unwrap_or_default())
            .collect()
    };
    assert_eq!(strip(&w1.join("sweep.csv")), strip(&w4.join("sweep.csv")));

    println!("criterion 11 PASS: bit-identical rows across reruns and worker counts; byte-identical CLI outputs");
}

fn tempdir() -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("trp-acceptance-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir
}
