//! Adaptive Dormand–Prince 5(4) stepping for two-component complex states.

use super::Spinor;

/// Step-size underflow: the controller could not meet the tolerance without
/// shrinking the step below the resolvable floor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct StepUnderflow {
    pub tau: f64,
}

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;
/// The controller aims well below the requested tolerance: sweeps take ~1e5
/// steps whose norm error accumulates with a systematic sign, so the global
/// drift has to be held near the per-step tolerance rather than 1e5 times
/// it. Step count only grows like the fifth root of the margin.
const TOL_MARGIN: f64 = 30.0;

// Dormand-Prince 5(4) tableau. The fifth-order weights are the last stage row
// (FSAL); ERR holds the difference between the fifth- and fourth-order
// weights.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const ERR1: f64 = 71.0 / 57600.0;
const ERR3: f64 = -71.0 / 16695.0;
const ERR4: f64 = 71.0 / 1920.0;
const ERR5: f64 = -17253.0 / 339200.0;
const ERR6: f64 = 22.0 / 525.0;
const ERR7: f64 = -1.0 / 40.0;

pub(crate) struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
}

/// Mutable stepping state carried across grid segments so the controller does
/// not restart at every output point.
pub(crate) struct StepState {
    pub y: Spinor,
    /// FSAL slope at (`tau`, `y`).
    pub k1: Spinor,
    /// Current step-size suggestion.
    pub h: f64,
}

impl Dopri5 {
    pub fn start<F>(&self, f: &F, tau: f64, y: Spinor, h0: f64) -> StepState
    where
        F: Fn(f64, Spinor) -> Spinor,
    {
        StepState { y, k1: f(tau, y), h: h0.min(self.max_step) }
    }

    /// Advance `state` from `tau_from` to exactly `tau_to`.
    pub fn advance<F>(
        &self,
        f: &F,
        tau_from: f64,
        tau_to: f64,
        state: &mut StepState,
    ) -> Result<(), StepUnderflow>
    where
        F: Fn(f64, Spinor) -> Spinor,
    {
        let mut tau = tau_from;
        let mut rejected = false;
        while tau < tau_to {
            let remaining = tau_to - tau;
            let h = state.h.min(self.max_step).min(remaining);
            if h < step_floor(tau, tau_to) {
                return Err(StepUnderflow { tau });
            }

            let y = state.y;
            let k1 = state.k1;
            let k2 = f(tau + C2 * h, y + k1 * (A21 * h));
            let k3 = f(tau + C3 * h, y + (k1 * A31 + k2 * A32) * h);
            let k4 = f(tau + C4 * h, y + (k1 * A41 + k2 * A42 + k3 * A43) * h);
            let k5 = f(
                tau + C5 * h,
                y + (k1 * A51 + k2 * A52 + k3 * A53 + k4 * A54) * h,
            );
            let k6 = f(
                tau + h,
                y + (k1 * A61 + k2 * A62 + k3 * A63 + k4 * A64 + k5 * A65) * h,
            );
            let y_new = y + (k1 * B1 + k3 * B3 + k4 * B4 + k5 * B5 + k6 * B6) * h;
            let k7 = f(tau + h, y_new);
            let err = (k1 * ERR1 + k3 * ERR3 + k4 * ERR4 + k5 * ERR5 + k6 * ERR6 + k7 * ERR7) * h;

            let err_norm = self.error_norm(&y, &y_new, &err);
            if err_norm <= 1.0 {
                tau += h;
                state.y = y_new;
                state.k1 = k7;
                let factor = if err_norm == 0.0 {
                    MAX_FACTOR
                } else {
                    (SAFETY * err_norm.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
                };
                // No growth directly after a rejection; avoids accept/reject
                // chatter near sharp features.
                state.h = h * if rejected { factor.min(1.0) } else { factor };
                rejected = false;
            } else {
                state.h = h * (SAFETY * err_norm.powf(-0.2)).clamp(MIN_FACTOR, 1.0);
                rejected = true;
            }
        }
        Ok(())
    }

    fn error_norm(&self, y0: &Spinor, y1: &Spinor, err: &Spinor) -> f64 {
        let sc_up = self.atol + self.rtol * y0.up.norm().max(y1.up.norm());
        let sc_down = self.atol + self.rtol * y0.down.norm().max(y1.down.norm());
        let e_up = err.up.norm() / sc_up;
        let e_down = err.down.norm() / sc_down;
        TOL_MARGIN * (0.5 * (e_up * e_up + e_down * e_down)).sqrt()
    }
}

fn step_floor(tau: f64, tau_to: f64) -> f64 {
    32.0 * f64::EPSILON * tau.abs().max(tau_to.abs()).max(1.0)
}
