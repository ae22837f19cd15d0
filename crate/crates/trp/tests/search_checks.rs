//! Minimum-search behavior against the real sweep objective.

use trp::{find_minimum, IntegratorSettings, SweepError};

/// Past the fault-tolerant dip the transition probability climbs back toward
/// the constructive branch; a bracket on that wall has its smallest coarse
/// value at an endpoint and must be rejected.
#[test]
fn rising_wall_bracket_has_no_interior_minimum() {
    let out = find_minimum(4, 5.0, (4.2e-3, 4.4e-3), 1e-5, &IntegratorSettings::default());
    match out {
        Err(SweepError::NoInteriorMinimum { lo, hi }) => {
            assert_eq!(lo, 4.2e-3);
            assert_eq!(hi, 4.4e-3);
        }
        other => panic!("expected NoInteriorMinimum, got {other:?}"),
    }
}
