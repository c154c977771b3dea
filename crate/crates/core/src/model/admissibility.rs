use serde::Serialize;

use super::{Field, Kernel};
use crate::error::{Error, Result};

/// Default probe magnitudes for [`check_admissibility`].
pub const DEFAULT_PROBES: [f64; 5] = [10.0, 100.0, 1e3, 1e4, 1e5];

/// `J(t) + R·K(t)` must end below this value at the outermost probe.
pub const DEFAULT_FLOOR: f64 = -50.0;

/// Numeric plausibility of `J(t) + R·K(t) → -inf` as `|t| → ∞`.
///
/// This samples a finite grid; it is evidence, not a proof.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    pub plausible: bool,
    /// Largest value of `J + R·K` at the outermost probe on either side.
    pub worst_value: f64,
    pub floor: f64,
    pub note: &'static str,
}

fn decreasing_tail(values: &[f64]) -> bool {
    let tail = &values[values.len().saturating_sub(3)..];
    tail.windows(2)
        .all(|w| w[1] < w[0] || (w[1] == f64::NEG_INFINITY && w[0] == f64::NEG_INFINITY))
}

/// Probes `J(±t) + R·K(±t)` over the positive magnitudes in `probes`
/// (sorted increasing). Plausible iff on both sides the last three values
/// strictly decrease (or are `-inf`) and the outermost value is below `floor`.
pub fn check_admissibility(
    field: &Field,
    kernel: &Kernel,
    budget: f64,
    probes: &[f64],
    floor: f64,
) -> Result<AdmissibilityReport> {
    if probes.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if probes.iter().any(|&t| !(t > 0.0)) || probes.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::invalid("probe magnitudes must be positive and strictly increasing"));
    }
    let mut plausible = true;
    let mut worst_value = f64::NEG_INFINITY;
    for sign in [1.0, -1.0] {
        let values: Vec<f64> = probes
            .iter()
            .map(|&t| field.evaluate(sign * t) + budget * kernel.evaluate(sign * t))
            .collect();
        let last = values[values.len() - 1];
        worst_value = worst_value.max(last);
        plausible &= decreasing_tail(&values) && last < floor;
    }
    Ok(AdmissibilityReport {
        plausible,
        worst_value,
        floor,
        note: "numeric plausibility check on a finite probe grid, not a proof",
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_log_is_plausible() {
        let report = check_admissibility(
            &Field::gaussian(1.0).unwrap(),
            &Kernel::log(),
            3.0,
            &[10.0, 100.0, 1000.0],
            DEFAULT_FLOOR,
        )
        .unwrap();
        assert!(report.plausible);
        // outermost probe: -10⁶ + 3·ln 1000
        assert!((report.worst_value - (-1e6 + 3.0 * 1000f64.ln())).abs() < 1e-6);
    }

    #[test]
    fn constant_field_with_log_is_not() {
        let report = check_admissibility(
            &Field::constant(0.0).unwrap(),
            &Kernel::log(),
            1.0,
            &DEFAULT_PROBES,
            DEFAULT_FLOOR,
        )
        .unwrap();
        assert!(!report.plausible);
        assert!(report.worst_value > 0.0);
    }

    #[test]
    fn smaller_budget_stays_plausible() {
        let j = Field::gaussian(1.0).unwrap();
        for r in [3.0, 1.5, 0.1] {
            assert!(
                check_admissibility(&j, &Kernel::log(), r, &DEFAULT_PROBES, DEFAULT_FLOOR)
                    .unwrap()
                    .plausible
            );
        }
    }

    #[test]
    fn semiaxis_field_negative_side_is_neg_inf() {
        let report = check_admissibility(
            &Field::linear_decay(1.0).unwrap(),
            &Kernel::log(),
            2.0,
            &DEFAULT_PROBES,
            DEFAULT_FLOOR,
        )
        .unwrap();
        assert!(report.plausible);
    }

    #[test]
    fn empty_grid_is_an_error() {
        assert_eq!(
            check_admissibility(&Field::gaussian(1.0).unwrap(), &Kernel::log(), 1.0, &[], -1.0),
            Err(Error::EmptyGrid)
        );
    }
}
