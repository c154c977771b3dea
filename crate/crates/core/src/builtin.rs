//! Named problems used by the CLI, the benches and the test suites.

use crate::error::{Error, Result};
use crate::model::{Field, Kernel, Multiplicities, Problem, ProblemDomain};

pub const BUILTIN_NAMES: [&str; 5] = ["chebyshev", "gaussian", "freud", "semiaxis-linear", "inverse-power-gaussian"];

/// `log|t|` on `[0, 1]` with a zero field: monic Chebyshev polynomials.
pub fn chebyshev(n: usize) -> Result<Problem> {
    Problem::new(
        Kernel::log(),
        Field::constant(0.0)?,
        Multiplicities::ones(n)?,
        ProblemDomain::segment(0.0, 1.0)?,
    )
}

/// `log|t|` with `J(t) = -t²` on the axis.
pub fn gaussian(n: usize) -> Result<Problem> {
    Problem::new(Kernel::log(), Field::gaussian(1.0)?, Multiplicities::ones(n)?, ProblemDomain::Axis)
}

/// `log|t|` with `J(t) = -|t|³` on the axis.
pub fn freud(n: usize) -> Result<Problem> {
    Problem::new(Kernel::log(), Field::freud(1.0, 3.0)?, Multiplicities::ones(n)?, ProblemDomain::Axis)
}

/// `log|t|` with `J(t) = -t` on `[0, ∞)`.
pub fn semiaxis_linear(n: usize) -> Result<Problem> {
    Problem::new(
        Kernel::log(),
        Field::linear_decay(1.0)?,
        Multiplicities::ones(n)?,
        ProblemDomain::Semiaxis,
    )
}

/// `-1/|t|` with `J(t) = -t²` on the axis.
pub fn inverse_power_gaussian(n: usize) -> Result<Problem> {
    Problem::new(
        Kernel::inverse_power(1.0)?,
        Field::gaussian(1.0)?,
        Multiplicities::ones(n)?,
        ProblemDomain::Axis,
    )
}

pub fn builtin(name: &str, n: usize) -> Result<Problem> {
    match name {
        "chebyshev" => chebyshev(n),
        "gaussian" => gaussian(n),
        "freud" => freud(n),
        "semiaxis-linear" => semiaxis_linear(n),
        "inverse-power-gaussian" => inverse_power_gaussian(n),
        other => Err(Error::invalid(format!(
            "unknown problem {other:?}; expected one of {}",
            BUILTIN_NAMES.join(", ")
        ))),
    }
}
