use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::table::{PiecewiseLinear, Sample};
use crate::error::{Error, Result};

/// Structural hypotheses a kernel satisfies. Solver guarantees depend on them:
/// existence needs `monotone`, uniqueness needs `singular && strictly_concave`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct KernelFlags {
    pub monotone: bool,
    pub singular: bool,
    pub strictly_concave: bool,
}

impl KernelFlags {
    pub const ALL: KernelFlags = KernelFlags {
        monotone: true,
        singular: true,
        strictly_concave: true,
    };
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Shape {
    Log,
    InversePower(f64),
    Table {
        negative: PiecewiseLinear,
        positive: PiecewiseLinear,
    },
    Dilated { inner: Arc<Kernel>, factor: f64 },
    Custom(ScalarFn),
}

/// A function concave on each open half-line with a common limit at zero.
#[derive(Clone)]
pub struct Kernel {
    name: String,
    shape: Shape,
    flags: KernelFlags,
    value_at_zero: f64,
    domain_halfwidth: f64,
}

impl fmt::Debug for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Kernel")
            .field("name", &self.name)
            .field("flags", &self.flags)
            .field("value_at_zero", &self.value_at_zero)
            .finish()
    }
}

impl Kernel {
    /// `t ↦ log|t|`.
    pub fn log() -> Self {
        Self {
            name: "log".into(),
            shape: Shape::Log,
            flags: KernelFlags::ALL,
            value_at_zero: f64::NEG_INFINITY,
            domain_halfwidth: f64::INFINITY,
        }
    }

    /// `t ↦ -|t|^(-s)` for `s > 0`.
    pub fn inverse_power(s: f64) -> Result<Self> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::invalid(format!("inverse power exponent must be positive, got {s}")));
        }
        Ok(Self {
            name: format!("inverse_power(s={s})"),
            shape: Shape::InversePower(s),
            flags: KernelFlags::ALL,
            value_at_zero: f64::NEG_INFINITY,
            domain_halfwidth: f64::INFINITY,
        })
    }

    /// Tabulated kernel, linear on each half-line through `(0, value_at_zero)`
    /// and extended linearly past the outermost samples.
    ///
    /// Flags are derived from the samples: concavity on each half-line is
    /// required, monotonicity is detected, and piecewise-linear kernels are never
    /// singular or strictly concave.
    pub fn table(samples: &[Sample], value_at_zero: f64) -> Result<Self> {
        if !value_at_zero.is_finite() {
            return Err(Error::invalid("tabulated kernels need a finite value at zero"));
        }
        let zero = Sample { t: 0.0, value: value_at_zero };
        let mut negative: Vec<Sample> = samples.iter().copied().filter(|s| s.t < 0.0).collect();
        negative.push(zero);
        let mut positive = vec![zero];
        positive.extend(samples.iter().copied().filter(|s| s.t > 0.0));
        if samples.iter().any(|s| s.t == 0.0 && s.value != value_at_zero) {
            return Err(Error::invalid("table sample at t = 0 disagrees with value_at_zero"));
        }
        if negative.len() < 2 || positive.len() < 2 {
            return Err(Error::invalid("kernel table needs samples on both half-lines"));
        }
        if samples.iter().any(|s| !s.value.is_finite()) {
            return Err(Error::invalid("kernel table values must be finite"));
        }
        let negative = PiecewiseLinear::new(&negative)?;
        let positive = PiecewiseLinear::new(&positive)?;
        if !negative.is_concave() || !positive.is_concave() {
            return Err(Error::invalid("kernel table is not concave on each half-line"));
        }
        let neg_vals = negative.values();
        let pos_vals = positive.values();
        let monotone = neg_vals.windows(2).all(|w| w[1] <= w[0]) && pos_vals.windows(2).all(|w| w[1] >= w[0]);
        Ok(Self {
            name: "table".into(),
            shape: Shape::Table { negative, positive },
            flags: KernelFlags {
                monotone,
                singular: false,
                strictly_concave: false,
            },
            value_at_zero,
            domain_halfwidth: f64::INFINITY,
        })
    }

    /// User-supplied kernel with declared flags. `f` is never called at zero.
    pub fn custom<F>(name: impl Into<String>, f: F, value_at_zero: f64, flags: KernelFlags) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            shape: Shape::Custom(Arc::new(f)),
            flags,
            value_at_zero,
            domain_halfwidth: f64::INFINITY,
        }
    }

    /// `x ↦ K(factor·x)`; structural flags carry over unchanged.
    pub fn dilated(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::invalid(format!("dilation factor must be positive, got {factor}")));
        }
        Ok(Self {
            name: format!("{}∘(×{factor})", self.name),
            shape: Shape::Dilated {
                inner: Arc::new(self.clone()),
                factor,
            },
            flags: self.flags,
            value_at_zero: self.value_at_zero,
            domain_halfwidth: self.domain_halfwidth / factor,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn flags(&self) -> KernelFlags {
        self.flags
    }

    pub fn value_at_zero(&self) -> f64 {
        self.value_at_zero
    }

    pub fn domain_halfwidth(&self) -> f64 {
        self.domain_halfwidth
    }

    pub fn is_singular(&self) -> bool {
        self.flags.singular
    }

    #[inline]
    pub fn evaluate(&self, t: f64) -> f64 {
        if t == 0.0 {
            return self.value_at_zero;
        }
        match &self.shape {
            Shape::Log => t.abs().ln(),
            Shape::InversePower(s) => -t.abs().powf(-s),
            Shape::Table { negative, positive } => {
                if t < 0.0 {
                    negative.eval_extrapolated(t)
                } else {
                    positive.eval_extrapolated(t)
                }
            }
            Shape::Dilated { inner, factor } => inner.evaluate(factor * t),
            Shape::Custom(f) => f(t),
        }
    }

    /// `min{K(-1), K(1)}`, the offset used by the truncation bound.
    pub fn unit_floor(&self) -> f64 {
        self.evaluate(-1.0).min(self.evaluate(1.0))
    }
}

/// Outcome of sampling a kernel against its declared hypotheses.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelCheck {
    pub concavity_violations: usize,
    pub monotonicity_violations: usize,
    pub limit_mismatch: bool,
    pub singular_mismatch: bool,
}

impl KernelCheck {
    pub fn passed(&self) -> bool {
        self.concavity_violations == 0
            && self.monotonicity_violations == 0
            && !self.limit_mismatch
            && !self.singular_mismatch
    }
}

/// Relative tolerance for second-difference tests.
pub const CONCAVITY_TOL: f64 = 1e-10;

/// Samples the concave-shift inequality
/// `g(x+k+h) - g(x+h) <= g(x+k) - g(x)` on each half-line within `[-span, span]`,
/// the monotonicity claim, and the limits at zero.
pub fn check_kernel(kernel: &Kernel, trials: usize, span: f64, seed: u64) -> KernelCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut concavity_violations = 0;
    for sign in [-1.0, 1.0] {
        for _ in 0..trials {
            // x, x+k+h on the same open half-line, away from zero by a relative margin
            let a = rng.gen_range(1e-3..span);
            let b = rng.gen_range(1e-3..span);
            let (near, far) = if a < b { (a, b) } else { (b, a) };
            if far - near < 1e-9 {
                continue;
            }
            let split = rng.gen_range(0.05..0.95);
            let k = (far - near) * split;
            let h = far - near - k;
            // on the negative side walk outward from -far toward -near
            let x = if sign > 0.0 { near } else { -far };
            let g = |t: f64| kernel.evaluate(t);
            let (g0, gk, gh, gkh) = (g(x), g(x + k), g(x + h), g(x + k + h));
            let lhs = gkh - gh;
            let rhs = gk - g0;
            let scale = 1.0 + g0.abs() + gk.abs() + gh.abs() + gkh.abs();
            if lhs > rhs + CONCAVITY_TOL * scale {
                concavity_violations += 1;
            }
        }
    }

    let mut monotonicity_violations = 0;
    if kernel.flags().monotone {
        let grid: Vec<f64> = (1..=200).map(|i| span * i as f64 / 200.0).collect();
        for w in grid.windows(2) {
            let tol = CONCAVITY_TOL * (1.0 + kernel.evaluate(w[1]).abs());
            if kernel.evaluate(w[1]) < kernel.evaluate(w[0]) - tol {
                monotonicity_violations += 1;
            }
            if kernel.evaluate(-w[1]) < kernel.evaluate(-w[0]) - tol {
                monotonicity_violations += 1;
            }
        }
    }

    let z = kernel.value_at_zero();
    let eps = 1e-12;
    let (left, right) = (kernel.evaluate(-eps), kernel.evaluate(eps));
    let limit_mismatch = if z == f64::NEG_INFINITY {
        // a singular limit shows up as large negative values close to zero
        left > kernel.evaluate(-1e-3) || right > kernel.evaluate(1e-3)
    } else {
        let tol = 1e-6 * (1.0 + z.abs());
        (left - z).abs() > tol || (right - z).abs() > tol
    };
    let singular_mismatch = kernel.flags().singular != (z == f64::NEG_INFINITY);

    KernelCheck {
        concavity_violations,
        monotonicity_violations,
        limit_mismatch,
        singular_mismatch,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_kernel_values() {
        let k = Kernel::log();
        assert_eq!(k.evaluate(1.0), 0.0);
        assert!((k.evaluate(-std::f64::consts::E) - 1.0).abs() < 1e-15);
        assert_eq!(k.evaluate(0.0), f64::NEG_INFINITY);
        assert_eq!(k.flags(), KernelFlags::ALL);
    }

    #[test]
    fn inverse_power_values() {
        let k = Kernel::inverse_power(1.0).unwrap();
        assert_eq!(k.evaluate(2.0), -0.5);
        assert_eq!(k.evaluate(-1.0), -1.0);
        assert!(Kernel::inverse_power(0.0).is_err());
        assert!(Kernel::inverse_power(-1.0).is_err());
    }

    #[test]
    fn inverse_power_second_differences() {
        // finite-difference concavity on a positive grid, independent of check_kernel
        let k = Kernel::inverse_power(2.0).unwrap();
        let h = 1e-2;
        for i in 1..500 {
            let t = 0.05 + i as f64 * 0.02;
            let d2 = k.evaluate(t + h) - 2.0 * k.evaluate(t) + k.evaluate(t - h);
            assert!(d2 <= 0.0, "second difference {d2} at {t}");
        }
    }

    #[test]
    fn builtin_kernels_pass_sampled_checks() {
        for k in [
            Kernel::log(),
            Kernel::inverse_power(1.0).unwrap(),
            Kernel::inverse_power(0.5).unwrap(),
            Kernel::log().dilated(7.5).unwrap(),
        ] {
            let report = check_kernel(&k, 1000, 50.0, 11);
            assert!(report.passed(), "{k:?}: {report:?}");
        }
    }

    #[test]
    fn table_kernel_flags_from_samples() {
        let samples = [
            Sample { t: -2.0, value: 1.0 },
            Sample { t: -1.0, value: 0.5 },
            Sample { t: 1.0, value: 0.5 },
            Sample { t: 2.0, value: 0.8 },
        ];
        let k = Kernel::table(&samples, 0.0).unwrap();
        assert!(k.flags().monotone);
        assert!(!k.flags().singular);
        assert_eq!(k.evaluate(0.5), 0.25);
        assert_eq!(k.evaluate(-1.5), 0.75);
        assert!((k.evaluate(3.0) - 1.1).abs() < 1e-12);
        assert!(check_kernel(&k, 500, 10.0, 3).passed());

        let convex = [
            Sample { t: -1.0, value: 1.0 },
            Sample { t: 1.0, value: 1.0 },
            Sample { t: 2.0, value: 3.0 },
        ];
        assert!(Kernel::table(&convex, 0.0).is_err());
    }

    #[test]
    fn non_concave_custom_kernel_is_caught() {
        let k = Kernel::custom("cosh", |t: f64| t.cosh(), 1.0, KernelFlags::default());
        assert!(check_kernel(&k, 200, 5.0, 1).concavity_violations > 0);
    }
}
