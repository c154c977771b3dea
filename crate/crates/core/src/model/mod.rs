//! Kernels, fields, multiplicities, node configurations and problem domains.

mod admissibility;
mod field;
mod kernel;
mod nodes;
mod table;

pub use admissibility::{check_admissibility, AdmissibilityReport, DEFAULT_FLOOR, DEFAULT_PROBES};
pub use field::Field;
pub use kernel::{check_kernel, Kernel, KernelCheck, KernelFlags, CONCAVITY_TOL};
pub use nodes::{Multiplicities, NodeConfig};
pub use table::{PiecewiseLinear, Sample};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Where the nodes and the variable `t` live.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ProblemDomain {
    Axis,
    /// `[0, ∞)`; the field is extended by `-inf` to the left of the origin.
    Semiaxis,
    Segment { a: f64, b: f64 },
}

impl ProblemDomain {
    pub fn segment(a: f64, b: f64) -> Result<Self> {
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvertedBounds { lo: a, hi: b });
        }
        Ok(ProblemDomain::Segment { a, b })
    }
}

/// A complete sum-of-translates problem `F(y, t) = J(t) + Σ rⱼ K(t - yⱼ)`.
#[derive(Debug, Clone)]
pub struct Problem {
    kernel: Kernel,
    field: Field,
    multiplicities: Multiplicities,
    domain: ProblemDomain,
}

impl Problem {
    /// The stored field is the domain-effective one: restricted to `[a, b]`
    /// for segments and to `[0, ∞)` for the semiaxis.
    pub fn new(kernel: Kernel, field: Field, multiplicities: Multiplicities, domain: ProblemDomain) -> Result<Self> {
        let field = match domain {
            ProblemDomain::Axis => field,
            ProblemDomain::Semiaxis => field.restricted(0.0, f64::INFINITY)?,
            ProblemDomain::Segment { a, b } => {
                ProblemDomain::segment(a, b)?;
                field.restricted(a, b)?
            }
        };
        Ok(Self {
            kernel,
            field,
            multiplicities,
            domain,
        })
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn multiplicities(&self) -> &Multiplicities {
        &self.multiplicities
    }

    pub fn domain(&self) -> ProblemDomain {
        self.domain
    }

    pub fn n(&self) -> usize {
        self.multiplicities.len()
    }

    pub fn total_multiplicity(&self) -> f64 {
        self.multiplicities.total()
    }

    /// Same kernel and field with other multiplicities of the same length.
    pub fn with_multiplicities(&self, multiplicities: Multiplicities) -> Result<Self> {
        if multiplicities.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                got: multiplicities.len(),
            });
        }
        Ok(Self {
            multiplicities,
            ..self.clone()
        })
    }

    /// Replaces the field without re-restricting it to the domain.
    pub(crate) fn with_effective_field(&self, field: Field, domain: ProblemDomain) -> Self {
        Self {
            field,
            domain,
            ..self.clone()
        }
    }

    pub fn check_nodes(&self, y: &NodeConfig) -> Result<()> {
        if y.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                got: y.len(),
            });
        }
        Ok(())
    }

    /// The domain segment, or `None` for unbounded domains.
    pub fn segment(&self) -> Option<(f64, f64)> {
        match self.domain {
            ProblemDomain::Segment { a, b } => Some((a, b)),
            _ => None,
        }
    }

    /// True when the field is invariant under `t ↦ -t` on its support and the
    /// multiplicities are palindromic. Checked by sampling the field.
    pub fn looks_symmetric(&self) -> bool {
        let (lo, hi) = self.field.support();
        if lo != -hi || !self.multiplicities.is_palindromic() {
            return false;
        }
        let span = if hi.is_finite() { hi } else { 10.0 };
        (0..=64).all(|i| {
            let t = span * i as f64 / 64.0;
            let (a, b) = (self.field.evaluate(t), self.field.evaluate(-t));
            a == b || (a - b).abs() <= 1e-12 * (1.0 + a.abs())
        })
    }
}
