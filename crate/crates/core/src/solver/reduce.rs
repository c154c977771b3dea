use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{NodeConfig, Problem, ProblemDomain};

/// `x(t) = (t - center) / (2ℓ) + 1/2`, mapping `[center - ℓ, center + ℓ]` onto `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineMap {
    pub center: f64,
    pub half_width: f64,
}

impl AffineMap {
    pub fn new(center: f64, half_width: f64) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite() && center.is_finite()) {
            return Err(Error::invalid(format!("half width must be positive, got {half_width}")));
        }
        Ok(Self { center, half_width })
    }

    #[inline]
    pub fn to_unit(&self, t: f64) -> f64 {
        (t - self.center) / (2.0 * self.half_width) + 0.5
    }

    #[inline]
    pub fn from_unit(&self, x: f64) -> f64 {
        self.center + 2.0 * self.half_width * (x - 0.5)
    }

    pub fn nodes_to_unit(&self, y: &NodeConfig) -> Result<NodeConfig> {
        y.map(|v| self.to_unit(v))
    }

    pub fn nodes_from_unit(&self, x: &NodeConfig) -> Result<NodeConfig> {
        x.map(|v| self.from_unit(v))
    }
}

/// A problem transported to the unit segment together with the map back.
#[derive(Debug, Clone)]
pub struct ReducedProblem {
    pub unit: Problem,
    pub map: AffineMap,
}

/// Transports the problem on `[center - ℓ, center + ℓ]` to `[0, 1]` with
/// `K¹(x) = K(2ℓx)` and `J¹(x) = J(center + 2ℓ(x - 1/2))`, so that
/// `F(y, t) = F¹(x(y), x(t))` for `t` in the segment.
///
/// For singular kernels the field must be finite at more than `n` points of
/// the segment, endpoints counted with weight 1/2.
pub fn reduce_to_unit(problem: &Problem, center: f64, ell: f64) -> Result<ReducedProblem> {
    let map = AffineMap::new(center, ell)?;
    let (lo, hi) = (center - ell, center + ell);
    if problem.kernel().is_singular() {
        let weight = problem.field().finiteness_weight(lo, hi, 1025);
        if weight <= problem.n() as f64 {
            return Err(Error::SparseField(format!(
                "field is finite at only {weight} (weighted) points of [{lo}, {hi}], need more than {}",
                problem.n()
            )));
        }
    }
    let kernel = problem.kernel().dilated(2.0 * ell)?;
    let field = problem.field().affine(2.0 * ell, center - ell)?;
    let unit = Problem::new(
        kernel,
        field,
        problem.multiplicities().clone(),
        ProblemDomain::Segment { a: 0.0, b: 1.0 },
    )?;
    Ok(ReducedProblem { unit, map })
}

/// [`reduce_to_unit`] for a segment-domain problem onto its own segment.
pub fn reduce_segment(problem: &Problem) -> Result<ReducedProblem> {
    let (a, b) = problem
        .segment()
        .ok_or_else(|| Error::Precondition("problem is not posed on a segment".into()))?;
    reduce_to_unit(problem, 0.5 * (a + b), 0.5 * (b - a))
}
