//! Piecewise-linear sample tables backing tabulated kernels and fields.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One `(t, value)` sample. A value of `-inf` is allowed for field tables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    #[serde(with = "crate::serde_ext::ext")]
    pub value: f64,
}

/// Linear interpolation through strictly increasing abscissae.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear {
    ts: Vec<f64>,
    vs: Vec<f64>,
}

impl PiecewiseLinear {
    pub fn new(samples: &[Sample]) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::invalid("a table needs at least two samples"));
        }
        for w in samples.windows(2) {
            if !(w[0].t < w[1].t) {
                return Err(Error::invalid(format!(
                    "table abscissae must be strictly increasing ({} then {})",
                    w[0].t, w[1].t
                )));
            }
        }
        if samples.iter().any(|s| !s.t.is_finite() || s.value.is_nan() || s.value == f64::INFINITY) {
            return Err(Error::invalid("table entries must be finite or -inf"));
        }
        Ok(Self {
            ts: samples.iter().map(|s| s.t).collect(),
            vs: samples.iter().map(|s| s.value).collect(),
        })
    }

    pub fn first(&self) -> f64 {
        self.ts[0]
    }

    pub fn last(&self) -> f64 {
        self.ts[self.ts.len() - 1]
    }

    pub fn abscissae(&self) -> &[f64] {
        &self.ts
    }

    pub fn values(&self) -> &[f64] {
        &self.vs
    }

    fn segment(&self, t: f64) -> usize {
        // index i with ts[i] <= t < ts[i+1], clamped to the valid segment range
        let i = self.ts.partition_point(|&x| x <= t);
        i.saturating_sub(1).min(self.ts.len() - 2)
    }

    fn lerp(&self, i: usize, t: f64) -> f64 {
        let (t0, t1) = (self.ts[i], self.ts[i + 1]);
        let (v0, v1) = (self.vs[i], self.vs[i + 1]);
        if t == t0 {
            return v0;
        }
        if t == t1 {
            return v1;
        }
        if v0 == f64::NEG_INFINITY || v1 == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        v0 + (v1 - v0) * (t - t0) / (t1 - t0)
    }

    /// Interpolates inside the table range, `-inf` outside it.
    pub fn eval_or_neg_inf(&self, t: f64) -> f64 {
        if t < self.first() || t > self.last() {
            return f64::NEG_INFINITY;
        }
        self.lerp(self.segment(t), t)
    }

    /// Interpolates inside the table range and extends the end segments linearly.
    pub fn eval_extrapolated(&self, t: f64) -> f64 {
        let i = self.segment(t);
        let (t0, t1) = (self.ts[i], self.ts[i + 1]);
        let (v0, v1) = (self.vs[i], self.vs[i + 1]);
        if t >= t0 && t <= t1 {
            return self.lerp(i, t);
        }
        v0 + (v1 - v0) * (t - t0) / (t1 - t0)
    }

    /// Slopes are nonincreasing and every value is finite.
    pub fn is_concave(&self) -> bool {
        if self.vs.iter().any(|v| !v.is_finite()) {
            return false;
        }
        let slopes: Vec<f64> = (0..self.ts.len() - 1)
            .map(|i| (self.vs[i + 1] - self.vs[i]) / (self.ts[i + 1] - self.ts[i]))
            .collect();
        slopes
            .windows(2)
            .all(|w| w[1] <= w[0] + 1e-12 * (1.0 + w[0].abs()))
    }

    pub fn max_value(&self) -> f64 {
        self.vs.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Smallest and largest abscissae with a finite value.
    pub fn finite_hull(&self) -> Option<(f64, f64)> {
        let lo = self.ts.iter().zip(&self.vs).find(|(_, v)| v.is_finite())?.0;
        let hi = self
            .ts
            .iter()
            .zip(&self.vs)
            .rev()
            .find(|(_, v)| v.is_finite())?
            .0;
        Some((*lo, *hi))
    }
}
