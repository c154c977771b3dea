use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::table::{PiecewiseLinear, Sample};
use crate::error::{Error, Result};

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Shape {
    /// `-scale·t²`
    Quadratic { scale: f64 },
    /// `-scale·|t|^exponent`
    Freud { scale: f64, exponent: f64 },
    /// `-slope·t` on `[0, ∞)`, `-inf` on `t < 0`
    LinearDecay { slope: f64 },
    Constant(f64),
    Table(PiecewiseLinear),
    Restricted { inner: Arc<Field>, lo: f64, hi: f64 },
    /// `x ↦ J(scale·x + shift)`
    Affine { inner: Arc<Field>, scale: f64, shift: f64 },
    Custom(ScalarFn),
}

/// An upper-bounded external field `J: ℝ → ℝ ∪ {-inf}`.
///
/// Besides the function itself a field carries an upper bound, a list of
/// points where it is finite, the closed hull of its finiteness set, and
/// whether it is concave there.
#[derive(Clone)]
pub struct Field {
    name: String,
    shape: Shape,
    upper_bound: f64,
    witnesses: Vec<f64>,
    support: (f64, f64),
    concave: bool,
    budget: Option<f64>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Field")
            .field("name", &self.name)
            .field("upper_bound", &self.upper_bound)
            .field("support", &self.support)
            .field("concave", &self.concave)
            .finish()
    }
}

const WITNESS_COUNT: usize = 32;

/// Evenly spread finiteness points inside `support`: half-integers for
/// unbounded supports, cell midpoints for bounded ones.
fn default_witnesses(support: (f64, f64)) -> Vec<f64> {
    let (lo, hi) = support;
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => {
            let m = WITNESS_COUNT + 1;
            (0..m).map(|i| lo + (hi - lo) * (i as f64 + 0.5) / m as f64).collect()
        }
        (true, false) => (0..WITNESS_COUNT).map(|i| lo + i as f64 + 0.5).collect(),
        (false, true) => (0..WITNESS_COUNT).rev().map(|i| hi - i as f64 - 0.5).collect(),
        (false, false) => {
            let half = WITNESS_COUNT as i64 / 2;
            (-half..half).map(|i| i as f64 + 0.5).collect()
        }
    }
}

impl Field {
    fn analytic(name: String, shape: Shape, upper_bound: f64, support: (f64, f64), concave: bool) -> Self {
        Self {
            name,
            shape,
            upper_bound,
            witnesses: default_witnesses(support),
            support,
            concave,
            budget: Some(f64::INFINITY),
        }
    }

    /// `t ↦ -scale·t²`, the log of the Hermite weight `exp(-scale·t²)`.
    pub fn gaussian(scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::invalid(format!("gaussian scale must be positive, got {scale}")));
        }
        Ok(Self::analytic(
            format!("gaussian(scale={scale})"),
            Shape::Quadratic { scale },
            0.0,
            (f64::NEG_INFINITY, f64::INFINITY),
            true,
        ))
    }

    /// `t ↦ -scale·|t|^exponent` with `exponent >= 1`.
    pub fn freud(scale: f64, exponent: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::invalid(format!("freud scale must be positive, got {scale}")));
        }
        if !(exponent >= 1.0 && exponent.is_finite()) {
            return Err(Error::invalid(format!("freud exponent must be >= 1, got {exponent}")));
        }
        Ok(Self::analytic(
            format!("freud(scale={scale}, exponent={exponent})"),
            Shape::Freud { scale, exponent },
            0.0,
            (f64::NEG_INFINITY, f64::INFINITY),
            true,
        ))
    }

    /// `t ↦ -slope·t` on `[0, ∞)` and `-inf` for `t < 0`.
    pub fn linear_decay(slope: f64) -> Result<Self> {
        if !(slope > 0.0 && slope.is_finite()) {
            return Err(Error::invalid(format!("linear slope must be positive, got {slope}")));
        }
        Ok(Self::analytic(
            format!("linear(slope={slope})"),
            Shape::LinearDecay { slope },
            0.0,
            (0.0, f64::INFINITY),
            true,
        ))
    }

    /// Constant field. Not admissible on the axis for kernels that grow at infinity.
    pub fn constant(value: f64) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::invalid("constant field value must be finite"));
        }
        let mut field = Self::analytic(
            format!("constant({value})"),
            Shape::Constant(value),
            value,
            (f64::NEG_INFINITY, f64::INFINITY),
            true,
        );
        field.budget = None;
        Ok(field)
    }

    /// Piecewise-linear field through the samples, `-inf` outside the table range.
    pub fn table(samples: &[Sample]) -> Result<Self> {
        let table = PiecewiseLinear::new(samples)?;
        let support = table
            .finite_hull()
            .ok_or_else(|| Error::SparseField("table has no finite value".into()))?;
        let witnesses: Vec<f64> = table
            .abscissae()
            .iter()
            .zip(table.values())
            .filter(|(_, v)| v.is_finite())
            .map(|(t, _)| *t)
            .collect();
        Ok(Self {
            name: "table".into(),
            upper_bound: table.max_value(),
            concave: table.is_concave(),
            witnesses,
            support,
            shape: Shape::Table(table),
            budget: None,
        })
    }

    /// User-supplied field. `witnesses` must be strictly increasing points where
    /// `f` is finite; `support` is the closed hull of the finiteness set.
    pub fn custom<F>(
        name: impl Into<String>,
        f: F,
        upper_bound: f64,
        witnesses: Vec<f64>,
        support: (f64, f64),
        concave: bool,
    ) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let field = Self {
            name: name.into(),
            shape: Shape::Custom(Arc::new(f)),
            upper_bound,
            witnesses,
            support,
            concave,
            budget: None,
        };
        field.check_witnesses()?;
        Ok(field)
    }

    /// The same field with `-inf` outside `[lo, hi]`.
    pub fn restricted(&self, lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) {
            return Err(Error::InvertedBounds { lo, hi });
        }
        let support = (self.support.0.max(lo), self.support.1.min(hi));
        if support.0 > support.1 {
            return Err(Error::SparseField(format!(
                "field is -inf on the whole of [{lo}, {hi}]"
            )));
        }
        let mut witnesses: Vec<f64> = self
            .witnesses
            .iter()
            .copied()
            .filter(|w| *w >= lo && *w <= hi)
            .collect();
        let analytic = matches!(
            self.shape,
            Shape::Quadratic { .. } | Shape::Freud { .. } | Shape::LinearDecay { .. } | Shape::Constant(_)
        );
        if witnesses.len() < WITNESS_COUNT && analytic {
            // analytic fields are finite on their whole support
            witnesses = default_witnesses(support);
        }
        Ok(Self {
            name: format!("{}|[{lo}, {hi}]", self.name),
            shape: Shape::Restricted {
                inner: Arc::new(self.clone()),
                lo,
                hi,
            },
            upper_bound: self.upper_bound,
            witnesses,
            support,
            concave: self.concave,
            budget: self.budget,
        })
    }

    /// `x ↦ J(scale·x + shift)` for `scale > 0`.
    pub fn affine(&self, scale: f64, shift: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite() && shift.is_finite()) {
            return Err(Error::invalid(format!("affine map needs scale > 0, got {scale}")));
        }
        let back = |t: f64| (t - shift) / scale;
        Ok(Self {
            name: format!("{}∘({scale}·x{shift:+})", self.name),
            shape: Shape::Affine {
                inner: Arc::new(self.clone()),
                scale,
                shift,
            },
            upper_bound: self.upper_bound,
            witnesses: self.witnesses.iter().map(|&w| back(w)).collect(),
            support: (back(self.support.0), back(self.support.1)),
            concave: self.concave,
            budget: self.budget,
        })
    }

    pub fn with_witnesses(mut self, witnesses: Vec<f64>) -> Result<Self> {
        self.witnesses = witnesses;
        self.check_witnesses()?;
        Ok(self)
    }

    /// Records an asserted admissibility budget `R` (`f64::INFINITY` for every `R`).
    pub fn with_budget(mut self, budget: f64) -> Result<Self> {
        if !(budget > 0.0) {
            return Err(Error::invalid(format!("admissibility budget must be positive, got {budget}")));
        }
        self.budget = Some(budget);
        Ok(self)
    }

    fn check_witnesses(&self) -> Result<()> {
        for w in self.witnesses.windows(2) {
            if !(w[0] < w[1]) {
                return Err(Error::invalid("finiteness witnesses must be strictly increasing"));
            }
        }
        if let Some(w) = self.witnesses.iter().find(|&&w| !self.evaluate(w).is_finite()) {
            return Err(Error::invalid(format!("field is not finite at witness {w}")));
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn upper_bound(&self) -> f64 {
        self.upper_bound
    }

    pub fn witnesses(&self) -> &[f64] {
        &self.witnesses
    }

    /// Closed hull of the set where the field is finite.
    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    pub fn is_concave(&self) -> bool {
        self.concave
    }

    pub fn budget(&self) -> Option<f64> {
        self.budget
    }

    #[inline]
    pub fn evaluate(&self, t: f64) -> f64 {
        match &self.shape {
            Shape::Quadratic { scale } => -scale * t * t,
            Shape::Freud { scale, exponent } => -scale * t.abs().powf(*exponent),
            Shape::LinearDecay { slope } => {
                if t < 0.0 {
                    f64::NEG_INFINITY
                } else {
                    -slope * t
                }
            }
            Shape::Constant(c) => *c,
            Shape::Table(table) => table.eval_or_neg_inf(t),
            Shape::Restricted { inner, lo, hi } => {
                if t < *lo || t > *hi {
                    f64::NEG_INFINITY
                } else {
                    inner.evaluate(t)
                }
            }
            Shape::Affine { inner, scale, shift } => inner.evaluate(scale * t + shift),
            Shape::Custom(f) => f(t),
        }
    }

    /// Number of random samples in `[-span, span]` exceeding the upper bound.
    pub fn count_bound_violations(&self, samples: usize, span: f64, seed: u64) -> usize {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..samples)
            .filter(|_| {
                let t = rng.gen_range(-span..=span);
                self.evaluate(t) > self.upper_bound
            })
            .count()
    }

    /// Weighted count of finiteness points in `[lo, hi]`, endpoints weighted 1/2.
    /// Witnesses and a uniform probe grid are both consulted.
    pub fn finiteness_weight(&self, lo: f64, hi: f64, probes: usize) -> f64 {
        let mut points: Vec<f64> = self
            .witnesses
            .iter()
            .copied()
            .filter(|&w| w >= lo && w <= hi)
            .collect();
        let m = probes.max(2);
        points.extend((0..m).map(|i| lo + (hi - lo) * i as f64 / (m - 1) as f64));
        points.sort_by(f64::total_cmp);
        points.dedup();
        points
            .into_iter()
            .filter(|&t| self.evaluate(t).is_finite())
            .map(|t| if t == lo || t == hi { 0.5 } else { 1.0 })
            .sum()
    }
}
