//! Evaluation of `F(y, t)` and its interval suprema `m₀(y), …, mₙ(y)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Field, Kernel, Multiplicities, NodeConfig, Problem};
use crate::search::{golden_max, linspace};

/// Tolerances and budgets for one-dimensional maximization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaxSearch {
    /// Absolute tolerance in the argument.
    pub tol_t: f64,
    /// Relative tolerance used when comparing values.
    pub tol_v: f64,
    pub golden_max_iter: usize,
    /// Grid density for fields not flagged concave.
    pub grid_points: usize,
}

impl Default for MaxSearch {
    fn default() -> Self {
        Self {
            tol_t: 1e-10,
            tol_v: 1e-12,
            golden_max_iter: 200,
            grid_points: 512,
        }
    }
}

/// Truncation interval for the unbounded end gaps `j = 0` and `j = n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub lo: f64,
    pub hi: f64,
}

impl Window {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) {
            return Err(Error::InvertedBounds { lo, hi });
        }
        Ok(Self { lo, hi })
    }

    pub fn symmetric(radius: f64) -> Result<Self> {
        Self::new(-radius, radius)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// The `n + 1` interval suprema with attaining locations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaximaVector {
    #[serde(with = "crate::serde_ext::vec_ext")]
    pub m: Vec<f64>,
    pub argmax: Vec<f64>,
    /// End-gap truncation actually used, `(lo, hi)`.
    pub truncation_used: (f64, f64),
}

impl MaximaVector {
    /// `max mⱼ`, the global supremum of `F(y, ·)` over the window.
    pub fn overline(&self) -> f64 {
        self.m.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `min mⱼ`.
    pub fn underline(&self) -> f64 {
        self.m.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn spread(&self) -> f64 {
        oscillation_spread(self)
    }

    pub fn all_finite(&self) -> bool {
        self.m.iter().all(|v| v.is_finite())
    }
}

/// `J(t) + Σ rⱼ K(t - yⱼ)`. Returns `-inf` as a value, never an error.
#[inline]
pub fn sum_of_translates(kernel: &Kernel, field: &Field, r: &Multiplicities, y: &[f64], t: f64) -> f64 {
    let j = field.evaluate(t);
    if j == f64::NEG_INFINITY {
        return j;
    }
    y.iter()
        .zip(r.as_slice())
        .fold(j, |acc, (&yj, &rj)| acc + rj * kernel.evaluate(t - yj))
}

impl Problem {
    #[inline]
    pub fn value(&self, y: &[f64], t: f64) -> f64 {
        sum_of_translates(self.kernel(), self.field(), self.multiplicities(), y, t)
    }
}

/// Supremum of `F(y, ·)` over `[lo, hi]` and one location attaining it.
///
/// The interval is first clipped to the hull of the field's finiteness set.
/// When the field is concave, `F` is concave between consecutive nodes and a
/// golden-section search plus both endpoints is used; otherwise a uniform grid
/// of `search.grid_points` points is refined around its three best cells.
pub fn interval_maximum(problem: &Problem, y: &[f64], lo: f64, hi: f64, search: &MaxSearch) -> Result<(f64, f64)> {
    if lo > hi || lo.is_nan() || hi.is_nan() {
        return Err(Error::InvertedBounds { lo, hi });
    }
    let f = |t: f64| problem.value(y, t);
    let (s_lo, s_hi) = problem.field().support();
    let a = lo.max(s_lo);
    let b = hi.min(s_hi);
    if a > b {
        return Ok((f64::NEG_INFINITY, lo));
    }
    if a == b {
        return Ok((f(a), a));
    }
    let candidates = if problem.field().is_concave() {
        let (x, fx) = golden_max(f, a, b, search.tol_t, search.golden_max_iter);
        vec![(x, fx), (a, f(a)), (b, f(b))]
    } else {
        grid_refine(&f, a, b, search)
    };
    Ok(best_of(&candidates))
}

/// First candidate with the largest value.
fn best_of(candidates: &[(f64, f64)]) -> (f64, f64) {
    let mut best = (candidates[0].1, candidates[0].0);
    for &(x, fx) in &candidates[1..] {
        if fx > best.0 {
            best = (fx, x);
        }
    }
    best
}

fn grid_refine(f: &impl Fn(f64) -> f64, a: f64, b: f64, search: &MaxSearch) -> Vec<(f64, f64)> {
    let grid = linspace(a, b, search.grid_points.max(3));
    let values: Vec<f64> = grid.iter().map(|&t| f(t)).collect();
    let mut order: Vec<usize> = (0..grid.len()).collect();
    order.sort_by(|&i, &k| values[k].total_cmp(&values[i]).then(i.cmp(&k)));
    let mut out: Vec<(f64, f64)> = grid.iter().copied().zip(values.iter().copied()).collect();
    for &i in order.iter().take(3) {
        let left = grid[i.saturating_sub(1)];
        let right = grid[(i + 1).min(grid.len() - 1)];
        if right > left {
            out.push(golden_max(f, left, right, search.tol_t, search.golden_max_iter));
        }
    }
    out
}

/// Supremum of `F(y, ·)` over `[lo, hi]`, split at the nodes inside it so that
/// each piece is searched as a single gap.
pub fn sup_over(problem: &Problem, y: &[f64], lo: f64, hi: f64, search: &MaxSearch) -> Result<(f64, f64)> {
    let mut cuts = vec![lo];
    cuts.extend(y.iter().copied().filter(|&v| v > lo && v < hi));
    cuts.push(hi);
    let mut best = (f64::NEG_INFINITY, lo);
    for w in cuts.windows(2) {
        let (v, x) = interval_maximum(problem, y, w[0], w[1], search)?;
        if v > best.0 {
            best = (v, x);
        }
    }
    Ok(best)
}

/// All `n + 1` interval suprema.
///
/// Gap `0` is `[window.lo, y₁]` and gap `n` is `[yₙ, window.hi]`. If the
/// configuration sticks out of the window, the corresponding end is moved out
/// by one window width beyond the outermost node; this is a heuristic, and the
/// window actually used is recorded in the result.
pub fn maxima_vector(problem: &Problem, y: &NodeConfig, window: Window, search: &MaxSearch) -> Result<MaximaVector> {
    problem.check_nodes(y)?;
    let nodes = y.as_slice();
    let n = nodes.len();
    let lo = if y.first() < window.lo {
        y.first() - window.width()
    } else {
        window.lo
    };
    let hi = if y.last() > window.hi {
        y.last() + window.width()
    } else {
        window.hi
    };
    let mut m = Vec::with_capacity(n + 1);
    let mut argmax = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let (a, b) = gap_bounds(nodes, j, lo, hi);
        let (v, x) = interval_maximum(problem, nodes, a, b, search)?;
        m.push(v);
        argmax.push(x);
    }
    Ok(MaximaVector {
        m,
        argmax,
        truncation_used: (lo, hi),
    })
}

/// Bounds of gap `j` between consecutive nodes, with `lo`/`hi` closing the ends.
#[inline]
pub(crate) fn gap_bounds(nodes: &[f64], j: usize, lo: f64, hi: f64) -> (f64, f64) {
    let n = nodes.len();
    let a = if j == 0 { lo } else { nodes[j - 1] };
    let b = if j == n { hi } else { nodes[j] };
    (a, b)
}

/// `max mⱼ - min mⱼ`; `+inf` as soon as any entry is `-inf`.
pub fn oscillation_spread(maxima: &MaximaVector) -> f64 {
    if maxima.m.contains(&f64::NEG_INFINITY) {
        return f64::INFINITY;
    }
    maxima.overline() - maxima.underline()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ProblemDomain;

    const GAUSS_LEVEL: f64 = -0.5 - 0.5 * std::f64::consts::LN_2;

    fn gaussian(n: usize) -> Problem {
        Problem::new(
            Kernel::log(),
            Field::gaussian(1.0).unwrap(),
            Multiplicities::ones(n).unwrap(),
            ProblemDomain::Axis,
        )
        .unwrap()
    }

    fn chebyshev(n: usize) -> Problem {
        Problem::new(
            Kernel::log(),
            Field::constant(0.0).unwrap(),
            Multiplicities::ones(n).unwrap(),
            ProblemDomain::segment(0.0, 1.0).unwrap(),
        )
        .unwrap()
    }

    fn maxima(problem: &Problem, y: &[f64], window: Window) -> MaximaVector {
        maxima_vector(problem, &NodeConfig::new(y.to_vec()).unwrap(), window, &MaxSearch::default()).unwrap()
    }

    #[test]
    fn sum_of_translates_values() {
        let p = chebyshev(1);
        assert!((p.value(&[0.0], 0.5) - 0.5f64.ln()).abs() < 1e-15);
        let unrestricted = Field::constant(0.0).unwrap();
        let r = Multiplicities::ones(1).unwrap();
        let v = sum_of_translates(&Kernel::log(), &unrestricted, &r, &[0.0], 2.0);
        assert!((v - 2f64.ln()).abs() < 1e-15);
        assert_eq!(p.value(&[0.3], 0.3), f64::NEG_INFINITY);
        let g = gaussian(1);
        assert!((g.value(&[0.0], 0.5f64.sqrt()) - GAUSS_LEVEL).abs() < 1e-15);
    }

    #[test]
    fn interval_maximum_gaussian_calculus() {
        let g = gaussian(1);
        let (v, x) = interval_maximum(&g, &[0.0], 0.0, 5.0, &MaxSearch::default()).unwrap();
        assert!((v - GAUSS_LEVEL).abs() < 1e-14);
        assert!((x - 0.5f64.sqrt()).abs() < 1e-7);
        let (v0, x0) = interval_maximum(&g, &[0.0], -5.0, 0.0, &MaxSearch::default()).unwrap();
        assert_eq!(v0, v);
        assert!((x0 + x).abs() < 1e-7);
    }

    #[test]
    fn interval_maximum_degenerate_and_inverted() {
        let p = chebyshev(2);
        let (v, x) = interval_maximum(&p, &[0.4, 0.4], 0.4, 0.4, &MaxSearch::default()).unwrap();
        assert_eq!(v, f64::NEG_INFINITY);
        assert_eq!(x, 0.4);
        assert!(matches!(
            interval_maximum(&p, &[0.4, 0.6], 0.6, 0.4, &MaxSearch::default()),
            Err(Error::InvertedBounds { .. })
        ));
        // gap entirely outside the field support
        let (v, _) = interval_maximum(&p, &[0.4, 0.6], 1.5, 2.0, &MaxSearch::default()).unwrap();
        assert_eq!(v, f64::NEG_INFINITY);
    }

    #[test]
    fn maxima_vector_gaussian_symmetric() {
        let mv = maxima(&gaussian(1), &[0.0], Window::symmetric(5.0).unwrap());
        assert_eq!(mv.m.len(), 2);
        assert!((mv.m[0] - GAUSS_LEVEL).abs() < 1e-14);
        assert!((mv.m[1] - GAUSS_LEVEL).abs() < 1e-14);
        assert!(mv.spread() < 1e-14);
    }

    #[test]
    fn maxima_vector_chebyshev_closed_form() {
        // monic Chebyshev polynomial on [0, 1] has sup norm 2^(1-2n)
        let p = chebyshev(2);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let y = [(1.0 - s) / 2.0, (1.0 + s) / 2.0];
        let mv = maxima(&p, &y, Window::new(0.0, 1.0).unwrap());
        for v in &mv.m {
            assert!((v + 3.0 * std::f64::consts::LN_2).abs() < 1e-12, "{mv:?}");
        }
        for (j, x) in mv.argmax.iter().enumerate() {
            let (a, b) = gap_bounds(&y, j, 0.0, 1.0);
            assert!(*x >= a && *x <= b);
        }
    }

    #[test]
    fn bounded_kernel_gap_with_neg_inf_field() {
        // J is -inf on the middle gap and K is bounded there, so m₁ = -inf
        let field = Field::custom(
            "holes",
            |t: f64| if (-1.0..=1.0).contains(&t) { f64::NEG_INFINITY } else { -t * t },
            0.0,
            vec![-2.0, 2.0],
            (f64::NEG_INFINITY, f64::INFINITY),
            false,
        )
        .unwrap();
        let p = Problem::new(
            Kernel::inverse_power(1.0).unwrap(),
            field,
            Multiplicities::ones(2).unwrap(),
            ProblemDomain::Axis,
        )
        .unwrap();
        let mv = maxima(&p, &[-0.5, 0.5], Window::symmetric(6.0).unwrap());
        assert_eq!(mv.m[1], f64::NEG_INFINITY);
        assert!(mv.m[0].is_finite() && mv.m[2].is_finite());
        assert_eq!(mv.spread(), f64::INFINITY);
    }

    #[test]
    fn spread_examples() {
        let mk = |m: Vec<f64>| MaximaVector {
            argmax: vec![0.0; m.len()],
            m,
            truncation_used: (0.0, 1.0),
        };
        assert_eq!(mk(vec![-1.0, -1.0, -1.0]).spread(), 0.0);
        assert_eq!(mk(vec![-1.0, -2.0, -1.0]).spread(), 1.0);
        assert_eq!(mk(vec![-1.0, f64::NEG_INFINITY, -1.0]).spread(), f64::INFINITY);
    }

    #[test]
    fn nonconcave_field_uses_grid() {
        // two bumps; golden section alone could lock onto the lower one
        let field = Field::custom(
            "bumps",
            |t: f64| (-(t - 1.0).powi(2)).exp().max(2.0 * (-(t + 2.0).powi(2)).exp()) - 0.01 * t * t,
            2.0,
            vec![-1.0, 0.0, 1.0],
            (f64::NEG_INFINITY, f64::INFINITY),
            false,
        )
        .unwrap();
        let p = Problem::new(
            Kernel::inverse_power(1.0).unwrap(),
            field,
            Multiplicities::ones(1).unwrap(),
            ProblemDomain::Axis,
        )
        .unwrap();
        let (_, x) = interval_maximum(&p, &[5.0], -4.0, 5.0, &MaxSearch::default()).unwrap();
        assert!((x + 2.0).abs() < 0.1, "{x}");
    }
}
