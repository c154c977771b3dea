//! Brute-force ground truth for small `n`.
//!
//! Sorted node grids (combinations with repetition) are enumerated
//! exhaustively; ties are broken towards the lexicographically first grid
//! configuration so results do not depend on thread scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{maxima_vector, MaxSearch, MaximaVector, Window};
use crate::model::{NodeConfig, Problem};
use crate::search::{linspace, TailScan};
use crate::truncation::{certify, evaluation_window};

pub const DEFAULT_BUDGET: u128 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridSpec {
    /// Nodes range over `[-B, B]`; segment problems use their segment instead.
    #[serde(rename = "box")]
    pub box_radius: f64,
    pub nodes_per_axis: usize,
    /// Random samples for the Lipschitz estimate.
    pub t_samples: usize,
    pub seed: u64,
    pub budget: u128,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            box_radius: 3.0,
            nodes_per_axis: 61,
            t_samples: 400,
            seed: 0,
            budget: DEFAULT_BUDGET,
        }
    }
}

impl GridSpec {
    /// Grid on `[-box_radius, box_radius]` with the given spacing.
    pub fn with_step(box_radius: f64, step: f64) -> Result<Self> {
        if !(box_radius > 0.0 && step > 0.0) {
            return Err(Error::invalid("box radius and step must be positive"));
        }
        Ok(Self {
            box_radius,
            nodes_per_axis: (2.0 * box_radius / step).round() as usize + 1,
            ..Self::default()
        })
    }

    fn validate(&self) -> Result<()> {
        if self.nodes_per_axis < 2 {
            return Err(Error::invalid(format!(
                "nodes_per_axis must be at least 2, got {}",
                self.nodes_per_axis
            )));
        }
        if !(self.box_radius > 0.0) {
            return Err(Error::invalid(format!("box must be positive, got {}", self.box_radius)));
        }
        Ok(())
    }
}

/// Number of sorted `n`-tuples from `k` grid values, `C(k + n - 1, n)`.
pub fn grid_size(k: usize, n: usize) -> u128 {
    let mut acc: u128 = 1;
    for i in 0..n as u128 {
        acc = acc.saturating_mul(k as u128 + i) / (i + 1);
    }
    acc
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleValue {
    #[serde(with = "crate::serde_ext::ext")]
    pub value: f64,
    pub config: NodeConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridExtrema {
    /// `min over the grid of max mⱼ`.
    pub minimax: OracleValue,
    /// `max over the grid of min mⱼ`.
    pub maximin: OracleValue,
    pub step: f64,
    pub evaluated: u128,
    pub window: Window,
}

impl GridExtrema {
    pub fn duality_gap(&self) -> f64 {
        (self.minimax.value - self.maximin.value).abs()
    }
}

/// Grid values and the evaluation window shared by every oracle routine.
struct Layout {
    grid: Vec<f64>,
    window: Window,
    lo: f64,
    hi: f64,
}

fn layout(problem: &Problem, spec: &GridSpec) -> Result<Layout> {
    spec.validate()?;
    let (lo, hi, window) = match problem.segment() {
        Some((a, b)) => (a, b, Window::new(a, b)?),
        None => {
            let cert = certify(problem, &TailScan::default())?;
            let w = evaluation_window(problem, &cert, spec.box_radius, &TailScan::default())?;
            let r = w.hi.max(spec.box_radius);
            (-spec.box_radius, spec.box_radius, Window::symmetric(r)?)
        }
    };
    Ok(Layout {
        grid: linspace(lo, hi, spec.nodes_per_axis),
        window,
        lo,
        hi,
    })
}

#[derive(Clone)]
struct Best {
    value: f64,
    idx: Vec<usize>,
}

impl Best {
    fn empty(worst: f64) -> Self {
        Self {
            value: worst,
            idx: Vec::new(),
        }
    }

    /// Keeps the better value; on equal values the lexicographically first index.
    fn offer(&mut self, value: f64, idx: &[usize], better: impl Fn(f64, f64) -> bool) {
        let wins = self.idx.is_empty()
            || better(value, self.value)
            || (value == self.value && idx < self.idx.as_slice());
        if wins {
            self.value = value;
            self.idx = idx.to_vec();
        }
    }
}

/// Advances a nondecreasing index tuple with entries `< k`, keeping `idx[0]` fixed.
fn next_tail(idx: &mut [usize], k: usize) -> bool {
    let n = idx.len();
    let mut i = n;
    while i > 1 {
        i -= 1;
        if idx[i] + 1 < k {
            idx[i] += 1;
            let v = idx[i];
            for slot in idx[i + 1..].iter_mut() {
                *slot = v;
            }
            return true;
        }
    }
    false
}

/// Exhaustive minimax and maximin over the sorted grid.
pub fn grid_extrema(problem: &Problem, spec: &GridSpec) -> Result<GridExtrema> {
    let n = problem.n();
    let k = spec.nodes_per_axis;
    let size = grid_size(k, n);
    if size > spec.budget {
        return Err(Error::BudgetExceeded {
            size,
            budget: spec.budget,
        });
    }
    let lay = layout(problem, spec)?;
    let search = MaxSearch::default();
    let partial: Vec<Result<(Best, Best)>> = (0..k)
        .into_par_iter()
        .map(|first| {
            let mut min_over = Best::empty(f64::INFINITY);
            let mut max_under = Best::empty(f64::NEG_INFINITY);
            let mut idx = vec![first; n];
            loop {
                let y = NodeConfig::new(idx.iter().map(|&i| lay.grid[i]).collect())?;
                let mv = maxima_vector(problem, &y, lay.window, &search)?;
                min_over.offer(mv.overline(), &idx, |a, b| a < b);
                max_under.offer(mv.underline(), &idx, |a, b| a > b);
                if !next_tail(&mut idx, k) {
                    break;
                }
            }
            Ok((min_over, max_under))
        })
        .collect();
    let mut min_over = Best::empty(f64::INFINITY);
    let mut max_under = Best::empty(f64::NEG_INFINITY);
    for part in partial {
        let (a, b) = part?;
        min_over.offer(a.value, &a.idx, |x, y| x < y);
        max_under.offer(b.value, &b.idx, |x, y| x > y);
    }
    let config = |b: &Best| NodeConfig::new(b.idx.iter().map(|&i| lay.grid[i]).collect());
    Ok(GridExtrema {
        minimax: OracleValue {
            value: min_over.value,
            config: config(&min_over)?,
        },
        maximin: OracleValue {
            value: max_under.value,
            config: config(&max_under)?,
        },
        step: (lay.hi - lay.lo) / (k - 1) as f64,
        evaluated: size,
        window: lay.window,
    })
}

pub fn grid_minimax(problem: &Problem, spec: &GridSpec) -> Result<OracleValue> {
    Ok(grid_extrema(problem, spec)?.minimax)
}

pub fn grid_maximin(problem: &Problem, spec: &GridSpec) -> Result<OracleValue> {
    Ok(grid_extrema(problem, spec)?.maximin)
}

fn random_config(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    let mut y: Vec<f64> = (0..n).map(|_| rng.gen_range(lo..=hi)).collect();
    y.sort_by(f64::total_cmp);
    y
}

/// Largest observed `|Δf| / |Δy|∞` of `max mⱼ` and `min mⱼ` over `t_samples`
/// random pairs at grid-step distance along random directions in the box.
pub fn lipschitz_estimate(problem: &Problem, spec: &GridSpec) -> Result<f64> {
    let lay = layout(problem, spec)?;
    let n = problem.n();
    let h = (lay.hi - lay.lo) / (spec.nodes_per_axis - 1) as f64;
    let search = MaxSearch::default();
    let slopes: Vec<Result<f64>> = (0..spec.t_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed.wrapping_add(i as u64));
            let y = random_config(&mut rng, n, lay.lo, lay.hi);
            let d: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            let norm = d.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            if norm == 0.0 {
                return Ok(0.0);
            }
            let z: Vec<f64> = y.iter().zip(&d).map(|(v, e)| (v + h * e / norm).clamp(lay.lo, lay.hi)).collect();
            let dist = y.iter().zip(&z).fold(0.0f64, |a, (p, q)| a.max((p - q).abs()));
            let (Ok(ny), Ok(nz)) = (NodeConfig::new(y), NodeConfig::new(z)) else {
                return Ok(0.0);
            };
            if dist == 0.0 {
                return Ok(0.0);
            }
            let a = maxima_vector(problem, &ny, lay.window, &search)?;
            let b = maxima_vector(problem, &nz, lay.window, &search)?;
            let slope = |p: f64, q: f64| if p.is_finite() && q.is_finite() { (p - q).abs() / dist } else { 0.0 };
            Ok(slope(a.overline(), b.overline()).max(slope(a.underline(), b.underline())))
        })
        .collect();
    slopes.into_iter().try_fold(0.0f64, |acc, s| Ok(acc.max(s?)))
}

/// [`lipschitz_estimate`] restricted to configurations within `radius` (max
/// norm) of the given centers, which is what bounds the grid error near an
/// extremal configuration.
pub fn local_lipschitz_estimate(problem: &Problem, spec: &GridSpec, centers: &[NodeConfig], radius: f64) -> Result<f64> {
    if centers.is_empty() || !(radius > 0.0) {
        return Err(Error::invalid("need at least one center and a positive radius"));
    }
    let lay = layout(problem, spec)?;
    let h = (lay.hi - lay.lo) / (spec.nodes_per_axis - 1) as f64;
    let search = MaxSearch::default();
    let slopes: Vec<Result<f64>> = (0..spec.t_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed.wrapping_add(i as u64));
            let c = centers[i % centers.len()].as_slice();
            let jitter = |rng: &mut ChaCha8Rng, v: &[f64], r: f64| -> Vec<f64> {
                let mut out: Vec<f64> = v.iter().map(|x| (x + rng.gen_range(-r..=r)).clamp(lay.lo, lay.hi)).collect();
                out.sort_by(f64::total_cmp);
                out
            };
            let y = jitter(&mut rng, c, radius);
            let z = jitter(&mut rng, &y, h);
            let dist = y.iter().zip(&z).fold(0.0f64, |a, (p, q)| a.max((p - q).abs()));
            if dist == 0.0 {
                return Ok(0.0);
            }
            let a = maxima_vector(problem, &NodeConfig::new(y)?, lay.window, &search)?;
            let b = maxima_vector(problem, &NodeConfig::new(z)?, lay.window, &search)?;
            let slope = |p: f64, q: f64| if p.is_finite() && q.is_finite() { (p - q).abs() / dist } else { 0.0 };
            Ok(slope(a.overline(), b.overline()).max(slope(a.underline(), b.underline())))
        })
        .collect();
    slopes.into_iter().try_fold(0.0f64, |acc, s| Ok(acc.max(s?)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Domination {
    pub x: NodeConfig,
    pub y: NodeConfig,
    #[serde(with = "crate::serde_ext::vec_ext")]
    pub mx: Vec<f64>,
    #[serde(with = "crate::serde_ext::vec_ext")]
    pub my: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntertwiningReport {
    pub trials: usize,
    /// Pairs with some `mⱼ = -inf`, excluded by hypothesis.
    pub skipped: usize,
    /// Pairs with identical configurations, exempt from the non-strict check.
    pub identical: usize,
    pub strict: Vec<Domination>,
    /// Checked only for singular, strictly concave kernels.
    pub nonstrict_checked: bool,
    pub nonstrict: Vec<Domination>,
    pub seed: u64,
}

impl IntertwiningReport {
    pub fn violations(&self) -> usize {
        self.strict.len() + self.nonstrict.len()
    }
}

fn dominates(a: &MaximaVector, b: &MaximaVector, strict: bool) -> bool {
    a.m.iter().zip(&b.m).all(|(p, q)| if strict { p > q } else { p >= q })
}

/// Random pairs `x, y` in the box: no `m(x)` may dominate `m(y)` in every
/// coordinate.
pub fn intertwining_test(problem: &Problem, trials: usize, spec: &GridSpec) -> Result<IntertwiningReport> {
    let lay = layout(problem, spec)?;
    let n = problem.n();
    let flags = problem.kernel().flags();
    let nonstrict_checked = flags.singular && flags.strictly_concave;
    let search = MaxSearch::default();
    type Outcome = (u8, Option<Domination>, Option<Domination>);
    let outcomes: Vec<Result<Outcome>> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed.wrapping_mul(0x9E37_79B9).wrapping_add(i as u64));
            let x = NodeConfig::new(random_config(&mut rng, n, lay.lo, lay.hi))?;
            let y = if i % 16 == 0 {
                x.clone()
            } else {
                NodeConfig::new(random_config(&mut rng, n, lay.lo, lay.hi))?
            };
            let mx = maxima_vector(problem, &x, lay.window, &search)?;
            let my = maxima_vector(problem, &y, lay.window, &search)?;
            if !mx.all_finite() || !my.all_finite() {
                return Ok((1, None, None));
            }
            let witness = |a: &NodeConfig, b: &NodeConfig, ma: &MaximaVector, mb: &MaximaVector| Domination {
                x: a.clone(),
                y: b.clone(),
                mx: ma.m.clone(),
                my: mb.m.clone(),
            };
            let mut strict = None;
            if dominates(&mx, &my, true) {
                strict = Some(witness(&x, &y, &mx, &my));
            } else if dominates(&my, &mx, true) {
                strict = Some(witness(&y, &x, &my, &mx));
            }
            if x == y {
                return Ok((2, strict, None));
            }
            let mut nonstrict = None;
            if nonstrict_checked && strict.is_none() {
                if dominates(&mx, &my, false) {
                    nonstrict = Some(witness(&x, &y, &mx, &my));
                } else if dominates(&my, &mx, false) {
                    nonstrict = Some(witness(&y, &x, &my, &mx));
                }
            }
            Ok((0, strict, nonstrict))
        })
        .collect();
    let mut report = IntertwiningReport {
        trials,
        skipped: 0,
        identical: 0,
        strict: Vec::new(),
        nonstrict_checked,
        nonstrict: Vec::new(),
        seed: spec.seed,
    };
    for o in outcomes {
        let (kind, s, ns) = o?;
        match kind {
            1 => report.skipped += 1,
            2 => report.identical += 1,
            _ => {}
        }
        report.strict.extend(s);
        report.nonstrict.extend(ns);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Field, Kernel, Multiplicities, ProblemDomain};

    fn gaussian(n: usize) -> Problem {
        Problem::new(
            Kernel::log(),
            Field::gaussian(1.0).unwrap(),
            Multiplicities::ones(n).unwrap(),
            ProblemDomain::Axis,
        )
        .unwrap()
    }

    #[test]
    fn grid_size_counts_multisets() {
        assert_eq!(grid_size(5, 1), 5);
        assert_eq!(grid_size(5, 2), 15);
        assert_eq!(grid_size(4, 3), 20);
    }

    #[test]
    fn enumeration_visits_every_sorted_tuple() {
        let (k, n) = (5, 3);
        let mut count = 0;
        for first in 0..k {
            let mut idx = vec![first; n];
            loop {
                assert!(idx.windows(2).all(|w| w[0] <= w[1]));
                count += 1;
                if !next_tail(&mut idx, k) {
                    break;
                }
            }
        }
        assert_eq!(count as u128, grid_size(k, n));
    }

    #[test]
    fn gaussian_single_node_grid() {
        let spec = GridSpec::with_step(2.0, 1e-3).unwrap();
        let ex = grid_extrema(&gaussian(1), &spec).unwrap();
        let level = -0.5 - 0.5 * std::f64::consts::LN_2;
        assert!(ex.minimax.config.as_slice()[0].abs() < 1e-9);
        assert!((ex.minimax.value - level).abs() < 1e-9);
        assert!((ex.maximin.value - ex.minimax.value).abs() < 1e-9);
    }

    #[test]
    fn chebyshev_pair_grid() {
        let p = Problem::new(
            Kernel::log(),
            Field::constant(0.0).unwrap(),
            Multiplicities::ones(2).unwrap(),
            ProblemDomain::segment(0.0, 1.0).unwrap(),
        )
        .unwrap();
        let spec = GridSpec {
            nodes_per_axis: 201,
            ..Default::default()
        };
        let v = grid_minimax(&p, &spec).unwrap();
        assert!(v.value >= -3.0 * std::f64::consts::LN_2 - 1e-12);
        assert!(v.value < -3.0 * std::f64::consts::LN_2 + 0.02);
    }

    #[test]
    fn budget_is_enforced() {
        let spec = GridSpec {
            nodes_per_axis: 1000,
            budget: 1000,
            ..Default::default()
        };
        assert!(matches!(
            grid_minimax(&gaussian(2), &spec),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn maximin_avoids_neg_inf_configs() {
        let spec = GridSpec::with_step(3.0, 0.25).unwrap();
        let v = grid_maximin(&gaussian(2), &spec).unwrap();
        assert!(v.value.is_finite());
        let y = v.config.as_slice();
        assert!(y[0] < y[1]);
    }

    #[test]
    fn intertwining_small_run() {
        let spec = GridSpec::default();
        let rep = intertwining_test(&gaussian(2), 200, &spec).unwrap();
        assert_eq!(rep.violations(), 0, "{:?}", rep.strict.first());
        assert!(rep.nonstrict_checked);
        assert!(rep.identical > 0);
    }

    #[test]
    fn lipschitz_is_positive_and_finite() {
        let l = lipschitz_estimate(&gaussian(2), &GridSpec::with_step(3.0, 1e-2).unwrap()).unwrap();
        assert!(l > 0.0 && l.is_finite());
    }
}
