//! Equioscillation solver.
//!
//! Unbounded problems are truncated to `[-ℓ, ℓ]` with `ℓ = 1.05 · max(q, L)`,
//! carried to `[0, 1]` by [`reduce_to_unit`] and solved there. The iteration
//! itself works on a segment: damped Newton steps on the differences of
//! adjacent local maxima, falling back to Gauss-Seidel balancing sweeps that
//! place each node where its two neighbouring maxima agree.

mod reduce;

pub use reduce::{reduce_segment, reduce_to_unit, AffineMap, ReducedProblem};

use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{gap_bounds, interval_maximum, maxima_vector, MaxSearch, MaximaVector, Window};
use crate::model::{check_admissibility, NodeConfig, Problem, ProblemDomain, DEFAULT_FLOOR, DEFAULT_PROBES};
use crate::search::{linspace, TailScan};
use crate::truncation::{
    certify, evaluation_window, maximin_box_l, reference_config, MaximinBox, TruncationCertificate,
};

/// Inflation of the truncation radius over `max(q, L)`.
pub const ELL_INFLATION: f64 = 1.05;
/// Relative separation kept between nodes when the kernel is singular.
pub const NODE_SEPARATION: f64 = 1e-12;

const FD_STEP: f64 = 1e-7;
const LINE_SEARCH_HALVINGS: usize = 12;
const POLISH_STEPS: usize = 4;
const STAGNATION_WINDOW: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveOptions {
    pub spread_tol: f64,
    pub max_iters: usize,
    pub damping: f64,
    pub multistart: usize,
    pub seed: u64,
    /// Skip the probe-based admissibility check.
    pub assume_admissible: bool,
    /// Segment problems: solve on `[0, 1]` and map back instead of directly.
    pub via_unit: bool,
    pub search: MaxSearch,
    pub scan: TailScan,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            spread_tol: 1e-9,
            max_iters: 10_000,
            damping: 0.5,
            multistart: 1,
            seed: 0,
            assume_admissible: false,
            via_unit: false,
            search: MaxSearch::default(),
            scan: TailScan::default(),
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.spread_tol > 0.0) {
            return Err(Error::invalid(format!("spread_tol must be positive, got {}", self.spread_tol)));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::invalid(format!("damping must lie in (0, 1], got {}", self.damping)));
        }
        if self.multistart == 0 {
            return Err(Error::invalid("multistart must be at least 1"));
        }
        Ok(())
    }
}

/// Outcome of one start of a multistart run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartSummary {
    pub start: usize,
    pub nodes: NodeConfig,
    #[serde(with = "crate::serde_ext::ext")]
    pub spread: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub nodes: NodeConfig,
    /// `max mⱼ` at the returned nodes.
    #[serde(with = "crate::serde_ext::ext")]
    pub level: f64,
    #[serde(with = "crate::serde_ext::ext")]
    pub spread: f64,
    pub maxima: MaximaVector,
    /// `None` for segment problems, which need no truncation.
    pub truncation: Option<TruncationCertificate>,
    pub maximin_box: Option<MaximinBox>,
    /// Half-width of the truncation `[-ℓ, ℓ]` for unbounded domains.
    pub ell: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub domain: ProblemDomain,
    /// Index of the start the nodes come from.
    pub start: usize,
    pub starts: Vec<StartSummary>,
    /// Spread after each iteration of the winning start.
    #[serde(with = "crate::serde_ext::vec_ext")]
    pub trace: Vec<f64>,
}

/// Solves for the equioscillation point on the problem's domain.
pub fn solve_equioscillation(problem: &Problem, opts: &SolveOptions) -> Result<SolveReport> {
    opts.validate()?;
    require_monotone(problem)?;
    match problem.domain() {
        ProblemDomain::Segment { .. } if opts.via_unit => solve_segment_via_unit(problem, opts),
        ProblemDomain::Segment { .. } => solve_segment(problem, opts),
        ProblemDomain::Axis => solve_axis(problem, opts),
        ProblemDomain::Semiaxis => solve_semiaxis(problem, opts),
    }
}

/// Semiaxis problem: the axis path for the field extended by `-inf` on
/// `t < 0`, followed by clamping negative nodes to `0`.
pub fn solve_semiaxis(problem: &Problem, opts: &SolveOptions) -> Result<SolveReport> {
    opts.validate()?;
    require_monotone(problem)?;
    let restricted = match problem.domain() {
        ProblemDomain::Semiaxis => problem.field().clone(),
        _ => problem.field().restricted(0.0, f64::INFINITY)?,
    };
    let extended = problem.with_effective_field(restricted, ProblemDomain::Axis);
    let mut report = solve_axis(&extended, opts)?;
    let clamped = report.nodes.map(|v| v.max(0.0))?;
    if clamped != report.nodes {
        let window = Window::new(report.maxima.truncation_used.0, report.maxima.truncation_used.1)?;
        let after = maxima_vector(&extended, &clamped, window, &opts.search)?;
        let slack = 10.0 * opts.spread_tol * (1.0 + report.level.abs());
        if after.overline() > report.level + slack {
            return Err(Error::Precondition(format!(
                "clamping to the semiaxis raised the global maximum from {} to {}",
                report.level,
                after.overline()
            )));
        }
        report.spread = after.spread();
        report.level = after.overline();
        report.maxima = after;
        report.nodes = clamped;
        report.converged = report.spread <= opts.spread_tol;
    }
    report.domain = ProblemDomain::Semiaxis;
    Ok(report)
}

fn require_monotone(problem: &Problem) -> Result<()> {
    if !problem.kernel().flags().monotone {
        return Err(Error::Precondition(format!(
            "kernel {} is not flagged monotone",
            problem.kernel().name()
        )));
    }
    Ok(())
}

fn solve_axis(problem: &Problem, opts: &SolveOptions) -> Result<SolveReport> {
    if !opts.assume_admissible {
        let report = check_admissibility(
            problem.field(),
            problem.kernel(),
            problem.total_multiplicity(),
            &DEFAULT_PROBES,
            DEFAULT_FLOOR,
        )?;
        if !report.plausible {
            return Err(Error::Admissibility(report.note.to_string()));
        }
    }
    let cert = certify(problem, &opts.scan)?;
    let x_ref = reference_config(problem)?;
    let mbox = maximin_box_l(problem, &cert, &x_ref, &opts.scan)?;
    let mut ell = ELL_INFLATION * cert.q.max(mbox.l).max(x_ref.radius());
    let n = problem.n() as f64;
    let mut grown = 0;
    while problem.field().finiteness_weight(-ell, ell, 1025) <= n {
        ell *= 1.5;
        grown += 1;
        if grown > 60 {
            return Err(Error::SparseField(format!(
                "no window [-ℓ, ℓ] with more than {n} finiteness points found"
            )));
        }
    }
    let reduced = reduce_to_unit(problem, 0.0, ell)?;
    let (unit_best, starts) = run_starts(&reduced.unit, opts)?;
    let nodes = reduced.map.nodes_from_unit(&unit_best.nodes)?;
    let starts = map_starts(starts, &reduced.map)?;
    let reach = evaluation_window(problem, &cert, nodes.radius().max(cert.q), &opts.scan)?;
    let window = Window::symmetric(ell.max(reach.hi))?;
    let maxima = maxima_vector(problem, &nodes, window, &opts.search)?;
    Ok(finish(problem, nodes, maxima, unit_best, starts, Some(cert), Some(mbox), Some(ell), opts))
}

fn solve_segment(problem: &Problem, opts: &SolveOptions) -> Result<SolveReport> {
    let (a, b) = problem.segment().expect("segment domain");
    let (best, starts) = run_starts(problem, opts)?;
    let nodes = best.nodes.clone();
    let maxima = maxima_vector(problem, &nodes, Window::new(a, b)?, &opts.search)?;
    Ok(finish(problem, nodes, maxima, best, starts, None, None, None, opts))
}

fn solve_segment_via_unit(problem: &Problem, opts: &SolveOptions) -> Result<SolveReport> {
    let (a, b) = problem.segment().expect("segment domain");
    let reduced = reduce_segment(problem)?;
    let (best, starts) = run_starts(&reduced.unit, opts)?;
    let nodes = reduced.map.nodes_from_unit(&best.nodes)?;
    let starts = map_starts(starts, &reduced.map)?;
    let maxima = maxima_vector(problem, &nodes, Window::new(a, b)?, &opts.search)?;
    Ok(finish(problem, nodes, maxima, best, starts, None, None, None, opts))
}

fn map_starts(starts: Vec<StartSummary>, map: &AffineMap) -> Result<Vec<StartSummary>> {
    starts
        .into_iter()
        .map(|s| {
            Ok(StartSummary {
                nodes: map.nodes_from_unit(&s.nodes)?,
                ..s
            })
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn finish(
    problem: &Problem,
    nodes: NodeConfig,
    maxima: MaximaVector,
    run: RunResult,
    starts: Vec<StartSummary>,
    truncation: Option<TruncationCertificate>,
    maximin_box: Option<MaximinBox>,
    ell: Option<f64>,
    opts: &SolveOptions,
) -> SolveReport {
    let spread = maxima.spread();
    SolveReport {
        nodes,
        level: maxima.overline(),
        spread,
        maxima,
        truncation,
        maximin_box,
        ell,
        iterations: run.iterations,
        converged: spread <= opts.spread_tol,
        domain: problem.domain(),
        start: run.start,
        starts,
        trace: run.trace,
    }
}

#[derive(Debug, Clone)]
struct RunResult {
    start: usize,
    nodes: NodeConfig,
    spread: f64,
    iterations: usize,
    converged: bool,
    trace: Vec<f64>,
}

/// Runs every start in parallel on a segment problem and keeps the one with
/// the smallest spread, ties going to the lexicographically smallest nodes.
fn run_starts(problem: &Problem, opts: &SolveOptions) -> Result<(RunResult, Vec<StartSummary>)> {
    let engine = Engine::new(problem, opts)?;
    let candidates = engine.candidates();
    if candidates.len() < problem.n() + 1 {
        return Err(Error::SparseField(format!(
            "found {} finiteness points, need {}",
            candidates.len(),
            problem.n() + 1
        )));
    }
    let runs: Vec<Result<RunResult>> = (0..opts.multistart)
        .into_par_iter()
        .map(|k| {
            let y0 = if k == 0 {
                engine.quantile_start(&candidates)
            } else {
                engine.random_start(&candidates, opts.seed.wrapping_add(k as u64))
            };
            engine.run(y0, k)
        })
        .collect();
    let runs: Vec<RunResult> = runs.into_iter().collect::<Result<_>>()?;
    let best = runs
        .iter()
        .min_by(|a, b| {
            a.spread
                .total_cmp(&b.spread)
                .then_with(|| lexicographic(a.nodes.as_slice(), b.nodes.as_slice()))
        })
        .expect("at least one start")
        .clone();
    let starts = runs
        .into_iter()
        .map(|r| StartSummary {
            start: r.start,
            nodes: r.nodes,
            spread: r.spread,
            iterations: r.iterations,
            converged: r.converged,
        })
        .collect();
    Ok((best, starts))
}

fn lexicographic(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

/// The balancing iteration on a segment problem.
struct Engine<'a> {
    problem: &'a Problem,
    opts: &'a SolveOptions,
    lo: f64,
    hi: f64,
    node_lo: f64,
    node_hi: f64,
    sep: f64,
}

impl<'a> Engine<'a> {
    fn new(problem: &'a Problem, opts: &'a SolveOptions) -> Result<Self> {
        let (lo, hi) = problem
            .segment()
            .ok_or_else(|| Error::Precondition("balancing needs a segment problem".into()))?;
        let (s_lo, s_hi) = problem.field().support();
        let node_lo = lo.max(s_lo);
        let node_hi = hi.min(s_hi);
        if !(node_lo <= node_hi) {
            return Err(Error::DegenerateField);
        }
        let sep = if problem.kernel().is_singular() {
            NODE_SEPARATION * (hi - lo)
        } else {
            0.0
        };
        Ok(Self {
            problem,
            opts,
            lo,
            hi,
            node_lo,
            node_hi,
            sep,
        })
    }

    fn gap_max(&self, y: &[f64], j: usize) -> f64 {
        let (a, b) = gap_bounds(y, j, self.lo, self.hi);
        interval_maximum(self.problem, y, a, b, &self.opts.search)
            .map(|(v, _)| v)
            .unwrap_or(f64::NEG_INFINITY)
    }

    fn maxima(&self, y: &[f64]) -> Vec<f64> {
        (0..=y.len()).map(|j| self.gap_max(y, j)).collect()
    }

    /// Finite points of the field: witnesses if there are enough, else a grid.
    fn candidates(&self) -> Vec<f64> {
        let field = self.problem.field();
        let n = self.problem.n();
        let inside = |t: &f64| *t >= self.node_lo && *t <= self.node_hi && field.evaluate(*t).is_finite();
        let mut w: Vec<f64> = field.witnesses().iter().copied().filter(inside).collect();
        w.sort_by(f64::total_cmp);
        w.dedup();
        if w.len() > n {
            return w;
        }
        let mut g: Vec<f64> = linspace(self.node_lo, self.node_hi, 1025).into_iter().filter(inside).collect();
        g.extend(w);
        g.sort_by(f64::total_cmp);
        g.dedup();
        g
    }

    /// Nodes halfway between finite points at the cumulative-multiplicity quantiles.
    fn quantile_start(&self, pts: &[f64]) -> Vec<f64> {
        let r = self.problem.multiplicities().as_slice();
        let total: f64 = r.iter().sum();
        let n = r.len();
        let last = (pts.len() - 1) as f64;
        let mut idx = Vec::with_capacity(n + 1);
        let mut acc = 0.0;
        for (k, &rk) in r.iter().chain(std::iter::once(&0.0)).enumerate() {
            let raw = (acc / total * last).round() as usize;
            let floor = idx.last().map_or(0, |&p: &usize| p + 1);
            let ceil = pts.len() - 1 - (n - k);
            idx.push(raw.clamp(floor, ceil));
            acc += rk;
        }
        self.midpoints(pts, &idx)
    }

    fn random_start(&self, pts: &[f64], seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut idx = sample(&mut rng, pts.len(), self.problem.n() + 1).into_vec();
        idx.sort_unstable();
        self.midpoints(pts, &idx)
    }

    fn midpoints(&self, pts: &[f64], idx: &[usize]) -> Vec<f64> {
        let y: Vec<f64> = idx.windows(2).map(|w| 0.5 * (pts[w[0]] + pts[w[1]])).collect();
        self.project(y)
    }

    /// Clamps into the node range and restores order with the minimal separation.
    fn project(&self, mut y: Vec<f64>) -> Vec<f64> {
        let n = y.len();
        for v in y.iter_mut() {
            *v = v.clamp(self.node_lo, self.node_hi);
        }
        for i in 1..n {
            if y[i] < y[i - 1] + self.sep {
                y[i] = (y[i - 1] + self.sep).min(self.node_hi);
            }
        }
        for i in (0..n.saturating_sub(1)).rev() {
            if y[i] > y[i + 1] - self.sep {
                y[i] = (y[i + 1] - self.sep).max(self.node_lo);
            }
        }
        y
    }

    fn run(&self, y0: Vec<f64>, start: usize) -> Result<RunResult> {
        let mut y = y0;
        let mut m = self.maxima(&y);
        if m.iter().all(|v| *v == f64::NEG_INFINITY) {
            return Err(Error::DegenerateField);
        }
        let tol = self.opts.spread_tol;
        let mut trace = Vec::new();
        let mut best = (spread(&m), y.clone());
        let mut last_gain = 0;
        let mut iterations = 0;
        let mut converged = false;
        while iterations < self.opts.max_iters {
            let s = spread(&m);
            if s <= tol {
                converged = true;
                break;
            }
            iterations += 1;
            if let Some((y2, m2)) = self.newton(&y, &m) {
                y = y2;
                m = m2;
            } else {
                self.sweep(&mut y);
                m = self.maxima(&y);
            }
            let s = spread(&m);
            trace.push(s);
            if s < best.0 {
                if s < best.0 * (1.0 - 1e-3) {
                    last_gain = iterations;
                }
                best = (s, y.clone());
            }
            if iterations - last_gain > STAGNATION_WINDOW {
                break;
            }
        }
        if !converged {
            y = best.1.clone();
            m = self.maxima(&y);
        }
        // polish steps draw on the same iteration budget
        for _ in 0..POLISH_STEPS.min(self.opts.max_iters - iterations) {
            match self.newton(&y, &m) {
                Some((y2, m2)) if spread(&m2) < spread(&m) => {
                    y = y2;
                    m = m2;
                    iterations += 1;
                }
                _ => break,
            }
        }
        let s = spread(&m);
        Ok(RunResult {
            start,
            nodes: NodeConfig::new(y)?,
            spread: s,
            iterations,
            converged: s <= tol,
            trace,
        })
    }

    /// One damped Gauss-Seidel pass: node `j` moves towards the point where
    /// its left and right maxima agree. That difference is increasing in the
    /// node position for monotone kernels, so bisection finds it.
    fn sweep(&self, y: &mut [f64]) {
        let n = y.len();
        let width = self.hi - self.lo;
        for j in 0..n {
            let left = if j == 0 { self.node_lo } else { y[j - 1] + self.sep };
            let right = if j == n - 1 { self.node_hi } else { y[j + 1] - self.sep };
            if !(left < right) {
                continue;
            }
            let mut trial = y.to_vec();
            let mut diff = |s: f64| {
                trial[j] = s;
                let a = self.gap_max(&trial, j);
                let b = self.gap_max(&trial, j + 1);
                if a == b {
                    0.0
                } else {
                    a - b
                }
            };
            let target = if diff(left) >= 0.0 {
                left
            } else if diff(right) <= 0.0 {
                right
            } else {
                let (mut a, mut b) = (left, right);
                for _ in 0..80 {
                    if b - a <= 1e-15 * width {
                        break;
                    }
                    let mid = 0.5 * (a + b);
                    if diff(mid) < 0.0 {
                        a = mid;
                    } else {
                        b = mid;
                    }
                }
                0.5 * (a + b)
            };
            y[j] += self.opts.damping * (target - y[j]);
        }
        let projected = self.project(y.to_vec());
        y.copy_from_slice(&projected);
    }

    /// Newton step on `gₖ = mₖ₊₁ - mₖ` with a central-difference Jacobian and
    /// backtracking on `Σ gₖ²`. `None` when no decrease is found.
    fn newton(&self, y: &[f64], m: &[f64]) -> Option<(Vec<f64>, Vec<f64>)> {
        if !m.iter().all(|v| v.is_finite()) {
            return None;
        }
        let n = y.len();
        let width = self.hi - self.lo;
        let g0 = diffs(m);
        let mut jac = DMatrix::<f64>::zeros(n, n);
        for k in 0..n {
            let left = if k == 0 { self.node_lo } else { y[k - 1] };
            let right = if k == n - 1 { self.node_hi } else { y[k + 1] };
            let h = (FD_STEP * width).min(0.25 * (y[k] - left)).min(0.25 * (right - y[k]));
            if !(h > 1e-14 * width) {
                return None;
            }
            let mut yp = y.to_vec();
            let mut ym = y.to_vec();
            yp[k] += h;
            ym[k] -= h;
            let gp = diffs(&self.maxima(&yp));
            let gm = diffs(&self.maxima(&ym));
            for i in 0..n {
                let d = (gp[i] - gm[i]) / (2.0 * h);
                if !d.is_finite() {
                    return None;
                }
                jac[(i, k)] = d;
            }
        }
        let rhs = DVector::from_iterator(n, g0.iter().map(|v| -v));
        let step = jac.lu().solve(&rhs)?;
        let merit0 = merit(m);
        let mut alpha = 1.0;
        for _ in 0..LINE_SEARCH_HALVINGS {
            let trial: Vec<f64> = y.iter().zip(step.iter()).map(|(v, d)| v + alpha * d).collect();
            let trial = self.project(trial);
            let mt = self.maxima(&trial);
            if merit(&mt) < merit0 * (1.0 - 1e-4 * alpha) {
                return Some((trial, mt));
            }
            alpha *= 0.5;
        }
        None
    }
}

fn diffs(m: &[f64]) -> Vec<f64> {
    m.windows(2).map(|w| w[1] - w[0]).collect()
}

fn merit(m: &[f64]) -> f64 {
    if m.iter().any(|v| !v.is_finite()) {
        return f64::INFINITY;
    }
    diffs(m).iter().map(|d| d * d).sum()
}

fn spread(m: &[f64]) -> f64 {
    if m.contains(&f64::NEG_INFINITY) {
        return f64::INFINITY;
    }
    let hi = m.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = m.iter().copied().fold(f64::INFINITY, f64::min);
    hi - lo
}
