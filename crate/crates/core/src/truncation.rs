//! Constructive truncation of the unbounded problem.
//!
//! * [`mrs_q`] builds a radius `q` such that for every node configuration the
//!   global supremum of `F(y, ·)` is already reached on `[-q, q]`.
//! * [`maximin_box_l`] builds a box `[-L, L]ⁿ` outside of which no configuration
//!   beats a reference configuration in the smallest local maximum.
//! * [`box_m_l`] bounds how far outside `[-L, L]` the individual end suprema
//!   `m₀`, `mₙ` of a configuration in `[-L, L]ⁿ` can be attained.
//!
//! All bounds are certified numerically by probe scans (see [`TailScan`]).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{maxima_vector, sup_over, MaxSearch, Window};
use crate::model::{Field, Kernel, Multiplicities, NodeConfig, Problem};
use crate::search::{linspace, tail_threshold, TailFailure, TailScan};

/// Minimal distance between consecutive anchors.
pub const ANCHOR_GAP: f64 = 2.0;
/// Spacing tried first when the field is finite on a whole symmetric stencil.
const ANCHOR_SPACING: f64 = 2.5;
/// Safety factor applied to every scanned threshold.
pub const INFLATION: f64 = 1.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Both,
    Positive,
    Negative,
}

/// A numerically certified truncation radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationCertificate {
    pub q: f64,
    pub anchors: Vec<f64>,
    pub per_anchor_bounds: Vec<f64>,
    pub side: Side,
    /// Budget `R` the certificate was built for; valid for every `Σ rⱼ <= R`.
    pub budget: f64,
    pub scan: TailScan,
    pub inflation: f64,
}

fn tail_error(what: &str, failure: TailFailure) -> Error {
    match failure {
        TailFailure::HorizonExceeded { horizon, value } => Error::Admissibility(format!(
            "{what}: condition still fails at |t| = {horizon:e} (value {value:e}); the field does not look admissible"
        )),
        TailFailure::NotDecreasing { value } => Error::Admissibility(format!(
            "{what}: probed tail is not decreasing (last value {value:e})"
        )),
    }
}

fn require_monotone(kernel: &Kernel) -> Result<()> {
    if !kernel.flags().monotone {
        return Err(Error::Precondition(format!(
            "kernel {} is not flagged monotone",
            kernel.name()
        )));
    }
    Ok(())
}

/// Finite points of `field` in `[lo, hi]`: witnesses plus a probe grid.
fn finite_candidates(field: &Field, lo: f64, hi: f64) -> Vec<f64> {
    let mut pts: Vec<f64> = field
        .witnesses()
        .iter()
        .copied()
        .filter(|&w| w >= lo && w <= hi)
        .collect();
    pts.extend(linspace(lo, hi, 4097));
    pts.retain(|&t| field.evaluate(t).is_finite());
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// Greedy left-to-right pick with consecutive gaps `> ANCHOR_GAP`.
fn greedy_separated(points: &[f64], count: usize) -> Option<Vec<f64>> {
    let mut out: Vec<f64> = Vec::with_capacity(count);
    for &p in points {
        if out.last().is_none_or(|&prev| p - prev > ANCHOR_GAP) {
            out.push(p);
            if out.len() == count {
                return Some(out);
            }
        }
    }
    None
}

/// Picks `n + 1` increasing points with gaps `> 2` where the field is finite,
/// preferring small magnitudes.
pub fn select_anchors(field: &Field, n: usize, window: (f64, f64)) -> Result<Vec<f64>> {
    let (lo, hi) = window;
    if !(lo < hi) {
        return Err(Error::InvertedBounds { lo, hi });
    }
    let count = n + 1;
    let stencil: Vec<f64> = (0..count)
        .map(|k| ANCHOR_SPACING * (k as f64 - n as f64 / 2.0))
        .collect();
    if stencil.iter().all(|&z| z >= lo && z <= hi && field.evaluate(z).is_finite()) {
        return Ok(stencil);
    }

    let candidates = finite_candidates(field, lo, hi);
    let mut radii: Vec<f64> = candidates.iter().map(|z| z.abs()).collect();
    radii.sort_by(f64::total_cmp);
    radii.dedup();
    let feasible = |rho: f64| {
        let inside: Vec<f64> = candidates.iter().copied().filter(|z| z.abs() <= rho).collect();
        greedy_separated(&inside, count)
    };
    // feasibility is monotone in the radius
    let Some(&largest) = radii.last() else {
        return Err(Error::SparseField("the field is -inf on the whole search window".into()));
    };
    if feasible(largest).is_none() {
        return Err(Error::SparseField(format!(
            "cannot find {count} finiteness points with gaps > {ANCHOR_GAP} in [{lo}, {hi}]; widen the window or re-space the witnesses"
        )));
    }
    let (mut a, mut b) = (0usize, radii.len() - 1);
    while a < b {
        let mid = (a + b) / 2;
        if feasible(radii[mid]).is_some() {
            b = mid;
        } else {
            a = mid + 1;
        }
    }
    Ok(feasible(radii[a]).expect("feasible radius"))
}

/// Truncation radius from the anchor construction.
///
/// For each anchor `z`, `q̃(z)` is the scanned threshold beyond which
/// `J(t) + R (K(t - z ± 1) - min{K(-1), K(1)}) - J(z) <= 0` on both sides
/// (`+1` for `t > 0`, `-1` for `t < 0`), inflated by [`INFLATION`] and at least `|z|`.
pub fn mrs_q(kernel: &Kernel, field: &Field, budget: f64, anchors: &[f64], scan: &TailScan) -> Result<TruncationCertificate> {
    require_monotone(kernel)?;
    if !(budget > 0.0) {
        return Err(Error::invalid(format!("budget must be positive, got {budget}")));
    }
    if anchors.is_empty() {
        return Err(Error::invalid("at least one anchor is required"));
    }
    for w in anchors.windows(2) {
        if !(w[1] - w[0] > ANCHOR_GAP) {
            return Err(Error::Precondition(format!(
                "anchors {} and {} are not more than {ANCHOR_GAP} apart",
                w[0], w[1]
            )));
        }
    }
    let floor = kernel.unit_floor();
    let mut per_anchor_bounds = Vec::with_capacity(anchors.len());
    for &z in anchors {
        let jz = field.evaluate(z);
        if !jz.is_finite() {
            return Err(Error::Precondition(format!("field is not finite at anchor {z}")));
        }
        let bound = |shift: f64| {
            move |t: f64| field.evaluate(t) + budget * (kernel.evaluate(t - z + shift) - floor) - jz
        };
        let pos = tail_threshold(bound(1.0), z.abs(), 1.0, scan)
            .map_err(|e| tail_error(&format!("q for anchor {z} (t > 0)"), e))?;
        let neg = tail_threshold(bound(-1.0), z.abs(), -1.0, scan)
            .map_err(|e| tail_error(&format!("q for anchor {z} (t < 0)"), e))?;
        per_anchor_bounds.push((INFLATION * pos.max(neg)).max(z.abs()));
    }
    let q = per_anchor_bounds.iter().copied().fold(0.0, f64::max);
    Ok(TruncationCertificate {
        q,
        anchors: anchors.to_vec(),
        per_anchor_bounds,
        side: Side::Both,
        budget,
        scan: *scan,
        inflation: INFLATION,
    })
}

/// Default search window for anchors.
pub const ANCHOR_WINDOW: (f64, f64) = (-100.0, 100.0);

/// Anchors plus [`mrs_q`] for the problem's own kernel, field and total multiplicity.
pub fn certify(problem: &Problem, scan: &TailScan) -> Result<TruncationCertificate> {
    let anchors = select_anchors(problem.field(), problem.n(), ANCHOR_WINDOW)?;
    mrs_q(problem.kernel(), problem.field(), problem.total_multiplicity(), &anchors, scan)
}

/// Outcome of [`verify_q`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub trials: usize,
    pub violations: usize,
    /// Largest excess of the outside supremum over the inside one.
    pub max_violation: f64,
    pub worst_nodes: Option<Vec<f64>>,
    pub tol: f64,
    pub seed: u64,
    /// Grid points per side on `q < |t| <= 3q`.
    pub grid_points: usize,
}

/// Default tolerance for [`verify_q`].
pub const VERIFY_TOL: f64 = 1e-9;

/// Compares, for random configurations in `[-5q, 5q]ⁿ`, the supremum of
/// `F(y, ·)` on `[-q, q]` (gap-wise search plus the anchors) against a grid
/// on `q < |t| <= 3q`. Every other trial also rescales the multiplicities so
/// that their sum is below the certified budget.
pub fn verify_q(cert: &TruncationCertificate, problem: &Problem, trials: usize, seed: u64) -> Result<VerifyReport> {
    let q = cert.q;
    if !(q > 0.0) {
        return Err(Error::invalid("certificate radius must be positive"));
    }
    let n = problem.n();
    let grid_points = 2000;
    let search = MaxSearch::default();
    let outside: Vec<f64> = linspace(q, 3.0 * q, grid_points + 1)[1..]
        .iter()
        .flat_map(|&t| [t, -t])
        .collect();

    let results: Vec<(f64, Vec<f64>)> = (0..trials)
        .into_par_iter()
        .map(|i| -> Result<(f64, Vec<f64>)> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
            let mut y: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0 * q..=5.0 * q)).collect();
            y.sort_by(f64::total_cmp);
            let trial = if i % 2 == 1 {
                let r: Vec<f64> = problem
                    .multiplicities()
                    .as_slice()
                    .iter()
                    .map(|r| r * rng.gen_range(0.05..=1.0))
                    .collect();
                problem.with_multiplicities(Multiplicities::new(r)?)?
            } else {
                problem.clone()
            };
            let (mut inside, _) = sup_over(&trial, &y, -q, q, &search)?;
            for &z in &cert.anchors {
                inside = inside.max(trial.value(&y, z));
            }
            let out = outside
                .iter()
                .map(|&t| trial.value(&y, t))
                .fold(f64::NEG_INFINITY, f64::max);
            let excess = if out == f64::NEG_INFINITY {
                0.0
            } else if inside == f64::NEG_INFINITY {
                f64::INFINITY
            } else {
                out - inside
            };
            Ok((excess / inside.abs().max(1.0), y))
        })
        .collect::<Result<_>>()?;

    let mut report = VerifyReport {
        trials,
        violations: 0,
        max_violation: 0.0,
        worst_nodes: None,
        tol: VERIFY_TOL,
        seed,
        grid_points,
    };
    for (excess, y) in results {
        if excess > report.tol {
            report.violations += 1;
        }
        if excess > report.max_violation {
            report.max_violation = excess;
            report.worst_nodes = Some(y);
        }
    }
    Ok(report)
}

/// Projects every node onto `[-ell, ell]`.
pub fn clamp_to_box(y: &NodeConfig, ell: f64) -> Result<NodeConfig> {
    if !(ell > 0.0) {
        return Err(Error::invalid(format!("box half-width must be positive, got {ell}")));
    }
    y.map(|v| v.clamp(-ell, ell))
}

/// Nodes placed halfway between `n + 1` consecutive finiteness witnesses,
/// choosing the run of witnesses closest to the origin.
pub fn reference_config(problem: &Problem) -> Result<NodeConfig> {
    let n = problem.n();
    let w = problem.field().witnesses();
    if w.len() < n + 1 {
        return Err(Error::SparseField(format!(
            "need {} finiteness witnesses, field has {}",
            n + 1,
            w.len()
        )));
    }
    let start = (0..=w.len() - (n + 1))
        .min_by(|&a, &b| {
            let ra = w[a].abs().max(w[a + n].abs());
            let rb = w[b].abs().max(w[b + n].abs());
            ra.total_cmp(&rb).then(a.cmp(&b))
        })
        .expect("non-empty range");
    NodeConfig::new((0..n).map(|k| 0.5 * (w[start + k] + w[start + k + 1])).collect())
}

/// Evaluation window for configurations inside `[-box_radius, box_radius]ⁿ`:
/// `[-max(q, M), max(q, M)]` with `M` from [`box_m_l`]. Segment problems use
/// their own segment.
pub fn evaluation_window(problem: &Problem, cert: &TruncationCertificate, box_radius: f64, scan: &TailScan) -> Result<Window> {
    if let Some((a, b)) = problem.segment() {
        return Window::new(a, b);
    }
    let m = box_m_l(problem, box_radius.max(cert.q).max(1e-6), scan)?;
    Window::symmetric(m.max(cert.q))
}

/// The maximin box and the reference value it was certified against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaximinBox {
    pub l1: f64,
    pub l: f64,
    #[serde(with = "crate::serde_ext::ext")]
    pub reference_underline: f64,
}

/// Box `[-L, L]ⁿ` outside of which `underline m(y) <= underline m(x_ref)`.
///
/// `L₁ >= max |x_ref|` makes `J(t) + R K(t)` drop below `underline m(x_ref)` for
/// `|t| > L₁`; `L >= L₁` does the same for
/// `J(t) + Σ rⱼ max{K(t - L₁), K(t + L₁)}`.
pub fn maximin_box_l(problem: &Problem, cert: &TruncationCertificate, x_ref: &NodeConfig, scan: &TailScan) -> Result<MaximinBox> {
    require_monotone(problem.kernel())?;
    problem.check_nodes(x_ref)?;
    let window = evaluation_window(problem, cert, x_ref.radius(), scan)?;
    let u = maxima_vector(problem, x_ref, window, &MaxSearch::default())?.underline();
    if u == f64::NEG_INFINITY {
        return Err(Error::Precondition(
            "reference configuration has a -inf local maximum".into(),
        ));
    }
    let (kernel, field) = (problem.kernel(), problem.field());
    let r = problem.total_multiplicity();
    let start = x_ref.radius();

    let g1 = |t: f64| field.evaluate(t) + r * kernel.evaluate(t) - u;
    let l1_pos = tail_threshold(g1, start, 1.0, scan).map_err(|e| tail_error("L1 (t > 0)", e))?;
    let l1_neg = tail_threshold(g1, start, -1.0, scan).map_err(|e| tail_error("L1 (t < 0)", e))?;
    let l1 = (INFLATION * l1_pos.max(l1_neg)).max(start);

    let g2 = |t: f64| {
        let j = field.evaluate(t);
        if j == f64::NEG_INFINITY {
            return j;
        }
        j + r * kernel.evaluate(t - l1).max(kernel.evaluate(t + l1)) - u
    };
    let l_pos = tail_threshold(g2, l1, 1.0, scan).map_err(|e| tail_error("L (t > 0)", e))?;
    let l_neg = tail_threshold(g2, l1, -1.0, scan).map_err(|e| tail_error("L (t < 0)", e))?;
    let l = (INFLATION * l_pos.max(l_neg)).max(l1);
    Ok(MaximinBox {
        l1,
        l,
        reference_underline: u,
    })
}

/// `M_L >= L` such that, for every configuration in `[-L, L]ⁿ`, `F(y, t)` for
/// `|t| > M_L` never exceeds its supremum over `L <= |t| <= M_L` on the same side.
///
/// Uses the monotone-kernel bounds `F(y, t) <= J(t) + R K(t + L)` for `t > M_L`
/// and `F(y, t') >= J(t') + R K(t' - L)` for `t' ∈ (L, M_L]` (mirrored for `t < 0`).
pub fn box_m_l(problem: &Problem, l: f64, scan: &TailScan) -> Result<f64> {
    require_monotone(problem.kernel())?;
    if !(l > 0.0) {
        return Err(Error::invalid(format!("box half-width must be positive, got {l}")));
    }
    let (kernel, field) = (problem.kernel(), problem.field());
    let r = problem.total_multiplicity();
    let mut result = l;
    for sign in [1.0, -1.0] {
        // lower bound for the supremum over L <= |t| <= M on this side
        let lower = |t: f64| field.evaluate(t) + r * kernel.evaluate(t - sign * l);
        let upper = |t: f64| field.evaluate(t) + r * kernel.evaluate(t + sign * l);
        let mut m = 2.0 * l;
        loop {
            let (best_t, best) = linspace(l, m, 257)[1..]
                .iter()
                .map(|&s| (s, lower(sign * s)))
                .fold((m, f64::NEG_INFINITY), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
            let excess = |t: f64| {
                let u = upper(t);
                if u == f64::NEG_INFINITY {
                    f64::NEG_INFINITY
                } else if best == f64::NEG_INFINITY {
                    1.0
                } else {
                    u - best
                }
            };
            match tail_threshold(excess, l, sign, scan) {
                Ok(t) if t <= m => {
                    let side = if best == f64::NEG_INFINITY { t } else { t.max(best_t) };
                    result = result.max(side);
                    break;
                }
                Ok(_) => {}
                Err(e) => return Err(tail_error("M_L", e)),
            }
            m *= 2.0;
            if m > scan.horizon {
                return Err(Error::Admissibility(format!(
                    "M_L scan for L = {l} exceeded the horizon {:e}",
                    scan.horizon
                )));
            }
        }
    }
    Ok(result)
}
