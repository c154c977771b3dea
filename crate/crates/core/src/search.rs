//! One-dimensional search primitives: golden-section maximization and
//! tail-threshold scans.

use serde::{Deserialize, Serialize};

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section maximization of `f` on `[a, b]`.
///
/// Returns the best evaluated point and its value. For concave `f` this is the
/// maximum over the open interval to within `tol` in the argument; endpoints are
/// not evaluated.
pub fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64, max_iter: usize) -> (f64, f64) {
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let (mut best_x, mut best_f) = if f2 > f1 { (x2, f2) } else { (x1, f1) };
    for _ in 0..max_iter {
        if b - a <= tol {
            break;
        }
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
            if f2 > best_f {
                best_x = x2;
                best_f = f2;
            }
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
            if f1 > best_f {
                best_x = x1;
                best_f = f1;
            }
        }
    }
    (best_x, best_f)
}

/// `count` evenly spaced points from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..count)
            .map(|i| {
                if i == count - 1 {
                    b
                } else {
                    a + (b - a) * i as f64 / (count - 1) as f64
                }
            })
            .collect(),
    }
}

/// Probe layout for tail-threshold scans: offsets `0` and
/// `first_step · 2^(i / per_octave)` up to `horizon`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailScan {
    pub first_step: f64,
    pub per_octave: usize,
    pub horizon: f64,
    pub bisect_tol: f64,
}

impl Default for TailScan {
    fn default() -> Self {
        Self {
            first_step: 1e-3,
            per_octave: 16,
            horizon: 1e6,
            bisect_tol: 1e-3,
        }
    }
}

impl TailScan {
    pub fn offsets(&self) -> Vec<f64> {
        let mut out = vec![0.0];
        let ratio = 2f64.powf(1.0 / self.per_octave.max(1) as f64);
        let mut u = self.first_step;
        while u <= self.horizon {
            out.push(u);
            u *= ratio;
        }
        out
    }
}

/// Why a tail scan failed to certify a threshold.
#[derive(Debug, Clone, PartialEq)]
pub enum TailFailure {
    /// The condition still fails at the outermost probe.
    HorizonExceeded { horizon: f64, value: f64 },
    /// The condition holds at the end but the probed tail is not decreasing.
    NotDecreasing { value: f64 },
}

/// Smallest probed magnitude `T >= start` such that `g(sign·t) <= 0` for every
/// probe with `t > T`, refined by bisection on the last sign change.
///
/// The outermost three probe values must be strictly decreasing (or `-inf`).
pub fn tail_threshold(g: impl Fn(f64) -> f64, start: f64, sign: f64, scan: &TailScan) -> Result<f64, TailFailure> {
    let offsets = scan.offsets();
    let values: Vec<f64> = offsets.iter().map(|&u| g(sign * (start + u))).collect();
    let bad = |v: f64| v > 0.0 || v.is_nan();
    let last = values[values.len() - 1];
    if bad(last) {
        return Err(TailFailure::HorizonExceeded {
            horizon: start + offsets[offsets.len() - 1],
            value: last,
        });
    }
    let tail = &values[values.len() - 3..];
    let decreasing = tail
        .windows(2)
        .all(|w| w[1] < w[0] || (w[0] == f64::NEG_INFINITY && w[1] == f64::NEG_INFINITY));
    if !decreasing {
        return Err(TailFailure::NotDecreasing { value: last });
    }
    let Some(i) = values.iter().rposition(|&v| bad(v)) else {
        return Ok(start);
    };
    let (mut lo, mut hi) = (offsets[i], offsets[i + 1]);
    while hi - lo > scan.bisect_tol {
        let mid = 0.5 * (lo + hi);
        if bad(g(sign * (start + mid))) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(start + hi)
}
