//! Fixtures shared by the benchmarks.

use translates::builtin;
use translates::oracle::GridSpec;
use translates::{NodeConfig, Problem};

/// `(label, problem)` pairs covering the segment, axis and semiaxis paths.
pub fn solver_fixtures() -> Vec<(String, Problem)> {
    let mut out = Vec::new();
    for n in [2, 4, 8] {
        out.push((format!("chebyshev/{n}"), builtin::chebyshev(n).expect("chebyshev")));
        out.push((format!("gaussian/{n}"), builtin::gaussian(n).expect("gaussian")));
    }
    out.push(("freud/4".into(), builtin::freud(4).expect("freud")));
    out.push(("semiaxis-linear/4".into(), builtin::semiaxis_linear(4).expect("semiaxis")));
    out
}

/// Evenly spaced nodes in `[-radius, radius]`.
pub fn spread_nodes(n: usize, radius: f64) -> NodeConfig {
    let v = (0..n)
        .map(|j| -radius + 2.0 * radius * (j as f64 + 0.5) / n as f64)
        .collect();
    NodeConfig::new(v).expect("sorted")
}

pub fn small_grid() -> GridSpec {
    GridSpec::with_step(3.0, 5e-2).expect("grid")
}
