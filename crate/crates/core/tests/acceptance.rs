//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::f64::consts::{LN_2, PI};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use translates::bojanov::{solve_bojanov, weighted_product, Weight};
use translates::builtin::{self, BUILTIN_NAMES};
use translates::eval::{maxima_vector, MaxSearch, Window};
use translates::oracle::{grid_extrema, intertwining_test, lipschitz_estimate, local_lipschitz_estimate, GridSpec};
use translates::search::linspace;
use translates::solver::{solve_equioscillation, SolveOptions};
use translates::truncation::{certify, verify_q};
use translates::{Field, Kernel, Multiplicities, NodeConfig, Problem, ProblemDomain};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(limit: Duration, start: Instant) -> Result<(), String> {
    let t = start.elapsed();
    check(t < limit, format!("runtime {t:.2?} exceeds {limit:?}"))
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn chebyshev_regression() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for n in 1..=4 {
        let rep = solve_equioscillation(&builtin::chebyshev(n).map_err(err)?, &SolveOptions::default()).map_err(err)?;
        check(rep.converged, format!("n = {n}: not converged, spread {:e}", rep.spread))?;
        let level = (1.0 - 2.0 * n as f64) * LN_2;
        let dl = (rep.level - level).abs();
        check(dl < 1e-6, format!("n = {n}: level {} vs {level}", rep.level))?;
        let mut want: Vec<f64> = (1..=n)
            .map(|j| 0.5 * (1.0 + ((2 * j - 1) as f64 * PI / (2 * n) as f64).cos()))
            .collect();
        want.sort_by(f64::total_cmp);
        for (y, w) in rep.nodes.as_slice().iter().zip(&want) {
            check((y - w).abs() < 1e-6, format!("n = {n}: node {y} vs {w}"))?;
            worst = worst.max((y - w).abs());
        }
        worst = worst.max(dl);
    }
    within(Duration::from_secs(5), start)?;
    Ok(format!("n = 1..4, worst deviation {worst:.1e}"))
}

fn gaussian_single() -> Outcome {
    let start = Instant::now();
    let rep = solve_equioscillation(&builtin::gaussian(1).map_err(err)?, &SolveOptions::default()).map_err(err)?;
    let y = rep.nodes.as_slice()[0];
    let level = -0.5 - 0.5 * LN_2;
    check(y.abs() < 1e-8, format!("node {y}"))?;
    check((rep.level - level).abs() < 1e-8, format!("level {} vs {level}", rep.level))?;
    within(Duration::from_secs(1), start)?;
    Ok(format!("node {y:.1e}, level error {:.1e}", (rep.level - level).abs()))
}

fn duality() -> Outcome {
    let start = Instant::now();
    let p = builtin::gaussian(2).map_err(err)?;
    let coarse = GridSpec::with_step(3.0, 1e-2).map_err(err)?;
    let fine = GridSpec::with_step(3.0, 5e-3).map_err(err)?;
    let a = grid_extrema(&p, &coarse).map_err(err)?;
    let b = grid_extrema(&p, &fine).map_err(err)?;
    let global = lipschitz_estimate(&p, &coarse).map_err(err)?;
    let centers = [a.minimax.config.clone(), a.maximin.config.clone()];
    let lip = local_lipschitz_estimate(&p, &coarse, &centers, 5.0 * a.step).map_err(err)?;
    let (bound_a, bound_b) = (lip * a.step, lip * b.step);
    check(a.duality_gap() <= bound_a, format!("step {}: gap {:e} > {bound_a:e}", a.step, a.duality_gap()))?;
    check(b.duality_gap() <= bound_b, format!("step {}: gap {:e} > {bound_b:e}", b.step, b.duality_gap()))?;
    check((bound_b - 0.5 * bound_a).abs() <= 1e-12 * bound_a, "refined bound is not half the coarse one")?;
    within(Duration::from_secs(120), start)?;
    Ok(format!(
        "L̂ = {lip:.3} near the optimum ({global:.1} over the box), gaps {:.2e} <= {bound_a:.2e} and {:.2e} <= {bound_b:.2e}",
        a.duality_gap(),
        b.duality_gap()
    ))
}

fn solver_oracle_agreement() -> Outcome {
    let mut lines = Vec::new();
    for (name, n) in [("gaussian", 2), ("freud", 2), ("chebyshev", 2)] {
        let p = builtin::builtin(name, n).map_err(err)?;
        let spec = GridSpec::with_step(3.0, 2e-2).map_err(err)?;
        let rep = solve_equioscillation(&p, &SolveOptions::default()).map_err(err)?;
        let ex = grid_extrema(&p, &spec).map_err(err)?;
        let centers = [ex.minimax.config.clone(), ex.maximin.config.clone()];
        let lip = local_lipschitz_estimate(&p, &spec, &centers, 5.0 * ex.step).map_err(err)?;
        let allowance = lip * ex.step;
        let mv = maxima_vector(&p, &rep.nodes, ex.window, &MaxSearch::default()).map_err(err)?;
        check(
            mv.overline() <= ex.minimax.value + allowance,
            format!("{name}: overline {} > {} + {allowance}", mv.overline(), ex.minimax.value),
        )?;
        check(
            mv.underline() >= ex.maximin.value - allowance,
            format!("{name}: underline {} < {} - {allowance}", mv.underline(), ex.maximin.value),
        )?;
        lines.push(format!("{name} {:.1e} (allowance {allowance:.1e})", ex.minimax.value - mv.overline()));
    }
    Ok(format!("M̂ - overline: {}", lines.join(", ")))
}

fn mrs_certificate() -> Outcome {
    let start = Instant::now();
    let mut lines = Vec::new();
    for (name, n) in [("gaussian", 1), ("gaussian", 3), ("freud", 1), ("freud", 3)] {
        let p = builtin::builtin(name, n).map_err(err)?;
        let cert = certify(&p, &Default::default()).map_err(err)?;
        let rep = verify_q(&cert, &p, 200, 17).map_err(err)?;
        check(
            rep.violations == 0,
            format!("{name} n = {n}: {} violations, worst {:e}", rep.violations, rep.max_violation),
        )?;
        lines.push(format!("{name}/n={n} q = {:.3}", cert.q));
    }
    within(Duration::from_secs(30), start)?;
    Ok(lines.join(", "))
}

fn intertwining() -> Outcome {
    let start = Instant::now();
    let mut lines = Vec::new();
    for name in ["gaussian", "freud", "inverse-power-gaussian"] {
        let p = builtin::builtin(name, 2).map_err(err)?;
        let rep = intertwining_test(&p, 1000, &GridSpec::default()).map_err(err)?;
        check(rep.strict.is_empty(), format!("{name}: strict domination {:?}", rep.strict.first()))?;
        if p.kernel().name() == "log" {
            check(rep.nonstrict_checked, format!("{name}: non-strict check skipped"))?;
        }
        check(rep.nonstrict.is_empty(), format!("{name}: non-strict domination {:?}", rep.nonstrict.first()))?;
        lines.push(format!("{name} {} pairs ({} skipped)", rep.trials, rep.skipped));
    }
    within(Duration::from_secs(60), start)?;
    Ok(lines.join(", "))
}

fn uniqueness() -> Outcome {
    let mut worst: f64 = 0.0;
    for name in BUILTIN_NAMES {
        let p = builtin::builtin(name, 2).map_err(err)?;
        let opts = SolveOptions {
            multistart: 8,
            seed: 2024,
            ..Default::default()
        };
        let rep = solve_equioscillation(&p, &opts).map_err(err)?;
        check(rep.starts.len() == 8, format!("{name}: {} starts", rep.starts.len()))?;
        let reference = rep.starts[0].nodes.as_slice();
        for s in &rep.starts {
            check(s.converged, format!("{name}: start {} did not converge (spread {:e})", s.start, s.spread))?;
            for (a, b) in s.nodes.as_slice().iter().zip(reference) {
                worst = worst.max((a - b).abs());
                check((a - b).abs() < 1e-6, format!("{name}: start {} node {a} vs {b}", s.start))?;
            }
        }
    }
    Ok(format!("{} problems x 8 starts, max node deviation {worst:.1e}", BUILTIN_NAMES.len()))
}

fn semiaxis() -> Outcome {
    let p = builtin::semiaxis_linear(1).map_err(err)?;
    let rep = solve_equioscillation(&p, &SolveOptions::default()).map_err(err)?;
    let y = rep.nodes.as_slice()[0];
    check(y >= 0.0, format!("node {y} < 0"))?;
    check(rep.spread <= 1e-8, format!("spread {:e}", rep.spread))?;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for n in 1..=3 {
        let p = builtin::semiaxis_linear(n).map_err(err)?;
        for _ in 0..50 {
            let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
            v.sort_by(f64::total_cmp);
            v[0] = -rng.gen_range(1e-6..5.0);
            v.sort_by(f64::total_cmp);
            let nodes = NodeConfig::new(v).map_err(err)?;
            let mv = maxima_vector(&p, &nodes, Window::symmetric(20.0).map_err(err)?, &MaxSearch::default())
                .map_err(err)?;
            check(mv.m[0] == f64::NEG_INFINITY, format!("m0 = {} at {:?}", mv.m[0], nodes))?;
        }
    }
    Ok(format!("y1 = {y:.6}, spread {:.1e}, m0 = -inf on 150 configs", rep.spread))
}

fn reduction_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst: f64 = 0.0;
    for k in 0..5 {
        let a = rng.gen_range(-3.0..1.0);
        let b = a + rng.gen_range(0.5..4.0);
        let n = 1 + k % 3;
        let r: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..2.0)).collect();
        let field = if k % 2 == 0 {
            Field::gaussian(rng.gen_range(0.5..2.0)).map_err(err)?
        } else {
            Field::constant(0.0).map_err(err)?
        };
        let p = Problem::new(
            Kernel::log(),
            field,
            Multiplicities::new(r).map_err(err)?,
            ProblemDomain::segment(a, b).map_err(err)?,
        )
        .map_err(err)?;
        let opts = SolveOptions {
            spread_tol: 1e-13,
            ..Default::default()
        };
        let direct = solve_equioscillation(&p, &opts).map_err(err)?;
        let unit = solve_equioscillation(&p, &SolveOptions { via_unit: true, ..opts }).map_err(err)?;
        for (x, y) in direct.nodes.as_slice().iter().zip(unit.nodes.as_slice()) {
            worst = worst.max((x - y).abs());
            check((x - y).abs() < 1e-10, format!("[{a:.3}, {b:.3}] n = {n}: {x} vs {y}"))?;
        }
    }
    Ok(format!("5 problems, max node difference {worst:.1e}"))
}

fn bojanov_frontend() -> Outcome {
    let mut lines = Vec::new();
    for (weight, r) in [
        (Weight::Hermite, vec![1.0]),
        (Weight::Hermite, vec![1.0, 1.0]),
        (Weight::Freud { exponent: 4.0 }, vec![1.0, 2.0, 1.0]),
    ] {
        let n = r.len();
        let r = Multiplicities::new(r).map_err(err)?;
        let res = solve_bojanov(&weight, r.clone(), ProblemDomain::Axis, &SolveOptions::default()).map_err(err)?;
        let radius = res.report.ell.unwrap_or(10.0);
        let dense = linspace(-radius, radius, 400_001)
            .into_iter()
            .map(|x| weighted_product(&weight, &res.roots, &r, x))
            .fold(0.0, f64::max);
        check(
            (dense - res.sup_norm).abs() < 1e-6,
            format!("{weight:?}: grid max {dense} vs exp(level) {}", res.sup_norm),
        )?;
        let alternation = res
            .alternation_points
            .iter()
            .filter(|&&t| (weighted_product(&weight, &res.roots, &r, t) - res.sup_norm).abs() < 1e-6)
            .count();
        check(alternation == n + 1, format!("{weight:?}: {alternation} alternation points, want {}", n + 1))?;
        lines.push(format!("n = {n} ‖wT‖ = {:.6}", res.sup_norm));
    }
    Ok(lines.join(", "))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("chebyshev regression", chebyshev_regression),
        ("gaussian n=1", gaussian_single),
        ("duality", duality),
        ("solver-oracle agreement", solver_oracle_agreement),
        ("truncation certificate", mrs_certificate),
        ("intertwining", intertwining),
        ("uniqueness", uniqueness),
        ("semiaxis", semiaxis),
        ("reduction identity", reduction_identity),
        ("bojanov frontend", bojanov_frontend),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let t = start.elapsed();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS {name} [{t:.2?}]: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL {name} [{t:.2?}]: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
