//! Weighted generalized polynomials `w(x) Π|x - xⱼ|^{rⱼ}` of least sup norm.
//!
//! With `K = log|·|` and `J = log w` the norm is `exp` of the equioscillation
//! level, the roots are the equioscillation nodes and the points where the
//! norm is attained are the local argmax locations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Field, Kernel, Multiplicities, PiecewiseLinear, Problem, ProblemDomain, Sample};
use crate::solver::{solve_equioscillation, SolveOptions, SolveReport};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", content = "params", rename_all = "lowercase")]
pub enum Weight {
    /// `exp(-x²)`.
    Hermite,
    /// `exp(-|x|^exponent)`.
    Freud { exponent: f64 },
    Constant { value: f64 },
    /// Linear interpolation of nonnegative samples, zero outside.
    Table { samples: Vec<Sample> },
}

impl Weight {
    pub fn evaluate(&self, x: f64) -> f64 {
        match self {
            Weight::Hermite => (-x * x).exp(),
            Weight::Freud { exponent } => (-x.abs().powf(*exponent)).exp(),
            Weight::Constant { value } => *value,
            Weight::Table { samples } => match PiecewiseLinear::new(samples) {
                Ok(t) => t.eval_or_neg_inf(x).max(0.0),
                Err(_) => 0.0,
            },
        }
    }

    /// `log w` as a field.
    pub fn field(&self) -> Result<Field> {
        match self {
            Weight::Hermite => Field::gaussian(1.0),
            Weight::Freud { exponent } => Field::freud(1.0, *exponent),
            Weight::Constant { value } => {
                if !(*value > 0.0 && value.is_finite()) {
                    return Err(Error::invalid(format!("constant weight must be positive, got {value}")));
                }
                Field::constant(value.ln())
            }
            Weight::Table { samples } => {
                if samples.iter().any(|s| !(s.value >= 0.0 && s.value.is_finite())) {
                    return Err(Error::invalid("weight table values must be finite and nonnegative"));
                }
                let table = PiecewiseLinear::new(samples)?;
                let positive: Vec<f64> = samples.iter().filter(|s| s.value > 0.0).map(|s| s.t).collect();
                if positive.is_empty() {
                    return Err(Error::SparseField("weight table is zero everywhere".into()));
                }
                let upper = samples.iter().map(|s| s.value).fold(0.0, f64::max).ln();
                let support = (table.first(), table.last());
                Field::custom(
                    "log(table weight)",
                    move |x| table.eval_or_neg_inf(x).max(0.0).ln(),
                    upper,
                    positive,
                    support,
                    false,
                )
            }
        }
    }

    /// Points where the weight is known to be positive.
    fn positivity_points(&self) -> Option<usize> {
        match self {
            Weight::Table { samples } => Some(samples.iter().filter(|s| s.value > 0.0).count()),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BojanovResult {
    pub roots: Vec<f64>,
    pub multiplicities: Multiplicities,
    pub sup_norm: f64,
    pub alternation_points: Vec<f64>,
    pub converged: bool,
    pub report: SolveReport,
}

/// `w(x) Π|x - xⱼ|^{rⱼ}`.
pub fn weighted_product(weight: &Weight, roots: &[f64], r: &Multiplicities, x: f64) -> f64 {
    roots
        .iter()
        .zip(r.as_slice())
        .fold(weight.evaluate(x), |acc, (&y, &rj)| acc * (x - y).abs().powf(rj))
}

pub fn bojanov_problem(weight: &Weight, r: Multiplicities, domain: ProblemDomain) -> Result<Problem> {
    if let Some(count) = weight.positivity_points() {
        if count < r.len() + 1 {
            return Err(Error::SparseField(format!(
                "weight is positive at {count} sample points, need at least {}",
                r.len() + 1
            )));
        }
    }
    Problem::new(Kernel::log(), weight.field()?, r, domain)
}

pub fn solve_bojanov(weight: &Weight, r: Multiplicities, domain: ProblemDomain, opts: &SolveOptions) -> Result<BojanovResult> {
    let problem = bojanov_problem(weight, r.clone(), domain)?;
    let report = solve_equioscillation(&problem, opts)?;
    Ok(BojanovResult {
        roots: report.nodes.as_slice().to_vec(),
        multiplicities: r,
        sup_norm: report.level.exp(),
        alternation_points: report.maxima.argmax.clone(),
        converged: report.converged,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_single_root() {
        let res = solve_bojanov(
            &Weight::Hermite,
            Multiplicities::ones(1).unwrap(),
            ProblemDomain::Axis,
            &SolveOptions::default(),
        )
        .unwrap();
        assert!(res.roots[0].abs() < 1e-8);
        // max of x e^{-x²} is e^{-1/2}/√2
        let want = (-0.5f64).exp() / 2f64.sqrt();
        assert!((res.sup_norm - want).abs() < 1e-8);
        assert_eq!(res.alternation_points.len(), 2);
    }

    #[test]
    fn constant_weight_is_not_admissible() {
        let err = solve_bojanov(
            &Weight::Constant { value: 1.0 },
            Multiplicities::ones(1).unwrap(),
            ProblemDomain::Axis,
            &SolveOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Admissibility(_)));
    }

    #[test]
    fn sparse_table_weight_is_rejected() {
        let w = Weight::Table {
            samples: vec![
                Sample { t: -1.0, value: 0.0 },
                Sample { t: 0.0, value: 1.0 },
                Sample { t: 1.0, value: 0.0 },
            ],
        };
        assert!(matches!(
            bojanov_problem(&w, Multiplicities::ones(2).unwrap(), ProblemDomain::Axis),
            Err(Error::SparseField(_))
        ));
    }

    #[test]
    fn weighted_product_matches_field() {
        let r = Multiplicities::new(vec![1.0, 2.0]).unwrap();
        let p = bojanov_problem(&Weight::Hermite, r.clone(), ProblemDomain::Axis).unwrap();
        let roots = [-0.4, 0.9];
        for x in [-1.3, 0.1, 2.0] {
            let a = weighted_product(&Weight::Hermite, &roots, &r, x).ln();
            assert!((a - p.value(&roots, x)).abs() < 1e-12);
        }
    }
}
