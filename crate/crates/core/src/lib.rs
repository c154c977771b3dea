//! Extremal node configurations for sums of translates
//! `F(y, t) = J(t) + Σ rⱼ K(t - yⱼ)`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bojanov;
pub mod builtin;
pub mod config;
pub mod error;
pub mod eval;
pub mod model;
pub mod oracle;
pub mod search;
pub mod serde_ext;
pub mod solver;
pub mod truncation;

pub use bojanov::{solve_bojanov, BojanovResult, Weight};
pub use config::ProblemConfig;
pub use error::{Error, Result};
pub use eval::{maxima_vector, oscillation_spread, sum_of_translates, MaxSearch, MaximaVector, Window};
pub use model::{Field, Kernel, KernelFlags, Multiplicities, NodeConfig, Problem, ProblemDomain, Sample};
pub use oracle::{grid_extrema, grid_maximin, grid_minimax, intertwining_test, GridSpec};
pub use solver::{solve_equioscillation, solve_semiaxis, SolveOptions, SolveReport};
pub use truncation::{certify, verify_q, TruncationCertificate};
