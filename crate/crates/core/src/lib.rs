//! Oracle-based stochastic local search for SAT.
//!
//! The crate implements the Moser-Tardos and WalkSAT solvers driven by a
//! product-Bernoulli sampling oracle, the Lovász Local Lemma diagnostics
//! (dependency graph, slack vector, condition check, LLL and Gibbs losses)
//! that score such oracles, random k-SAT generation, a small DPLL solver for
//! ground truth, and the benchmark harness that aggregates solver runs.

pub mod bench;
pub mod cnf;
pub mod dimacs;
pub mod error;
pub mod exact;
pub mod gen;
pub mod lll;
pub mod oracle;
pub mod rng;
pub mod sls;

pub use cnf::{clause_violated, Assignment, Clause, Formula, Literal};
pub use dimacs::{parse_dimacs, parse_dimacs_str, read_dimacs_file, write_dimacs};
pub use error::{Error, ParseError, ParseErrorKind, Result};
pub use exact::{min_violation_set, solve_exact, ExactOutcome, ExactResult, Status};
pub use gen::{gen_degree_bounded_ksat, gen_uniform_ksat, GenSpec, ManifestRow, SatStatus};
pub use lll::{
    check_lll, clause_violation_prob, epsilon, find_mu_fixed_point, gibbs_loss_estimate, lll_loss,
    DependencyGraph, GibbsLoss, LllReport, LossParams, MuSearch, NormOrder, SampleSet,
};
pub use oracle::{parse_oracle, read_oracle_file, write_oracle, ProductOracle};
pub use rng::RngStream;
pub use sls::{run_mt, run_variant, run_walksat, Mode, RunConfig, RunRecord, Variant};
