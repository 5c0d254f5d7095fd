//! Shared fixtures for the criterion benchmarks.

use oraclesat::{gen_degree_bounded_ksat, gen_uniform_ksat, Formula, GenSpec};

/// Uniform random 3-SAT with `m = round(alpha * n)`.
pub fn random_3sat(n: usize, alpha: f64, seed: u64) -> Formula {
    gen_uniform_ksat(&GenSpec::with_ratio(n, 3, alpha, seed)).expect("valid fixture spec")
}

/// 7-SAT with every variable in exactly five clauses (n = 700, m = 500).
pub fn bounded_7sat(seed: u64) -> Formula {
    gen_degree_bounded_ksat(&GenSpec::with_clauses(700, 7, 500, seed).max_occurrence(5))
        .expect("valid fixture spec")
}
