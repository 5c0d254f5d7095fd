//! Lovász Local Lemma diagnostics for product oracles.
//!
//! For a product oracle the violation events of two clauses are independent
//! whenever the clauses share no variable, so the dependency graph used here
//! is the structural one: clauses `j != j'` are adjacent iff
//! `V(c_j) ∩ V(c_j') ≠ ∅`. It contains every statistically dependent pair,
//! which only makes the condition check more conservative.
//!
//! The slack of clause `j` under weights `mu` is
//!
//! ```text
//! eps(j) = P(j) * prod_{j' in Γ+(j)} (1 + mu(j')) - mu(j)
//! ```
//!
//! with the product evaluated as `exp(sum log1p(mu))`. The condition holds iff
//! every `eps(j) <= 0`, compared exactly; in that case the Moser-Tardos
//! solver needs `sum(mu)` resampling steps in expectation.
//!
//! The Gibbs loss is estimated self-normalized over a finite sample set; the
//! partition function over all `2^n` assignments is never formed.

use std::fmt;
use std::fmt::Write as _;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::cnf::{Assignment, Clause, Formula};
use crate::error::{Error, ParseErrorKind, Result};
use crate::oracle::{header_value, numbered_lines, perr, ProductOracle};

/// Clause adjacency by shared variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependencyGraph {
    neighbors: Vec<Vec<u32>>,
}

impl DependencyGraph {
    pub fn build(formula: &Formula) -> Self {
        let m = formula.num_clauses();
        let mut stamp = vec![u32::MAX; m];
        let mut neighbors = Vec::with_capacity(m);
        for (j, clause) in formula.clauses().iter().enumerate() {
            stamp[j] = j as u32;
            let mut adj = Vec::new();
            for v in clause.vars() {
                let occ = formula
                    .positive_occurrences(v)
                    .iter()
                    .chain(formula.negative_occurrences(v));
                for &k in occ {
                    if stamp[k as usize] != j as u32 {
                        stamp[k as usize] = j as u32;
                        adj.push(k);
                    }
                }
            }
            adj.sort_unstable();
            neighbors.push(adj);
        }
        DependencyGraph { neighbors }
    }

    pub fn num_clauses(&self) -> usize {
        self.neighbors.len()
    }

    /// Exclusive neighbourhood Γ(j), sorted.
    pub fn neighbors(&self, j: usize) -> &[u32] {
        &self.neighbors[j]
    }

    pub fn degree(&self, j: usize) -> usize {
        self.neighbors[j].len()
    }

    pub fn max_degree(&self) -> usize {
        self.neighbors.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn num_edges(&self) -> usize {
        self.neighbors.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.neighbors[a].binary_search(&(b as u32)).is_ok()
    }
}

/// Probability that a sample from `oracle` violates `clause`.
pub fn clause_violation_prob(oracle: &ProductOracle, clause: &Clause) -> f64 {
    clause
        .literals()
        .iter()
        .map(|l| {
            let w = oracle.weight(l.var());
            if l.is_negated() {
                w
            } else {
                1.0 - w
            }
        })
        .product()
}

pub fn violation_probs(oracle: &ProductOracle, formula: &Formula) -> Result<Vec<f64>> {
    oracle.check_num_vars(formula.num_vars())?;
    Ok(formula
        .clauses()
        .iter()
        .map(|c| clause_violation_prob(oracle, c))
        .collect())
}

fn check_mu(mu: &[f64], m: usize) -> Result<()> {
    if mu.len() != m {
        return Err(Error::SizeMismatch {
            what: "mu",
            expected: m,
            found: mu.len(),
        });
    }
    match mu.iter().position(|u| !(u.is_finite() && *u >= 0.0)) {
        Some(index) => Err(Error::InvalidMu {
            index,
            value: mu[index],
        }),
        None => Ok(()),
    }
}

/// Per-clause slack vector.
pub fn epsilon(
    oracle: &ProductOracle,
    mu: &[f64],
    formula: &Formula,
    graph: &DependencyGraph,
) -> Result<Vec<f64>> {
    let probs = violation_probs(oracle, formula)?;
    check_mu(mu, formula.num_clauses())?;
    if graph.num_clauses() != formula.num_clauses() {
        return Err(Error::SizeMismatch {
            what: "dependency graph",
            expected: formula.num_clauses(),
            found: graph.num_clauses(),
        });
    }
    Ok(epsilon_from_probs(&probs, mu, graph))
}

fn epsilon_from_probs(probs: &[f64], mu: &[f64], graph: &DependencyGraph) -> Vec<f64> {
    let log_terms: Vec<f64> = mu.iter().map(|u| u.ln_1p()).collect();
    probs
        .iter()
        .enumerate()
        .map(|(j, &p)| {
            if p == 0.0 {
                return -mu[j];
            }
            let s = log_terms[j]
                + graph
                    .neighbors(j)
                    .iter()
                    .map(|&k| log_terms[k as usize])
                    .sum::<f64>();
            p * s.exp() - mu[j]
        })
        .collect()
}

/// Order `z` of the norm applied to the clamped slack vector; `z >= 1` or
/// infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormOrder(f64);

/// Finite orders serialize as numbers, infinity as the string `"inf"`.
impl Serialize for NormOrder {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            serializer.serialize_str("inf")
        } else {
            serializer.serialize_f64(self.0)
        }
    }
}

impl NormOrder {
    pub const ONE: NormOrder = NormOrder(1.0);
    pub const TWO: NormOrder = NormOrder(2.0);
    pub const INFINITY: NormOrder = NormOrder(f64::INFINITY);

    pub fn new(z: f64) -> Result<Self> {
        if z >= 1.0 {
            Ok(NormOrder(z))
        } else {
            Err(Error::InvalidArgument(format!("norm order {z} must be >= 1")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// z-norm of nonnegative entries, scaled by the maximum so tiny positive
    /// entries never underflow to a zero norm.
    pub fn norm(self, values: &[f64]) -> f64 {
        let max = values.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        if max == 0.0 || self.0.is_infinite() {
            return max;
        }
        let sum: f64 = values.iter().map(|v| (v.abs() / max).powf(self.0)).sum();
        max * sum.powf(1.0 / self.0)
    }
}

impl Default for NormOrder {
    fn default() -> Self {
        NormOrder::TWO
    }
}

impl FromStr for NormOrder {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "max" => Ok(NormOrder::INFINITY),
            other => other
                .parse::<f64>()
                .map_err(|_| Error::InvalidArgument(format!("invalid norm order `{s}`")))
                .and_then(NormOrder::new),
        }
    }
}

impl fmt::Display for NormOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_infinite() {
            f.write_str("inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LllReport {
    pub violation_probs: Vec<f64>,
    pub epsilon: Vec<f64>,
    pub satisfied: bool,
    pub expected_steps_bound: f64,
    pub lll_loss: f64,
    pub z: NormOrder,
}

impl LllReport {
    pub fn max_epsilon(&self) -> f64 {
        self.epsilon.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Evaluates the local lemma condition for `oracle` and weights `mu`.
pub fn check_lll(
    oracle: &ProductOracle,
    mu: &[f64],
    formula: &Formula,
    z: NormOrder,
) -> Result<LllReport> {
    check_lll_with_graph(oracle, mu, formula, &DependencyGraph::build(formula), z)
}

pub fn check_lll_with_graph(
    oracle: &ProductOracle,
    mu: &[f64],
    formula: &Formula,
    graph: &DependencyGraph,
    z: NormOrder,
) -> Result<LllReport> {
    let probs = violation_probs(oracle, formula)?;
    let eps = epsilon(oracle, mu, formula, graph)?;
    let satisfied = eps.iter().all(|&e| e <= 0.0);
    let lll_loss = clamped_norm(&eps, z);
    Ok(LllReport {
        violation_probs: probs,
        epsilon: eps,
        satisfied,
        expected_steps_bound: mu.iter().sum(),
        lll_loss,
        z,
    })
}

fn clamped_norm(eps: &[f64], z: NormOrder) -> f64 {
    let clamped: Vec<f64> = eps.iter().map(|&e| e.max(0.0)).collect();
    z.norm(&clamped)
}

/// z-norm of the positive part of the slack vector.
pub fn lll_loss(oracle: &ProductOracle, mu: &[f64], formula: &Formula, z: NormOrder) -> Result<f64> {
    let eps = epsilon(oracle, mu, formula, &DependencyGraph::build(formula))?;
    Ok(clamped_norm(&eps, z))
}

#[derive(Debug, Clone, PartialEq)]
pub enum MuSearch {
    Converged {
        mu: Vec<f64>,
        iterations: usize,
        /// Whether `mu` passes the exact condition check. When the raw fixed
        /// point sits within `tol` of the boundary a slightly inflated copy is
        /// returned if it certifies.
        certified: bool,
    },
    /// Some component exceeded the cap or the iteration budget ran out. Says
    /// nothing about whether a valid `mu` exists.
    Failed { iterations: usize, reason: String },
}

impl MuSearch {
    pub fn mu(&self) -> Option<&[f64]> {
        match self {
            MuSearch::Converged { mu, .. } => Some(mu),
            MuSearch::Failed { .. } => None,
        }
    }
}

const MU_CAP: f64 = 1e12;

/// Least fixed point of `mu <- P * prod_{Γ+}(1 + mu)` by iteration from zero.
pub fn find_mu_fixed_point(
    oracle: &ProductOracle,
    formula: &Formula,
    graph: &DependencyGraph,
    max_iters: usize,
    tol: f64,
) -> Result<MuSearch> {
    let probs = violation_probs(oracle, formula)?;
    let m = formula.num_clauses();
    let mut mu = vec![0.0; m];
    for iter in 1..=max_iters {
        let eps = epsilon_from_probs(&probs, &mu, graph);
        let next: Vec<f64> = eps.iter().zip(&mu).map(|(e, u)| e + u).collect();
        if let Some(j) = next.iter().position(|u| !u.is_finite() || *u > MU_CAP) {
            return Ok(MuSearch::Failed {
                iterations: iter,
                reason: format!("mu[{}] exceeded {MU_CAP:e}", j + 1),
            });
        }
        let delta = next
            .iter()
            .zip(&mu)
            .fold(0.0f64, |d, (a, b)| d.max((a - b).abs()));
        mu = next;
        if delta <= tol {
            return Ok(certify(mu, &probs, graph, iter));
        }
    }
    Ok(MuSearch::Failed {
        iterations: max_iters,
        reason: "iteration budget exhausted".into(),
    })
}

fn certify(mu: Vec<f64>, probs: &[f64], graph: &DependencyGraph, iterations: usize) -> MuSearch {
    let passes = |m: &[f64]| epsilon_from_probs(probs, m, graph).iter().all(|&e| e <= 0.0);
    if passes(&mu) {
        return MuSearch::Converged {
            mu,
            iterations,
            certified: true,
        };
    }
    for inflate in [1e-12, 1e-9, 1e-6, 1e-4, 1e-3, 1e-2, 5e-2] {
        let candidate: Vec<f64> = mu.iter().map(|u| u * (1.0 + inflate)).collect();
        if passes(&candidate) {
            return MuSearch::Converged {
                mu: candidate,
                iterations,
                certified: true,
            };
        }
    }
    MuSearch::Converged {
        mu,
        iterations,
        certified: false,
    }
}

/// Distinct assignments with their violation counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleSet {
    assignments: Vec<Assignment>,
    violations: Vec<usize>,
}

impl SampleSet {
    /// Violation counts are always recomputed against `formula`.
    pub fn new(formula: &Formula, assignments: Vec<Assignment>) -> Result<Self> {
        let mut seen = std::collections::HashSet::with_capacity(assignments.len());
        let mut violations = Vec::with_capacity(assignments.len());
        for (i, x) in assignments.iter().enumerate() {
            violations.push(formula.count_violated(x)?);
            if !seen.insert(x) {
                return Err(perr(i + 1, ParseErrorKind::DuplicateSample));
            }
        }
        Ok(SampleSet {
            assignments,
            violations,
        })
    }

    pub fn assignments(&self) -> &[Assignment] {
        &self.assignments
    }

    pub fn violations(&self) -> &[usize] {
        &self.violations
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }
}

pub const SAMPLES_FORMAT_VERSION: u32 = 1;

pub fn write_samples(samples: &SampleSet) -> String {
    let n = samples.assignments.first().map_or(0, Assignment::len);
    let mut out = format!("SAMPLES {SAMPLES_FORMAT_VERSION}\nn {n}\n");
    for x in &samples.assignments {
        let _ = writeln!(out, "{}", x.to_bit_string());
    }
    out
}

/// Reads a samples file and recomputes violations against `formula`.
pub fn parse_samples<R: Read>(reader: R, formula: &Formula) -> Result<SampleSet> {
    let mut lines = numbered_lines(reader)?.into_iter();
    let (lineno, first) = lines
        .next()
        .ok_or_else(|| perr(0, ParseErrorKind::Header("empty samples file".into())))?;
    match first.split_whitespace().collect::<Vec<_>>().as_slice() {
        ["SAMPLES", v] if *v == SAMPLES_FORMAT_VERSION.to_string() => {}
        ["SAMPLES", v] => return Err(perr(lineno, ParseErrorKind::Version(v.to_string()))),
        _ => return Err(perr(lineno, ParseErrorKind::Header(first))),
    }
    let n = header_value(
        lines
            .next()
            .ok_or_else(|| perr(0, ParseErrorKind::Header("missing `n` line".into())))?,
        "n",
    )?;
    if n != formula.num_vars() {
        return Err(Error::SizeMismatch {
            what: "samples",
            expected: formula.num_vars(),
            found: n,
        });
    }
    let mut assignments = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (lineno, line) in lines {
        let x = Assignment::from_bit_string(&line)
            .ok_or_else(|| perr(lineno, ParseErrorKind::Token(line.clone())))?;
        if x.len() != n {
            return Err(perr(
                lineno,
                ParseErrorKind::Length {
                    expected: n,
                    found: x.len(),
                },
            ));
        }
        if !seen.insert(x.clone()) {
            return Err(perr(lineno, ParseErrorKind::DuplicateSample));
        }
        assignments.push(x);
    }
    SampleSet::new(formula, assignments)
}

pub fn read_samples_file(path: impl AsRef<Path>, formula: &Formula) -> Result<SampleSet> {
    parse_samples(std::fs::File::open(path)?, formula)
}

pub const MU_FORMAT_VERSION: u32 = 1;

/// Serializes a standalone `mu` vector:
///
/// ```text
/// MU 1
/// m <m>
/// mu <j> <u_j>     (m lines, 1-based)
/// ```
pub fn write_mu(mu: &[f64]) -> String {
    let mut out = format!("MU {MU_FORMAT_VERSION}\nm {}\n", mu.len());
    for (j, u) in mu.iter().enumerate() {
        let _ = writeln!(out, "mu {} {:.16e}", j + 1, u);
    }
    out
}

pub fn parse_mu<R: Read>(reader: R) -> Result<Vec<f64>> {
    let mut lines = numbered_lines(reader)?.into_iter();
    let (lineno, first) = lines
        .next()
        .ok_or_else(|| perr(0, ParseErrorKind::Header("empty mu file".into())))?;
    match first.split_whitespace().collect::<Vec<_>>().as_slice() {
        ["MU", v] if *v == MU_FORMAT_VERSION.to_string() => {}
        ["MU", v] => return Err(perr(lineno, ParseErrorKind::Version(v.to_string()))),
        _ => return Err(perr(lineno, ParseErrorKind::Header(first))),
    }
    let m = header_value(
        lines
            .next()
            .ok_or_else(|| perr(0, ParseErrorKind::Header("missing `m` line".into())))?,
        "m",
    )?;
    let mut mu: Vec<Option<f64>> = vec![None; m];
    for (lineno, line) in lines {
        let toks: Vec<&str> = line.split_whitespace().collect();
        let (idx, val) = match toks.as_slice() {
            ["mu", idx, val] => (*idx, *val),
            _ => return Err(perr(lineno, ParseErrorKind::Token(line.clone()))),
        };
        let idx: usize = idx
            .parse()
            .map_err(|_| perr(lineno, ParseErrorKind::Token(idx.to_string())))?;
        let value: f64 = val
            .parse()
            .map_err(|_| perr(lineno, ParseErrorKind::Token(val.to_string())))?;
        if !(value.is_finite() && value >= 0.0) {
            return Err(perr(lineno, ParseErrorKind::Mu(val.to_string())));
        }
        match mu.get_mut(idx.wrapping_sub(1)) {
            None => return Err(perr(lineno, ParseErrorKind::Index { index: idx, len: m })),
            Some(Some(_)) => return Err(perr(lineno, ParseErrorKind::DuplicateIndex(idx))),
            Some(slot) => *slot = Some(value),
        }
    }
    let found = mu.iter().filter(|u| u.is_some()).count();
    if found != m {
        return Err(perr(0, ParseErrorKind::Length { expected: m, found }));
    }
    Ok(mu.into_iter().map(Option::unwrap).collect())
}

pub fn read_mu_file(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    parse_mu(std::fs::File::open(path)?)
}

/// Softmax of `-beta * violations`, shifted by the minimum violation count.
pub fn gibbs_weights(violations: &[usize], beta: f64) -> Vec<f64> {
    let min = violations.iter().copied().min().unwrap_or(0);
    let raw: Vec<f64> = violations
        .iter()
        .map(|&e| (-beta * (e - min) as f64).exp())
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|r| r / total).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GibbsLoss {
    Finite(f64),
    /// Some sample has probability zero under the oracle.
    Infinite { sample: usize },
}

impl GibbsLoss {
    pub fn value(self) -> f64 {
        match self {
            GibbsLoss::Finite(v) => v,
            GibbsLoss::Infinite { .. } => f64::INFINITY,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, GibbsLoss::Finite(_))
    }
}

/// Self-normalized cross entropy `-sum_i w_i log P_O(x_i)` with Gibbs weights
/// `w = softmax(-beta * e)`.
pub fn gibbs_loss_estimate(oracle: &ProductOracle, samples: &SampleSet, beta: f64) -> Result<GibbsLoss> {
    gibbs_cross_entropy(oracle, &samples.assignments, &samples.violations, beta)
}

/// As [`gibbs_loss_estimate`] over a plain list that may contain repeats.
pub fn gibbs_cross_entropy(
    oracle: &ProductOracle,
    assignments: &[Assignment],
    violations: &[usize],
    beta: f64,
) -> Result<GibbsLoss> {
    if assignments.is_empty() {
        return Err(Error::InvalidArgument("empty sample set".into()));
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidArgument(format!("beta {beta} must be positive")));
    }
    if assignments.len() != violations.len() {
        return Err(Error::SizeMismatch {
            what: "violations",
            expected: assignments.len(),
            found: violations.len(),
        });
    }
    let weights = gibbs_weights(violations, beta);
    let mut loss = 0.0;
    for (i, (x, w)) in assignments.iter().zip(&weights).enumerate() {
        oracle.check_num_vars(x.len())?;
        let lp = oracle.log_probability(x);
        if lp == f64::NEG_INFINITY {
            return Ok(GibbsLoss::Infinite { sample: i });
        }
        loss -= w * lp;
    }
    Ok(GibbsLoss::Finite(loss))
}

/// Default loss hyperparameters: z = 2, beta = 1, gamma1 = gamma2 = 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LossParams {
    pub beta: f64,
    pub z: NormOrder,
    pub gamma1: f64,
    pub gamma2: f64,
}

impl Default for LossParams {
    fn default() -> Self {
        LossParams {
            beta: 1.0,
            z: NormOrder::TWO,
            gamma1: 1.0,
            gamma2: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossBreakdown {
    /// `None` when `gamma1 == 0` and the term was skipped.
    pub gibbs: Option<GibbsLoss>,
    /// `None` when `gamma2 == 0` and the term was skipped.
    pub lll: Option<f64>,
    pub total: f64,
}

/// `gamma1 * L_gibbs + gamma2 * L_lll`. A term with zero coefficient is not
/// evaluated, so e.g. a missing `mu` is fine when `gamma2 == 0`.
pub fn total_loss(
    oracle: &ProductOracle,
    mu: Option<&[f64]>,
    formula: &Formula,
    samples: Option<&SampleSet>,
    params: &LossParams,
) -> Result<LossBreakdown> {
    if params.gamma1 < 0.0 || params.gamma2 < 0.0 {
        return Err(Error::InvalidArgument("loss weights must be nonnegative".into()));
    }
    let gibbs = if params.gamma1 > 0.0 {
        let samples = samples
            .ok_or_else(|| Error::InvalidArgument("Gibbs term needs a sample set".into()))?;
        Some(gibbs_loss_estimate(oracle, samples, params.beta)?)
    } else {
        None
    };
    let lll = if params.gamma2 > 0.0 {
        let mu = mu.ok_or_else(|| Error::InvalidArgument("LLL term needs mu".into()))?;
        Some(lll_loss(oracle, mu, formula, params.z)?)
    } else {
        None
    };
    let total = gibbs.map_or(0.0, |g| params.gamma1 * g.value()) + lll.map_or(0.0, |l| params.gamma2 * l);
    Ok(LossBreakdown { gibbs, lll, total })
}
