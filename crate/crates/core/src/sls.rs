//! Oracle-based Moser-Tardos and WalkSAT.
//!
//! Both solvers keep an incrementally maintained set of violated clauses:
//! a per-clause count of true literals plus a dense vector of violated clause
//! indices with position back-pointers, so a uniform violated clause is drawn
//! in O(1) and each variable change costs O(occurrences).

use std::fmt;
use std::str::FromStr;

use crate::cnf::{Assignment, Formula};
use crate::error::{Error, Result};
use crate::oracle::ProductOracle;
use crate::rng::RngStream;

pub const DEFAULT_MAX_STEPS: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    /// Resample every variable of a violated clause.
    MoserTardos,
    /// Flip one variable of a violated clause.
    WalkSat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    /// Uniform oracle for initialization and updates.
    Uniform,
    /// Given oracle for initialization, uniform oracle for updates.
    Hybrid,
    /// Given oracle throughout.
    Boosted,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::MoserTardos => "mt",
            Variant::WalkSat => "walksat",
        }
    }
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Uniform => "uniform",
            Mode::Hybrid => "hybrid",
            Mode::Boosted => "boosted",
        }
    }

    pub fn needs_oracle(self) -> bool {
        !matches!(self, Mode::Uniform)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mt" | "moser-tardos" => Ok(Variant::MoserTardos),
            "walksat" => Ok(Variant::WalkSat),
            _ => Err(Error::InvalidArgument(format!("unknown variant `{s}`"))),
        }
    }
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "uniform" => Ok(Mode::Uniform),
            "hybrid" => Ok(Mode::Hybrid),
            "boosted" => Ok(Mode::Boosted),
            _ => Err(Error::InvalidArgument(format!("unknown mode `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    pub max_steps: u64,
    pub seed: u64,
    pub variant: Variant,
    pub mode: Mode,
    pub trace_violations: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            max_steps: DEFAULT_MAX_STEPS,
            seed: 0,
            variant: Variant::MoserTardos,
            mode: Mode::Boosted,
            trace_violations: false,
        }
    }
}

impl RunConfig {
    pub fn new(variant: Variant, mode: Mode) -> Self {
        RunConfig {
            variant,
            mode,
            ..Default::default()
        }
    }

    pub fn max_steps(mut self, max_steps: u64) -> Self {
        self.max_steps = max_steps;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn trace(mut self, on: bool) -> Self {
        self.trace_violations = on;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunRecord {
    pub steps: u64,
    pub solved: bool,
    pub final_assignment: Assignment,
    /// Violated-clause count after initialization and after every step.
    pub violation_trace: Option<Vec<u32>>,
    /// WalkSAT steps where every flip weight in the chosen clause was zero and
    /// the variable was picked uniformly instead.
    pub degenerate_picks: u64,
}

/// Search state with incremental violated-clause bookkeeping.
#[derive(Debug, Clone)]
pub struct SearchState<'a> {
    formula: &'a Formula,
    x: Vec<bool>,
    true_count: Vec<u32>,
    violated: Vec<u32>,
    position: Vec<u32>,
}

const ABSENT: u32 = u32::MAX;

impl<'a> SearchState<'a> {
    pub fn new(formula: &'a Formula, x: Assignment) -> Result<Self> {
        formula.check_len(&x)?;
        let x = x.into_bits();
        let m = formula.num_clauses();
        let mut true_count = vec![0u32; m];
        let mut violated = Vec::new();
        let mut position = vec![ABSENT; m];
        for (j, c) in formula.clauses().iter().enumerate() {
            let t = c.literals().iter().filter(|l| l.eval(&x)).count() as u32;
            true_count[j] = t;
            if t == 0 {
                position[j] = violated.len() as u32;
                violated.push(j as u32);
            }
        }
        Ok(SearchState {
            formula,
            x,
            true_count,
            violated,
            position,
        })
    }

    #[inline]
    pub fn num_violated(&self) -> usize {
        self.violated.len()
    }

    pub fn violated_clauses(&self) -> &[u32] {
        &self.violated
    }

    pub fn assignment(&self) -> &[bool] {
        &self.x
    }

    pub fn into_assignment(self) -> Assignment {
        Assignment::from_bits(self.x)
    }

    /// A violated clause drawn uniformly. Requires at least one.
    #[inline]
    pub fn pick_violated(&self, rng: &mut RngStream) -> usize {
        self.violated[rng.index(self.violated.len())] as usize
    }

    #[inline]
    pub fn set(&mut self, var: usize, value: bool) {
        if self.x[var] == value {
            return;
        }
        self.x[var] = value;
        let f = self.formula;
        let (gain, lose) = if value {
            (f.positive_occurrences(var), f.negative_occurrences(var))
        } else {
            (f.negative_occurrences(var), f.positive_occurrences(var))
        };
        for &j in gain {
            let j = j as usize;
            self.true_count[j] += 1;
            if self.true_count[j] == 1 {
                self.remove_violated(j);
            }
        }
        for &j in lose {
            let j = j as usize;
            self.true_count[j] -= 1;
            if self.true_count[j] == 0 {
                self.position[j] = self.violated.len() as u32;
                self.violated.push(j as u32);
            }
        }
    }

    #[inline]
    pub fn flip(&mut self, var: usize) {
        let v = !self.x[var];
        self.set(var, v);
    }

    #[inline]
    fn remove_violated(&mut self, j: usize) {
        let pos = self.position[j] as usize;
        let last = self.violated.pop().expect("clause was marked violated");
        if last as usize != j {
            self.violated[pos] = last;
            self.position[last as usize] = pos as u32;
        }
        self.position[j] = ABSENT;
    }
}

/// Oracle-based Moser-Tardos. `cfg.mode` selects which oracle drives
/// initialization and resampling; `cfg.variant` is ignored.
pub fn run_mt(
    formula: &Formula,
    oracle: &ProductOracle,
    cfg: &RunConfig,
    rng: &mut RngStream,
) -> Result<RunRecord> {
    oracle.check_num_vars(formula.num_vars())?;
    let (init, update) = oracles_for_mode(formula, oracle, cfg.mode)?;
    run_with(formula, &init, &update, Variant::MoserTardos, cfg, rng)
}

/// Oracle-based WalkSAT. `cfg.mode` selects which oracle drives
/// initialization and the flip weights; `cfg.variant` is ignored.
pub fn run_walksat(
    formula: &Formula,
    oracle: &ProductOracle,
    cfg: &RunConfig,
    rng: &mut RngStream,
) -> Result<RunRecord> {
    oracle.check_num_vars(formula.num_vars())?;
    let (init, update) = oracles_for_mode(formula, oracle, cfg.mode)?;
    run_with(formula, &init, &update, Variant::WalkSat, cfg, rng)
}

/// Runs `cfg.variant` in `cfg.mode`. Uniform mode ignores `oracle`; hybrid and
/// boosted modes require it.
pub fn run_variant(
    formula: &Formula,
    oracle: Option<&ProductOracle>,
    cfg: &RunConfig,
    rng: &mut RngStream,
) -> Result<RunRecord> {
    let uniform;
    let oracle = match (cfg.mode, oracle) {
        (Mode::Uniform, _) => {
            uniform = ProductOracle::uniform(formula.num_vars())?;
            &uniform
        }
        (mode, None) => return Err(Error::MissingOracle(mode.as_str())),
        (_, Some(o)) => o,
    };
    match cfg.variant {
        Variant::MoserTardos => run_mt(formula, oracle, cfg, rng),
        Variant::WalkSat => run_walksat(formula, oracle, cfg, rng),
    }
}

fn oracles_for_mode(
    formula: &Formula,
    oracle: &ProductOracle,
    mode: Mode,
) -> Result<(ProductOracle, ProductOracle)> {
    let uniform = || ProductOracle::uniform(formula.num_vars());
    Ok(match mode {
        Mode::Uniform => (uniform()?, uniform()?),
        Mode::Hybrid => (oracle.clone().without_mu(), uniform()?),
        Mode::Boosted => (oracle.clone().without_mu(), oracle.clone().without_mu()),
    })
}

fn run_with(
    formula: &Formula,
    init: &ProductOracle,
    update: &ProductOracle,
    variant: Variant,
    cfg: &RunConfig,
    rng: &mut RngStream,
) -> Result<RunRecord> {
    if cfg.max_steps == 0 {
        return Err(Error::InvalidArgument("max_steps must be at least 1".into()));
    }
    let mut state = SearchState::new(formula, init.sample(rng))?;
    let mut trace = cfg
        .trace_violations
        .then(|| vec![state.num_violated() as u32]);
    let mut steps = 0u64;
    let mut degenerate = 0u64;
    let mut weights: Vec<f64> = Vec::new();

    while state.num_violated() > 0 && steps < cfg.max_steps {
        let j = state.pick_violated(rng);
        let clause = formula.clause(j);
        match variant {
            Variant::MoserTardos => {
                // Only the bits of V(c) of the fresh sample are ever read, so
                // only those are drawn.
                for v in clause.vars() {
                    let bit = update.sample_var(v, rng);
                    state.set(v, bit);
                }
            }
            Variant::WalkSat => {
                weights.clear();
                weights.extend(
                    clause
                        .vars()
                        .map(|v| update.flip_marginal_unchecked(state.assignment(), v)),
                );
                let var = match pick_weighted(&weights, rng) {
                    Some(i) => clause.literals()[i].var(),
                    None => {
                        degenerate += 1;
                        log::debug!("clause {j}: all flip weights zero, picking uniformly");
                        clause.literals()[rng.index(clause.len())].var()
                    }
                };
                state.flip(var);
            }
        }
        steps += 1;
        if let Some(t) = trace.as_mut() {
            t.push(state.num_violated() as u32);
        }
    }

    let solved = state.num_violated() == 0;
    Ok(RunRecord {
        steps,
        solved,
        final_assignment: state.into_assignment(),
        violation_trace: trace,
        degenerate_picks: degenerate,
    })
}

/// Index drawn with probability proportional to `weights`, or `None` if they
/// sum to zero.
fn pick_weighted(weights: &[f64], rng: &mut RngStream) -> Option<usize> {
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return None;
    }
    let mut r = rng.unit() * total;
    let mut last = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            if r < w {
                return Some(i);
            }
            r -= w;
            last = i;
        }
    }
    // rounding left r marginally above the final cumulative weight
    Some(last)
}
