//! Complete solving for desk-scale instances: DPLL with unit propagation,
//! pure-literal elimination and most-occurrences branching, plus exhaustive
//! minimum-violation search for tiny formulas.

use serde::Serialize;

use crate::cnf::{Assignment, Formula};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Status {
    #[serde(rename = "SAT")]
    Sat,
    #[serde(rename = "UNSAT")]
    Unsat,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactResult {
    pub status: Status,
    /// Present iff `status == Sat`; always satisfies the formula.
    pub witness: Option<Assignment>,
    pub decisions: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExactOutcome {
    Solved(ExactResult),
    /// The decision budget ran out. Says nothing about satisfiability.
    BudgetExceeded { decisions: u64 },
}

impl ExactOutcome {
    pub fn result(&self) -> Option<&ExactResult> {
        match self {
            ExactOutcome::Solved(r) => Some(r),
            ExactOutcome::BudgetExceeded { .. } => None,
        }
    }

    pub fn is_sat(&self) -> bool {
        matches!(self, ExactOutcome::Solved(ExactResult { status: Status::Sat, .. }))
    }

    pub fn is_unsat(&self) -> bool {
        matches!(self, ExactOutcome::Solved(ExactResult { status: Status::Unsat, .. }))
    }
}

/// Decides `formula` with at most `budget` branching decisions.
pub fn solve_exact(formula: &Formula, budget: u64) -> Result<ExactOutcome> {
    let mut dpll = Dpll::new(formula, budget);
    let outcome = match dpll.search() {
        Search::Sat => {
            let bits = dpll.value.iter().map(|&v| v == TRUE).collect();
            let witness = Assignment::from_bits(bits);
            if formula.count_violated(&witness)? != 0 {
                return Err(Error::InvalidArgument(
                    "internal error: DPLL produced an invalid witness".into(),
                ));
            }
            ExactOutcome::Solved(ExactResult {
                status: Status::Sat,
                witness: Some(witness),
                decisions: dpll.decisions,
            })
        }
        Search::Unsat => ExactOutcome::Solved(ExactResult {
            status: Status::Unsat,
            witness: None,
            decisions: dpll.decisions,
        }),
        Search::Budget => ExactOutcome::BudgetExceeded {
            decisions: dpll.decisions,
        },
    };
    Ok(outcome)
}

const UNASSIGNED: i8 = -1;
const FALSE: i8 = 0;
const TRUE: i8 = 1;

enum Search {
    Sat,
    Unsat,
    Budget,
}

struct Dpll<'a> {
    formula: &'a Formula,
    value: Vec<i8>,
    sat_count: Vec<u32>,
    free_count: Vec<u32>,
    trail: Vec<usize>,
    pending: Vec<u32>,
    decisions: u64,
    budget: u64,
    pos_count: Vec<u32>,
    neg_count: Vec<u32>,
}

impl<'a> Dpll<'a> {
    fn new(formula: &'a Formula, budget: u64) -> Self {
        let n = formula.num_vars();
        Dpll {
            formula,
            value: vec![UNASSIGNED; n],
            sat_count: vec![0; formula.num_clauses()],
            free_count: formula.clauses().iter().map(|c| c.len() as u32).collect(),
            trail: Vec::new(),
            pending: (0..formula.num_clauses() as u32).collect(),
            decisions: 0,
            budget,
            pos_count: vec![0; n],
            neg_count: vec![0; n],
        }
    }

    fn assign(&mut self, var: usize, value: bool) {
        debug_assert_eq!(self.value[var], UNASSIGNED);
        self.value[var] = if value { TRUE } else { FALSE };
        self.trail.push(var);
        let f = self.formula;
        let (sat, unsat) = if value {
            (f.positive_occurrences(var), f.negative_occurrences(var))
        } else {
            (f.negative_occurrences(var), f.positive_occurrences(var))
        };
        for &j in sat {
            self.sat_count[j as usize] += 1;
            self.free_count[j as usize] -= 1;
        }
        for &j in unsat {
            self.free_count[j as usize] -= 1;
            self.pending.push(j);
        }
    }

    fn undo_to(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let var = self.trail.pop().unwrap();
            let value = self.value[var] == TRUE;
            self.value[var] = UNASSIGNED;
            let f = self.formula;
            let (sat, unsat) = if value {
                (f.positive_occurrences(var), f.negative_occurrences(var))
            } else {
                (f.negative_occurrences(var), f.positive_occurrences(var))
            };
            for &j in sat {
                self.sat_count[j as usize] -= 1;
                self.free_count[j as usize] += 1;
            }
            for &j in unsat {
                self.free_count[j as usize] += 1;
            }
        }
    }

    /// Unit propagation over the pending clauses. False on conflict.
    fn propagate(&mut self) -> bool {
        while let Some(j) = self.pending.pop() {
            let j = j as usize;
            if self.sat_count[j] > 0 {
                continue;
            }
            match self.free_count[j] {
                0 => {
                    self.pending.clear();
                    return false;
                }
                1 => {
                    let lit = *self
                        .formula
                        .clause(j)
                        .literals()
                        .iter()
                        .find(|l| self.value[l.var()] == UNASSIGNED)
                        .expect("one free literal");
                    self.assign(lit.var(), !lit.is_negated());
                }
                _ => {}
            }
        }
        true
    }

    /// Counts free literal occurrences in unsatisfied clauses. Returns false
    /// if no clause is left unsatisfied.
    fn count_active(&mut self) -> bool {
        self.pos_count.iter_mut().for_each(|c| *c = 0);
        self.neg_count.iter_mut().for_each(|c| *c = 0);
        let mut any = false;
        for (j, clause) in self.formula.clauses().iter().enumerate() {
            if self.sat_count[j] > 0 {
                continue;
            }
            any = true;
            for l in clause.literals() {
                if self.value[l.var()] == UNASSIGNED {
                    if l.is_negated() {
                        self.neg_count[l.var()] += 1;
                    } else {
                        self.pos_count[l.var()] += 1;
                    }
                }
            }
        }
        any
    }

    fn search(&mut self) -> Search {
        let mark = self.trail.len();
        if !self.propagate() {
            self.undo_to(mark);
            return Search::Unsat;
        }
        // pure literals never create conflicts or units, so one pass suffices
        // per round; repeat until none remain
        loop {
            if !self.count_active() {
                return Search::Sat;
            }
            let mut assigned_pure = false;
            for v in 0..self.value.len() {
                if self.value[v] != UNASSIGNED {
                    continue;
                }
                let (p, n) = (self.pos_count[v], self.neg_count[v]);
                if (p > 0) != (n > 0) {
                    self.assign(v, p > 0);
                    assigned_pure = true;
                }
            }
            self.pending.clear();
            if !assigned_pure {
                break;
            }
        }

        let (var, polarity) = (0..self.value.len())
            .filter(|&v| self.value[v] == UNASSIGNED)
            .map(|v| (v, self.pos_count[v] + self.neg_count[v], self.pos_count[v] >= self.neg_count[v]))
            .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
            .map(|(v, _, pol)| (v, pol))
            .expect("an unsatisfied clause has a free variable");

        for value in [polarity, !polarity] {
            if self.decisions >= self.budget {
                self.undo_to(mark);
                return Search::Budget;
            }
            self.decisions += 1;
            let branch = self.trail.len();
            self.assign(var, value);
            match self.search() {
                Search::Sat => return Search::Sat,
                Search::Budget => {
                    self.undo_to(mark);
                    return Search::Budget;
                }
                Search::Unsat => self.undo_to(branch),
            }
        }
        self.undo_to(mark);
        Search::Unsat
    }
}

/// Largest `n` accepted by [`min_violation_set`].
pub const MAX_EXHAUSTIVE_VARS: usize = 20;

/// Minimum number of violated clauses over all 2^n assignments and every
/// assignment attaining it, in increasing bit-mask order.
pub fn min_violation_set(formula: &Formula) -> Result<(usize, Vec<Assignment>)> {
    let n = formula.num_vars();
    if n > MAX_EXHAUSTIVE_VARS {
        return Err(Error::TooManyVariables(n));
    }
    let masks: Vec<(u32, u32)> = formula
        .clauses()
        .iter()
        .map(|c| {
            let pos = c.positive_vars().fold(0u32, |m, v| m | 1 << v);
            let neg = c.negative_vars().fold(0u32, |m, v| m | 1 << v);
            (pos, neg)
        })
        .collect();
    let mut best = usize::MAX;
    let mut argmin: Vec<u32> = Vec::new();
    for x in 0..(1u32 << n) {
        let count = masks
            .iter()
            .filter(|&&(pos, neg)| x & pos == 0 && x & neg == neg)
            .count();
        if count < best {
            best = count;
            argmin.clear();
        }
        if count == best {
            argmin.push(x);
        }
    }
    let set = argmin
        .into_iter()
        .map(|x| Assignment::from_mask(n, x as u64))
        .collect();
    Ok((best, set))
}
