//! CNF data model: literals, canonical clauses, formulas with occurrence
//! lists, and truth assignments.
//!
//! Variables are 0-based everywhere inside the crate. The DIMACS helpers
//! ([`Literal::from_dimacs`], [`Literal::to_dimacs`]) are the only place the
//! 1-based external numbering appears.

use std::fmt;

use crate::error::{Error, ParseErrorKind, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    var: u32,
    negated: bool,
}

impl Literal {
    pub fn new(var: usize, negated: bool) -> Self {
        Literal {
            var: var as u32,
            negated,
        }
    }

    pub fn positive(var: usize) -> Self {
        Self::new(var, false)
    }

    pub fn negative(var: usize) -> Self {
        Self::new(var, true)
    }

    /// Converts a nonzero signed DIMACS literal. Returns `None` for 0.
    pub fn from_dimacs(lit: i64) -> Option<Self> {
        if lit == 0 {
            return None;
        }
        Some(Self::new((lit.unsigned_abs() - 1) as usize, lit < 0))
    }

    pub fn to_dimacs(self) -> i64 {
        let v = self.var as i64 + 1;
        if self.negated {
            -v
        } else {
            v
        }
    }

    #[inline]
    pub fn var(self) -> usize {
        self.var as usize
    }

    #[inline]
    pub fn is_negated(self) -> bool {
        self.negated
    }

    /// Value of the literal under `x`.
    #[inline]
    pub fn eval(self, x: &[bool]) -> bool {
        x[self.var as usize] != self.negated
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

/// A nonempty disjunction in which every variable occurs at most once.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Clause {
    literals: Vec<Literal>,
}

impl Clause {
    /// Canonicalizes `literals`: repeated same-sign literals are dropped
    /// (first occurrence wins), a variable with both signs is rejected, and
    /// so is an empty clause.
    pub fn new(literals: impl IntoIterator<Item = Literal>) -> Result<Self, ParseErrorKind> {
        let mut out: Vec<Literal> = Vec::new();
        for lit in literals {
            match out.iter().find(|l| l.var == lit.var) {
                Some(l) if l.negated == lit.negated => {}
                Some(_) => return Err(ParseErrorKind::Tautology(lit.var() + 1)),
                None => out.push(lit),
            }
        }
        if out.is_empty() {
            return Err(ParseErrorKind::EmptyClause);
        }
        Ok(Clause { literals: out })
    }

    pub fn from_dimacs(lits: &[i64]) -> Result<Self, ParseErrorKind> {
        if let Some(&bad) = lits.iter().find(|&&l| l == 0) {
            return Err(ParseErrorKind::Token(bad.to_string()));
        }
        Self::new(lits.iter().filter_map(|&l| Literal::from_dimacs(l)))
    }

    pub fn literals(&self) -> &[Literal] {
        &self.literals
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    /// Variables of the clause, V(c).
    pub fn vars(&self) -> impl Iterator<Item = usize> + '_ {
        self.literals.iter().map(|l| l.var())
    }

    /// Variables occurring unnegated, V+(c).
    pub fn positive_vars(&self) -> impl Iterator<Item = usize> + '_ {
        self.literals
            .iter()
            .filter(|l| !l.negated)
            .map(|l| l.var())
    }

    /// Variables occurring negated, V-(c).
    pub fn negative_vars(&self) -> impl Iterator<Item = usize> + '_ {
        self.literals
            .iter()
            .filter(|l| l.negated)
            .map(|l| l.var())
    }

    pub fn max_var(&self) -> usize {
        self.vars().max().unwrap_or(0)
    }

    /// True iff every literal is false under `x`.
    #[inline]
    pub fn is_violated(&self, x: &[bool]) -> bool {
        self.literals.iter().all(|l| !l.eval(x))
    }
}

/// Returns 1 if `clause` is violated by `x`, 0 otherwise.
#[inline]
pub fn clause_violated(clause: &Clause, x: &Assignment) -> u32 {
    clause.is_violated(x.bits()) as u32
}

/// An immutable CNF formula with per-variable occurrence lists.
#[derive(Debug, Clone)]
pub struct Formula {
    num_vars: usize,
    clauses: Vec<Clause>,
    pos_occ: Vec<Vec<u32>>,
    neg_occ: Vec<Vec<u32>>,
}

impl PartialEq for Formula {
    fn eq(&self, other: &Self) -> bool {
        self.num_vars == other.num_vars && self.clauses == other.clauses
    }
}

impl Eq for Formula {}

impl Formula {
    pub fn new(num_vars: usize, clauses: Vec<Clause>) -> Result<Self> {
        let mut pos_occ = vec![Vec::new(); num_vars];
        let mut neg_occ = vec![Vec::new(); num_vars];
        for (j, c) in clauses.iter().enumerate() {
            for lit in c.literals() {
                if lit.var() >= num_vars {
                    return Err(Error::VariableOutOfRange {
                        index: lit.var(),
                        num_vars,
                    });
                }
                if lit.is_negated() {
                    neg_occ[lit.var()].push(j as u32);
                } else {
                    pos_occ[lit.var()].push(j as u32);
                }
            }
        }
        Ok(Formula {
            num_vars,
            clauses,
            pos_occ,
            neg_occ,
        })
    }

    /// Builds a formula from signed 1-based literal lists, e.g.
    /// `&[&[1, -2], &[2, 3]]`.
    pub fn from_dimacs_clauses(num_vars: usize, clauses: &[&[i64]]) -> Result<Self> {
        let clauses = clauses
            .iter()
            .enumerate()
            .map(|(j, lits)| {
                Clause::from_dimacs(lits).map_err(|kind| crate::error::ParseError::new(j + 1, kind))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(num_vars, clauses)
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    /// Clause-to-variable ratio m/n.
    pub fn alpha(&self) -> f64 {
        self.clauses.len() as f64 / self.num_vars as f64
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn clause(&self, j: usize) -> &Clause {
        &self.clauses[j]
    }

    /// Clauses containing `var` unnegated.
    pub fn positive_occurrences(&self, var: usize) -> &[u32] {
        &self.pos_occ[var]
    }

    /// Clauses containing `var` negated.
    pub fn negative_occurrences(&self, var: usize) -> &[u32] {
        &self.neg_occ[var]
    }

    pub fn occurrence_count(&self, var: usize) -> usize {
        self.pos_occ[var].len() + self.neg_occ[var].len()
    }

    /// Number of violated clauses, φ(x).
    pub fn count_violated(&self, x: &Assignment) -> Result<usize> {
        self.check_len(x)?;
        Ok(self.count_violated_unchecked(x.bits()))
    }

    pub(crate) fn count_violated_unchecked(&self, x: &[bool]) -> usize {
        self.clauses.iter().filter(|c| c.is_violated(x)).count()
    }

    pub fn is_satisfied_by(&self, x: &Assignment) -> bool {
        x.len() == self.num_vars && self.count_violated_unchecked(x.bits()) == 0
    }

    pub(crate) fn check_len(&self, x: &Assignment) -> Result<()> {
        if x.len() != self.num_vars {
            return Err(Error::SizeMismatch {
                what: "assignment",
                expected: self.num_vars,
                found: x.len(),
            });
        }
        Ok(())
    }
}

/// A full truth assignment x in {0,1}^n.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment(Vec<bool>);

impl Assignment {
    pub fn zeros(n: usize) -> Self {
        Assignment(vec![false; n])
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        Assignment(bits)
    }

    /// Bit `i` of `mask` becomes variable `i`. Requires `n <= 64`.
    pub fn from_mask(n: usize, mask: u64) -> Self {
        debug_assert!(n <= 64);
        Assignment((0..n).map(|i| mask >> i & 1 == 1).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    #[inline]
    pub fn get(&self, var: usize) -> bool {
        self.0[var]
    }

    #[inline]
    pub fn set(&mut self, var: usize, value: bool) {
        self.0[var] = value;
    }

    #[inline]
    pub fn flip(&mut self, var: usize) {
        self.0[var] = !self.0[var];
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn into_bits(self) -> Vec<bool> {
        self.0
    }

    /// The `0`/`1` string form used by samples files.
    pub fn to_bit_string(&self) -> String {
        self.0.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }

    pub fn from_bit_string(s: &str) -> Option<Self> {
        s.chars()
            .map(|ch| match ch {
                '0' => Some(false),
                '1' => Some(true),
                _ => None,
            })
            .collect::<Option<Vec<_>>>()
            .map(Assignment)
    }
}

impl From<Vec<bool>> for Assignment {
    fn from(bits: Vec<bool>) -> Self {
        Assignment(bits)
    }
}
