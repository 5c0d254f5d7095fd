//! Product-Bernoulli sampling oracles and the oracle file format.
//!
//! An oracle is `n` independent Bernoulli probabilities `w` (probability that
//! the variable is 1) plus an optional per-clause weight vector `mu`. The file
//! format is line-oriented UTF-8:
//!
//! ```text
//! ORACLE 1
//! n <n>
//! m <m>
//! w <i> <p_i>      (n lines, 1-based)
//! mu <j> <u_j>     (optional, m lines, 1-based)
//! ```
//!
//! Text after `#` is ignored.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use crate::cnf::Assignment;
use crate::error::{Error, ParseError, ParseErrorKind, Result};
use crate::rng::RngStream;

pub const ORACLE_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct ProductOracle {
    w: Vec<f64>,
    mu: Option<Vec<f64>>,
}

impl ProductOracle {
    pub fn new(w: Vec<f64>, mu: Option<Vec<f64>>) -> Result<Self> {
        if let Some(i) = w.iter().position(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidArgument(format!(
                "w[{}] = {} outside [0, 1]",
                i + 1,
                w[i]
            )));
        }
        if let Some(mu) = &mu {
            validate_mu(mu)?;
        }
        Ok(ProductOracle { w, mu })
    }

    /// The oracle with `w_i = 1/2` everywhere.
    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument(
                "uniform oracle needs at least one variable".into(),
            ));
        }
        Ok(ProductOracle {
            w: vec![0.5; n],
            mu: None,
        })
    }

    /// The deterministic oracle that always returns `x`.
    pub fn point_mass(x: &Assignment) -> Self {
        ProductOracle {
            w: x.bits().iter().map(|&b| if b { 1.0 } else { 0.0 }).collect(),
            mu: None,
        }
    }

    pub fn with_mu(mut self, mu: Vec<f64>) -> Result<Self> {
        validate_mu(&mu)?;
        self.mu = Some(mu);
        Ok(self)
    }

    pub fn without_mu(mut self) -> Self {
        self.mu = None;
        self
    }

    pub fn num_vars(&self) -> usize {
        self.w.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    #[inline]
    pub fn weight(&self, var: usize) -> f64 {
        self.w[var]
    }

    pub fn mu(&self) -> Option<&[f64]> {
        self.mu.as_deref()
    }

    /// Draws a full assignment, each bit independently Bernoulli(w_i).
    pub fn sample(&self, rng: &mut RngStream) -> Assignment {
        Assignment::from_bits(self.w.iter().map(|&p| rng.bernoulli(p)).collect())
    }

    #[inline]
    pub fn sample_var(&self, var: usize, rng: &mut RngStream) -> bool {
        rng.bernoulli(self.w[var])
    }

    /// Probability that the oracle assigns `var` the opposite of its current
    /// value in `x`.
    pub fn flip_marginal(&self, x: &Assignment, var: usize) -> Result<f64> {
        if var >= self.w.len() || var >= x.len() {
            return Err(Error::VariableOutOfRange {
                index: var,
                num_vars: self.w.len().min(x.len()),
            });
        }
        Ok(self.flip_marginal_unchecked(x.bits(), var))
    }

    #[inline]
    pub(crate) fn flip_marginal_unchecked(&self, x: &[bool], var: usize) -> f64 {
        if x[var] {
            1.0 - self.w[var]
        } else {
            self.w[var]
        }
    }

    /// Product measure P_O(x).
    pub fn probability(&self, x: &Assignment) -> f64 {
        self.w
            .iter()
            .zip(x.bits())
            .map(|(&p, &b)| if b { p } else { 1.0 - p })
            .product()
    }

    /// log P_O(x) as a sum of per-bit log terms; `-inf` if any bit has
    /// probability zero.
    pub fn log_probability(&self, x: &Assignment) -> f64 {
        self.w
            .iter()
            .zip(x.bits())
            .map(|(&p, &b)| if b { p.ln() } else { (-p).ln_1p() })
            .sum()
    }

    pub fn check_num_vars(&self, n: usize) -> Result<()> {
        if self.w.len() != n {
            return Err(Error::SizeMismatch {
                what: "oracle",
                expected: n,
                found: self.w.len(),
            });
        }
        Ok(())
    }
}

fn validate_mu(mu: &[f64]) -> Result<()> {
    match mu.iter().position(|u| !(u.is_finite() && *u >= 0.0)) {
        Some(index) => Err(Error::InvalidMu {
            index,
            value: mu[index],
        }),
        None => Ok(()),
    }
}

/// Serializes with 17 significant digits so every f64 round-trips exactly.
pub fn write_oracle(oracle: &ProductOracle) -> String {
    let m = oracle.mu.as_ref().map_or(0, Vec::len);
    let mut out = String::new();
    let _ = writeln!(out, "ORACLE {ORACLE_FORMAT_VERSION}");
    let _ = writeln!(out, "n {}", oracle.w.len());
    let _ = writeln!(out, "m {m}");
    for (i, p) in oracle.w.iter().enumerate() {
        let _ = writeln!(out, "w {} {:.16e}", i + 1, p);
    }
    if let Some(mu) = &oracle.mu {
        for (j, u) in mu.iter().enumerate() {
            let _ = writeln!(out, "mu {} {:.16e}", j + 1, u);
        }
    }
    out
}

pub fn parse_oracle<R: Read>(reader: R) -> Result<ProductOracle> {
    let mut lines = numbered_lines(reader)?.into_iter();
    let mut next = |what: &str| {
        lines
            .next()
            .ok_or_else(|| perr(0, ParseErrorKind::Header(format!("missing `{what}` line"))))
    };

    let (lineno, first) = next("ORACLE")?;
    match first.split_whitespace().collect::<Vec<_>>().as_slice() {
        ["ORACLE", v] if *v == ORACLE_FORMAT_VERSION.to_string() => {}
        ["ORACLE", v] => return Err(perr(lineno, ParseErrorKind::Version(v.to_string()))),
        _ => return Err(perr(lineno, ParseErrorKind::Header(first))),
    }
    let n = header_value(next("n")?, "n")?;
    let m = header_value(next("m")?, "m")?;

    let mut w: Vec<Option<f64>> = vec![None; n];
    let mut mu: Vec<Option<f64>> = vec![None; m];
    let mut mu_seen = 0usize;
    let mut w_seen = 0usize;
    for (lineno, line) in lines {
        let toks: Vec<&str> = line.split_whitespace().collect();
        let (key, idx, val) = match toks.as_slice() {
            [key, idx, val] => (*key, *idx, *val),
            _ => return Err(perr(lineno, ParseErrorKind::Token(line.clone()))),
        };
        let idx: usize = idx
            .parse()
            .map_err(|_| perr(lineno, ParseErrorKind::Token(idx.to_string())))?;
        let value: f64 = val
            .parse()
            .map_err(|_| perr(lineno, ParseErrorKind::Token(val.to_string())))?;
        let (slot, len) = match key {
            "w" => {
                if !(0.0..=1.0).contains(&value) {
                    return Err(perr(lineno, ParseErrorKind::Probability(val.to_string())));
                }
                w_seen += 1;
                (w.get_mut(idx.wrapping_sub(1)), n)
            }
            "mu" => {
                if !(value.is_finite() && value >= 0.0) {
                    return Err(perr(lineno, ParseErrorKind::Mu(val.to_string())));
                }
                mu_seen += 1;
                (mu.get_mut(idx.wrapping_sub(1)), m)
            }
            other => return Err(perr(lineno, ParseErrorKind::Token(other.to_string()))),
        };
        match slot {
            None => return Err(perr(lineno, ParseErrorKind::Index { index: idx, len })),
            Some(Some(_)) => return Err(perr(lineno, ParseErrorKind::DuplicateIndex(idx))),
            Some(s) => *s = Some(value),
        }
    }

    if w_seen != n {
        return Err(perr(
            0,
            ParseErrorKind::Length {
                expected: n,
                found: w_seen,
            },
        ));
    }
    let mu = match mu_seen {
        0 => None,
        k if k == m => Some(mu.into_iter().map(Option::unwrap).collect()),
        k => {
            return Err(perr(
                0,
                ParseErrorKind::Length {
                    expected: m,
                    found: k,
                },
            ))
        }
    };
    ProductOracle::new(w.into_iter().map(Option::unwrap).collect(), mu)
}

pub fn parse_oracle_str(text: &str) -> Result<ProductOracle> {
    parse_oracle(text.as_bytes())
}

pub fn read_oracle_file(path: impl AsRef<Path>) -> Result<ProductOracle> {
    parse_oracle(std::fs::File::open(path)?)
}

pub fn write_oracle_file(path: impl AsRef<Path>, oracle: &ProductOracle) -> Result<()> {
    std::fs::write(path, write_oracle(oracle))?;
    Ok(())
}

/// Non-blank lines with `#` comments stripped, paired with 1-based line numbers.
pub(crate) fn numbered_lines<R: Read>(reader: R) -> Result<Vec<(usize, String)>> {
    let mut out = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        let body = line.split('#').next().unwrap_or("").trim();
        if !body.is_empty() {
            out.push((i + 1, body.to_string()));
        }
    }
    Ok(out)
}

pub(crate) fn header_value((lineno, line): (usize, String), key: &str) -> Result<usize> {
    let toks: Vec<&str> = line.split_whitespace().collect();
    match toks.as_slice() {
        [k, v] if *k == key => v
            .parse()
            .map_err(|_| perr(lineno, ParseErrorKind::Header(line.clone()))),
        _ => Err(perr(lineno, ParseErrorKind::Header(line.clone()))),
    }
}

pub(crate) fn perr(line: usize, kind: ParseErrorKind) -> Error {
    Error::Parse(ParseError::new(line, kind))
}
