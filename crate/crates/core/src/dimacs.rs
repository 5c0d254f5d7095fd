//! DIMACS CNF reading and writing.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use crate::cnf::{Clause, Formula, Literal};
use crate::error::{Error, ParseError, ParseErrorKind, Result};

/// Parses a DIMACS CNF stream.
///
/// Comment lines (`c ...`) are skipped, a `%` line ends the clause section
/// (SATLIB convention), and clauses may span several lines.
pub fn parse_dimacs<R: Read>(reader: R) -> Result<Formula> {
    let reader = BufReader::new(reader);
    let mut header: Option<(usize, usize)> = None;
    let mut clauses: Vec<Clause> = Vec::new();
    let mut current: Vec<Literal> = Vec::new();
    let mut last_line = 0;

    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        last_line = lineno;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('c') {
            continue;
        }
        if trimmed.starts_with('%') {
            break;
        }
        if trimmed.starts_with('p') {
            if header.is_some() {
                return Err(err(lineno, ParseErrorKind::Header("duplicate header".into())));
            }
            header = Some(parse_header(trimmed).map_err(|k| err(lineno, k))?);
            continue;
        }
        let (num_vars, _) = header
            .ok_or_else(|| err(lineno, ParseErrorKind::Header("clause before header".into())))?;
        for tok in trimmed.split_whitespace() {
            let lit: i64 = tok
                .parse()
                .map_err(|_| err(lineno, ParseErrorKind::Token(tok.to_string())))?;
            match Literal::from_dimacs(lit) {
                None => {
                    let clause = Clause::new(current.drain(..)).map_err(|k| err(lineno, k))?;
                    clauses.push(clause);
                }
                Some(l) => {
                    if l.var() >= num_vars {
                        return Err(err(
                            lineno,
                            ParseErrorKind::LiteralOutOfRange {
                                literal: lit,
                                num_vars,
                            },
                        ));
                    }
                    current.push(l);
                }
            }
        }
    }

    let (num_vars, declared) =
        header.ok_or_else(|| err(last_line, ParseErrorKind::Header("no `p cnf` line".into())))?;
    if !current.is_empty() {
        return Err(err(last_line, ParseErrorKind::UnterminatedClause));
    }
    if clauses.len() != declared {
        return Err(err(
            last_line,
            ParseErrorKind::ClauseCount {
                declared,
                found: clauses.len(),
            },
        ));
    }
    Formula::new(num_vars, clauses)
}

pub fn parse_dimacs_str(text: &str) -> Result<Formula> {
    parse_dimacs(text.as_bytes())
}

pub fn read_dimacs_file(path: impl AsRef<Path>) -> Result<Formula> {
    let file = std::fs::File::open(path)?;
    parse_dimacs(file)
}

fn parse_header(line: &str) -> Result<(usize, usize), ParseErrorKind> {
    let toks: Vec<&str> = line.split_whitespace().collect();
    match toks.as_slice() {
        ["p", "cnf", n, m] => {
            let n = n
                .parse()
                .map_err(|_| ParseErrorKind::Header(line.to_string()))?;
            let m = m
                .parse()
                .map_err(|_| ParseErrorKind::Header(line.to_string()))?;
            Ok((n, m))
        }
        _ => Err(ParseErrorKind::Header(line.to_string())),
    }
}

fn err(line: usize, kind: ParseErrorKind) -> Error {
    Error::Parse(ParseError::new(line, kind))
}

/// Serializes `formula` as DIMACS CNF, one clause per line.
pub fn write_dimacs(formula: &Formula) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "p cnf {} {}", formula.num_vars(), formula.num_clauses());
    for clause in formula.clauses() {
        for lit in clause.literals() {
            let _ = write!(out, "{} ", lit.to_dimacs());
        }
        out.push_str("0\n");
    }
    out
}
