//! Random k-SAT instance generation and batch manifests.

use std::fmt;
use std::io::Write as _;
use std::path::Path;
use std::str::FromStr;

use rand::seq::{index, SliceRandom};
use serde::{Deserialize, Serialize};

use crate::cnf::{Clause, Formula, Literal};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, RngStream};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClauseCount {
    /// m = round(alpha * n)
    Ratio(f64),
    Exact(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenSpec {
    pub n: usize,
    pub k: usize,
    pub clauses: ClauseCount,
    pub max_occurrence: Option<usize>,
    pub seed: u64,
}

impl GenSpec {
    pub fn with_ratio(n: usize, k: usize, alpha: f64, seed: u64) -> Self {
        GenSpec {
            n,
            k,
            clauses: ClauseCount::Ratio(alpha),
            max_occurrence: None,
            seed,
        }
    }

    pub fn with_clauses(n: usize, k: usize, m: usize, seed: u64) -> Self {
        GenSpec {
            n,
            k,
            clauses: ClauseCount::Exact(m),
            max_occurrence: None,
            seed,
        }
    }

    pub fn max_occurrence(mut self, cap: usize) -> Self {
        self.max_occurrence = Some(cap);
        self
    }

    pub fn num_clauses(&self) -> usize {
        match self.clauses {
            ClauseCount::Ratio(a) => (a * self.n as f64).round().max(0.0) as usize,
            ClauseCount::Exact(m) => m,
        }
    }

    /// Nominal ratio: the requested alpha, or m/n for an explicit count.
    pub fn alpha(&self) -> f64 {
        match self.clauses {
            ClauseCount::Ratio(a) => a,
            ClauseCount::Exact(m) => m as f64 / self.n as f64,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.n == 0 {
            return bad("n must be at least 1".into());
        }
        if self.k == 0 || self.k > self.n {
            return bad(format!("k = {} must be in 1..={}", self.k, self.n));
        }
        if let ClauseCount::Ratio(a) = self.clauses {
            if !(a.is_finite() && a > 0.0) {
                return bad(format!("alpha = {a} must be positive"));
            }
        }
        let m = self.num_clauses();
        if m == 0 {
            return bad("spec yields zero clauses".into());
        }
        if let Some(cap) = self.max_occurrence {
            if self.k * m > self.n * cap {
                return bad(format!(
                    "infeasible degree bound: k*m = {} exceeds n*max_occurrence = {}",
                    self.k * m,
                    self.n * cap
                ));
            }
        }
        Ok(())
    }

    /// Spec for instance `index` of a batch: same shape, derived seed.
    pub fn for_instance(&self, index: u64) -> Self {
        GenSpec {
            seed: derive_seed(self.seed, "gen", index),
            ..self.clone()
        }
    }
}

/// Dispatches on `spec.max_occurrence`.
pub fn generate(spec: &GenSpec) -> Result<Formula> {
    match spec.max_occurrence {
        Some(_) => gen_degree_bounded_ksat(spec),
        None => gen_uniform_ksat(spec),
    }
}

/// Standard random k-SAT: each clause has `k` distinct variables drawn
/// uniformly, each negated with probability 1/2. Repeated clauses allowed.
pub fn gen_uniform_ksat(spec: &GenSpec) -> Result<Formula> {
    spec.validate()?;
    let mut rng = RngStream::new(spec.seed);
    let m = spec.num_clauses();
    let mut clauses = Vec::with_capacity(m);
    for _ in 0..m {
        let vars = index::sample(rng.inner_mut(), spec.n, spec.k);
        let lits: Vec<Literal> = vars
            .iter()
            .map(|v| Literal::new(v, rng.bernoulli(0.5)))
            .collect();
        clauses.push(Clause::new(lits).expect("distinct variables"));
    }
    Formula::new(spec.n, clauses)
}

/// Random k-SAT in which every variable occurs in at most
/// `spec.max_occurrence` clauses.
///
/// Each variable contributes `max_occurrence` slots; the shuffled slots are
/// cut into clauses of width `k` and the leftovers form a spare pool. A clause
/// that received the same variable twice is repaired by swapping the repeat
/// with a random slot elsewhere, rejecting swaps that would put a repeat into
/// an already repaired clause. Occurrence counts never change under swaps.
pub fn gen_degree_bounded_ksat(spec: &GenSpec) -> Result<Formula> {
    spec.validate()?;
    let cap = spec
        .max_occurrence
        .ok_or_else(|| Error::InvalidArgument("max_occurrence not set".into()))?;
    let (n, k, m) = (spec.n, spec.k, spec.num_clauses());
    let mut rng = RngStream::new(spec.seed);
    let mut slots: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, cap)).collect();
    slots.shuffle(rng.inner_mut());

    let used = k * m;
    let total = slots.len();
    let max_attempts = 1000 * total;
    for t in 0..m {
        let base = t * k;
        for p in base..base + k {
            if !slots[base..p].contains(&slots[p]) {
                continue;
            }
            let mut attempts = 0;
            loop {
                attempts += 1;
                if attempts > max_attempts {
                    return Err(Error::InvalidArgument(format!(
                        "could not place clause {} under occurrence bound {cap}",
                        t + 1
                    )));
                }
                let q = rng.index(total);
                if (base..base + k).contains(&q) {
                    continue;
                }
                let incoming = slots[q];
                let outgoing = slots[p];
                let clash_here = (base..base + k).any(|i| i != p && slots[i] == incoming);
                if clash_here {
                    continue;
                }
                if q < used {
                    let other = q / k * k;
                    let clash_there = (other..other + k).any(|i| i != q && slots[i] == outgoing);
                    if clash_there && other < base {
                        continue;
                    }
                }
                slots.swap(p, q);
                break;
            }
        }
    }

    let clauses = slots[..used]
        .chunks(k)
        .map(|vars| {
            let lits: Vec<Literal> = vars
                .iter()
                .map(|&v| Literal::new(v, rng.bernoulli(0.5)))
                .collect();
            Clause::new(lits).expect("repaired clause has distinct variables")
        })
        .collect();
    Formula::new(n, clauses)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SatStatus {
    #[serde(rename = "SAT")]
    Sat,
    #[serde(rename = "UNSAT")]
    Unsat,
    #[serde(rename = "UNKNOWN")]
    Unknown,
}

impl fmt::Display for SatStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SatStatus::Sat => "SAT",
            SatStatus::Unsat => "UNSAT",
            SatStatus::Unknown => "UNKNOWN",
        })
    }
}

impl FromStr for SatStatus {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "SAT" => Ok(SatStatus::Sat),
            "UNSAT" => Ok(SatStatus::Unsat),
            "UNKNOWN" | "" => Ok(SatStatus::Unknown),
            _ => Err(Error::InvalidArgument(format!("unknown sat status `{s}`"))),
        }
    }
}

/// One row of a batch manifest. Instance files live next to the manifest as
/// `<instance_id>.cnf`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRow {
    pub instance_id: String,
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub alpha: f64,
    pub seed: u64,
    pub sat_status: SatStatus,
}

impl ManifestRow {
    pub fn new(instance_id: impl Into<String>, spec: &GenSpec, formula: &Formula) -> Self {
        ManifestRow {
            instance_id: instance_id.into(),
            n: formula.num_vars(),
            m: formula.num_clauses(),
            k: spec.k,
            alpha: formula.alpha(),
            seed: spec.seed,
            sat_status: SatStatus::Unknown,
        }
    }
}

pub fn instance_file_name(instance_id: &str) -> String {
    format!("{instance_id}.cnf")
}

pub fn write_manifest(path: impl AsRef<Path>, rows: &[ManifestRow]) -> Result<()> {
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        for row in rows {
            w.serialize(row)?;
        }
        w.flush()?;
    }
    if rows.is_empty() {
        buf = b"instance_id,n,m,k,alpha,seed,sat_status\n".to_vec();
    }
    write_atomic(path.as_ref(), &buf)
}

pub fn read_manifest(path: impl AsRef<Path>) -> Result<Vec<ManifestRow>> {
    let mut r = csv::Reader::from_path(path)?;
    let rows = r.deserialize().collect::<Result<Vec<ManifestRow>, _>>()?;
    Ok(rows)
}

/// Writes `bytes` to a temporary sibling and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let dir = dir.unwrap_or_else(|| Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| Error::InvalidArgument(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp", name.to_string_lossy()));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}
