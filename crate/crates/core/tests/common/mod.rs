//! Exhaustive reference computations over all 2^n assignments, and seeded
//! random inputs for comparing them against the library.

#![allow(dead_code)]

use oraclesat::{Assignment, Clause, Formula, Literal, ProductOracle, RngStream};

/// Bits of `mask` as an assignment, variable `i` at bit `i`.
pub fn bits_of(n: usize, mask: u64) -> Vec<bool> {
    (0..n).map(|i| (mask >> i) & 1 == 1).collect()
}

pub fn literal_true(lit: &Literal, x: &[bool]) -> bool {
    x[lit.var()] != lit.is_negated()
}

pub fn clause_false(c: &Clause, x: &[bool]) -> bool {
    c.literals().iter().all(|l| !literal_true(l, x))
}

pub fn violated_count(f: &Formula, x: &[bool]) -> usize {
    f.clauses().iter().filter(|c| clause_false(c, x)).count()
}

/// P(x) as an explicit product over the oracle weights.
pub fn prob_of(w: &[f64], x: &[bool]) -> f64 {
    w.iter()
        .zip(x)
        .map(|(&p, &b)| if b { p } else { 1.0 - p })
        .product()
}

/// Full probability table indexed by mask.
pub fn prob_table(w: &[f64]) -> Vec<f64> {
    let n = w.len();
    (0..1u64 << n).map(|m| prob_of(w, &bits_of(n, m))).collect()
}

/// Sum of P over all assignments where `event` holds.
pub fn prob_where(w: &[f64], event: impl Fn(&[bool]) -> bool) -> f64 {
    let n = w.len();
    let mut total = 0.0;
    for m in 0..1u64 << n {
        let x = bits_of(n, m);
        if event(&x) {
            total += prob_of(w, &x);
        }
    }
    total
}

/// Cross entropy of the oracle against the Gibbs weights of `samples`,
/// computed directly from the probability table.
pub fn gibbs_reference(w: &[f64], f: &Formula, samples: &[Vec<bool>], beta: f64) -> f64 {
    let table = prob_table(w);
    let energies: Vec<f64> = samples.iter().map(|x| violated_count(f, x) as f64).collect();
    let unnorm: Vec<f64> = energies.iter().map(|e| (-beta * e).exp()).collect();
    let z: f64 = unnorm.iter().sum();
    samples
        .iter()
        .zip(&unnorm)
        .map(|(x, u)| {
            let mask = x
                .iter()
                .enumerate()
                .fold(0u64, |m, (i, &b)| m | ((b as u64) << i));
            -(u / z) * table[mask as usize].ln()
        })
        .sum()
}

pub fn random_formula(rng: &mut RngStream, n: usize, m: usize, max_k: usize) -> Formula {
    let mut clauses = Vec::with_capacity(m);
    for _ in 0..m {
        let k = 1 + rng.index(max_k.min(n));
        let mut vars: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = i + rng.index(n - i);
            vars.swap(i, j);
        }
        let lits = vars[..k].iter().map(|&v| Literal::new(v, rng.bernoulli(0.5)));
        clauses.push(Clause::new(lits).unwrap());
    }
    Formula::new(n, clauses).unwrap()
}

/// Weights spread over (0, 1) with some mass near the ends.
pub fn random_weights(rng: &mut RngStream, n: usize) -> Vec<f64> {
    (0..n)
        .map(|_| match rng.index(5) {
            0 => 1e-3 + 0.05 * rng.unit(),
            1 => 0.95 + 0.049 * rng.unit(),
            2 => 0.5,
            _ => 0.01 + 0.98 * rng.unit(),
        })
        .collect()
}

pub fn random_oracle(rng: &mut RngStream, n: usize) -> ProductOracle {
    ProductOracle::new(random_weights(rng, n), None).unwrap()
}

pub fn assignment(x: &[bool]) -> Assignment {
    Assignment::from_bits(x.to_vec())
}
