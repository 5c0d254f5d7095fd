mod common;

use common::*;
use oraclesat::{min_violation_set, solve_exact, ExactOutcome, RngStream, Status};

#[test]
fn dpll_agrees_with_enumeration() {
    let mut rng = RngStream::new(31);
    let (mut sat, mut unsat) = (0, 0);
    for _ in 0..500 {
        let n = 1 + rng.index(12);
        // Ratios around the 3-SAT threshold give a mix of both answers.
        let m = 1 + rng.index(6 * n);
        let f = random_formula(&mut rng, n, m, 3);
        let any = (0..1u64 << n).any(|mask| violated_count(&f, &bits_of(n, mask)) == 0);
        match solve_exact(&f, u64::MAX).unwrap() {
            ExactOutcome::Solved(r) => {
                assert_eq!(r.status == Status::Sat, any);
                if let Some(w) = &r.witness {
                    assert_eq!(violated_count(&f, w.bits()), 0);
                    sat += 1;
                } else {
                    assert_eq!(r.status, Status::Unsat);
                    unsat += 1;
                }
            }
            ExactOutcome::BudgetExceeded { .. } => unreachable!(),
        }
    }
    assert!(sat > 50 && unsat > 50, "sat {sat} unsat {unsat}");
}

#[test]
fn dpll_on_larger_random_3sat_matches_enumeration() {
    let mut rng = RngStream::new(32);
    for _ in 0..20 {
        let n = 16 + rng.index(5);
        let f = oraclesat::gen_uniform_ksat(&oraclesat::GenSpec::with_ratio(n, 3, 4.3, rng.next_u64())).unwrap();
        let any = (0..1u64 << n).any(|mask| violated_count(&f, &bits_of(n, mask)) == 0);
        assert_eq!(solve_exact(&f, u64::MAX).unwrap().is_sat(), any);
    }
}

#[test]
fn min_violation_set_matches_enumeration() {
    let mut rng = RngStream::new(33);
    for _ in 0..100 {
        let n = 1 + rng.index(10);
        let m = 1 + rng.index(8 * n);
        let f = random_formula(&mut rng, n, m, 3);
        let counts: Vec<usize> = (0..1u64 << n).map(|mask| violated_count(&f, &bits_of(n, mask))).collect();
        let best = *counts.iter().min().unwrap();
        let mut want: Vec<Vec<bool>> = (0..1u64 << n)
            .filter(|&mask| counts[mask as usize] == best)
            .map(|mask| bits_of(n, mask))
            .collect();
        let (got_best, got) = min_violation_set(&f).unwrap();
        let mut got: Vec<Vec<bool>> = got.into_iter().map(|a| a.into_bits()).collect();
        want.sort();
        got.sort();
        assert_eq!(got_best, best);
        assert_eq!(got, want);
    }
}
