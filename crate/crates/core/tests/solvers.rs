mod common;

use common::*;
use oraclesat::{
    gen_uniform_ksat, run_mt, run_variant, run_walksat, solve_exact, GenSpec, Mode, ProductOracle,
    RngStream, RunConfig, Variant,
};

fn witness_oracle(w: &oraclesat::Assignment) -> ProductOracle {
    ProductOracle::new(w.bits().iter().map(|&b| if b { 1.0 } else { 0.0 }).collect(), None).unwrap()
}

#[test]
fn perfect_oracle_solves_without_steps() {
    let mut rng = RngStream::new(41);
    let mut done = 0;
    while done < 30 {
        let n = 5 + rng.index(15);
        let f = gen_uniform_ksat(&GenSpec::with_ratio(n, 3, 3.0, rng.next_u64())).unwrap();
        let Some(res) = solve_exact(&f, u64::MAX).unwrap().result().cloned() else { continue };
        let Some(w) = res.witness else { continue };
        let o = witness_oracle(&w);
        for variant in [Variant::MoserTardos, Variant::WalkSat] {
            for mode in [Mode::Hybrid, Mode::Boosted] {
                let cfg = RunConfig::new(variant, mode);
                let rec = run_variant(&f, Some(&o), &cfg, &mut RngStream::new(done)).unwrap();
                assert!(rec.solved);
                assert_eq!(rec.steps, 0);
                assert_eq!(rec.final_assignment, w);
            }
        }
        done += 1;
    }
}

#[test]
fn solved_runs_end_in_satisfying_assignments() {
    let mut rng = RngStream::new(42);
    for i in 0..40u64 {
        let n = 20 + rng.index(30);
        let f = gen_uniform_ksat(&GenSpec::with_ratio(n, 3, 2.0, rng.next_u64())).unwrap();
        let o = random_oracle(&mut rng, n);
        for variant in [Variant::MoserTardos, Variant::WalkSat] {
            for mode in [Mode::Uniform, Mode::Hybrid, Mode::Boosted] {
                let cfg = RunConfig::new(variant, mode).max_steps(200_000).trace(true);
                let rec = run_variant(&f, Some(&o), &cfg, &mut RngStream::new(i)).unwrap();
                let trace = rec.violation_trace.as_ref().unwrap();
                assert_eq!(trace.len() as u64, rec.steps + 1);
                assert_eq!(*trace.last().unwrap() as usize, violated_count(&f, rec.final_assignment.bits()));
                if rec.solved {
                    assert_eq!(violated_count(&f, rec.final_assignment.bits()), 0);
                }
            }
        }
    }
}

#[test]
fn same_seed_same_run() {
    let f = gen_uniform_ksat(&GenSpec::with_ratio(80, 3, 4.0, 7)).unwrap();
    let o = ProductOracle::uniform(80).unwrap();
    let cfg = RunConfig::new(Variant::WalkSat, Mode::Boosted).max_steps(5_000).trace(true);
    let a = run_walksat(&f, &o, &cfg, &mut RngStream::new(9)).unwrap();
    let b = run_walksat(&f, &o, &cfg, &mut RngStream::new(9)).unwrap();
    assert_eq!(a, b);
    let cfg = RunConfig::new(Variant::MoserTardos, Mode::Boosted).max_steps(5_000);
    let a = run_mt(&f, &o, &cfg, &mut RngStream::new(9)).unwrap();
    let b = run_mt(&f, &o, &cfg, &mut RngStream::new(9)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn step_cap_is_respected() {
    let f = oraclesat::Formula::from_dimacs_clauses(1, &[&[1], &[-1]]).unwrap();
    for variant in [Variant::MoserTardos, Variant::WalkSat] {
        let cfg = RunConfig::new(variant, Mode::Uniform).max_steps(137);
        let rec = run_variant(&f, None, &cfg, &mut RngStream::new(1)).unwrap();
        assert!(!rec.solved);
        assert_eq!(rec.steps, 137);
    }
}

#[test]
fn boosted_without_oracle_is_an_error() {
    let f = oraclesat::Formula::from_dimacs_clauses(1, &[&[1]]).unwrap();
    let cfg = RunConfig::new(Variant::WalkSat, Mode::Boosted);
    assert!(matches!(
        run_variant(&f, None, &cfg, &mut RngStream::new(1)),
        Err(oraclesat::Error::MissingOracle(_))
    ));
}
