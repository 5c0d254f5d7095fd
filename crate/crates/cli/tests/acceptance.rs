//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.
//!
//! Run with `cargo test -p oraclesat-cli --test acceptance`. Pass criterion
//! numbers as arguments to run a subset, e.g. `-- 1 2 7`.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use common::*;
use oraclesat::bench::{
    compute_metrics, median, run_benchmark, BenchSpec, MetricsConfig, RunRow, SolverVariant,
};
use oraclesat::gen::{instance_file_name, write_atomic, write_manifest};
use oraclesat::oracle::write_oracle_file;
use oraclesat::{
    check_lll, clause_violation_prob, gen_degree_bounded_ksat, gen_uniform_ksat,
    gibbs_loss_estimate, lll_loss, run_variant, solve_exact, write_dimacs, Clause, GenSpec,
    Literal, ManifestRow, Mode, NormOrder, ProductOracle, RngStream, RunConfig, SampleSet,
    Variant,
};

type Criterion = (u32, &'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// 7-SAT, n = 700, m = 500, every variable in at most five clauses.
fn criterion_1() -> Outcome {
    let mu = vec![std::f64::consts::E / 128.0; 500];
    let bound = 2.0 * mu.iter().sum::<f64>();
    let uniform = ProductOracle::uniform(700).unwrap();
    let (mut lll_ok, mut solved, mut runs, mut steps) = (0, 0, 0u64, 0u64);
    for i in 0..100u64 {
        let spec = GenSpec::with_clauses(700, 7, 500, 1_000 + i).max_occurrence(5);
        let f = gen_degree_bounded_ksat(&spec).unwrap();
        let max_occ = (0..700).map(|v| f.occurrence_count(v)).max().unwrap();
        if max_occ <= 5 && check_lll(&uniform, &mu, &f, NormOrder::TWO).unwrap().satisfied {
            lll_ok += 1;
        }
        let mut inst_solved = true;
        for r in 0..5 {
            let cfg = RunConfig::new(Variant::MoserTardos, Mode::Uniform);
            let rec = run_variant(&f, None, &cfg, &mut RngStream::derive(1, "c1", i * 5 + r)).unwrap();
            inst_solved &= rec.solved;
            steps += rec.steps;
            runs += 1;
        }
        solved += inst_solved as usize;
    }
    let mean = steps as f64 / runs as f64;
    outcome(
        lll_ok == 100 && solved == 100 && mean <= bound,
        format!("lll satisfied {lll_ok}/100, solved {solved}/100, mean steps {mean:.3} <= {bound:.3}"),
    )
}

/// A point-mass oracle on a satisfying assignment solves at step 0.
fn criterion_2() -> Outcome {
    let mut rng = RngStream::new(2);
    let (mut instances, mut runs, mut zero) = (0, 0, 0);
    while instances < 50 {
        let n = 5 + rng.index(16);
        let f = gen_uniform_ksat(&GenSpec::with_ratio(n, 3, 3.5, rng.next_u64())).unwrap();
        let outcome = solve_exact(&f, u64::MAX).unwrap();
        let Some(w) = outcome.result().and_then(|r| r.witness.clone()) else { continue };
        let o = ProductOracle::point_mass(&w);
        for variant in [Variant::MoserTardos, Variant::WalkSat] {
            for mode in [Mode::Hybrid, Mode::Boosted] {
                for r in 0..5 {
                    let cfg = RunConfig::new(variant, mode);
                    let rec = run_variant(&f, Some(&o), &cfg, &mut RngStream::new(r)).unwrap();
                    runs += 1;
                    zero += (rec.solved && rec.steps == 0) as usize;
                }
            }
        }
        instances += 1;
    }
    outcome(zero == runs, format!("{zero}/{runs} runs solved at step 0 over {instances} instances"))
}

/// Library values against exhaustive enumeration.
fn criterion_3() -> Outcome {
    let mut rng = RngStream::new(3);
    let mut worst = [0.0f64; 4];
    for _ in 0..200 {
        let n = 2 + rng.index(11);
        let m = 1 + rng.index(3 * n);
        let f = random_formula(&mut rng, n, m, 5);
        let o = random_oracle(&mut rng, n);
        let w = o.weights();

        for c in f.clauses() {
            let err = (clause_violation_prob(&o, c) - prob_where(w, |x| clause_false(c, x))).abs();
            worst[0] = worst[0].max(err);
        }

        let x: Vec<bool> = (0..n).map(|_| rng.bernoulli(0.5)).collect();
        for v in 0..n {
            let err = (o.flip_marginal(&assignment(&x), v).unwrap() - prob_where(w, |y| y[v] != x[v])).abs();
            worst[1] = worst[1].max(err);
        }

        let split = 1 + rng.index(n - 1);
        let a = random_formula(&mut rng, split, 1, 4).clauses()[0].clone();
        let b = random_formula(&mut rng, n - split, 1, 4).clauses()[0].clone();
        let b = Clause::new(b.literals().iter().map(|l| Literal::new(l.var() + split, l.is_negated()))).unwrap();
        let joint = prob_where(w, |x| clause_false(&a, x) && clause_false(&b, x));
        let err = (joint - clause_violation_prob(&o, &a) * clause_violation_prob(&o, &b)).abs();
        worst[2] = worst[2].max(err);

        let mut masks = std::collections::BTreeSet::new();
        let count = 1 + rng.index(16).min((1usize << n) - 1);
        while masks.len() < count {
            masks.insert(rng.next_u64() & ((1u64 << n) - 1));
        }
        let xs: Vec<Vec<bool>> = masks.iter().map(|&m| bits_of(n, m)).collect();
        let set = SampleSet::new(&f, xs.iter().map(|x| assignment(x)).collect()).unwrap();
        let got = gibbs_loss_estimate(&o, &set, 1.0).unwrap().value();
        worst[3] = worst[3].max((got - gibbs_reference(w, &f, &xs, 1.0)).abs());
    }
    let pass = worst.iter().all(|&e| e <= 1e-12);
    outcome(
        pass,
        format!(
            "max abs error: clause prob {:.1e}, flip marginal {:.1e}, disjoint joint {:.1e}, gibbs {:.1e}",
            worst[0], worst[1], worst[2], worst[3]
        ),
    )
}

/// `lll_loss == 0` iff the condition holds, for three norm orders.
fn criterion_4() -> Outcome {
    let mut rng = RngStream::new(4);
    let (mut agree, mut total, mut satisfied) = (0, 0, 0);
    for _ in 0..500 {
        let n = 3 + rng.index(12);
        let m = 1 + rng.index(10);
        let f = random_formula(&mut rng, n, m, 6);
        let o = random_oracle(&mut rng, n);
        let scale = [1e-3, 0.05, 0.3, 1.0, 3.0][rng.index(5)];
        let mu: Vec<f64> = (0..f.num_clauses()).map(|_| scale * rng.unit()).collect();
        for z in [NormOrder::ONE, NormOrder::TWO, NormOrder::INFINITY] {
            let report = check_lll(&o, &mu, &f, z).unwrap();
            let loss = lll_loss(&o, &mu, &f, z).unwrap();
            total += 1;
            agree += ((loss == 0.0) == report.satisfied) as usize;
            satisfied += report.satisfied as usize;
        }
    }
    outcome(
        agree == total && satisfied > 0 && satisfied < total,
        format!("{agree}/{total} agree ({satisfied} satisfied)"),
    )
}

/// Uniform MT on random 3-SAT across the hardness transition.
fn criterion_5() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let alphas = [1.5, 2.0, 2.5, 3.0, 3.5, 4.5];
    let mut rows = Vec::new();
    for (b, &alpha) in alphas.iter().enumerate() {
        for i in 0..20u64 {
            let spec = GenSpec::with_ratio(100, 3, alpha, 5_000 + 100 * b as u64 + i);
            let f = gen_uniform_ksat(&spec).unwrap();
            let id = format!("a{b}i{i:02}");
            write_atomic(&dir.path().join(instance_file_name(&id)), write_dimacs(&f).as_bytes()).unwrap();
            rows.push(ManifestRow::new(id, &spec, &f));
        }
    }
    let manifest = dir.path().join("manifest.csv");
    write_manifest(&manifest, &rows).unwrap();
    let mut spec = BenchSpec::new(&manifest, vec![SolverVariant::new(Variant::MoserTardos, Mode::Uniform)]);
    spec.runs_per_instance = 5;
    spec.max_steps = 1_000_000;
    spec.master_seed = 5;
    let out = run_benchmark(&spec).unwrap();
    let report = compute_metrics(&out.runs, &out.traces, &spec.metrics_config()).unwrap();
    let curve = &report.variants[0].alpha_curve;
    let rates: Vec<f64> = curve.iter().map(|p| p.solve_rate).collect();
    let noise = 1.0 / 20.0;
    let monotone = rates.windows(2).all(|w| w[1] <= w[0] + noise + 1e-12);
    let first = rates[0];
    let last = *rates.last().unwrap();
    let shown: Vec<String> = curve.iter().map(|p| format!("{}:{:.2}", p.alpha, p.solve_rate)).collect();
    outcome(
        curve.len() == 6 && first >= 0.95 && last <= 0.20 && monotone,
        format!("solve rate by alpha [{}]", shown.join(" ")),
    )
}

fn row(id: &str, alpha: f64, run: u32, steps: u64, solved: bool) -> RunRow {
    RunRow {
        instance_id: id.into(),
        path: format!("{id}.cnf"),
        n: 10,
        m: (alpha * 10.0) as usize,
        alpha,
        variant: "mt".into(),
        mode: "uniform".into(),
        run_index: run,
        seed: run as u64,
        steps,
        solved,
    }
}

/// Straightforward recomputation of the headline metrics from a run table.
fn reference_metrics(rows: &[RunRow], cap: u64) -> (f64, f64, f64, Option<f64>) {
    let mut by: BTreeMap<&str, (f64, Vec<f64>, bool)> = BTreeMap::new();
    let mut sum = 0u64;
    for r in rows {
        let s = if r.solved { r.steps } else { cap };
        sum += s;
        let e = by.entry(&r.instance_id).or_insert((r.alpha, Vec::new(), false));
        e.1.push(s as f64);
        e.2 |= r.solved;
    }
    let mean = sum as f64 / rows.len() as f64;
    let mut meds: Vec<f64> = by
        .values()
        .map(|(_, v, _)| {
            let mut v = v.clone();
            v.sort_by(f64::total_cmp);
            let k = v.len();
            if k % 2 == 1 { v[k / 2] } else { (v[k / 2 - 1] + v[k / 2]) / 2.0 }
        })
        .collect();
    meds.sort_by(f64::total_cmp);
    let k = meds.len();
    let mom = if k % 2 == 1 { meds[k / 2] } else { (meds[k / 2 - 1] + meds[k / 2]) / 2.0 };
    let solved: Vec<f64> = by.values().filter(|e| e.2).map(|e| e.0).collect();
    let frac = solved.len() as f64 / by.len() as f64;
    let alpha = (!solved.is_empty()).then(|| solved.iter().sum::<f64>() / solved.len() as f64);
    (mean, mom, frac, alpha)
}

fn criterion_6() -> Outcome {
    let mut failures = Vec::new();
    let cfg = |cap| MetricsConfig { max_steps: cap, alpha_bin_width: None };

    let t = [row("a", 2.0, 0, 10, true), row("a", 2.0, 1, 20, true), row("a", 2.0, 2, 30, true)];
    let v = &compute_metrics(&t, &[], &cfg(100)).unwrap().variants[0];
    if (v.mean_steps, v.median_of_medians, v.fraction_solved, v.mean_alpha_solved) != (20.0, 20.0, 1.0, Some(2.0)) {
        failures.push("single instance");
    }

    let t = [row("a", 2.0, 0, 10, true), row("b", 3.0, 0, 55, false)];
    let v = &compute_metrics(&t, &[], &cfg(100)).unwrap().variants[0];
    if (v.mean_steps, v.fraction_solved, v.mean_alpha_solved) != (55.0, 0.5, Some(2.0)) {
        failures.push("censored instance");
    }

    let t = [row("a", 2.0, 0, 40, false), row("a", 2.0, 1, 7, true), row("a", 2.0, 2, 40, false)];
    if compute_metrics(&t, &[], &cfg(40)).unwrap().variants[0].fraction_solved != 1.0 {
        failures.push("any-run rule");
    }

    let t = [row("a", 2.0, 0, 1, true), row("a", 2.0, 1, 4, true)];
    if compute_metrics(&t, &[], &cfg(100)).unwrap().variants[0].median_of_medians != 2.5
        || median(&mut [4.0, 1.0, 3.0, 2.0]) != 2.5
    {
        failures.push("even median");
    }

    let mut rng = RngStream::new(6);
    let mut mismatches = 0;
    for _ in 0..300 {
        let cap = 1 + rng.index(1000) as u64;
        let instances = 1 + rng.index(8);
        let mut rows = Vec::new();
        for i in 0..instances {
            let alpha = 0.5 * (1 + rng.index(10)) as f64;
            for r in 0..1 + rng.index(6) as u32 {
                let solved = rng.bernoulli(0.6);
                let steps = if solved { rng.index(cap as usize + 1) as u64 } else { cap };
                rows.push(row(&format!("i{i}"), alpha, r, steps, solved));
            }
        }
        let v = &compute_metrics(&rows, &[], &cfg(cap)).unwrap().variants[0];
        if (v.mean_steps, v.median_of_medians, v.fraction_solved, v.mean_alpha_solved) != reference_metrics(&rows, cap) {
            mismatches += 1;
        }
    }
    if mismatches > 0 {
        failures.push("random tables");
    }
    outcome(
        failures.is_empty(),
        if failures.is_empty() {
            "worked examples exact; 300 random tables match reference exactly".into()
        } else {
            format!("mismatch: {}", failures.join(", "))
        },
    )
}

fn oraclesat(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_oraclesat")).args(args).output().unwrap()
}

fn dir_files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect()
}

/// Two full `bench` invocations with the same seed produce identical files.
fn criterion_7() -> Outcome {
    let root = tempfile::tempdir().unwrap();
    let inst = root.path().join("inst");
    let inst_s = inst.to_str().unwrap();
    let gen = oraclesat(&["gen", "--n", "40", "--alpha", "3.8", "--count", "6", "--out-dir", inst_s, "--seed", "7", "--quiet"]);
    if !gen.status.success() {
        return outcome(false, format!("gen failed: {}", String::from_utf8_lossy(&gen.stderr)));
    }
    let oracles = root.path().join("oracles");
    std::fs::create_dir_all(&oracles).unwrap();
    let mut rng = RngStream::new(7);
    for i in 0..6 {
        let o = ProductOracle::new(random_weights(&mut rng, 40), None).unwrap();
        write_oracle_file(oracles.join(format!("inst{i:05}.oracle")), &o).unwrap();
    }
    let manifest = inst.join("manifest.csv");
    let run = |out: &Path| {
        oraclesat(&[
            "bench",
            "--manifest", manifest.to_str().unwrap(),
            "--variants", "mt-uniform,walksat-uniform,mt-hybrid,walksat-boosted",
            "--oracle-dir", oracles.to_str().unwrap(),
            "--runs", "4",
            "--max-steps", "20000",
            "--trace",
            "--alpha-bin", "0.5",
            "--seed", "99",
            "--out", out.to_str().unwrap(),
            "--quiet",
        ])
    };
    let (a, b) = (root.path().join("a"), root.path().join("b"));
    let (ra, rb) = (run(&a), run(&b));
    if !ra.status.success() || !rb.status.success() {
        return outcome(false, format!("bench failed: {}", String::from_utf8_lossy(&ra.stderr)));
    }
    let (fa, fb) = (dir_files(&a), dir_files(&b));
    let bytes: usize = fa.values().map(Vec::len).sum();
    outcome(
        fa == fb && fa.len() >= 5,
        format!("{} files, {} bytes, identical: {}", fa.len(), bytes, fa == fb),
    )
}

fn main() {
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let criteria: [Criterion; 7] = [
        (1, "LLL guarantee on degree-bounded 7-SAT", criterion_1),
        (2, "perfect-oracle convergence", criterion_2),
        (3, "brute-force equivalence", criterion_3),
        (4, "loss/condition duality", criterion_4),
        (5, "hardness-regime shape", criterion_5),
        (6, "metrics definitions", criterion_6),
        (7, "benchmark determinism", criterion_7),
    ];
    let mut failed = 0;
    for (id, name, run) in criteria {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let o = run();
        let secs = start.elapsed().as_secs_f64();
        println!(
            "criterion {id} ({name}): {} [{secs:.1}s] {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        failed += !o.pass as u32;
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
