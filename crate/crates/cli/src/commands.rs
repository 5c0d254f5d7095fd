use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use serde::Serialize;

use oraclesat::bench::{compute_metrics, run_benchmark, write_bench_outputs, BenchSpec, SolverVariant};
use oraclesat::gen::{generate, instance_file_name, write_atomic, write_manifest};
use oraclesat::lll::{read_mu_file, read_samples_file, total_loss, LllReport};
use oraclesat::rng::derive_seed;
use oraclesat::sls::DEFAULT_MAX_STEPS;
use oraclesat::{
    find_mu_fixed_point, read_dimacs_file, read_oracle_file, run_variant, solve_exact,
    write_dimacs, DependencyGraph, ExactOutcome, Formula, GenSpec, GibbsLoss, LossParams,
    ManifestRow, Mode, MuSearch, NormOrder, RngStream, RunConfig, SatStatus, Status, Variant,
};

use crate::GlobalOpts;

pub const EXIT_SAT: u8 = 10;
pub const EXIT_UNSAT: u8 = 20;
pub const EXIT_UNKNOWN: u8 = 30;

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string(value)?);
    Ok(())
}

fn load_formula(path: &Path) -> Result<Formula> {
    read_dimacs_file(path).with_context(|| format!("reading {}", path.display()))
}

fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

#[derive(Args, Debug)]
pub struct GenArgs {
    /// Number of variables
    #[arg(long)]
    pub n: usize,
    /// Clause length
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    /// Clause-to-variable ratio; m = round(alpha * n)
    #[arg(long, conflicts_with = "m", required_unless_present = "m")]
    pub alpha: Option<f64>,
    /// Exact number of clauses
    #[arg(long)]
    pub m: Option<usize>,
    /// Number of instances to write
    #[arg(long, default_value_t = 1)]
    pub count: u64,
    /// Cap on the clauses any one variable may appear in
    #[arg(long)]
    pub max_occurrence: Option<usize>,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Instance id prefix; ids are `<prefix>00000`, `<prefix>00001`, ...
    #[arg(long, default_value = "inst")]
    pub prefix: String,
    /// Decide each instance with DPLL under this decision budget and record
    /// the result in the manifest
    #[arg(long)]
    pub exact_budget: Option<u64>,
    /// Keep only instances proven satisfiable (requires --exact-budget)
    #[arg(long, requires = "exact_budget")]
    pub sat_only: bool,
    /// With --sat-only, give up after this many candidates
    #[arg(long, default_value_t = 100_000)]
    pub max_attempts: u64,
}

pub fn gen(g: &GlobalOpts, a: &GenArgs) -> Result<u8> {
    let base = match (a.alpha, a.m) {
        (Some(alpha), None) => GenSpec::with_ratio(a.n, a.k, alpha, g.seed),
        (None, Some(m)) => GenSpec::with_clauses(a.n, a.k, m, g.seed),
        _ => bail!("exactly one of --alpha and --m is required"),
    };
    let base = match a.max_occurrence {
        Some(cap) => base.max_occurrence(cap),
        None => base,
    };
    base.validate()?;
    std::fs::create_dir_all(&a.out_dir)
        .with_context(|| format!("creating {}", a.out_dir.display()))?;

    let mut rows = Vec::new();
    let mut attempt = 0u64;
    while (rows.len() as u64) < a.count {
        if a.sat_only && attempt >= a.max_attempts {
            bail!(
                "only {} of {} satisfiable instances found in {} attempts",
                rows.len(),
                a.count,
                attempt
            );
        }
        let spec = base.for_instance(attempt);
        attempt += 1;
        let formula = generate(&spec)?;
        let status = match a.exact_budget {
            Some(budget) => match solve_exact(&formula, budget)? {
                ExactOutcome::Solved(r) if r.status == Status::Sat => SatStatus::Sat,
                ExactOutcome::Solved(_) => SatStatus::Unsat,
                ExactOutcome::BudgetExceeded { .. } => SatStatus::Unknown,
            },
            None => SatStatus::Unknown,
        };
        if a.sat_only && status != SatStatus::Sat {
            continue;
        }
        let id = format!("{}{:05}", a.prefix, rows.len());
        let mut row = ManifestRow::new(id, &spec, &formula);
        row.sat_status = status;
        write_atomic(
            &a.out_dir.join(instance_file_name(&row.instance_id)),
            write_dimacs(&formula).as_bytes(),
        )?;
        rows.push(row);
    }
    let manifest = a.out_dir.join("manifest.csv");
    write_manifest(&manifest, &rows)?;
    if g.json {
        print_json(&serde_json::json!({
            "manifest": manifest.display().to_string(),
            "instances": rows.len(),
            "attempts": attempt,
        }))?;
    } else if !g.quiet {
        eprintln!("wrote {} instances and {}", rows.len(), manifest.display());
    }
    Ok(0)
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[arg(long)]
    pub cnf: PathBuf,
    /// mt or walksat
    #[arg(long, default_value = "mt")]
    pub variant: Variant,
    /// uniform, hybrid or boosted
    #[arg(long, default_value = "uniform")]
    pub mode: Mode,
    /// Oracle file; required for hybrid and boosted modes
    #[arg(long)]
    pub oracle: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_MAX_STEPS)]
    pub max_steps: u64,
    #[arg(long, default_value_t = 1)]
    pub runs: u32,
    /// Include the per-step violated-clause counts in each record
    #[arg(long)]
    pub trace: bool,
}

#[derive(Serialize)]
struct SolveRecord<'a> {
    run: u32,
    seed: u64,
    variant: &'a str,
    mode: &'a str,
    steps: u64,
    solved: bool,
    violations: usize,
    assignment: String,
    degenerate_picks: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    trace: Option<&'a [u32]>,
}

pub fn solve(g: &GlobalOpts, a: &SolveArgs) -> Result<u8> {
    if a.mode.needs_oracle() && a.oracle.is_none() {
        bail!("--mode {} requires --oracle", a.mode);
    }
    if a.runs == 0 {
        bail!("--runs must be at least 1");
    }
    let formula = load_formula(&a.cnf)?;
    let oracle = match &a.oracle {
        Some(p) if a.mode.needs_oracle() => {
            Some(read_oracle_file(p).with_context(|| format!("reading {}", p.display()))?)
        }
        _ => None,
    };
    let stem = file_stem(&a.cnf);
    let mut any_solved = false;
    for run in 0..a.runs {
        let seed = derive_seed(g.seed, &stem, run as u64);
        let cfg = RunConfig::new(a.variant, a.mode)
            .max_steps(a.max_steps)
            .seed(seed)
            .trace(a.trace);
        let rec = run_variant(&formula, oracle.as_ref(), &cfg, &mut RngStream::new(seed))?;
        any_solved |= rec.solved;
        let violations = formula.count_violated(&rec.final_assignment)?;
        if g.json {
            print_json(&SolveRecord {
                run: run + 1,
                seed,
                variant: a.variant.as_str(),
                mode: a.mode.as_str(),
                steps: rec.steps,
                solved: rec.solved,
                violations,
                assignment: rec.final_assignment.to_bit_string(),
                degenerate_picks: rec.degenerate_picks,
                trace: rec.violation_trace.as_deref(),
            })?;
        } else {
            println!(
                "c run {} seed {} steps {} violations {}",
                run + 1,
                seed,
                rec.steps,
                violations
            );
            if rec.solved {
                println!("s SATISFIABLE");
                println!("v {}", value_line(rec.final_assignment.bits()));
            }
        }
    }
    if !g.json && !any_solved {
        println!("s UNKNOWN");
    }
    Ok(if any_solved { EXIT_SAT } else { EXIT_UNSAT })
}

fn value_line(bits: &[bool]) -> String {
    let mut out: Vec<String> = bits
        .iter()
        .enumerate()
        .map(|(i, &b)| {
            let v = i as i64 + 1;
            (if b { v } else { -v }).to_string()
        })
        .collect();
    out.push("0".into());
    out.join(" ")
}

#[derive(Args, Debug)]
#[command(group(
    clap::ArgGroup::new("mu_source")
        .required(true)
        .args(["mu_from_oracle", "mu_file", "mu_auto", "mu_const"]),
))]
pub struct CheckLllArgs {
    #[arg(long)]
    pub cnf: PathBuf,
    #[arg(long)]
    pub oracle: PathBuf,
    /// Use the mu vector stored in the oracle file
    #[arg(long)]
    pub mu_from_oracle: bool,
    /// Read mu from a standalone mu file
    #[arg(long)]
    pub mu_file: Option<PathBuf>,
    /// Search for mu by fixed-point iteration
    #[arg(long)]
    pub mu_auto: bool,
    /// Use the same mu for every clause
    #[arg(long)]
    pub mu_const: Option<f64>,
    /// Norm order for the LLL loss: a number >= 1 or `inf`
    #[arg(long, default_value = "2")]
    pub z: NormOrder,
    /// Iteration budget for --mu-auto
    #[arg(long, default_value_t = 10_000)]
    pub max_iters: usize,
    /// Convergence tolerance for --mu-auto
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
}

#[derive(Serialize)]
struct MuSearchJson {
    converged: bool,
    iterations: usize,
    certified: Option<bool>,
    reason: Option<String>,
}

#[derive(Serialize)]
struct CheckLllJson<'a> {
    mu_source: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    mu_search: Option<MuSearchJson>,
    num_clauses: usize,
    dependency_edges: usize,
    max_epsilon: Option<f64>,
    mu: Option<&'a [f64]>,
    report: Option<&'a LllReport>,
}

pub fn check_lll(g: &GlobalOpts, a: &CheckLllArgs) -> Result<u8> {
    let formula = load_formula(&a.cnf)?;
    let oracle = read_oracle_file(&a.oracle).with_context(|| format!("reading {}", a.oracle.display()))?;
    let graph = DependencyGraph::build(&formula);
    let mut search_json = None;
    let (source, mu) = if a.mu_from_oracle {
        let mu = oracle
            .mu()
            .context("--mu-from-oracle: the oracle file has no mu lines")?
            .to_vec();
        ("oracle", Some(mu))
    } else if let Some(p) = &a.mu_file {
        ("file", Some(read_mu_file(p).with_context(|| format!("reading {}", p.display()))?))
    } else if let Some(c) = a.mu_const {
        ("const", Some(vec![c; formula.num_clauses()]))
    } else {
        let search = find_mu_fixed_point(&oracle, &formula, &graph, a.max_iters, a.tol)?;
        let mu = search.mu().map(<[f64]>::to_vec);
        search_json = Some(match search {
            MuSearch::Converged { iterations, certified, .. } => MuSearchJson {
                converged: true,
                iterations,
                certified: Some(certified),
                reason: None,
            },
            MuSearch::Failed { iterations, reason } => MuSearchJson {
                converged: false,
                iterations,
                certified: None,
                reason: Some(reason),
            },
        });
        ("auto", mu)
    };
    let report = match &mu {
        Some(mu) => Some(oraclesat::lll::check_lll_with_graph(&oracle, mu, &formula, &graph, a.z)?),
        None => None,
    };
    if g.json {
        print_json(&CheckLllJson {
            mu_source: source,
            mu_search: search_json,
            num_clauses: formula.num_clauses(),
            dependency_edges: graph.num_edges(),
            max_epsilon: report.as_ref().map(LllReport::max_epsilon),
            mu: mu.as_deref(),
            report: report.as_ref(),
        })?;
    } else {
        match &report {
            Some(r) => {
                println!("satisfied {}", r.satisfied);
                println!("max_epsilon {:e}", r.max_epsilon());
                println!("lll_loss {:e} (z = {})", r.lll_loss, r.z);
                println!("expected_steps_bound {}", r.expected_steps_bound);
            }
            None => {
                let reason = search_json.and_then(|s| s.reason).unwrap_or_default();
                println!("mu search failed: {reason}");
            }
        }
    }
    Ok(0)
}

#[derive(Args, Debug)]
pub struct LossArgs {
    #[arg(long)]
    pub cnf: PathBuf,
    /// Oracle file; mu is taken from its mu lines
    #[arg(long)]
    pub oracle: PathBuf,
    /// Samples file; required unless --gamma1 0
    #[arg(long)]
    pub samples: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    #[arg(long, default_value = "2")]
    pub z: NormOrder,
    #[arg(long, default_value_t = 1.0)]
    pub gamma1: f64,
    #[arg(long, default_value_t = 1.0)]
    pub gamma2: f64,
}

#[derive(Serialize)]
struct LossJson {
    params: LossParams,
    gibbs: Option<f64>,
    gibbs_infinite: bool,
    /// 1-based index of the zero-probability sample when the Gibbs term is
    /// infinite.
    infinite_sample: Option<usize>,
    lll: Option<f64>,
    total: Option<f64>,
}

pub fn loss(g: &GlobalOpts, a: &LossArgs) -> Result<u8> {
    let formula = load_formula(&a.cnf)?;
    let oracle = read_oracle_file(&a.oracle).with_context(|| format!("reading {}", a.oracle.display()))?;
    let samples = match &a.samples {
        Some(p) if a.gamma1 > 0.0 => {
            Some(read_samples_file(p, &formula).with_context(|| format!("reading {}", p.display()))?)
        }
        _ => None,
    };
    if !(a.beta > 0.0 && a.beta.is_finite()) {
        bail!("--beta must be positive");
    }
    let params = LossParams {
        beta: a.beta,
        z: a.z,
        gamma1: a.gamma1,
        gamma2: a.gamma2,
    };
    let b = total_loss(&oracle, oracle.mu(), &formula, samples.as_ref(), &params)?;
    let infinite_sample = match b.gibbs {
        Some(GibbsLoss::Infinite { sample }) => Some(sample + 1),
        _ => None,
    };
    let out = LossJson {
        params,
        gibbs: b.gibbs.filter(|g| g.is_finite()).map(GibbsLoss::value),
        gibbs_infinite: infinite_sample.is_some(),
        infinite_sample,
        lll: b.lll,
        total: Some(b.total).filter(|t| t.is_finite()),
    };
    if g.json {
        print_json(&out)?;
    } else {
        let show = |v: Option<f64>, skipped: bool| match v {
            Some(v) => format!("{v:e}"),
            None if skipped => "skipped".into(),
            None => "inf".into(),
        };
        println!("gibbs {}", show(out.gibbs, b.gibbs.is_none()));
        println!("lll {}", show(out.lll, true));
        println!("total {}", show(out.total, false));
    }
    Ok(0)
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Comma-separated `<variant>-<mode>` labels
    #[arg(long, value_delimiter = ',', default_value = "mt-uniform,walksat-uniform")]
    pub variants: Vec<SolverVariant>,
    /// Directory with `<instance_id>.oracle` files
    #[arg(long)]
    pub oracle_dir: Option<PathBuf>,
    #[arg(long, default_value_t = 5)]
    pub runs: u32,
    #[arg(long, default_value_t = DEFAULT_MAX_STEPS)]
    pub max_steps: u64,
    /// Output directory
    #[arg(long)]
    pub out: PathBuf,
    /// Width of the alpha bins in the alpha curves
    #[arg(long)]
    pub alpha_bin: Option<f64>,
    /// Record violated-clause counts at logarithmic step checkpoints
    #[arg(long)]
    pub trace: bool,
}

pub fn bench(g: &GlobalOpts, a: &BenchArgs) -> Result<u8> {
    if a.variants.is_empty() {
        bail!("--variants is empty");
    }
    if a.variants.iter().any(|v| v.mode.needs_oracle()) && a.oracle_dir.is_none() {
        bail!("hybrid and boosted variants require --oracle-dir");
    }
    let mut spec = BenchSpec::new(&a.manifest, a.variants.clone());
    spec.runs_per_instance = a.runs;
    spec.max_steps = a.max_steps;
    spec.master_seed = g.seed;
    spec.oracle_dir = a.oracle_dir.clone();
    spec.alpha_bin_width = a.alpha_bin;
    spec.trace = a.trace;
    let output = run_benchmark(&spec)?;
    let report = compute_metrics(&output.runs, &output.traces, &spec.metrics_config())?;
    write_bench_outputs(&a.out, &output, &report)?;
    if g.json {
        print_json(&report)?;
    } else if !g.quiet {
        for v in &report.variants {
            println!(
                "{}-{}: instances {} solved {:.3} mean_steps {:.1} median_of_medians {}",
                v.variant, v.mode, v.instances, v.fraction_solved, v.mean_steps, v.median_of_medians
            );
        }
        eprintln!("wrote {}", a.out.display());
    }
    Ok(0)
}

#[derive(Args, Debug)]
pub struct ExactArgs {
    #[arg(long)]
    pub cnf: PathBuf,
    /// Maximum number of branching decisions
    #[arg(long, default_value_t = 10_000_000)]
    pub budget: u64,
}

#[derive(Serialize)]
struct ExactJson {
    status: &'static str,
    witness: Option<String>,
    decisions: u64,
}

pub fn exact(g: &GlobalOpts, a: &ExactArgs) -> Result<u8> {
    let formula = load_formula(&a.cnf)?;
    let outcome = solve_exact(&formula, a.budget)?;
    let (out, code) = match &outcome {
        ExactOutcome::Solved(r) => {
            let (status, code) = match r.status {
                Status::Sat => ("SAT", EXIT_SAT),
                Status::Unsat => ("UNSAT", EXIT_UNSAT),
            };
            let witness = r.witness.as_ref().map(|w| w.to_bit_string());
            (ExactJson { status, witness, decisions: r.decisions }, code)
        }
        ExactOutcome::BudgetExceeded { decisions } => (
            ExactJson { status: "UNKNOWN", witness: None, decisions: *decisions },
            EXIT_UNKNOWN,
        ),
    };
    if g.json {
        print_json(&out)?;
    } else {
        println!("c decisions {}", out.decisions);
        match out.status {
            "SAT" => {
                println!("s SATISFIABLE");
                let w = outcome.result().and_then(|r| r.witness.as_ref()).expect("SAT has a witness");
                println!("v {}", value_line(w.bits()));
            }
            "UNSAT" => println!("s UNSATISFIABLE"),
            _ => println!("s UNKNOWN"),
        }
    }
    Ok(code)
}
