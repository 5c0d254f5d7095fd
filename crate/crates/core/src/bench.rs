//! Benchmark protocol: run every (instance, variant, run) triple, persist the
//! raw run table, and aggregate it into step/solve metrics.
//!
//! Aggregation conventions:
//! - unsolved runs count as `max_steps` in every step statistic (censored);
//! - an instance is solved if any of its runs solved it;
//! - the median of an even-sized list is the mean of the two middle values.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cnf::Formula;
use crate::dimacs::read_dimacs_file;
use crate::error::{Error, Result};
use crate::gen::{instance_file_name, read_manifest, write_atomic, ManifestRow};
use crate::oracle::{read_oracle_file, ProductOracle};
use crate::rng::{derive_seed, RngStream};
use crate::sls::{run_variant, Mode, RunConfig, Variant, DEFAULT_MAX_STEPS};

/// An algorithm paired with an oracle mode, written `<variant>-<mode>`,
/// e.g. `walksat-boosted`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SolverVariant {
    pub variant: Variant,
    pub mode: Mode,
}

impl SolverVariant {
    pub fn new(variant: Variant, mode: Mode) -> Self {
        SolverVariant { variant, mode }
    }

    pub fn label(&self) -> String {
        format!("{}-{}", self.variant, self.mode)
    }
}

impl std::str::FromStr for SolverVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (v, m) = s
            .split_once('-')
            .ok_or_else(|| Error::InvalidArgument(format!("variant `{s}` is not <variant>-<mode>")))?;
        Ok(SolverVariant::new(v.parse()?, m.parse()?))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchSpec {
    pub manifest: PathBuf,
    pub variants: Vec<SolverVariant>,
    pub runs_per_instance: u32,
    pub max_steps: u64,
    pub master_seed: u64,
    /// Directory holding `<instance_id>.oracle` files for hybrid/boosted runs.
    pub oracle_dir: Option<PathBuf>,
    /// Width of the alpha bins; `None` groups by exact alpha.
    pub alpha_bin_width: Option<f64>,
    /// Record violation counts at the step checkpoints.
    pub trace: bool,
}

impl BenchSpec {
    pub fn new(manifest: impl Into<PathBuf>, variants: Vec<SolverVariant>) -> Self {
        BenchSpec {
            manifest: manifest.into(),
            variants,
            runs_per_instance: 5,
            max_steps: DEFAULT_MAX_STEPS,
            master_seed: 0,
            oracle_dir: None,
            alpha_bin_width: None,
            trace: false,
        }
    }

    pub fn metrics_config(&self) -> MetricsConfig {
        MetricsConfig {
            max_steps: self.max_steps,
            alpha_bin_width: self.alpha_bin_width,
        }
    }
}

/// One row of the raw run table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub instance_id: String,
    pub path: String,
    pub n: usize,
    pub m: usize,
    pub alpha: f64,
    pub variant: String,
    pub mode: String,
    pub run_index: u32,
    pub seed: u64,
    pub steps: u64,
    pub solved: bool,
}

impl RunRow {
    fn key(&self) -> (String, String) {
        (self.variant.clone(), self.mode.clone())
    }
}

/// Violated-clause count of one run at one checkpoint step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRow {
    pub instance_id: String,
    pub variant: String,
    pub mode: String,
    pub run_index: u32,
    pub step: u64,
    pub violations: u32,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BenchOutput {
    pub runs: Vec<RunRow>,
    pub traces: Vec<TraceRow>,
}

/// Step checkpoints 0, 1, 2, 5, 10, 20, 50, ... up to and including `max_steps`.
pub fn checkpoints(max_steps: u64) -> Vec<u64> {
    let mut out = vec![0];
    let mut decade = 1u64;
    'outer: loop {
        for mult in [1, 2, 5] {
            let s = decade.saturating_mul(mult);
            if s >= max_steps {
                break 'outer;
            }
            out.push(s);
        }
        decade = decade.saturating_mul(10);
    }
    if max_steps > 0 {
        out.push(max_steps);
    }
    out
}

struct Instance {
    row: ManifestRow,
    path: PathBuf,
    formula: Formula,
    oracle: Option<ProductOracle>,
}

fn load_instances(spec: &BenchSpec) -> Result<Vec<Instance>> {
    let rows = read_manifest(&spec.manifest)?;
    let dir = spec
        .manifest
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_default();
    let needs_oracle = spec.variants.iter().any(|v| v.mode.needs_oracle());
    if needs_oracle && spec.oracle_dir.is_none() {
        return Err(Error::Bench(
            "hybrid/boosted variants need an oracle directory".into(),
        ));
    }
    if let Some(od) = spec.oracle_dir.as_ref().filter(|_| needs_oracle) {
        if !od.is_dir() {
            return Err(Error::Bench(format!("oracle directory {} not found", od.display())));
        }
    }

    let mut failures = Vec::new();
    let mut instances = Vec::new();
    for row in rows {
        let path = dir.join(instance_file_name(&row.instance_id));
        let formula = match read_dimacs_file(&path) {
            Ok(f) => f,
            Err(e) => {
                failures.push(format!("{}: {e}", path.display()));
                continue;
            }
        };
        let oracle = match spec.oracle_dir.as_ref().filter(|_| needs_oracle) {
            Some(od) => {
                let opath = od.join(format!("{}.oracle", row.instance_id));
                match read_oracle_file(&opath).and_then(|o| {
                    o.check_num_vars(formula.num_vars())?;
                    Ok(o)
                }) {
                    Ok(o) => Some(o),
                    Err(e) => {
                        failures.push(format!("{}: {e}", opath.display()));
                        continue;
                    }
                }
            }
            None => None,
        };
        instances.push(Instance {
            row,
            path,
            formula,
            oracle,
        });
    }
    if !failures.is_empty() {
        return Err(Error::Bench(format!(
            "{} instance(s) could not be loaded:\n  {}",
            failures.len(),
            failures.join("\n  ")
        )));
    }
    Ok(instances)
}

/// Runs the whole benchmark. Deterministic in `spec.master_seed` regardless
/// of thread scheduling; rows come back sorted.
pub fn run_benchmark(spec: &BenchSpec) -> Result<BenchOutput> {
    if spec.runs_per_instance == 0 {
        return Err(Error::InvalidArgument("runs_per_instance must be at least 1".into()));
    }
    if spec.variants.is_empty() {
        return Err(Error::InvalidArgument("no variants requested".into()));
    }
    let instances = load_instances(spec)?;
    let marks = checkpoints(spec.max_steps);

    let jobs: Vec<(usize, SolverVariant, u32)> = instances
        .iter()
        .enumerate()
        .flat_map(|(i, _)| {
            spec.variants
                .iter()
                .flat_map(move |&v| (0..spec.runs_per_instance).map(move |r| (i, v, r)))
        })
        .collect();

    let results: Vec<(RunRow, Vec<TraceRow>)> = jobs
        .par_iter()
        .map(|&(i, sv, run_index)| {
            let inst = &instances[i];
            let seed = derive_seed(spec.master_seed, &inst.row.instance_id, run_index as u64);
            let cfg = RunConfig::new(sv.variant, sv.mode)
                .max_steps(spec.max_steps)
                .seed(seed)
                .trace(spec.trace);
            let record = run_variant(&inst.formula, inst.oracle.as_ref(), &cfg, &mut RngStream::new(seed))?;
            let row = RunRow {
                instance_id: inst.row.instance_id.clone(),
                path: inst.path.display().to_string(),
                n: inst.formula.num_vars(),
                m: inst.formula.num_clauses(),
                alpha: inst.row.alpha,
                variant: sv.variant.to_string(),
                mode: sv.mode.to_string(),
                run_index,
                seed,
                steps: record.steps,
                solved: record.solved,
            };
            let traces = match &record.violation_trace {
                Some(t) => marks
                    .iter()
                    .map(|&s| TraceRow {
                        instance_id: row.instance_id.clone(),
                        variant: row.variant.clone(),
                        mode: row.mode.clone(),
                        run_index,
                        step: s,
                        violations: t[s.min(record.steps) as usize],
                    })
                    .collect(),
                None => Vec::new(),
            };
            Ok((row, traces))
        })
        .collect::<Result<_>>()?;

    let mut out = BenchOutput::default();
    for (row, traces) in results {
        out.runs.push(row);
        out.traces.extend(traces);
    }
    out.runs.sort_by(|a, b| {
        (&a.instance_id, &a.variant, &a.mode, a.run_index).cmp(&(&b.instance_id, &b.variant, &b.mode, b.run_index))
    });
    out.traces.sort_by(|a, b| {
        (&a.instance_id, &a.variant, &a.mode, a.run_index, a.step)
            .cmp(&(&b.instance_id, &b.variant, &b.mode, b.run_index, b.step))
    });
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsConfig {
    pub max_steps: u64,
    pub alpha_bin_width: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaPoint {
    pub alpha: f64,
    pub instances: usize,
    pub mean_steps: f64,
    pub median_steps: f64,
    pub solve_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepPoint {
    pub step: u64,
    /// Fraction of instances solved by some run within `step` steps.
    pub solved_fraction: f64,
    /// Mean violated clauses over all traced runs; `None` without traces.
    pub mean_violations: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariantMetrics {
    pub variant: String,
    pub mode: String,
    pub instances: usize,
    pub runs: usize,
    /// Mean steps over all (instance, run) pairs, unsolved runs at the cap.
    pub mean_steps: f64,
    /// Median over instances of the per-instance median over runs.
    pub median_of_medians: f64,
    /// Fraction of instances solved by at least one run, in [0, 1].
    pub fraction_solved: f64,
    /// Mean alpha of the solved instances.
    pub mean_alpha_solved: Option<f64>,
    pub alpha_curve: Vec<AlphaPoint>,
    pub step_curve: Vec<StepPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub max_steps: u64,
    /// Unsolved runs enter step statistics at `max_steps`.
    pub censored_mean: bool,
    pub median_rule: &'static str,
    pub variants: Vec<VariantMetrics>,
}

impl MetricsReport {
    pub fn variant(&self, variant: &str, mode: &str) -> Option<&VariantMetrics> {
        self.variants
            .iter()
            .find(|v| v.variant == variant && v.mode == mode)
    }
}

pub fn median(values: &mut [f64]) -> f64 {
    assert!(!values.is_empty(), "median of empty list");
    values.sort_by(|a, b| a.total_cmp(b));
    let mid = values.len() / 2;
    if values.len() % 2 == 1 {
        values[mid]
    } else {
        (values[mid - 1] + values[mid]) / 2.0
    }
}

fn alpha_bin(alpha: f64, width: Option<f64>) -> f64 {
    match width {
        Some(w) if w > 0.0 => (alpha / w).round() * w,
        _ => alpha,
    }
}

struct InstanceSummary {
    alpha: f64,
    censored: Vec<f64>,
    first_solve: Option<u64>,
}

fn summarize(rows: &[&RunRow], cap: u64) -> BTreeMap<String, InstanceSummary> {
    let mut by_instance: BTreeMap<String, InstanceSummary> = BTreeMap::new();
    for r in rows {
        let s = by_instance
            .entry(r.instance_id.clone())
            .or_insert_with(|| InstanceSummary {
                alpha: r.alpha,
                censored: Vec::new(),
                first_solve: None,
            });
        let steps = if r.solved { r.steps } else { cap };
        s.censored.push(steps as f64);
        if r.solved {
            s.first_solve = Some(s.first_solve.map_or(r.steps, |f| f.min(r.steps)));
        }
    }
    by_instance
}

fn aggregate(summaries: &[&InstanceSummary]) -> (f64, f64, f64) {
    let all: Vec<f64> = summaries.iter().flat_map(|s| s.censored.iter().copied()).collect();
    let mean = all.iter().sum::<f64>() / all.len() as f64;
    let mut medians: Vec<f64> = summaries
        .iter()
        .map(|s| median(&mut s.censored.clone()))
        .collect();
    let mom = median(&mut medians);
    let solved = summaries.iter().filter(|s| s.first_solve.is_some()).count();
    (mean, mom, solved as f64 / summaries.len() as f64)
}

/// Aggregates a raw run table (and optional checkpoint traces) into metrics,
/// one entry per (variant, mode) in sorted order.
pub fn compute_metrics(runs: &[RunRow], traces: &[TraceRow], cfg: &MetricsConfig) -> Result<MetricsReport> {
    if runs.is_empty() {
        return Err(Error::Bench("empty run table".into()));
    }
    let keys: BTreeSet<(String, String)> = runs.iter().map(RunRow::key).collect();
    let marks = checkpoints(cfg.max_steps);
    let mut variants = Vec::new();
    for (variant, mode) in keys {
        let rows: Vec<&RunRow> = runs
            .iter()
            .filter(|r| r.variant == variant && r.mode == mode)
            .collect();
        let by_instance = summarize(&rows, cfg.max_steps);
        let all: Vec<&InstanceSummary> = by_instance.values().collect();
        let (mean_steps, median_of_medians, fraction_solved) = aggregate(&all);

        let solved_alphas: Vec<f64> = all
            .iter()
            .filter(|s| s.first_solve.is_some())
            .map(|s| s.alpha)
            .collect();
        let mean_alpha_solved = (!solved_alphas.is_empty())
            .then(|| solved_alphas.iter().sum::<f64>() / solved_alphas.len() as f64);

        let mut bins: BTreeMap<u64, (f64, Vec<&InstanceSummary>)> = BTreeMap::new();
        for s in &all {
            let a = alpha_bin(s.alpha, cfg.alpha_bin_width);
            bins.entry(a.to_bits()).or_insert_with(|| (a, Vec::new())).1.push(s);
        }
        let mut alpha_curve: Vec<AlphaPoint> = bins
            .into_values()
            .map(|(alpha, group)| {
                let (mean_steps, median_steps, solve_rate) = aggregate(&group);
                AlphaPoint {
                    alpha,
                    instances: group.len(),
                    mean_steps,
                    median_steps,
                    solve_rate,
                }
            })
            .collect();
        alpha_curve.sort_by(|a, b| a.alpha.total_cmp(&b.alpha));

        let variant_traces: Vec<&TraceRow> = traces
            .iter()
            .filter(|t| t.variant == variant && t.mode == mode)
            .collect();
        let step_curve = marks
            .iter()
            .map(|&step| {
                let solved = all
                    .iter()
                    .filter(|s| s.first_solve.is_some_and(|f| f <= step))
                    .count();
                let at: Vec<f64> = variant_traces
                    .iter()
                    .filter(|t| t.step == step)
                    .map(|t| t.violations as f64)
                    .collect();
                StepPoint {
                    step,
                    solved_fraction: solved as f64 / all.len() as f64,
                    mean_violations: (!at.is_empty()).then(|| at.iter().sum::<f64>() / at.len() as f64),
                }
            })
            .collect();

        variants.push(VariantMetrics {
            variant,
            mode,
            instances: all.len(),
            runs: rows.len(),
            mean_steps,
            median_of_medians,
            fraction_solved,
            mean_alpha_solved,
            alpha_curve,
            step_curve,
        });
    }
    Ok(MetricsReport {
        max_steps: cfg.max_steps,
        censored_mean: true,
        median_rule: "mean of the two middle values for even counts",
        variants,
    })
}

/// Per-instance median steps of two variants side by side, joined on
/// instance id: `(instance_id, alpha, median_a, median_b)`.
pub fn paired_medians(
    runs: &[RunRow],
    a: SolverVariant,
    b: SolverVariant,
    max_steps: u64,
) -> Vec<(String, f64, f64, f64)> {
    let pick = |sv: SolverVariant| {
        let rows: Vec<&RunRow> = runs
            .iter()
            .filter(|r| r.variant == sv.variant.as_str() && r.mode == sv.mode.as_str())
            .collect();
        summarize(&rows, max_steps)
    };
    let (sa, sb) = (pick(a), pick(b));
    sa.into_iter()
        .filter_map(|(id, s)| {
            let other = sb.get(&id)?;
            let ma = median(&mut s.censored.clone());
            let mb = median(&mut other.censored.clone());
            Some((id, s.alpha, ma, mb))
        })
        .collect()
}

fn csv_bytes<T: Serialize>(rows: &[T], header: &str) -> Result<Vec<u8>> {
    if rows.is_empty() {
        return Ok(format!("{header}\n").into_bytes());
    }
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        for r in rows {
            w.serialize(r)?;
        }
        w.flush()?;
    }
    Ok(buf)
}

pub const RUN_TABLE_HEADER: &str = "instance_id,path,n,m,alpha,variant,mode,run_index,seed,steps,solved";

pub fn write_run_table(path: impl AsRef<Path>, runs: &[RunRow]) -> Result<()> {
    write_atomic(path.as_ref(), &csv_bytes(runs, RUN_TABLE_HEADER)?)
}

pub fn read_run_table(path: impl AsRef<Path>) -> Result<Vec<RunRow>> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<Result<Vec<RunRow>, _>>()?)
}

pub fn write_trace_table(path: impl AsRef<Path>, traces: &[TraceRow]) -> Result<()> {
    write_atomic(
        path.as_ref(),
        &csv_bytes(traces, "instance_id,variant,mode,run_index,step,violations")?,
    )
}

pub fn read_trace_table(path: impl AsRef<Path>) -> Result<Vec<TraceRow>> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<Result<Vec<TraceRow>, _>>()?)
}

#[derive(Serialize)]
struct AlphaCsvRow<'a> {
    variant: &'a str,
    mode: &'a str,
    alpha: f64,
    instances: usize,
    mean_steps: f64,
    median_steps: f64,
    solve_rate: f64,
}

#[derive(Serialize)]
struct StepCsvRow<'a> {
    variant: &'a str,
    mode: &'a str,
    step: u64,
    solved_fraction: f64,
    mean_violations: Option<f64>,
}

/// Writes `runs.csv`, `traces.csv` (when traced), `metrics.json`,
/// `alpha_curves.csv` and `step_curves.csv` into `dir`.
pub fn write_bench_outputs(dir: impl AsRef<Path>, output: &BenchOutput, report: &MetricsReport) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    write_run_table(dir.join("runs.csv"), &output.runs)?;
    if !output.traces.is_empty() {
        write_trace_table(dir.join("traces.csv"), &output.traces)?;
    }
    let json = serde_json::to_string_pretty(report).map_err(|e| Error::Bench(e.to_string()))?;
    write_atomic(&dir.join("metrics.json"), format!("{json}\n").as_bytes())?;

    let alpha_rows: Vec<AlphaCsvRow> = report
        .variants
        .iter()
        .flat_map(|v| {
            v.alpha_curve.iter().map(move |p| AlphaCsvRow {
                variant: &v.variant,
                mode: &v.mode,
                alpha: p.alpha,
                instances: p.instances,
                mean_steps: p.mean_steps,
                median_steps: p.median_steps,
                solve_rate: p.solve_rate,
            })
        })
        .collect();
    write_atomic(
        &dir.join("alpha_curves.csv"),
        &csv_bytes(&alpha_rows, "variant,mode,alpha,instances,mean_steps,median_steps,solve_rate")?,
    )?;
    let step_rows: Vec<StepCsvRow> = report
        .variants
        .iter()
        .flat_map(|v| {
            v.step_curve.iter().map(move |p| StepCsvRow {
                variant: &v.variant,
                mode: &v.mode,
                step: p.step,
                solved_fraction: p.solved_fraction,
                mean_violations: p.mean_violations,
            })
        })
        .collect();
    write_atomic(
        &dir.join("step_curves.csv"),
        &csv_bytes(&step_rows, "variant,mode,step,solved_fraction,mean_violations")?,
    )?;
    Ok(())
}
