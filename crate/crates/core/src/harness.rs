//! Monte Carlo trial orchestration, aggregate statistics and CSV output.
//!
//! A [`Config`] names a suite and a parameter grid. Every trial gets its own
//! stream derived from the master seed and its global trial id, trials run on
//! a rayon pool, and reports come back in trial-id order, so the CSV depends
//! only on the config and the master seed (and on wall time, unless
//! `record_wall_time = false`).
//!
//! CSV schemas, one header row then one row per trial:
//!
//! | suite        | columns |
//! |--------------|---------|
//! | `estimate`   | `trial_id,seed,n,h_true,eps,delta,h_tilde,success,queries,fallback,time_us` |
//! | `strong`     | `trial_id,seed,n,h_true,threshold,eps,h_tilde,success,queries,time_us` |
//! | `weak`       | `trial_id,seed,n,h_true,threshold,hits,verdict,success,queries,time_us` |
//! | `ptp_hindex` | `trial_id,seed,m,k,gamma,delta,label,popcount,answer,success,queries,budget,exhausted,time_us` |
//! | `gx_verify`  | `trial_id,seed,m,passed,failed_checks,queries,time_us` |
//!
//! `success` is judged against ground truth held by the harness: the exact
//! h-index of the generated array, or the PTP label.

use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::estimator::{estimate_h_index, strong_estimate, weak_estimate, EstimatorParams, SamplingMode, Verdict};
use crate::exact::exact_h_index;
use crate::gen::{generate_array, GenSpec, LowProfile};
use crate::hardness::ptp::{popcount, sample_ptp, PtpParams};
use crate::hardness::reduction::{ptp_via_hindex, Answer, BudgetPolicy, EstimatorSolver};
use crate::hardness::verify::verify_gx;
use crate::oracle::{ArrayData, ArrayOracle};
use crate::rng::RngHandle;

/// z-score of the one-sided upper confidence bound on failure rates.
pub const CONFIDENCE_Z: f64 = 3.0;

/// Relative tolerance of [`scaling_check`].
pub const SCALING_TOLERANCE: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Estimate,
    Weak,
    Strong,
    PtpHindex,
    GxVerify,
}

impl std::str::FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "estimate" => Suite::Estimate,
            "weak" => Suite::Weak,
            "strong" => Suite::Strong,
            "ptp_hindex" => Suite::PtpHindex,
            "gx_verify" => Suite::GxVerify,
            other => return Err(Error::InvalidConfig(format!("unknown suite {other:?}"))),
        })
    }
}

impl Suite {
    pub fn csv_header(self) -> &'static str {
        match self {
            Suite::Estimate => "trial_id,seed,n,h_true,eps,delta,h_tilde,success,queries,fallback,time_us",
            Suite::Strong => "trial_id,seed,n,h_true,threshold,eps,h_tilde,success,queries,time_us",
            Suite::Weak => "trial_id,seed,n,h_true,threshold,hits,verdict,success,queries,time_us",
            Suite::PtpHindex => {
                "trial_id,seed,m,k,gamma,delta,label,popcount,answer,success,queries,budget,exhausted,time_us"
            }
            Suite::GxVerify => "trial_id,seed,m,passed,failed_checks,queries,time_us",
        }
    }
}

/// Grid axes. Every axis a suite uses needs at least one value; the grid is
/// their cartesian product. `threshold` defaults to `h` for the weak and
/// strong suites.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    #[serde(default)]
    pub n: Vec<u64>,
    #[serde(default)]
    pub h: Vec<u64>,
    #[serde(default)]
    pub threshold: Vec<u64>,
    #[serde(default)]
    pub eps: Vec<f64>,
    #[serde(default)]
    pub delta: Vec<f64>,
    #[serde(default)]
    pub m: Vec<u64>,
    #[serde(default)]
    pub k: Vec<u64>,
    #[serde(default)]
    pub gamma: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    /// May be left out when the caller picks the suite.
    pub suite: Option<Suite>,
    pub trials: u64,
    #[serde(default)]
    pub grid: Grid,
    #[serde(default)]
    pub sampling: SamplingMode,
    /// Value of the `h` high entries; defaults to `n`.
    pub high_value: Option<u64>,
    #[serde(default)]
    pub low_profile: LowProfile,
    /// When false `time_us` is written as 0 and the CSV is byte-for-byte
    /// reproducible.
    #[serde(default = "default_true")]
    pub record_wall_time: bool,
    /// Edge samples per `gx_verify` trial.
    #[serde(default = "default_edge_samples")]
    pub edge_samples: u64,
}

fn default_true() -> bool {
    true
}

fn default_edge_samples() -> u64 {
    100_000
}

impl Config {
    pub fn new(suite: Suite, trials: u64, grid: Grid) -> Self {
        Self {
            suite: Some(suite),
            trials,
            grid,
            sampling: SamplingMode::default(),
            high_value: None,
            low_profile: LowProfile::default(),
            record_wall_time: true,
            edge_samples: default_edge_samples(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn suite(&self) -> Result<Suite> {
        self.suite.ok_or_else(|| Error::InvalidConfig("no suite named".into()))
    }
}

/// One cell of the grid. Axes a suite does not use stay at zero.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GridPoint {
    pub n: u64,
    pub h: u64,
    pub threshold: u64,
    pub eps: f64,
    pub delta: f64,
    pub m: u64,
    pub k: u64,
    pub gamma: f64,
}

fn axis<T: Copy>(name: &str, values: &[T]) -> Result<Vec<T>> {
    if values.is_empty() {
        return Err(Error::InvalidConfig(format!("grid axis {name} is empty")));
    }
    Ok(values.to_vec())
}

fn product<T: Copy>(points: Vec<GridPoint>, values: &[T], set: impl Fn(&mut GridPoint, T)) -> Vec<GridPoint> {
    let mut out = Vec::with_capacity(points.len() * values.len());
    for p in points {
        for &v in values {
            let mut q = p;
            set(&mut q, v);
            out.push(q);
        }
    }
    out
}

impl Grid {
    pub fn points(&self, suite: Suite) -> Result<Vec<GridPoint>> {
        let mut pts = vec![GridPoint::default()];
        match suite {
            Suite::Estimate | Suite::Weak | Suite::Strong => {
                pts = product(pts, &axis("n", &self.n)?, |p, v| p.n = v);
                pts = product(pts, &axis("h", &self.h)?, |p, v| p.h = v);
                if suite != Suite::Estimate {
                    if self.threshold.is_empty() {
                        pts.iter_mut().for_each(|p| p.threshold = p.h);
                    } else {
                        pts = product(pts, &self.threshold, |p, v| p.threshold = v);
                    }
                }
                if suite != Suite::Weak {
                    pts = product(pts, &axis("eps", &self.eps)?, |p, v| p.eps = v);
                }
                if suite == Suite::Estimate {
                    pts = product(pts, &axis("delta", &self.delta)?, |p, v| p.delta = v);
                }
            }
            Suite::PtpHindex => {
                pts = product(pts, &axis("m", &self.m)?, |p, v| p.m = v);
                pts = product(pts, &axis("k", &self.k)?, |p, v| p.k = v);
                pts = product(pts, &axis("gamma", &self.gamma)?, |p, v| p.gamma = v);
                pts = product(pts, &axis("delta", &self.delta)?, |p, v| p.delta = v);
            }
            Suite::GxVerify => {
                pts = product(pts, &axis("m", &self.m)?, |p, v| p.m = v);
            }
        }
        Ok(pts)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrialOutput {
    Estimate {
        h_tilde: u64,
        fallback: bool,
    },
    Strong {
        h_tilde: u64,
    },
    Weak {
        verdict: Verdict,
        hits: u64,
    },
    Ptp {
        label: u8,
        popcount: u64,
        answer: Answer,
        budget: u64,
        exhausted: bool,
    },
    Gx {
        failed_checks: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialReport {
    pub trial_id: u64,
    pub seed: u64,
    pub point_index: usize,
    pub point: GridPoint,
    /// Exact h-index of the array, 0 for suites without one.
    pub h_true: u64,
    pub output: TrialOutput,
    pub success: bool,
    pub queries_used: u64,
    /// Queries spent after the while-loop; equals `queries_used` for the
    /// strong suite and 0 elsewhere.
    pub strong_queries: u64,
    pub wall_time_micros: u64,
}

fn b(v: bool) -> u8 {
    v as u8
}

impl TrialReport {
    pub fn csv_row(&self) -> String {
        let p = &self.point;
        let (id, seed, t) = (self.trial_id, self.seed, self.wall_time_micros);
        let (ok, q) = (b(self.success), self.queries_used);
        match &self.output {
            TrialOutput::Estimate { h_tilde, fallback } => format!(
                "{id},{seed},{},{},{},{},{h_tilde},{ok},{q},{},{t}",
                p.n,
                self.h_true,
                p.eps,
                p.delta,
                b(*fallback)
            ),
            TrialOutput::Strong { h_tilde } => {
                format!(
                    "{id},{seed},{},{},{},{},{h_tilde},{ok},{q},{t}",
                    p.n, self.h_true, p.threshold, p.eps
                )
            }
            TrialOutput::Weak { verdict, hits } => {
                let v = if *verdict == Verdict::Large { "large" } else { "small" };
                format!(
                    "{id},{seed},{},{},{},{hits},{v},{ok},{q},{t}",
                    p.n, self.h_true, p.threshold
                )
            }
            TrialOutput::Ptp {
                label,
                popcount,
                answer,
                budget,
                exhausted,
            } => {
                let a = if *answer == Answer::Yes { "yes" } else { "no" };
                format!(
                    "{id},{seed},{},{},{},{},{label},{popcount},{a},{ok},{q},{budget},{},{t}",
                    p.m,
                    p.k,
                    p.gamma,
                    p.delta,
                    b(*exhausted)
                )
            }
            TrialOutput::Gx { failed_checks } => format!("{id},{seed},{},{ok},{failed_checks},{q},{t}", p.m),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Quantiles {
    pub p50: u64,
    pub p90: u64,
    pub max: u64,
}

impl Quantiles {
    /// Nearest-rank quantiles.
    pub fn of(values: &[u64]) -> Self {
        if values.is_empty() {
            return Self::default();
        }
        let mut v = values.to_vec();
        v.sort_unstable();
        let rank = |q: f64| v[((q * v.len() as f64).ceil() as usize).clamp(1, v.len()) - 1];
        Self {
            p50: rank(0.5),
            p90: rank(0.9),
            max: *v.last().unwrap(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateStats {
    pub point: GridPoint,
    pub trials: u64,
    pub failures: u64,
    pub failure_rate: f64,
    pub failure_rate_upper_bound: f64,
    pub queries: Quantiles,
    pub strong_queries: Quantiles,
}

/// One-sided Wilson score upper bound for `failures` out of `trials`.
pub fn wilson_upper(failures: u64, trials: u64, z: f64) -> f64 {
    if trials == 0 {
        return 1.0;
    }
    let n = trials as f64;
    let p = failures as f64 / n;
    let z2 = z * z;
    let centre = p + z2 / (2.0 * n);
    let spread = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((centre + spread) / (1.0 + z2 / n)).min(1.0)
}

impl AggregateStats {
    pub fn from_reports(point: GridPoint, reports: &[&TrialReport]) -> Self {
        let trials = reports.len() as u64;
        let failures = reports.iter().filter(|r| !r.success).count() as u64;
        let q: Vec<u64> = reports.iter().map(|r| r.queries_used).collect();
        let s: Vec<u64> = reports.iter().map(|r| r.strong_queries).collect();
        Self {
            point,
            trials,
            failures,
            failure_rate: if trials == 0 {
                0.0
            } else {
                failures as f64 / trials as f64
            },
            failure_rate_upper_bound: wilson_upper(failures, trials, CONFIDENCE_Z),
            queries: Quantiles::of(&q),
            strong_queries: Quantiles::of(&s),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SuiteResult {
    pub suite: Suite,
    pub reports: Vec<TrialReport>,
    pub aggregates: Vec<AggregateStats>,
}

impl SuiteResult {
    pub fn csv(&self) -> String {
        let mut out = String::new();
        out.push_str(self.suite.csv_header());
        out.push('\n');
        for r in &self.reports {
            out.push_str(&r.csv_row());
            out.push('\n');
        }
        out
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        for a in &self.aggregates {
            let p = &a.point;
            let cell = match self.suite {
                Suite::Estimate => format!("n={} h={} eps={} delta={}", p.n, p.h, p.eps, p.delta),
                Suite::Strong => format!("n={} h={} T={} eps={}", p.n, p.h, p.threshold, p.eps),
                Suite::Weak => format!("n={} h={} T={}", p.n, p.h, p.threshold),
                Suite::PtpHindex => format!("m={} k={} gamma={} delta={}", p.m, p.k, p.gamma, p.delta),
                Suite::GxVerify => format!("m={}", p.m),
            };
            let _ = writeln!(
                out,
                "{cell}: trials={} failures={} rate={:.4} upper={:.4} queries p50={} p90={} max={}",
                a.trials,
                a.failures,
                a.failure_rate,
                a.failure_rate_upper_bound,
                a.queries.p50,
                a.queries.p90,
                a.queries.max
            );
        }
        out
    }
}

/// Data shared by all trials of one grid point.
enum Prepared {
    Array { data: Arc<ArrayData>, h_true: u64 },
    Ptp(PtpParams),
    Gx,
}

fn prepare(config: &Config, suite: Suite, point: &GridPoint, handle: &RngHandle) -> Result<Prepared> {
    match suite {
        Suite::Estimate | Suite::Weak | Suite::Strong => {
            let mut spec = GenSpec::new(point.n as usize, point.h as usize);
            spec.high_value = config.high_value.unwrap_or(point.n);
            spec.low_profile = config.low_profile;
            let values = generate_array(&spec, handle)?;
            let h_true = exact_h_index(&values) as u64;
            check_array_point(suite, point)?;
            Ok(Prepared::Array {
                data: Arc::new(ArrayData::new(values)?),
                h_true,
            })
        }
        Suite::PtpHindex => {
            let params = PtpParams::new(point.m as usize, point.k, point.gamma, point.delta);
            params.validate()?;
            Ok(Prepared::Ptp(params))
        }
        Suite::GxVerify => {
            crate::hardness::verify::bits_for_edges(point.m)?;
            Ok(Prepared::Gx)
        }
    }
}

fn check_array_point(suite: Suite, point: &GridPoint) -> Result<()> {
    if suite != Suite::Estimate && (point.threshold == 0 || point.threshold > point.n) {
        return Err(Error::InvalidConfig(format!(
            "threshold {} outside [1, {}]",
            point.threshold, point.n
        )));
    }
    if suite != Suite::Weak {
        EstimatorParams::new(point.eps, if suite == Suite::Estimate { point.delta } else { 0.5 })?;
    }
    Ok(())
}

fn within(h_tilde: u64, h: u64, eps: f64) -> bool {
    (h_tilde as f64 - h as f64).abs() <= eps * h as f64
}

fn unaccounted(what: &str, reported: u64, counted: u64) -> Error {
    Error::PromiseViolated(format!(
        "{what} reported {reported} queries but the oracle counted {counted}"
    ))
}

fn run_trial(
    config: &Config,
    suite: Suite,
    prepared: &Prepared,
    point: &GridPoint,
    handle: &RngHandle,
) -> Result<(TrialOutput, u64, bool, u64, u64)> {
    match prepared {
        Prepared::Array { data, h_true } => {
            let mut oracle = ArrayOracle::from_shared(Arc::clone(data));
            let h = *h_true;
            match suite {
                Suite::Estimate => {
                    let params = EstimatorParams::new(point.eps, point.delta)?.with_sampling(config.sampling);
                    let est = estimate_h_index(&mut oracle, &params, handle)?;
                    if est.queries_used != oracle.query_count() {
                        return Err(unaccounted("estimate", est.queries_used, oracle.query_count()));
                    }
                    let ok = within(est.h_tilde, h, point.eps);
                    let out = TrialOutput::Estimate {
                        h_tilde: est.h_tilde,
                        fallback: est.exact_fallback,
                    };
                    Ok((out, h, ok, est.queries_used, est.strong_queries))
                }
                Suite::Strong => {
                    let est = strong_estimate(&mut oracle, point.threshold, point.eps, handle, config.sampling)?;
                    if est.queries_used != oracle.query_count() {
                        return Err(unaccounted("strong", est.queries_used, oracle.query_count()));
                    }
                    let ok = within(est.h_tilde, h, point.eps);
                    Ok((
                        TrialOutput::Strong { h_tilde: est.h_tilde },
                        h,
                        ok,
                        est.queries_used,
                        est.queries_used,
                    ))
                }
                _ => {
                    let v = weak_estimate(&mut oracle, point.threshold, handle, config.sampling)?;
                    if v.queries_used != oracle.query_count() {
                        return Err(unaccounted("weak", v.queries_used, oracle.query_count()));
                    }
                    // Large is owed when h >= T and Small when 8h <= T; in
                    // between either verdict is acceptable.
                    let t = point.threshold;
                    let ok = if h >= t {
                        v.verdict == Verdict::Large
                    } else if 8 * h <= t {
                        v.verdict == Verdict::Small
                    } else {
                        true
                    };
                    Ok((
                        TrialOutput::Weak {
                            verdict: v.verdict,
                            hits: v.hits,
                        },
                        h,
                        ok,
                        v.queries_used,
                        0,
                    ))
                }
            }
        }
        Prepared::Ptp(params) => {
            let inst = sample_ptp(params, None, &handle.split(0))?;
            let mut solver = EstimatorSolver {
                sampling: config.sampling,
            };
            let out = ptp_via_hindex(&inst, params, &mut solver, BudgetPolicy::Enforced, &handle.split(1))?;
            if out.queries_used > out.budget {
                return Err(Error::PromiseViolated(format!(
                    "reduction answered {} queries over a budget of {}",
                    out.queries_used, out.budget
                )));
            }
            let ok = out.answer == Answer::expected(inst.label);
            let output = TrialOutput::Ptp {
                label: inst.label,
                popcount: popcount(&inst.x),
                answer: out.answer,
                budget: out.budget,
                exhausted: out.exhausted,
            };
            Ok((output, 0, ok, out.queries_used, 0))
        }
        Prepared::Gx => {
            let report = verify_gx(point.m, 1, config.edge_samples, handle)?;
            let failed = report.checks.iter().filter(|c| !c.passed).count();
            Ok((TrialOutput::Gx { failed_checks: failed }, 0, failed == 0, 0, 0))
        }
    }
}

/// Runs every trial of every grid point. Trial ids run consecutively over
/// the grid in order; trial `i` draws from `master.split(i)` and the array
/// of grid point `j` from `master.split(u64::MAX - j)`. With `jobs = None`
/// rayon's global pool is used.
pub fn run_suite(config: &Config, master: &RngHandle, jobs: Option<usize>) -> Result<SuiteResult> {
    let suite = config.suite()?;
    if config.trials == 0 {
        return Err(Error::InvalidConfig("trials must be at least 1".into()));
    }
    let points = config.grid.points(suite)?;
    let prepared = points
        .iter()
        .enumerate()
        .map(|(j, p)| prepare(config, suite, p, &master.split(u64::MAX - j as u64)))
        .collect::<Result<Vec<_>>>()?;

    execute(config, suite, &points, &prepared, master, jobs)
}

/// Runs an array suite (`estimate`, `weak` or `strong`) on a given array
/// instead of a generated one. `n` and `h` of `point` are taken from the
/// array; trial `i` draws from `master.split(i)`.
pub fn run_on_array(
    config: &Config,
    values: Vec<u64>,
    mut point: GridPoint,
    master: &RngHandle,
    jobs: Option<usize>,
) -> Result<SuiteResult> {
    let suite = config.suite()?;
    if !matches!(suite, Suite::Estimate | Suite::Weak | Suite::Strong) {
        return Err(Error::InvalidConfig("only array suites run on a given array".into()));
    }
    if config.trials == 0 {
        return Err(Error::InvalidConfig("trials must be at least 1".into()));
    }
    let h_true = exact_h_index(&values) as u64;
    let data = Arc::new(ArrayData::new(values)?);
    point.n = data.len() as u64;
    point.h = h_true;
    check_array_point(suite, &point)?;
    execute(
        config,
        suite,
        &[point],
        &[Prepared::Array { data, h_true }],
        master,
        jobs,
    )
}

fn execute(
    config: &Config,
    suite: Suite,
    points: &[GridPoint],
    prepared: &[Prepared],
    master: &RngHandle,
    jobs: Option<usize>,
) -> Result<SuiteResult> {
    let total = points.len() as u64 * config.trials;
    let work = || {
        (0..total)
            .into_par_iter()
            .map(|trial_id| {
                let j = (trial_id / config.trials) as usize;
                let point = &points[j];
                let handle = master.split(trial_id);
                let start = Instant::now();
                let (output, h_true, success, queries_used, strong_queries) =
                    run_trial(config, suite, &prepared[j], point, &handle)?;
                let wall = if config.record_wall_time {
                    start.elapsed().as_micros() as u64
                } else {
                    0
                };
                Ok(TrialReport {
                    trial_id,
                    seed: handle.seed,
                    point_index: j,
                    point: *point,
                    h_true,
                    output,
                    success,
                    queries_used,
                    strong_queries,
                    wall_time_micros: wall,
                })
            })
            .collect::<Result<Vec<_>>>()
    };
    let reports = match jobs {
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build()
            .map_err(|e| Error::InvalidConfig(e.to_string()))?
            .install(work)?,
        None => work()?,
    };

    let aggregates = points
        .iter()
        .enumerate()
        .map(|(j, p)| {
            let mine: Vec<&TrialReport> = reports.iter().filter(|r| r.point_index == j).collect();
            AggregateStats::from_reports(*p, &mine)
        })
        .collect();
    Ok(SuiteResult {
        suite,
        reports,
        aggregates,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    H,
    Eps,
    Delta,
    N,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioCheck {
    pub axis: Axis,
    pub from: f64,
    pub to: f64,
    pub expected: f64,
    pub observed: f64,
    pub lo: f64,
    pub hi: f64,
    pub passed: bool,
}

fn axis_value(p: &GridPoint, a: Axis) -> f64 {
    match a {
        Axis::H => p.h as f64,
        Axis::Eps => p.eps,
        Axis::Delta => p.delta,
        Axis::N => p.n as f64,
    }
}

/// Median-query ratios between adjacent grid points along the single axis
/// that varies, compared with the ratio predicted by a cost of
/// `n·ln(1/δ)/(ε²h)`. Along ε only strong-phase queries count, since the
/// while-loop does not depend on ε.
pub fn scaling_check(runs: &[AggregateStats]) -> Result<Vec<RatioCheck>> {
    let varying: Vec<Axis> = [Axis::H, Axis::Eps, Axis::Delta, Axis::N]
        .into_iter()
        .filter(|&a| {
            runs.iter()
                .any(|r| axis_value(&r.point, a) != axis_value(&runs[0].point, a))
        })
        .collect();
    if varying.len() != 1 {
        return Err(Error::InvalidConfig(format!(
            "scaling check needs exactly one varying axis among h, eps, delta, n; found {}",
            varying.len()
        )));
    }
    let a = varying[0];
    let mut sorted: Vec<&AggregateStats> = runs.iter().collect();
    sorted.sort_by(|x, y| axis_value(&x.point, a).total_cmp(&axis_value(&y.point, a)));
    let median = |r: &AggregateStats| {
        if a == Axis::Eps {
            r.strong_queries.p50
        } else {
            r.queries.p50
        }
    };
    Ok(sorted
        .windows(2)
        .map(|w| {
            let (x, y) = (axis_value(&w[0].point, a), axis_value(&w[1].point, a));
            let expected = match a {
                Axis::H => x / y,
                Axis::Eps => (x / y).powi(2),
                Axis::Delta => (8.0 / y).ln() / (8.0 / x).ln(),
                Axis::N => y / x,
            };
            let observed = median(w[1]) as f64 / median(w[0]).max(1) as f64;
            let (lo, hi) = (
                expected * (1.0 - SCALING_TOLERANCE),
                expected * (1.0 + SCALING_TOLERANCE),
            );
            RatioCheck {
                axis: a,
                from: x,
                to: y,
                expected,
                observed,
                lo,
                hi,
                passed: observed >= lo && observed <= hi,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_estimate_config() -> Config {
        let grid = Grid {
            n: vec![5000],
            h: vec![400],
            eps: vec![0.25],
            delta: vec![0.1],
            ..Grid::default()
        };
        let mut c = Config::new(Suite::Estimate, 20, grid);
        c.record_wall_time = false;
        c
    }

    #[test]
    fn zero_trials_rejected() {
        let mut c = small_estimate_config();
        c.trials = 0;
        assert!(matches!(
            run_suite(&c, &RngHandle::from_seed(1), None),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn missing_axis_rejected() {
        let mut c = small_estimate_config();
        c.grid.eps.clear();
        assert!(matches!(
            run_suite(&c, &RngHandle::from_seed(1), None),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn csv_is_reproducible_across_pool_sizes() {
        let c = small_estimate_config();
        let a = run_suite(&c, &RngHandle::from_seed(3), Some(1)).unwrap().csv();
        let b = run_suite(&c, &RngHandle::from_seed(3), Some(4)).unwrap().csv();
        assert_eq!(a, b);
        assert!(a.starts_with("trial_id,seed,n,h_true,eps,delta,h_tilde,success,queries,fallback,time_us\n"));
        assert_eq!(a.lines().count(), 21);
        let c2 = run_suite(&c, &RngHandle::from_seed(4), Some(2)).unwrap().csv();
        assert_ne!(a, c2);
    }

    #[test]
    fn trial_ids_in_order() {
        let mut c = small_estimate_config();
        c.grid.h = vec![100, 400];
        let r = run_suite(&c, &RngHandle::from_seed(5), None).unwrap();
        let ids: Vec<u64> = r.reports.iter().map(|t| t.trial_id).collect();
        assert_eq!(ids, (0..40).collect::<Vec<_>>());
        assert_eq!(r.aggregates.len(), 2);
        assert_eq!(r.reports[25].point.h, 400);
        assert!(r.reports.iter().all(|t| t.h_true == t.point.h));
    }

    #[test]
    fn toml_round() {
        let c = Config::from_toml(
            "suite = \"weak\"\ntrials = 3\nsampling = \"per_read\"\nrecord_wall_time = false\n[grid]\nn = [1000]\nh = [100]\nthreshold = [100, 800]\n",
        )
        .unwrap();
        assert_eq!(c.suite, Some(Suite::Weak));
        assert_eq!(c.sampling, SamplingMode::PerRead);
        let pts = c.grid.points(Suite::Weak).unwrap();
        assert_eq!(pts.iter().map(|p| p.threshold).collect::<Vec<_>>(), vec![100, 800]);
        assert!(Config::from_toml("trials = 1\nbogus = 2\n").is_err());
        let r = run_suite(&c, &RngHandle::from_seed(2), None).unwrap();
        assert!(r.csv().starts_with(Suite::Weak.csv_header()));
    }

    #[test]
    fn other_suites_run() {
        let mut c = Config::new(
            Suite::Strong,
            5,
            Grid {
                n: vec![2000],
                h: vec![300],
                eps: vec![0.3],
                ..Grid::default()
            },
        );
        c.record_wall_time = false;
        let r = run_suite(&c, &RngHandle::from_seed(6), None).unwrap();
        assert!(r
            .reports
            .iter()
            .all(|t| t.strong_queries == t.queries_used && t.queries_used > 0));

        let grid = Grid {
            m: vec![6000],
            k: vec![1000],
            gamma: vec![0.2],
            delta: vec![0.05],
            ..Grid::default()
        };
        let mut c = Config::new(Suite::PtpHindex, 4, grid);
        c.record_wall_time = false;
        let r = run_suite(&c, &RngHandle::from_seed(7), None).unwrap();
        assert!(r.reports.iter().all(|t| t.queries_used <= 11));
        assert_eq!(r.csv().lines().count(), 5);

        let mut c = Config::new(
            Suite::GxVerify,
            2,
            Grid {
                m: vec![16],
                ..Grid::default()
            },
        );
        c.edge_samples = 5000;
        let r = run_suite(&c, &RngHandle::from_seed(8), None).unwrap();
        assert_eq!(r.aggregates[0].failures, 0);
    }

    #[test]
    fn wilson_bounds() {
        assert!(wilson_upper(0, 2000, 3.0) < 0.005);
        let u = wilson_upper(50, 1000, 3.0);
        assert!(u > 0.05 && u < 0.08);
        assert_eq!(wilson_upper(0, 0, 3.0), 1.0);
    }

    #[test]
    fn quantiles_nearest_rank() {
        let q = Quantiles::of(&(1..=10).collect::<Vec<_>>());
        assert_eq!((q.p50, q.p90, q.max), (5, 9, 10));
        assert_eq!(Quantiles::of(&[]), Quantiles::default());
    }

    fn agg(h: u64, eps: f64, n: u64, q: u64, s: u64) -> AggregateStats {
        let point = GridPoint {
            n,
            h,
            eps,
            delta: 0.05,
            ..GridPoint::default()
        };
        AggregateStats {
            point,
            trials: 1,
            failures: 0,
            failure_rate: 0.0,
            failure_rate_upper_bound: 0.0,
            queries: Quantiles { p50: q, p90: q, max: q },
            strong_queries: Quantiles { p50: s, p90: s, max: s },
        }
    }

    #[test]
    fn scaling_rules() {
        let c = scaling_check(&[agg(1000, 0.1, 100, 500, 0), agg(500, 0.1, 100, 1000, 0)]).unwrap();
        assert_eq!(c.len(), 1);
        assert!((c[0].expected - 0.5).abs() < 1e-12 && c[0].passed);
        let c = scaling_check(&[agg(500, 0.1, 100, 0, 4000), agg(500, 0.2, 100, 0, 1000)]).unwrap();
        assert!((c[0].expected - 0.25).abs() < 1e-12 && c[0].passed);
        let c = scaling_check(&[agg(500, 0.1, 100, 100, 0), agg(500, 0.1, 200, 300, 0)]).unwrap();
        assert!((c[0].expected - 2.0).abs() < 1e-12 && !c[0].passed);
        assert!(scaling_check(&[agg(500, 0.1, 100, 1, 1), agg(1000, 0.2, 100, 1, 1)]).is_err());
        assert!(scaling_check(&[agg(500, 0.1, 100, 1, 1), agg(500, 0.1, 100, 1, 1)]).is_err());
    }
}
