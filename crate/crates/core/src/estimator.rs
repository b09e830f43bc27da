//! Randomized h-index estimators.
//!
//! [`weak_estimate`] answers "is h(A) plausibly at least T" with `⌈64n/T⌉`
//! reads. [`strong_estimate`] returns a (1 ± ε) estimate given a valid lower
//! bound `T <= h(A)` with `⌈6n/(ε²T)⌉` reads. [`estimate_h_index`] walks the
//! threshold down geometrically with majority votes of the weak test, then
//! takes the median of repeated strong estimates at a sixteenth of the
//! surviving threshold.

use rand::Rng;

use crate::error::{Error, Result};
use crate::exact::{exact_h_index, scaled_h_index, scaled_h_index_grouped, select_kth, Ratio};
use crate::oracle::ArrayOracle;
use crate::rng::{RngHandle, StreamCounter};

/// Below this threshold the while-loop stops and the h-index is computed
/// exactly: each weak round would already read Θ(n) entries.
pub const EXACT_FALLBACK_CUTOFF: u64 = 64;

/// How `k` uniform reads are performed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Deserialize, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingMode {
    /// One `read` per sample; the sampled array is materialised.
    PerRead,
    /// One bulk sampling query per invocation, charged as `k` reads.
    #[default]
    Batched,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Large,
    Small,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WeakVerdict {
    pub verdict: Verdict,
    pub queries_used: u64,
    pub threshold: u64,
    /// Samples with value `>= threshold`.
    pub hits: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HEstimate {
    pub h_tilde: u64,
    pub queries_used: u64,
    pub exact_fallback: bool,
    /// Threshold at which the while-loop stopped. On exact fallback this is
    /// the first threshold below the cutoff (or `n` when `n` is already
    /// below it).
    pub t_final: u64,
    /// Thresholds tested by the while-loop, in order.
    pub thresholds: Vec<u64>,
    pub weak_queries: u64,
    pub strong_queries: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorParams {
    pub eps: f64,
    pub delta: f64,
    pub r1: u64,
    pub r2: u64,
    pub sampling: SamplingMode,
}

impl EstimatorParams {
    /// `r1 = ⌈7 ln(8/δ)⌉`, `r2 = ⌈108 ln(8/δ)⌉`.
    pub fn new(eps: f64, delta: f64) -> Result<Self> {
        check_unit_open("eps", eps)?;
        check_unit_open("delta", delta)?;
        let l = (8.0 / delta).ln();
        Ok(Self {
            eps,
            delta,
            r1: (7.0 * l).ceil() as u64,
            r2: (108.0 * l).ceil() as u64,
            sampling: SamplingMode::default(),
        })
    }

    pub fn with_sampling(mut self, sampling: SamplingMode) -> Self {
        self.sampling = sampling;
        self
    }
}

fn check_unit_open(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must lie in (0, 1), got {v}")))
    }
}

/// Ceiling that ignores floating-point noise just above an integer.
fn ceil_count(x: f64) -> u64 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * x.max(1.0) {
        r as u64
    } else {
        x.ceil() as u64
    }
}

/// `⌈64n/T⌉`
pub fn weak_sample_size(n: u64, threshold: u64) -> u64 {
    (64 * n).div_ceil(threshold)
}

/// `⌈6n/(ε²T)⌉`
pub fn strong_sample_size(n: u64, threshold: u64, eps: f64) -> u64 {
    ceil_count(6.0 * n as f64 / (eps * eps * threshold as f64))
}

fn check_threshold(oracle: &ArrayOracle, threshold: u64) -> Result<()> {
    let n = oracle.len() as u64;
    if threshold == 0 || threshold > n {
        return Err(Error::invalid(format!("threshold {threshold} outside [1, {n}]")));
    }
    Ok(())
}

fn read_uniform<R: Rng>(oracle: &mut ArrayOracle, rng: &mut R) -> Result<u64> {
    let n = oracle.len();
    Ok(oracle.read(rng.random_range(1..=n))?)
}

pub fn weak_estimate(
    oracle: &mut ArrayOracle,
    threshold: u64,
    handle: &RngHandle,
    mode: SamplingMode,
) -> Result<WeakVerdict> {
    check_threshold(oracle, threshold)?;
    let n = oracle.len() as u64;
    let k = weak_sample_size(n, threshold);
    let mut rng = handle.rng();
    let hits = match mode {
        SamplingMode::PerRead => {
            let mut hits = 0;
            for _ in 0..k {
                if read_uniform(oracle, &mut rng)? >= threshold {
                    hits += 1;
                }
            }
            hits
        }
        SamplingMode::Batched => oracle.sample_count_at_least(k, threshold, &mut rng)?,
    };
    // X >= kT/(2n)
    let large = 2 * n as u128 * hits as u128 >= k as u128 * threshold as u128;
    Ok(WeakVerdict {
        verdict: if large { Verdict::Large } else { Verdict::Small },
        queries_used: k,
        threshold,
        hits,
    })
}

pub fn strong_estimate(
    oracle: &mut ArrayOracle,
    threshold: u64,
    eps: f64,
    handle: &RngHandle,
    mode: SamplingMode,
) -> Result<HEstimate> {
    check_threshold(oracle, threshold)?;
    check_unit_open("eps", eps)?;
    let n = oracle.len() as u64;
    let k = strong_sample_size(n, threshold, eps);
    let alpha = Ratio { num: k, den: n };
    let mut rng = handle.rng();
    let h_tilde = match mode {
        SamplingMode::PerRead => {
            let mut b = Vec::with_capacity(k as usize);
            for _ in 0..k {
                b.push(read_uniform(oracle, &mut rng)?);
            }
            scaled_h_index(&b, alpha, n)
        }
        SamplingMode::Batched => {
            let groups = oracle.sample_histogram(k, &mut rng)?;
            scaled_h_index_grouped(groups, alpha, n)
        }
    };
    Ok(HEstimate {
        h_tilde,
        queries_used: k,
        exact_fallback: false,
        t_final: threshold,
        thresholds: Vec::new(),
        weak_queries: 0,
        strong_queries: k,
    })
}

/// Reads all `n` entries and computes the h-index exactly.
fn exact_via_oracle(oracle: &mut ArrayOracle) -> Result<u64> {
    let n = oracle.len();
    let mut values = Vec::with_capacity(n);
    for i in 1..=n {
        values.push(oracle.read(i)?);
    }
    Ok(exact_h_index(&values) as u64)
}

pub fn estimate_h_index(oracle: &mut ArrayOracle, params: &EstimatorParams, handle: &RngHandle) -> Result<HEstimate> {
    let n = oracle.len() as u64;
    let start = oracle.query_count();
    let mut streams = StreamCounter::new(*handle);
    let mut thresholds = Vec::new();
    let mut weak_queries = 0;

    let mut t = n;
    let mut fallback = t < EXACT_FALLBACK_CUTOFF;
    while !fallback {
        thresholds.push(t);
        let mut small = 0;
        for _ in 0..params.r1 {
            let v = weak_estimate(oracle, t, &streams.next_handle(), params.sampling)?;
            weak_queries += v.queries_used;
            if v.verdict == Verdict::Small {
                small += 1;
            }
        }
        // strict majority of Small continues; a tie exits
        if 2 * small <= params.r1 {
            break;
        }
        t /= 4;
        fallback = t < EXACT_FALLBACK_CUTOFF;
    }

    if fallback {
        let h = exact_via_oracle(oracle)?;
        return Ok(HEstimate {
            h_tilde: h,
            queries_used: oracle.query_count() - start,
            exact_fallback: true,
            t_final: t,
            thresholds,
            weak_queries,
            strong_queries: 0,
        });
    }

    let strong_t = (t / 16).max(1);
    let mut answers = Vec::with_capacity(params.r2 as usize);
    let mut strong_queries = 0;
    for _ in 0..params.r2 {
        let e = strong_estimate(oracle, strong_t, params.eps, &streams.next_handle(), params.sampling)?;
        strong_queries += e.queries_used;
        answers.push(e.h_tilde);
    }
    // lower median
    let rank = answers.len().div_ceil(2);
    let h_tilde = select_kth(&mut answers, rank)?;
    Ok(HEstimate {
        h_tilde,
        queries_used: oracle.query_count() - start,
        exact_fallback: false,
        t_final: t,
        thresholds,
        weak_queries,
        strong_queries,
    })
}

/// Deterministic read count implied by a run's trace:
/// `r1·Σ⌈64n/T_j⌉` over tested thresholds plus either `n` (exact fallback)
/// or `r2·⌈6n/(ε²·max(1, ⌊T/16⌋))⌉`.
pub fn query_bound(n: u64, params: &EstimatorParams, est: &HEstimate) -> u64 {
    let weak: u64 = est.thresholds.iter().map(|&t| params.r1 * weak_sample_size(n, t)).sum();
    let tail = if est.exact_fallback {
        n
    } else {
        params.r2 * strong_sample_size(n, (est.t_final / 16).max(1), params.eps)
    };
    weak + tail
}
