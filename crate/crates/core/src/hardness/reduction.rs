//! Budgeted decision procedures for popcount thresholding built on top of an
//! h-index solver and a triangle-counting solver.
//!
//! Both reductions hand the solver a query interface with a hard budget. A
//! solver that runs out of budget is stopped and the answer is `No`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::estimator::{estimate_h_index, EstimatorParams, SamplingMode};
use crate::hardness::ptp::{PtpInstance, PtpParams};
use crate::hardness::triangle::{TriangleOracle, Vertex};
use crate::oracle::{ArrayData, ArrayOracle};
use crate::rng::RngHandle;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Answer {
    Yes,
    No,
}

impl Answer {
    /// `Yes` for label 1, `No` for label 0.
    pub fn expected(label: u8) -> Self {
        if label == 1 {
            Answer::Yes
        } else {
            Answer::No
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BudgetPolicy {
    #[default]
    Enforced,
    /// For exercising tiny instances where the budget rounds to almost
    /// nothing.
    Disabled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PtpOutcome {
    pub answer: Answer,
    pub queries_used: u64,
    pub budget: u64,
    pub exhausted: bool,
    /// The solver's estimate, absent when the budget ran out.
    pub estimate: Option<f64>,
}

pub trait HIndexSolver {
    fn solve(&mut self, oracle: &mut ArrayOracle, eps: f64, delta: f64, handle: &RngHandle) -> Result<u64>;
}

pub trait TriangleSolver {
    fn solve(&mut self, oracle: &mut TriangleOracle, eps: f64, delta: f64, handle: &RngHandle) -> Result<f64>;
}

/// The sublinear estimator from [`crate::estimator`].
#[derive(Debug, Clone, Copy, Default)]
pub struct EstimatorSolver {
    pub sampling: SamplingMode,
}

impl HIndexSolver for EstimatorSolver {
    fn solve(&mut self, oracle: &mut ArrayOracle, eps: f64, delta: f64, handle: &RngHandle) -> Result<u64> {
        let params = EstimatorParams::new(eps, delta)?.with_sampling(self.sampling);
        Ok(estimate_h_index(oracle, &params, handle)?.h_tilde)
    }
}

/// Exact triangle count that learns the graph through pair queries alone,
/// one per unordered vertex pair.
#[derive(Debug, Clone, Copy, Default)]
pub struct PairQueryCounter;

impl TriangleSolver for PairQueryCounter {
    fn solve(&mut self, oracle: &mut TriangleOracle, _eps: f64, _delta: f64, _handle: &RngHandle) -> Result<f64> {
        let vertices: Vec<Vertex> = oracle.vertices().collect();
        let n = vertices.len();
        let mut adj = vec![vec![false; n]; n];
        for a in 0..n {
            for b in a + 1..n {
                let e = oracle.pair(vertices[a], vertices[b])?;
                adj[a][b] = e;
                adj[b][a] = e;
            }
        }
        let mut count = 0u64;
        for a in 0..n {
            for b in a + 1..n {
                if !adj[a][b] {
                    continue;
                }
                count += (b + 1..n).filter(|&c| adj[a][c] && adj[b][c]).count() as u64;
            }
        }
        Ok(count as f64)
    }
}

fn log_term(delta: f64) -> f64 {
    (1.0 / (4.0 * delta)).ln().max(0.0)
}

/// `⌈m·ln(1/(4δ))/(24ε²k)⌉` with `m` the instance length and `ε = γ`.
pub fn hindex_budget(params: &PtpParams) -> u64 {
    let g = params.gamma;
    (params.m as f64 * log_term(params.delta) / (24.0 * g * g * params.k as f64)).ceil() as u64
}

/// `⌈m·ln(1/(4δ))/(9600ε²k)⌉` with `m = 4·|x|` the edge count of `G_x`.
pub fn triangle_budget(params: &PtpParams) -> u64 {
    let g = params.gamma;
    let m = 4.0 * params.m as f64;
    (m * log_term(params.delta) / (9600.0 * g * g * params.k as f64)).ceil() as u64
}

/// The array served to the h-index solver: `⌊(1+γ)k⌋` where `x_i = 1`,
/// zero elsewhere.
pub fn hindex_array(instance: &PtpInstance, params: &PtpParams) -> Vec<u64> {
    let high = ((1.0 + params.gamma) * params.k as f64).floor() as u64;
    instance.x.iter().map(|b| if b { high } else { 0 }).collect()
}

/// `k(1 − γ²)`
pub fn hindex_threshold(params: &PtpParams) -> f64 {
    params.k as f64 * (1.0 - params.gamma * params.gamma)
}

/// `2k(√m − 2)(1 − γ²)` with `m = 4·|x|`.
pub fn triangle_threshold(params: &PtpParams) -> f64 {
    let root_m = (4.0 * params.m as f64).sqrt();
    2.0 * params.k as f64 * (root_m - 2.0) * (1.0 - params.gamma * params.gamma)
}

fn check_instance(instance: &PtpInstance, params: &PtpParams) -> Result<()> {
    if instance.x.len() != params.m {
        return Err(Error::invalid(format!(
            "instance has {} bits but m = {}",
            instance.x.len(),
            params.m
        )));
    }
    Ok(())
}

fn finish(result: Result<f64>, queries_used: u64, budget: u64, threshold: f64) -> Result<PtpOutcome> {
    match result {
        Ok(est) => Ok(PtpOutcome {
            answer: if est >= threshold { Answer::Yes } else { Answer::No },
            queries_used,
            budget,
            exhausted: false,
            estimate: Some(est),
        }),
        Err(e) if e.is_budget_exhausted() => Ok(PtpOutcome {
            answer: Answer::No,
            queries_used,
            budget,
            exhausted: true,
            estimate: None,
        }),
        Err(e) => Err(e),
    }
}

/// Runs `solver` with `n = m`, `ε = γ` and error `δ/2` on the array built
/// from `x`. Yes iff the estimate is at least `k(1 − γ²)`.
pub fn ptp_via_hindex<S: HIndexSolver + ?Sized>(
    instance: &PtpInstance,
    params: &PtpParams,
    solver: &mut S,
    policy: BudgetPolicy,
    handle: &RngHandle,
) -> Result<PtpOutcome> {
    check_instance(instance, params)?;
    let budget = hindex_budget(params);
    let data = Arc::new(ArrayData::new(hindex_array(instance, params))?);
    let mut oracle = ArrayOracle::from_shared(data);
    if policy == BudgetPolicy::Enforced {
        oracle = oracle.with_budget(budget);
    }
    let result = solver
        .solve(&mut oracle, params.gamma, params.delta / 2.0, handle)
        .map(|h| h as f64);
    finish(result, oracle.query_count(), budget, hindex_threshold(params))
}

/// Runs `solver` on `G_x` with `ε = γ` and error `δ/2`. Yes iff the
/// estimate is at least `2k(√m − 2)(1 − γ²)`.
pub fn ptp_via_triangles<S: TriangleSolver + ?Sized>(
    instance: &PtpInstance,
    params: &PtpParams,
    solver: &mut S,
    policy: BudgetPolicy,
    handle: &RngHandle,
) -> Result<PtpOutcome> {
    check_instance(instance, params)?;
    let budget = triangle_budget(params);
    let mut oracle = TriangleOracle::new(instance.x.clone())?;
    if policy == BudgetPolicy::Enforced {
        oracle = oracle.with_budget(budget);
    }
    let result = solver.solve(&mut oracle, params.gamma, params.delta / 2.0, handle);
    finish(result, oracle.total_queries(), budget, triangle_threshold(params))
}
