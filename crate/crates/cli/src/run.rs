//! Scenario runners. Each returns in-memory results; [`crate::output`] turns
//! them into files.

use bcmac::channel::{bc_rates_dpc, constraint_value};
use bcmac::orchestrator::{
    balance_sinr_multi, maximize_g_pow, minimize_g, sinr_ratios, solve_nonlinear_constraint, ConstraintFunctional,
    OuterTrace, WsrMultiSolution,
};
use bcmac::{ChannelSet, Error, LinearConstraint, OuterSettings};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::ScenarioConfig;
use crate::CliError;

const LN2: f64 = std::f64::consts::LN_2;

/// One swept weight of a two-user region, rates in bits per channel use.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionPoint {
    pub weights: [f64; 2],
    /// Encoding order, zero-based, first encoded first.
    pub order: [usize; 2],
    pub rates_bits: [f64; 2],
    pub lambda: Vec<f64>,
    /// `P_l - tr(Q A_l)`.
    pub slacks: Vec<f64>,
    pub iterations: usize,
    pub g_gap: f64,
}

/// A sum-power solution scaled down onto the linear constraints.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeuristicPoint {
    pub weights: [f64; 2],
    pub order: [usize; 2],
    pub rates_bits: [f64; 2],
    pub scale: f64,
    pub slacks: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct WeightFailure {
    pub index: usize,
    pub weights: [f64; 2],
    pub error: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RegionReport {
    pub points: Vec<RegionPoint>,
    pub heuristic: Option<Vec<HeuristicPoint>>,
    pub failures: Vec<WeightFailure>,
}

pub fn sweep_weights(resolution: usize) -> Vec<[f64; 2]> {
    (0..=resolution)
        .map(|i| {
            let t = i as f64 / resolution as f64;
            [t, 1.0 - t]
        })
        .collect()
}

const ORDERS: [[usize; 2]; 2] = [[0, 1], [1, 0]];

/// Solves one weight under both encoding orders and keeps the better one.
fn best_order(
    ch: &ChannelSet,
    constraints: &[LinearConstraint],
    w: [f64; 2],
    set: &OuterSettings,
) -> Result<([usize; 2], WsrMultiSolution<f64>), Error> {
    let mut best: Option<([usize; 2], WsrMultiSolution<f64>)> = None;
    for order in ORDERS {
        let ch_o = ch.clone().with_encoding_order(order.to_vec())?;
        let sol = minimize_g(&ch_o, constraints, &w, set)?;
        if best.as_ref().is_none_or(|(_, b)| sol.value > b.value + 1e-12) {
            best = Some((order, sol));
        }
    }
    Ok(best.expect("two orders solved"))
}

fn slacks(q: &bcmac::CovarianceSet, constraints: &[LinearConstraint]) -> Result<Vec<f64>, Error> {
    constraints.iter().map(|c| Ok(c.budget() - constraint_value(q, c)?)).collect()
}

/// Sweeps `w = (t, 1 - t)` for both encoding orders in parallel. Failed weights
/// are reported alongside the successful points.
pub fn run_region(cfg: &ScenarioConfig) -> Result<RegionReport, CliError> {
    cfg.validate()?;
    let ch = cfg.channel_set()?;
    let constraints = cfg.linear_constraints(ch.nt())?;
    let set = cfg.outer_settings()?;
    let weights = sweep_weights(cfg.sweep.resolution);

    let solved: Vec<Result<RegionPoint, Error>> = weights
        .par_iter()
        .map(|&w| {
            let (order, sol) = best_order(&ch, &constraints, w, &set)?;
            Ok(RegionPoint {
                weights: w,
                order,
                rates_bits: [sol.rates[0] / LN2, sol.rates[1] / LN2],
                lambda: sol.lambda.as_slice().to_vec(),
                slacks: sol.slacks.clone(),
                iterations: sol.iterations,
                g_gap: sol.g_gap,
            })
        })
        .collect();

    let mut points = Vec::new();
    let mut failures = Vec::new();
    for (index, (r, &w)) in solved.into_iter().zip(&weights).enumerate() {
        match r {
            Ok(p) => points.push(p),
            Err(e) => failures.push(WeightFailure { index, weights: w, error: e.to_string() }),
        }
    }

    let heuristic = match cfg.sweep.heuristic_sum_power {
        Some(p) => Some(run_heuristic(&ch, &constraints, p, &weights, &set)?),
        None => None,
    };
    Ok(RegionReport { points, heuristic, failures })
}

/// Solves the sum-power problem at each weight and scales its covariances by
/// `min(1, min_l P_l / tr(Q A_l))`.
pub fn run_heuristic(
    ch: &ChannelSet,
    constraints: &[LinearConstraint],
    sum_power: f64,
    weights: &[[f64; 2]],
    set: &OuterSettings,
) -> Result<Vec<HeuristicPoint>, CliError> {
    let sum = [LinearConstraint::sum_power(ch.nt(), sum_power).map_err(|e| CliError::Config(e.to_string()))?];
    weights
        .par_iter()
        .map(|&w| {
            let (order, sol) = best_order(ch, &sum, w, set)?;
            let ch_o = ch.clone().with_encoding_order(order.to_vec())?;
            let scale = constraints.iter().try_fold(1.0f64, |s, c| {
                let t = constraint_value(&sol.q_bc, c)?;
                Ok::<_, Error>(if t > 0.0 { s.min(c.budget() / t) } else { s })
            })?;
            let q = sol.q_bc.scaled(scale);
            let r = bc_rates_dpc(&ch_o, &q)?;
            Ok(HeuristicPoint {
                weights: w,
                order,
                rates_bits: [r[0] / LN2, r[1] / LN2],
                scale,
                slacks: slacks(&q, constraints)?,
            })
        })
        .collect::<Result<Vec<_>, Error>>()
        .map_err(CliError::Solver)
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub value: f64,
    pub accepted: bool,
    pub step: f64,
    pub lambda: Vec<f64>,
}

fn trace_rows(t: &OuterTrace<f64>) -> Vec<TraceRow> {
    t.records
        .iter()
        .enumerate()
        .map(|(i, r)| TraceRow {
            iteration: i,
            value: r.value,
            accepted: r.accepted,
            step: r.step,
            lambda: r.lambda.clone(),
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct BeamReport {
    /// Balanced ratio (`balance`) or power ratio `max_l tr(Q A_l)/P_l` (`powermin`).
    pub alpha: f64,
    /// Relaxed outer objective at the final multipliers.
    pub bound: f64,
    pub lambda: Vec<f64>,
    pub constraint_values: Vec<f64>,
    pub sinr_ratios: Vec<f64>,
    pub powers: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub trace: Vec<TraceRow>,
}

pub fn run_balance(cfg: &ScenarioConfig) -> Result<BeamReport, CliError> {
    cfg.validate()?;
    let ch = cfg.channel_set()?;
    let constraints = cfg.linear_constraints(ch.nt())?;
    let targets = cfg.sinr_targets(ch.users())?;
    let s = balance_sinr_multi(&ch, &constraints, &targets, &cfg.outer_settings()?)?;
    Ok(BeamReport {
        alpha: s.alpha,
        bound: s.g_bal,
        lambda: s.lambda.as_slice().to_vec(),
        constraint_values: s.values.clone(),
        sinr_ratios: sinr_ratios(&ch, &s.bf_bc, &targets)?,
        powers: s.bf_bc.streams().iter().map(|st| st.p).collect(),
        iterations: s.iterations,
        converged: s.converged,
        trace: trace_rows(&s.trace),
    })
}

pub fn run_powermin(cfg: &ScenarioConfig) -> Result<BeamReport, CliError> {
    cfg.validate()?;
    let ch = cfg.channel_set()?;
    let constraints = cfg.linear_constraints(ch.nt())?;
    let targets = cfg.sinr_targets(ch.users())?;
    let s = maximize_g_pow(&ch, &constraints, &targets, &cfg.outer_settings()?)?;
    Ok(BeamReport {
        alpha: s.alpha,
        bound: s.g_pow,
        lambda: s.lambda.as_slice().to_vec(),
        constraint_values: s.values.clone(),
        sinr_ratios: sinr_ratios(&ch, &s.bf_bc, &targets)?,
        powers: s.bf_bc.streams().iter().map(|st| st.p).collect(),
        iterations: s.iterations,
        converged: s.converged,
        trace: trace_rows(&s.trace),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CutRow {
    pub cut: usize,
    pub value_bits: f64,
    pub phi: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct NonlinearReport {
    pub rates_bits: Vec<f64>,
    /// `tr(Q A_l)` at the returned covariance.
    pub constraint_values: Vec<f64>,
    pub phi: f64,
    pub cuts: usize,
    pub outer_iterations: usize,
    pub trace: Vec<CutRow>,
}

pub fn run_nonlinear(cfg: &ScenarioConfig) -> Result<NonlinearReport, CliError> {
    cfg.validate()?;
    let ch = cfg.channel_set()?;
    let ball = cfg.quadratic_ball(ch.nt())?;
    let w = cfg.rate_weights(ch.users())?;
    let s = solve_nonlinear_constraint(&ch, &ball, &w, cfg.solver.eps, &cfg.outer_settings()?)?;
    let total = s.q_bc.total();
    let values: Vec<f64> = ball.matrices().iter().map(|a| total.inner(a)).collect();
    Ok(NonlinearReport {
        rates_bits: s.rates.iter().map(|r| r / LN2).collect(),
        phi: ball.value(&values),
        constraint_values: values,
        cuts: s.state.cuts.len(),
        outer_iterations: s.outer_iterations,
        trace: s
            .rate_trace
            .iter()
            .zip(&s.constraint_trace)
            .enumerate()
            .map(|(i, (&v, &phi))| CutRow { cut: i + 1, value_bits: v / LN2, phi })
            .collect(),
    })
}
