//! Outer loops over constraint weights.
//!
//! Several linear constraints `tr(Q A_l) <= P_l` are merged into one,
//! `tr(Q sum_l lambda_l A_l) <= sum_l lambda_l P_l`, which the dual MAC solves
//! exactly. The merged value is unchanged when `lambda` is scaled, so weights
//! live on the unit simplex. An outer descent adjusts them: minimizing the
//! relaxed weighted sum rate `g` or balanced SINR `g_bal`, or maximizing the
//! relaxed power ratio `g_pow`. Nonlinear constraints are approximated by
//! tangent hyperplanes added one at a time.

use crate::channel::{
    bc_rates_dpc, bc_sinr, constraint_value, BeamformingSolution, ChannelSet, CovarianceSet, LinearConstraint,
    SinrScheme, SinrTargets,
};
use crate::duality::{bc_powers_for_sinr, mac_to_bc_capacity, mac_to_bc_sinr};
use crate::error::{Error, Result};
use crate::hermitian::{eig_hermitian, HermitianMatrix};
use crate::mac::{solve_power_min_mac, solve_sinr_balance_mac, solve_wsr_mac_from, MacSolution, SolverSettings};
use crate::scalar::{lit, to_f64, Real};

/// Constraint weights on the unit simplex, each at least `floor`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualWeights<T: Real> {
    lambda: Vec<T>,
}

impl<T: Real> DualWeights<T> {
    /// Normalizes `lambda` onto the simplex and lifts entries below `floor`.
    pub fn new(lambda: Vec<T>, floor: T) -> Result<Self> {
        if lambda.is_empty() || lambda.iter().any(|&x| !(x >= T::zero()) || !x.is_finite()) {
            return Err(Error::InvalidInput("constraint weights must be nonnegative and finite".into()));
        }
        let sum = lambda.iter().fold(T::zero(), |a, &b| a + b);
        if !(sum > T::zero()) {
            return Err(Error::InvalidInput("constraint weights must not all be zero".into()));
        }
        Ok(Self { lambda: floor_simplex(lambda.iter().map(|&x| x / sum).collect(), floor) })
    }

    pub fn uniform(l: usize) -> Self {
        Self { lambda: vec![T::one() / lit(l as f64); l] }
    }

    pub fn as_slice(&self) -> &[T] {
        &self.lambda
    }

    pub fn len(&self) -> usize {
        self.lambda.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda.is_empty()
    }
}

fn floor_simplex<T: Real>(mut v: Vec<T>, floor: T) -> Vec<T> {
    for x in v.iter_mut() {
        *x = x.max(floor);
    }
    let sum = v.iter().fold(T::zero(), |a, &b| a + b);
    v.iter().map(|&x| x / sum).collect()
}

/// Euclidean projection onto the unit simplex.
pub fn project_simplex<T: Real>(v: &[T]) -> Vec<T> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let mut acc = T::zero();
    let mut theta = T::zero();
    for (i, &x) in u.iter().enumerate() {
        acc += x;
        let t = (acc - T::one()) / lit(i as f64 + 1.0);
        if x - t > T::zero() {
            theta = t;
        }
    }
    v.iter().map(|&x| (x - theta).max(T::zero())).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct OuterSettings<T: Real> {
    pub max_iters: usize,
    /// Minimum improvement of the best value over `stall_window` iterations.
    pub tol: T,
    /// First step, as a move in the infinity norm of the weights.
    pub initial_step: T,
    /// Feasibility tolerance relative to `max_l P_l`.
    pub feas_tol_rel: T,
    pub lambda_floor: T,
    /// Added to the merged constraint matrix when it is nearly singular.
    pub jitter: T,
    pub stall_window: usize,
    pub max_cuts: usize,
    pub inner: SolverSettings<T>,
}

impl<T: Real> Default for OuterSettings<T> {
    fn default() -> Self {
        Self {
            max_iters: 300,
            tol: lit(1e-9),
            initial_step: lit(0.2),
            feas_tol_rel: lit(1e-5),
            lambda_floor: lit(1e-7),
            jitter: lit(1e-9),
            stall_window: 25,
            max_cuts: 30,
            inner: SolverSettings::default(),
        }
    }
}

impl<T: Real> OuterSettings<T> {
    pub fn validate(&self) -> Result<()> {
        self.inner.validate()?;
        let zero = T::zero();
        if self.max_iters == 0 || self.stall_window == 0 || self.max_cuts == 0 {
            return Err(Error::InvalidInput("outer iteration limits must be positive".into()));
        }
        if !(self.initial_step > zero) || !(self.feas_tol_rel > zero) || !(self.tol > zero) {
            return Err(Error::InvalidInput("outer step and tolerances must be positive".into()));
        }
        if !(self.lambda_floor >= zero && self.lambda_floor < T::one()) || !(self.jitter >= zero) {
            return Err(Error::InvalidInput("lambda_floor must lie in [0, 1) and jitter be nonnegative".into()));
        }
        Ok(())
    }

    fn feas_tol(&self, constraints: &[LinearConstraint<T>]) -> T {
        self.feas_tol_rel * constraints.iter().fold(T::zero(), |a, c| a.max(c.budget()))
    }
}

/// One evaluation of the outer objective.
#[derive(Debug, Clone, PartialEq)]
pub struct OuterRecord<T: Real> {
    pub lambda: Vec<T>,
    pub value: T,
    pub subgradient: Vec<T>,
    pub step: T,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct OuterTrace<T: Real> {
    pub records: Vec<OuterRecord<T>>,
}

impl<T: Real> OuterTrace<T> {
    /// Values of accepted iterates, in order.
    pub fn accepted_values(&self) -> Vec<T> {
        self.records.iter().filter(|r| r.accepted).map(|r| r.value).collect()
    }
}

/// Merged constraint `(sum lambda_l A_l, sum lambda_l P_l)` after flooring the
/// weights relative to their sum and regularizing a nearly singular matrix.
pub fn combine_constraints<T: Real>(
    constraints: &[LinearConstraint<T>],
    lambda: &[T],
    set: &OuterSettings<T>,
) -> Result<(HermitianMatrix<T>, T)> {
    if constraints.is_empty() || constraints.len() != lambda.len() {
        return Err(Error::InvalidInput(format!("{} weights for {} constraints", lambda.len(), constraints.len())));
    }
    let n = constraints[0].matrix().dim();
    if constraints.iter().any(|c| c.matrix().dim() != n) {
        return Err(Error::InvalidInput("constraint matrices must share one dimension".into()));
    }
    if lambda.iter().any(|&x| !(x >= T::zero()) || !x.is_finite()) {
        return Err(Error::InvalidInput("constraint weights must be nonnegative".into()));
    }
    let sum = lambda.iter().fold(T::zero(), |a, &b| a + b);
    if !(sum > T::zero()) {
        return Err(Error::InvalidInput("constraint weights must not all be zero".into()));
    }
    let floor = set.lambda_floor * sum;
    let mut a = HermitianMatrix::zeros(n);
    let mut p = T::zero();
    for (c, &l) in constraints.iter().zip(lambda) {
        let l = l.max(floor);
        a = a.add(&c.matrix().scale(l));
        p += l * c.budget();
    }
    let min = eig_hermitian(&a)?.min_value();
    let threshold = set.inner.pd_floor * sum * lit(10.0);
    if min <= threshold {
        let shift = (threshold - min).max(set.jitter * sum);
        a = a.add(&HermitianMatrix::identity(n).scale(shift));
    }
    Ok((a, p))
}

fn constraint_values<T: Real>(q: &CovarianceSet<T>, constraints: &[LinearConstraint<T>]) -> Result<Vec<T>> {
    constraints.iter().map(|c| constraint_value(q, c)).collect()
}

fn weighted<T: Real>(rates: &[T], weights: &[T]) -> T {
    rates.iter().zip(weights).fold(T::zero(), |a, (&r, &w)| a + r * w)
}

/// Largest `c <= 1` with `c * t_l <= P_l` for every constraint.
fn feasibility_scale<T: Real>(values: &[T], constraints: &[LinearConstraint<T>]) -> T {
    values.iter().zip(constraints).fold(T::one(), |s, (&t, c)| if t > T::zero() { s.min(c.budget() / t) } else { s })
}

/// Relaxed weighted sum rate for one weight vector.
#[derive(Debug, Clone)]
pub struct GEval<T: Real> {
    pub g: T,
    pub q_bc: CovarianceSet<T>,
    pub mac: MacSolution<T>,
    /// `tr(Q A_l)` per constraint.
    pub values: Vec<T>,
    /// `P_l - tr(Q A_l)`.
    pub subgradient: Vec<T>,
    /// Multiplier of the merged budget (the MAC water level).
    pub multiplier: T,
}

/// `g(lambda)`: the best weighted sum rate under the single merged constraint,
/// with its BC covariances. `lambda` need not be normalized.
pub fn eval_g_wsr<T: Real>(
    ch: &ChannelSet<T>,
    constraints: &[LinearConstraint<T>],
    lambda: &[T],
    weights: &[T],
    set: &OuterSettings<T>,
) -> Result<GEval<T>> {
    eval_g_wsr_from(ch, constraints, lambda, weights, set, None)
}

fn eval_g_wsr_from<T: Real>(
    ch: &ChannelSet<T>,
    constraints: &[LinearConstraint<T>],
    lambda: &[T],
    weights: &[T],
    set: &OuterSettings<T>,
    warm: Option<&CovarianceSet<T>>,
) -> Result<GEval<T>> {
    let (a, p) = combine_constraints(constraints, lambda, set)?;
    let mac = solve_wsr_mac_from(ch, &a, p, weights, &set.inner, warm)?;
    let q_bc = mac_to_bc_capacity(ch, &mac.cov, &a)?;
    let values = constraint_values(&q_bc, constraints)?;
    let subgradient = constraints.iter().zip(&values).map(|(c, &t)| c.budget() - t).collect();
    let sum = lambda.iter().fold(T::zero(), |x, &y| x + y);
    Ok(GEval { g: mac.objective, multiplier: mac.multiplier * sum, q_bc, mac, values, subgradient })
}

struct Descent<T: Real, E> {
    lambda: Vec<T>,
    eval: E,
    trace: OuterTrace<T>,
    iterations: usize,
    converged: bool,
}

/// Normalized projected descent on the simplex with backtracking: a step is
/// taken only when the value does not increase.
///
/// `eval` returns `(value, direction, payload)`; the move is
/// `lambda - eta * direction / |direction|_inf`.
fn descend<T: Real, E>(
    set: &OuterSettings<T>,
    lambda0: Vec<T>,
    mut eval: impl FnMut(&[T], Option<&E>) -> Result<(T, Vec<T>, E)>,
    feasible: impl Fn(&E) -> bool,
) -> Result<Descent<T, E>> {
    let mut lambda = lambda0;
    let (mut value, mut dir, mut cur) = eval(&lambda, None)?;
    let mut eta = set.initial_step;
    let mut trace = OuterTrace {
        records: vec![OuterRecord {
            lambda: lambda.clone(),
            value,
            subgradient: dir.clone(),
            step: T::zero(),
            accepted: true,
        }],
    };
    let mut history = vec![value];
    let eta_min = lit::<T>(1e-10);
    let mut converged = false;
    let mut iterations = 0;
    while iterations < set.max_iters {
        iterations += 1;
        let norm = dir.iter().fold(T::zero(), |a, &x| a.max(x.abs()));
        if !(norm > T::zero()) {
            converged = true;
            break;
        }
        let stepped: Vec<T> = lambda.iter().zip(&dir).map(|(&l, &d)| l - eta * d / norm).collect();
        let next = floor_simplex(project_simplex(&stepped), set.lambda_floor);
        let moved = next.iter().zip(&lambda).fold(T::zero(), |a, (&x, &y)| a.max((x - y).abs()));
        if moved < lit(1e-12) {
            converged = true;
            break;
        }
        let (v, d, e) = eval(&next, Some(&cur))?;
        let accepted = v <= value;
        trace.records.push(OuterRecord { lambda: next.clone(), value: v, subgradient: d.clone(), step: eta, accepted });
        if accepted {
            lambda = next;
            value = v;
            dir = d;
            cur = e;
            eta = (eta * lit(1.5)).min(T::one());
        } else {
            eta *= lit(0.5);
            if eta < eta_min {
                converged = true;
                break;
            }
        }
        history.push(value);
        let w = set.stall_window;
        if history.len() > w && feasible(&cur) {
            let old = history[history.len() - 1 - w];
            if old - value <= set.tol * (T::one() + value.abs()) {
                converged = true;
                break;
            }
        }
    }
    Ok(Descent { lambda, eval: cur, trace, iterations, converged })
}

/// Weighted sum-rate solution under several linear constraints.
#[derive(Debug, Clone)]
pub struct WsrMultiSolution<T: Real> {
    /// BC covariances feasible for every constraint.
    pub q_bc: CovarianceSet<T>,
    pub lambda: DualWeights<T>,
    /// Smallest relaxed value found (an upper bound on the optimum).
    pub g: T,
    /// Weighted sum rate of `q_bc`.
    pub value: T,
    /// `g - value`.
    pub g_gap: T,
    /// Per-user DPC rates of `q_bc` in nats.
    pub rates: Vec<T>,
    /// `P_l - tr(q_bc A_l)`.
    pub slacks: Vec<T>,
    /// Inner solution at the final weights (unscaled).
    pub inner: GEval<T>,
    pub iterations: usize,
    pub converged: bool,
    pub trace: OuterTrace<T>,
}

/// Minimizes `g(lambda)` over the simplex, then scales the inner BC
/// covariances onto the feasible set. The best feasible point seen during the
/// descent is returned.
pub fn minimize_g<T: Real>(
    ch: &ChannelSet<T>,
    constraints: &[LinearConstraint<T>],
    weights: &[T],
    set: &OuterSettings<T>,
) -> Result<WsrMultiSolution<T>> {
    set.validate()?;
    let l = constraints.len();
    if l == 0 {
        return Err(Error::InvalidInput("at least one constraint is required".into()));
    }
    let feas_tol = set.feas_tol(constraints);
    let mut best: Option<(T, CovarianceSet<T>)> = None;
    let mut consider = |ev: &GEval<T>| -> Result<()> {
        let q = ev.q_bc.scaled(feasibility_scale(&ev.values, constraints));
        let v = weighted(&bc_rates_dpc(ch, &q)?, weights);
        if best.as_ref().is_none_or(|(b, _)| v > *b) {
            best = Some((v, q));
        }
        Ok(())
    };
    let d = descend(
        set,
        DualWeights::uniform(l).lambda,
        |lam, prev: Option<&GEval<T>>| {
            let ev = eval_g_wsr_from(ch, constraints, lam, weights, set, prev.map(|p| &p.mac.cov))?;
            consider(&ev)?;
            let dir = ev.subgradient.iter().map(|&s| s * ev.multiplier).collect();
            Ok((ev.g, dir, ev))
        },
        |ev| ev.subgradient.iter().all(|&s| s >= -feas_tol),
    )?;
    if !d.converged {
        log::warn!("outer weighted sum-rate loop stopped after {} iterations", d.iterations);
    }
    let g = d.trace.accepted_values().last().copied().unwrap_or(d.eval.g);
    let (value, q_bc) = best.expect("at least one evaluation");
    let rates = bc_rates_dpc(ch, &q_bc)?;
    let slacks = constraint_values(&q_bc, constraints)?.iter().zip(constraints).map(|(&t, c)| c.budget() - t).collect();
    Ok(WsrMultiSolution {
        q_bc,
        lambda: DualWeights { lambda: d.lambda },
        g,
        value,
        g_gap: g - value,
        rates,
        slacks,
        inner: d.eval,
        iterations: d.iterations,
        converged: d.converged,
        trace: d.trace,
    })
}

fn require_single_stream<T: Real>(ch: &ChannelSet<T>) -> Result<()> {
    if ch.nr() != 1 {
        return Err(Error::InvalidInput(format!("beamforming problems need Nr = 1, got {}", ch.nr())));
    }
    Ok(())
}

/// Power-balancing solution: smallest `alpha` with `tr(Q A_l) <= alpha P_l`
/// for all `l` while meeting every SINR target.
#[derive(Debug, Clone)]
pub struct PowerBalanceSolution<T: Real> {
    pub alpha: T,
    /// BC beamformers meeting every target with equality.
    pub bf_bc: BeamformingSolution<T>,
    pub lambda: DualWeights<T>,
    /// Largest relaxed value found (a lower bound on the optimum).
    pub g_pow: T,
    /// `tr(Q A_l)` of `bf_bc`.
    pub values: Vec<T>,
    pub iterations: usize,
    pub converged: bool,
    pub trace: OuterTrace<T>,
}

struct PowEval<T: Real> {
    g: T,
    bf: BeamformingSolution<T>,
    values: Vec<T>,
    alpha: T,
}

/// Maximizes `g_pow(lambda) = P_min(sum lambda_l A_l) / sum lambda_l P_l` over
/// the simplex (MISO only).
pub fn maximize_g_pow<T: Real>(
    ch: &ChannelSet<T>,
    constraints: &[LinearConstraint<T>],
    targets: &SinrTargets<T>,
    set: &OuterSettings<T>,
) -> Result<PowerBalanceSolution<T>> {
    set.validate()?;
    require_single_stream(ch)?;
    let l = constraints.len();
    if l == 0 {
        return Err(Error::InvalidInput("at least one constraint is required".into()));
    }
    let mut best: Option<(T, BeamformingSolution<T>, Vec<T>)> = None;
    let d = descend(
        set,
        DualWeights::uniform(l).lambda,
        |lam, _prev: Option<&PowEval<T>>| {
            let (a, p) = combine_constraints(constraints, lam, set)?;
            let (pmin, bf_mac) = solve_power_min_mac(ch, &a, targets, &set.inner)?;
            let bf = mac_to_bc_sinr(ch, &bf_mac, &a)?;
            let g = pmin / p;
            let values: Vec<T> = constraints.iter().map(|c| bf.bc_weighted_power(c.matrix())).collect();
            let alpha = values.iter().zip(constraints).fold(T::zero(), |m, (&t, c)| m.max(t / c.budget()));
            if best.as_ref().is_none_or(|(b, _, _)| alpha < *b) {
                best = Some((alpha, bf.clone(), values.clone()));
            }
            // ascent on g_pow: gradient is proportional to t - g P
            let dir = values.iter().zip(constraints).map(|(&t, c)| g * c.budget() - t).collect();
            Ok((-g, dir, PowEval { g, bf, values, alpha }))
        },
        |_| true,
    )?;
    if !d.converged {
        log::warn!("power balancing loop stopped after {} iterations", d.iterations);
    }
    let (alpha, bf_bc, values) = best.expect("at least one evaluation");
    let _ = (&d.eval.bf, &d.eval.values, d.eval.alpha);
    Ok(PowerBalanceSolution {
        alpha,
        bf_bc,
        lambda: DualWeights { lambda: d.lambda },
        g_pow: d.eval.g,
        values,
        iterations: d.iterations,
        converged: d.converged,
        trace: negate(d.trace),
    })
}

fn negate<T: Real>(mut trace: OuterTrace<T>) -> OuterTrace<T> {
    for r in trace.records.iter_mut() {
        r.value = -r.value;
    }
    trace
}

/// SINR-balancing solution under several linear constraints.
#[derive(Debug, Clone)]
pub struct SinrBalanceSolution<T: Real> {
    /// Balanced ratio `SINR_i / gamma_i` achieved by `bf_bc`.
    pub alpha: T,
    /// BC beamformers feasible for every constraint.
    pub bf_bc: BeamformingSolution<T>,
    pub lambda: DualWeights<T>,
    /// Smallest relaxed value found (an upper bound on the optimum).
    pub g_bal: T,
    /// `tr(Q A_l)` of `bf_bc`.
    pub values: Vec<T>,
    pub iterations: usize,
    pub converged: bool,
    pub trace: OuterTrace<T>,
}

struct BalEval<T: Real> {
    values: Vec<T>,
}

/// Largest common ratio `a` such that the beams of `bf`, with BC powers
/// solved for `SINR_i = a gamma_i`, satisfy every constraint.
fn feasible_ratio<T: Real>(
    ch: &ChannelSet<T>,
    bf: &BeamformingSolution<T>,
    targets: &SinrTargets<T>,
    constraints: &[LinearConstraint<T>],
    hint: T,
) -> Result<(T, BeamformingSolution<T>)> {
    let load = |a: T| -> Result<(T, BeamformingSolution<T>)> {
        let goal: Vec<T> = bf.streams().iter().map(|s| a * targets.get(s.user)).collect();
        let out = bc_powers_for_sinr(ch, bf, &goal)?;
        let worst = constraints.iter().fold(T::zero(), |m, c| m.max(out.bc_weighted_power(c.matrix()) / c.budget()));
        Ok((worst, out))
    };
    let mut lo = T::zero();
    let mut hi = hint.max(lit(1e-12));
    let mut guard = 0;
    while load(hi)?.0 < T::one() {
        lo = hi;
        hi *= lit(2.0);
        guard += 1;
        if guard > 200 {
            return Err(Error::InvalidInput("unbounded SINR ratio".into()));
        }
    }
    for _ in 0..200 {
        let mid = (lo + hi) * lit(0.5);
        if mid <= lo || mid >= hi {
            break;
        }
        if load(mid)?.0 <= T::one() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (_, out) = load(lo)?;
    Ok((lo, out))
}

/// Minimizes the relaxed balanced ratio `g_bal(lambda)` over the simplex
/// (MISO only), returning the best beamformers made feasible by lowering the
/// common ratio until every constraint holds.
pub fn balance_sinr_multi<T: Real>(
    ch: &ChannelSet<T>,
    constraints: &[LinearConstraint<T>],
    targets: &SinrTargets<T>,
    set: &OuterSettings<T>,
) -> Result<SinrBalanceSolution<T>> {
    set.validate()?;
    require_single_stream(ch)?;
    let l = constraints.len();
    if l == 0 {
        return Err(Error::InvalidInput("at least one constraint is required".into()));
    }
    let feas_tol = set.feas_tol(constraints);
    let mut best: Option<(T, BeamformingSolution<T>)> = None;
    let d = descend(
        set,
        DualWeights::uniform(l).lambda,
        |lam, _prev: Option<&BalEval<T>>| {
            let (a, p) = combine_constraints(constraints, lam, set)?;
            let (alpha, bf_mac) = solve_sinr_balance_mac(ch, &a, p, targets, &set.inner)?;
            let bf = mac_to_bc_sinr(ch, &bf_mac, &a)?;
            let (fa, fbf) = feasible_ratio(ch, &bf, targets, constraints, alpha)?;
            if best.as_ref().is_none_or(|(b, _)| fa > *b) {
                best = Some((fa, fbf));
            }
            let values: Vec<T> = constraints.iter().map(|c| bf.bc_weighted_power(c.matrix())).collect();
            let dir = values.iter().zip(constraints).map(|(&t, c)| c.budget() - t).collect();
            Ok((alpha, dir, BalEval { values }))
        },
        |e| e.values.iter().zip(constraints).all(|(&t, c)| t <= c.budget() + feas_tol),
    )?;
    if !d.converged {
        log::warn!("SINR balancing loop stopped after {} iterations", d.iterations);
    }
    let (alpha, bf_bc) = best.expect("at least one evaluation");
    let values = constraints.iter().map(|c| bf_bc.bc_weighted_power(c.matrix())).collect();
    let g_bal = d.trace.accepted_values().last().copied().unwrap_or(alpha);
    Ok(SinrBalanceSolution {
        alpha,
        bf_bc,
        lambda: DualWeights { lambda: d.lambda },
        g_bal,
        values,
        iterations: d.iterations,
        converged: d.converged,
        trace: d.trace,
    })
}

/// Per-stream BC SINR ratios `SINR / gamma` of a beamforming solution.
pub fn sinr_ratios<T: Real>(
    ch: &ChannelSet<T>,
    bf: &BeamformingSolution<T>,
    targets: &SinrTargets<T>,
) -> Result<Vec<T>> {
    Ok(bc_sinr(ch, bf, SinrScheme::Dpc)?.iter().zip(bf.streams()).map(|(&s, st)| s / targets.get(st.user)).collect())
}

/// A convex differentiable function `phi` of the constraint values
/// `p_l = tr(Q A_l)`; the constraint is `phi(p) <= 0` with `phi(0) < 0`.
pub trait ConstraintFunctional<T: Real> {
    fn matrices(&self) -> &[HermitianMatrix<T>];
    fn value(&self, p: &[T]) -> T;
    fn gradient(&self, p: &[T]) -> Vec<T>;
}

/// `sum_l p_l^2 <= radius_sq`.
#[derive(Debug, Clone)]
pub struct QuadraticBall<T: Real> {
    a: Vec<HermitianMatrix<T>>,
    radius_sq: T,
}

impl<T: Real> QuadraticBall<T> {
    pub fn new(a: Vec<HermitianMatrix<T>>, radius_sq: T) -> Result<Self> {
        if a.is_empty() || !(radius_sq > T::zero()) {
            return Err(Error::InvalidInput("quadratic ball needs matrices and a positive bound".into()));
        }
        let a = a.iter().map(crate::hermitian::clamp_psd).collect::<Result<Vec<_>>>()?;
        Ok(Self { a, radius_sq })
    }
}

impl<T: Real> ConstraintFunctional<T> for QuadraticBall<T> {
    fn matrices(&self) -> &[HermitianMatrix<T>] {
        &self.a
    }

    fn value(&self, p: &[T]) -> T {
        p.iter().fold(T::zero(), |a, &x| a + x * x) - self.radius_sq
    }

    fn gradient(&self, p: &[T]) -> Vec<T> {
        p.iter().map(|&x| x * lit(2.0)).collect()
    }
}

/// `sum_l c_l p_l <= budget`.
#[derive(Debug, Clone)]
pub struct LinearFunctional<T: Real> {
    a: Vec<HermitianMatrix<T>>,
    c: Vec<T>,
    budget: T,
}

impl<T: Real> LinearFunctional<T> {
    pub fn new(a: Vec<HermitianMatrix<T>>, c: Vec<T>, budget: T) -> Result<Self> {
        if a.is_empty() || a.len() != c.len() || !(budget > T::zero()) || c.iter().any(|&x| x < T::zero()) {
            return Err(Error::InvalidInput(
                "linear functional needs nonnegative coefficients and positive budget".into(),
            ));
        }
        Ok(Self { a, c, budget })
    }
}

impl<T: Real> ConstraintFunctional<T> for LinearFunctional<T> {
    fn matrices(&self) -> &[HermitianMatrix<T>] {
        &self.a
    }

    fn value(&self, p: &[T]) -> T {
        weighted(p, &self.c) - self.budget
    }

    fn gradient(&self, _p: &[T]) -> Vec<T> {
        self.c.clone()
    }
}

/// Accumulated tangent hyperplanes of `{phi <= 0}`.
#[derive(Debug, Clone)]
pub struct CuttingPlaneState<T: Real> {
    pub cuts: Vec<LinearConstraint<T>>,
    /// Normal `grad phi(c)` and tangency point `c` of every cut.
    pub normals: Vec<Vec<T>>,
    pub tangency: Vec<Vec<T>>,
    pub q_bc: Option<CovarianceSet<T>>,
    /// `phi` at the latest solution.
    pub value: T,
}

#[derive(Debug, Clone)]
pub struct NonlinearSolution<T: Real> {
    pub q_bc: CovarianceSet<T>,
    pub state: CuttingPlaneState<T>,
    /// Weighted sum rate after each cut.
    pub rate_trace: Vec<T>,
    /// `phi` after each cut.
    pub constraint_trace: Vec<T>,
    pub rates: Vec<T>,
    pub outer_iterations: usize,
}

/// Point `tau * dir` on `{phi = 0}` with `tau > 0`, by bisection from the origin.
fn boundary_along<T: Real, F: ConstraintFunctional<T> + ?Sized>(f: &F, dir: &[T]) -> Result<Vec<T>> {
    let at = |t: T| dir.iter().map(|&x| x * t).collect::<Vec<T>>();
    if !(f.value(&at(T::zero())) < T::zero()) {
        return Err(Error::InvalidInput("the origin must be strictly feasible".into()));
    }
    let mut hi = T::one();
    let mut guard = 0;
    while f.value(&at(hi)) <= T::zero() {
        hi *= lit(2.0);
        guard += 1;
        if guard > 200 {
            return Err(Error::InvalidInput("constraint set is unbounded along the search ray".into()));
        }
    }
    let mut lo = T::zero();
    for _ in 0..200 {
        let mid = (lo + hi) * lit(0.5);
        if mid <= lo || mid >= hi {
            break;
        }
        if f.value(&at(mid)) <= T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(at(lo))
}

fn angle<T: Real>(a: &[T], b: &[T]) -> T {
    let dot = weighted(a, b);
    let na = weighted(a, a).sqrt();
    let nb = weighted(b, b).sqrt();
    (dot / (na * nb)).min(T::one()).max(-T::one()).acos()
}

/// Weighted sum-rate maximization under `phi(tr(Q A_1), ..., tr(Q A_L)) <= 0`
/// by accumulating tangent cuts at the boundary points closest to each
/// relaxed solution along the ray from the origin.
pub fn solve_nonlinear_constraint<T: Real, F: ConstraintFunctional<T> + ?Sized>(
    ch: &ChannelSet<T>,
    f: &F,
    weights: &[T],
    eps: T,
    set: &OuterSettings<T>,
) -> Result<NonlinearSolution<T>> {
    set.validate()?;
    let mats = f.matrices();
    let l = mats.len();
    let start = boundary_along(f, &vec![T::one(); l])?;
    let mut state =
        CuttingPlaneState { cuts: Vec::new(), normals: Vec::new(), tangency: Vec::new(), q_bc: None, value: T::zero() };
    let mut rate_trace = Vec::new();
    let mut constraint_trace = Vec::new();
    let mut outer_iterations = 0;
    let mut point = start;
    for _ in 0..set.max_cuts {
        add_cut(&mut state, f, point)?;
        let sol = minimize_g(ch, &state.cuts, weights, set)?;
        outer_iterations += sol.iterations;
        let p: Vec<T> = mats.iter().map(|a| sol.q_bc.total().inner(a)).collect();
        let phi = f.value(&p);
        rate_trace.push(sol.value);
        constraint_trace.push(phi);
        state.value = phi;
        state.q_bc = Some(sol.q_bc.clone());
        log::debug!("cut {}: value {:.6} phi {:e}", state.cuts.len(), to_f64(sol.value), to_f64(phi));
        if phi <= eps {
            let rates = sol.rates.clone();
            return Ok(NonlinearSolution {
                q_bc: sol.q_bc,
                state,
                rate_trace,
                constraint_trace,
                rates,
                outer_iterations,
            });
        }
        point = boundary_along(f, &p)?;
    }
    Err(Error::MaxCutsExceeded(set.max_cuts))
}

fn add_cut<T: Real, F: ConstraintFunctional<T> + ?Sized>(
    state: &mut CuttingPlaneState<T>,
    f: &F,
    point: Vec<T>,
) -> Result<()> {
    let normal = f.gradient(&point);
    if normal.iter().all(|&x| x == T::zero()) {
        return Err(Error::InvalidInput("constraint gradient vanishes on the boundary".into()));
    }
    let mats = f.matrices();
    let n = mats[0].dim();
    let a = mats.iter().zip(&normal).fold(HermitianMatrix::zeros(n), |acc, (m, &w)| acc.add(&m.scale(w)));
    let cut = LinearConstraint::new(a, weighted(&normal, &point))?;
    let dup = state.normals.iter().position(|old| angle(old, &normal) < lit(1e-4));
    match dup {
        Some(i) => {
            state.cuts[i] = cut;
            state.normals[i] = normal;
            state.tangency[i] = point;
        }
        None => {
            state.cuts.push(cut);
            state.normals.push(normal);
            state.tangency.push(point);
        }
    }
    Ok(())
}
