//! Convex solvers on the dual multiple-access channel: weighted sum-rate
//! maximization under a weighted sum-power budget, and (MISO) SINR balancing
//! and SINR-constrained power minimization, all with a positive definite
//! base-station noise covariance.
//!
//! The weighted sum-rate problem is whitened first: with `G_k = H_k N^{-1/2}/sigma_k`
//! and `S_k = sigma_k^2 Q_k` it becomes a MAC with identity noise and a plain
//! sum-trace budget, solved by projected gradient ascent.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::{BeamformingSolution, ChannelSet, CovarianceSet, Side, SinrTargets, Stream};
use crate::error::{Error, Result};
use crate::hermitian::{eig_hermitian, inverse_pd_fast, logdet_pd, CMatrix, CVector, HermitianMatrix};
use crate::scalar::{cx, lit, to_f64, Real};

#[derive(Debug, Clone, PartialEq)]
pub struct SolverSettings<T: Real> {
    pub max_iters: usize,
    /// Stopping threshold on the projected-gradient residual.
    pub tol: T,
    /// Step shrink factor in backtracking.
    pub armijo_beta: T,
    /// Sufficient-increase constant.
    pub armijo_c: T,
    /// Noise eigenvalues at or below this are rejected.
    pub pd_floor: T,
    /// Number of starts for non-concave problems; the first is the scaled
    /// identity, the rest random. Concave problems use a single start.
    pub restarts: usize,
    pub seed: u64,
}

impl<T: Real> Default for SolverSettings<T> {
    fn default() -> Self {
        Self {
            max_iters: 5000,
            tol: lit(1e-9),
            armijo_beta: lit(0.5),
            armijo_c: lit(1e-4),
            pd_floor: lit(1e-8),
            restarts: 2,
            seed: 0,
        }
    }
}

impl<T: Real> SolverSettings<T> {
    pub fn validate(&self) -> Result<()> {
        let one = T::one();
        let zero = T::zero();
        if !(self.tol > zero) {
            return Err(Error::InvalidInput("tol must be positive".into()));
        }
        if !(self.armijo_beta > zero && self.armijo_beta < one) || !(self.armijo_c > zero && self.armijo_c < one) {
            return Err(Error::InvalidInput("Armijo constants must lie in (0, 1)".into()));
        }
        if !(self.pd_floor >= zero) {
            return Err(Error::InvalidInput("pd_floor must be nonnegative".into()));
        }
        if self.max_iters == 0 || self.restarts == 0 {
            return Err(Error::InvalidInput("max_iters and restarts must be positive".into()));
        }
        Ok(())
    }
}

/// Dual-MAC weighted sum-rate solution.
#[derive(Debug, Clone)]
pub struct MacSolution<T: Real> {
    /// MAC covariances for the original (unwhitened) channels.
    pub cov: CovarianceSet<T>,
    /// Weighted sum rate in nats.
    pub objective: T,
    pub iterations: usize,
    /// Projected-gradient residual at the returned point.
    pub kkt_residual: T,
    /// Multiplier of the budget constraint.
    pub multiplier: T,
    /// False when `max_iters` ran out before the residual met `tol`.
    pub converged: bool,
    /// Spread of objectives across restarts.
    pub restart_gap: T,
    /// Objective after every accepted step of the returned run.
    pub objective_trace: Vec<T>,
}

/// Whitened weighted sum-rate problem.
pub(crate) struct WsrProblem<T: Real> {
    g: Vec<CMatrix<T>>,
    order: Vec<usize>,
    /// `c_t = w_{pi[t]} - w_{pi[t+1]}`.
    c: Vec<T>,
    nr: usize,
    nt: usize,
}

impl<T: Real> WsrProblem<T> {
    fn new(ch: &ChannelSet<T>, noise: &HermitianMatrix<T>, weights: &[T], floor: T) -> Result<Self> {
        check_weights(ch, weights)?;
        let g = ch.whitened(noise, floor)?;
        let order = ch.encoding_order().to_vec();
        let k = order.len();
        let c = (0..k).map(|t| weights[order[t]] - if t + 1 < k { weights[order[t + 1]] } else { T::zero() }).collect();
        Ok(Self { g, order, c, nr: ch.nr(), nt: ch.nt() })
    }

    fn cumulative(&self, s: &[HermitianMatrix<T>]) -> Vec<CMatrix<T>> {
        let mut z = CMatrix::<T>::identity(self.nt, self.nt);
        self.order
            .iter()
            .map(|&u| {
                z += self.g[u].adjoint() * s[u].matrix() * &self.g[u];
                z.clone()
            })
            .collect()
    }

    fn objective(&self, s: &[HermitianMatrix<T>]) -> Result<T> {
        let zs = self.cumulative(s);
        let mut f = T::zero();
        for (z, &c) in zs.iter().zip(&self.c) {
            if c != T::zero() {
                f += c * logdet_pd(z)?;
            }
        }
        Ok(f)
    }

    fn gradient(&self, s: &[HermitianMatrix<T>]) -> Result<Vec<HermitianMatrix<T>>> {
        let zs = self.cumulative(s);
        let k = self.order.len();
        let mut grad = vec![HermitianMatrix::zeros(self.nr); k];
        let mut phi = CMatrix::<T>::zeros(self.nt, self.nt);
        for t in (0..k).rev() {
            if self.c[t] != T::zero() {
                phi += inverse_pd_fast(&zs[t])? * cx(self.c[t]);
            }
            let u = self.order[t];
            grad[u] = HermitianMatrix::from_hermitian_part(&self.g[u] * &phi * self.g[u].adjoint());
        }
        Ok(grad)
    }
}

fn check_weights<T: Real>(ch: &ChannelSet<T>, weights: &[T]) -> Result<()> {
    if weights.len() != ch.users() {
        return Err(Error::InvalidInput(format!("{} weights for {} users", weights.len(), ch.users())));
    }
    if weights.iter().any(|&w| !(w >= T::zero()) || !w.is_finite()) || weights.iter().all(|&w| w == T::zero()) {
        return Err(Error::InvalidInput("weights must be nonnegative and not all zero".into()));
    }
    Ok(())
}

fn check_budget<T: Real>(budget: T) -> Result<()> {
    if !(budget >= T::zero()) || !budget.is_finite() {
        return Err(Error::InvalidInput("budget must be finite and nonnegative".into()));
    }
    Ok(())
}

/// Euclidean projection of a block-diagonal Hermitian matrix onto
/// `{S_k >= 0, sum_k tr S_k <= budget}`: clip eigenvalues at zero and, if the
/// trace still exceeds the budget, lower all eigenvalues by a common level.
pub fn project_trace_budget<T: Real>(blocks: &[HermitianMatrix<T>], budget: T) -> Result<Vec<HermitianMatrix<T>>> {
    let eigs = blocks.iter().map(eig_hermitian).collect::<Result<Vec<_>>>()?;
    let mut vals: Vec<T> = eigs.iter().flat_map(|e| e.values.iter().copied()).filter(|&x| x > T::zero()).collect();
    let total = vals.iter().fold(T::zero(), |a, &b| a + b);
    let mut level = T::zero();
    if total > budget {
        vals.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
        let mut acc = T::zero();
        for (i, &v) in vals.iter().enumerate() {
            acc += v;
            let mu = (acc - budget) / lit(i as f64 + 1.0);
            let next = vals.get(i + 1).copied().unwrap_or(T::zero());
            if mu >= next && mu < v {
                level = mu;
                break;
            }
        }
    }
    Ok(eigs.iter().map(|e| e.map_values(|x| (x - level).max(T::zero()))).collect())
}

fn inner<T: Real>(a: &[HermitianMatrix<T>], b: &[HermitianMatrix<T>]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (x, y)| acc + x.inner(y))
}

fn natural_residual<T: Real>(s: &[HermitianMatrix<T>], grad: &[HermitianMatrix<T>], budget: T) -> Result<T> {
    let stepped: Vec<_> = s.iter().zip(grad).map(|(x, g)| x.add(g)).collect();
    let proj = project_trace_budget(&stepped, budget)?;
    Ok(s.iter().zip(&proj).fold(T::zero(), |acc, (x, p)| acc.max(x.sub(p).norm_fro())))
}

struct Run<T: Real> {
    s: Vec<HermitianMatrix<T>>,
    f: T,
    iterations: usize,
    residual: T,
    converged: bool,
    trace: Vec<T>,
}

fn ascend<T: Real>(
    prob: &WsrProblem<T>,
    mut s: Vec<HermitianMatrix<T>>,
    budget: T,
    set: &SolverSettings<T>,
) -> Result<Run<T>> {
    let mut f = prob.objective(&s)?;
    let mut trace = vec![f];
    let mut eta = T::one();
    let eta_min = lit::<T>(1e-18);
    let eta_max = lit::<T>(1e8);
    let mut flat = 0usize;
    for iter in 0..set.max_iters {
        let grad = prob.gradient(&s)?;
        let residual = natural_residual(&s, &grad, budget)?;
        if residual <= set.tol {
            return Ok(Run { s, f, iterations: iter, residual, converged: true, trace });
        }
        let mut accepted = false;
        while eta > eta_min {
            let stepped: Vec<_> = s.iter().zip(&grad).map(|(x, g)| x.add(&g.scale(eta))).collect();
            let cand = project_trace_budget(&stepped, budget)?;
            let delta: Vec<_> = cand.iter().zip(&s).map(|(a, b)| a.sub(b)).collect();
            let lin = inner(&grad, &delta);
            let fc = prob.objective(&cand)?;
            if fc >= f + set.armijo_c * lin && fc >= f {
                let noise_floor = lit::<T>(8.0) * T::default_epsilon() * f.abs().max(T::one());
                flat = if fc - f <= noise_floor { flat + 1 } else { 0 };
                s = cand;
                f = fc;
                trace.push(f);
                accepted = true;
                eta = (eta * lit(2.0)).min(eta_max);
                break;
            }
            eta *= set.armijo_beta;
        }
        if !accepted || flat >= STAGNATION {
            // Objective changes are below roundoff; finish on the residual instead.
            let (s, f, used, residual) = polish(prob, s, f, budget, set, set.max_iters - iter - 1)?;
            trace.push(f);
            let converged = residual <= set.tol;
            return Ok(Run { s, f, iterations: iter + 1 + used, residual, converged, trace });
        }
    }
    let grad = prob.gradient(&s)?;
    let residual = natural_residual(&s, &grad, budget)?;
    let converged = residual <= set.tol;
    Ok(Run { s, f, iterations: set.max_iters, residual, converged, trace })
}

/// Consecutive accepted steps without a measurable gain before polishing.
const STAGNATION: usize = 20;

/// Projected gradient steps accepted when they shrink the natural residual
/// without lowering the objective.
fn polish<T: Real>(
    prob: &WsrProblem<T>,
    mut s: Vec<HermitianMatrix<T>>,
    mut f: T,
    budget: T,
    set: &SolverSettings<T>,
    max_iters: usize,
) -> Result<(Vec<HermitianMatrix<T>>, T, usize, T)> {
    let mut grad = prob.gradient(&s)?;
    let mut residual = natural_residual(&s, &grad, budget)?;
    let mut eta = T::one();
    let mut used = 0;
    while used < max_iters && residual > set.tol && eta > lit(1e-12) {
        used += 1;
        let stepped: Vec<_> = s.iter().zip(&grad).map(|(x, g)| x.add(&g.scale(eta))).collect();
        let cand = project_trace_budget(&stepped, budget)?;
        let gc = prob.gradient(&cand)?;
        let rc = natural_residual(&cand, &gc, budget)?;
        let fc = prob.objective(&cand)?;
        if rc < residual && fc >= f {
            f = fc;
            s = cand;
            grad = gc;
            residual = rc;
            eta = (eta * lit(2.0)).min(lit(1e8));
        } else {
            eta *= lit(0.5);
        }
    }
    Ok((s, f, used, residual))
}

fn random_start<T: Real>(rng: &mut ChaCha8Rng, k: usize, n: usize, budget: T) -> Vec<HermitianMatrix<T>> {
    let blocks: Vec<_> = (0..k)
        .map(|_| {
            let x = CMatrix::<T>::from_fn(n, n, |_, _| {
                nalgebra::Complex::new(lit(rng.gen_range(-1.0..1.0)), lit(rng.gen_range(-1.0..1.0)))
            });
            HermitianMatrix::from_hermitian_part(&x * x.adjoint())
        })
        .collect();
    let total = blocks.iter().fold(T::zero(), |a, b| a + b.trace());
    let s = if total > T::zero() { budget / total } else { T::zero() };
    blocks.iter().map(|b| b.scale(s)).collect()
}

/// Maximizes `sum_i w_i r_i` on the dual MAC with noise `noise` subject to
/// `sum_i sigma_i^2 tr(Q_i) <= budget`, decoding in reverse encoding order.
///
/// The problem is concave when the weights are nonincreasing along the
/// encoding order; otherwise the result is a stationary point.
pub fn solve_wsr_mac<T: Real>(
    ch: &ChannelSet<T>,
    noise: &HermitianMatrix<T>,
    budget: T,
    weights: &[T],
    set: &SolverSettings<T>,
) -> Result<MacSolution<T>> {
    solve_wsr_mac_from(ch, noise, budget, weights, set, None)
}

/// As [`solve_wsr_mac`], adding `init` (MAC covariances, rescaled onto the
/// budget) as an extra starting point.
pub fn solve_wsr_mac_from<T: Real>(
    ch: &ChannelSet<T>,
    noise: &HermitianMatrix<T>,
    budget: T,
    weights: &[T],
    set: &SolverSettings<T>,
    init: Option<&CovarianceSet<T>>,
) -> Result<MacSolution<T>> {
    set.validate()?;
    check_budget(budget)?;
    let prob = WsrProblem::new(ch, noise, weights, set.pd_floor)?;
    let k = ch.users();
    let nr = ch.nr();
    if budget == T::zero() {
        return Ok(MacSolution {
            cov: CovarianceSet::zeros(Side::Mac, k, nr),
            objective: T::zero(),
            iterations: 0,
            kkt_residual: T::zero(),
            multiplier: T::zero(),
            converged: true,
            restart_gap: T::zero(),
            objective_trace: vec![T::zero()],
        });
    }

    let mut starts = Vec::new();
    if let Some(init) = init {
        if init.side() != Side::Mac || init.users() != k || init.dim() != nr {
            return Err(Error::InvalidInput("warm start must be MAC covariances of matching shape".into()));
        }
        let s: Vec<_> = (0..k).map(|u| init.get(u).scale(ch.sigma2(u))).collect();
        let total = s.iter().fold(T::zero(), |a, b| a + b.trace());
        if total > T::zero() {
            starts.push(s.iter().map(|b| b.scale(budget / total)).collect());
        }
    }
    // A concave problem has a single optimal value, so one start suffices.
    let concave = prob.c.iter().all(|&c| c >= T::zero());
    if starts.is_empty() || !concave {
        let uniform = budget / lit((k * nr) as f64);
        starts.push(vec![HermitianMatrix::identity(nr).scale(uniform); k]);
    }
    if !concave {
        let mut rng = ChaCha8Rng::seed_from_u64(set.seed);
        for _ in 1..set.restarts {
            starts.push(random_start(&mut rng, k, nr, budget));
        }
    }

    let mut best: Option<Run<T>> = None;
    let mut lo = T::max_value().unwrap_or(T::zero());
    let mut hi = -lo;
    let mut total_iters = 0;
    for start in starts {
        let run = ascend(&prob, start, budget, set)?;
        total_iters += run.iterations;
        lo = lo.min(run.f);
        hi = hi.max(run.f);
        if best.as_ref().is_none_or(|b| run.f > b.f) {
            best = Some(run);
        }
    }
    let best = best.expect("at least one start");
    if !best.converged {
        log::warn!(
            "weighted sum-rate solve stopped after {} iterations with residual {:e}",
            best.iterations,
            to_f64(best.residual)
        );
    }
    let grad = prob.gradient(&best.s)?;
    let multiplier = inner(&grad, &best.s) / budget;
    let cov =
        CovarianceSet::new_unchecked(Side::Mac, (0..k).map(|u| best.s[u].scale(T::one() / ch.sigma2(u))).collect());
    Ok(MacSolution {
        cov,
        objective: best.f,
        iterations: total_iters,
        kkt_residual: best.residual,
        multiplier,
        converged: best.converged,
        restart_gap: hi - lo,
        objective_trace: best.trace,
    })
}

/// Projected-gradient residual `max_k |S_k - Proj(S + grad)_k|` of MAC
/// covariances `cov` in whitened coordinates; zero exactly at a KKT point.
pub fn kkt_residual_wsr<T: Real>(
    ch: &ChannelSet<T>,
    noise: &HermitianMatrix<T>,
    budget: T,
    weights: &[T],
    cov: &CovarianceSet<T>,
) -> Result<T> {
    check_budget(budget)?;
    let prob = WsrProblem::new(ch, noise, weights, lit(crate::hermitian::PD_FLOOR))?;
    if cov.side() != Side::Mac || cov.users() != ch.users() || cov.dim() != ch.nr() {
        return Err(Error::InvalidInput("expected MAC covariances matching the channel".into()));
    }
    let s: Vec<_> = (0..ch.users()).map(|u| cov.get(u).scale(ch.sigma2(u))).collect();
    let grad = prob.gradient(&s)?;
    natural_residual(&s, &grad, budget)
}

/// Gradient of the weighted MAC sum rate with respect to each user's MAC
/// covariance, under the real inner product `Re tr(G dQ)`.
pub fn wsr_gradient<T: Real>(
    ch: &ChannelSet<T>,
    noise: &HermitianMatrix<T>,
    weights: &[T],
    cov: &CovarianceSet<T>,
) -> Result<Vec<HermitianMatrix<T>>> {
    let prob = WsrProblem::new(ch, noise, weights, lit(crate::hermitian::PD_FLOOR))?;
    let s: Vec<_> = (0..ch.users()).map(|u| cov.get(u).scale(ch.sigma2(u))).collect();
    let g = prob.gradient(&s)?;
    // d/dQ = sigma^2 d/dS
    Ok(g.iter().enumerate().map(|(u, m)| m.scale(ch.sigma2(u))).collect())
}

fn require_miso<T: Real>(ch: &ChannelSet<T>) -> Result<()> {
    if ch.nr() != 1 {
        return Err(Error::InvalidInput(format!("SINR-constrained problems need Nr = 1, got {}", ch.nr())));
    }
    Ok(())
}

/// Effective MAC channel vectors `H_kᴴ` for a MISO channel set.
fn miso_vectors<T: Real>(ch: &ChannelSet<T>) -> Vec<CVector<T>> {
    ch.channels().iter().map(|h| h.adjoint().column(0).into_owned()).collect()
}

/// Per-position interference-plus-noise gains `c_t = 1 / (hᴴ R_t^{-1} h)` and
/// MMSE receivers, with `R_t = N + sum_{s<t} q_s h_s h_sᴴ` in encoding order.
fn mmse_gains<T: Real>(
    ch: &ChannelSet<T>,
    h: &[CVector<T>],
    noise: &HermitianMatrix<T>,
    q: &[T],
) -> Result<(Vec<T>, Vec<CVector<T>>)> {
    let mut r = noise.matrix().clone();
    let mut gains = Vec::with_capacity(q.len());
    let mut recv = Vec::with_capacity(q.len());
    for (t, &u) in ch.encoding_order().iter().enumerate() {
        let x = inverse_pd_fast(&r)? * &h[u];
        let quad = h[u].dotc(&x).re;
        if !(quad > T::zero()) {
            return Err(Error::DegenerateTransform(format!("user {u} has a zero channel")));
        }
        gains.push(T::one() / quad);
        recv.push(x);
        r += (&h[u] * h[u].adjoint()) * cx(q[t]);
    }
    Ok((gains, recv))
}

fn miso_solution<T: Real>(ch: &ChannelSet<T>, recv: Vec<CVector<T>>, q: &[T]) -> Result<BeamformingSolution<T>> {
    let one = CVector::from_element(1, cx(T::one()));
    let streams = ch
        .encoding_order()
        .iter()
        .zip(recv)
        .zip(q)
        .map(|((&user, u), &q)| Ok(Stream { user, u: crate::channel::normalize(u)?, v: one.clone(), p: T::zero(), q }))
        .collect::<Result<Vec<_>>>()?;
    BeamformingSolution::new(ch, streams)
}

/// Max-min SINR balancing on the MISO dual MAC with SIC: maximizes `alpha`
/// with `SINR_i >= alpha gamma_i` and `sum_i sigma_i^2 q_i = budget`.
///
/// Alternates MMSE receivers with the power update `q ∝ gamma ⊙ c`.
pub fn solve_sinr_balance_mac<T: Real>(
    ch: &ChannelSet<T>,
    noise: &HermitianMatrix<T>,
    budget: T,
    targets: &SinrTargets<T>,
    set: &SolverSettings<T>,
) -> Result<(T, BeamformingSolution<T>)> {
    set.validate()?;
    require_miso(ch)?;
    if !(budget > T::zero()) || !budget.is_finite() {
        return Err(Error::InvalidInput("balancing budget must be positive".into()));
    }
    check_targets(ch, targets)?;
    ch.whitened(noise, set.pd_floor)?;
    let h = miso_vectors(ch);
    let order = ch.encoding_order();
    let gamma: Vec<T> = order.iter().map(|&u| targets.get(u)).collect();
    let sig: Vec<T> = order.iter().map(|&u| ch.sigma2(u)).collect();
    let k = order.len();
    let mut q = vec![budget / sig.iter().fold(T::zero(), |a, &b| a + b); k];
    let mut iters = 0;
    loop {
        let (c, _) = mmse_gains(ch, &h, noise, &q)?;
        let raw: Vec<T> = (0..k).map(|t| gamma[t] * c[t]).collect();
        let scale = budget / (0..k).fold(T::zero(), |a, t| a + sig[t] * raw[t]);
        let next: Vec<T> = raw.iter().map(|&x| x * scale).collect();
        let change = q.iter().zip(&next).fold(T::zero(), |a, (&x, &y)| a.max((x - y).abs() / y));
        q = next;
        iters += 1;
        if change <= set.tol {
            break;
        }
        if iters >= set.max_iters {
            log::warn!("SINR balancing stopped after {iters} sweeps, relative change {:e}", to_f64(change));
            break;
        }
    }
    let (c, recv) = mmse_gains(ch, &h, noise, &q)?;
    let alpha = (0..k).fold(T::max_value().unwrap_or(T::one()), |a, t| a.min(q[t] / (c[t] * gamma[t])));
    Ok((alpha, miso_solution(ch, recv, &q)?))
}

/// Minimizes `sum_i sigma_i^2 q_i` on the MISO dual MAC subject to
/// `SINR_i >= gamma_i`, by the interference-function fixed point
/// `q_t <- gamma_t / (hᴴ R_t^{-1} h)`. Returns the total weighted power.
pub fn solve_power_min_mac<T: Real>(
    ch: &ChannelSet<T>,
    noise: &HermitianMatrix<T>,
    targets: &SinrTargets<T>,
    set: &SolverSettings<T>,
) -> Result<(T, BeamformingSolution<T>)> {
    set.validate()?;
    require_miso(ch)?;
    check_targets(ch, targets)?;
    ch.whitened(noise, set.pd_floor)?;
    let h = miso_vectors(ch);
    let order = ch.encoding_order();
    let gamma: Vec<T> = order.iter().map(|&u| targets.get(u)).collect();
    let k = order.len();
    let limit = lit::<T>(1e12);
    let mut q = vec![T::zero(); k];
    // SIC makes the map triangular: sweep t fixes q_t exactly once q_{<t} are fixed.
    for sweep in 0..set.max_iters.max(k + 1) {
        let (c, _) = mmse_gains(ch, &h, noise, &q)?;
        let next: Vec<T> = (0..k).map(|t| gamma[t] * c[t]).collect();
        let total = (0..k).fold(T::zero(), |a, t| a + ch.sigma2(order[t]) * next[t]);
        if !(total <= limit) {
            return Err(Error::InfeasibleTargets(to_f64(total)));
        }
        let change = q.iter().zip(&next).fold(T::zero(), |a, (&x, &y)| a.max((x - y).abs() / y));
        q = next;
        if change <= set.tol * lit(1e-3) || sweep > k {
            break;
        }
    }
    let (_, recv) = mmse_gains(ch, &h, noise, &q)?;
    let total = (0..k).fold(T::zero(), |a, t| a + ch.sigma2(order[t]) * q[t]);
    Ok((total, miso_solution(ch, recv, &q)?))
}

fn check_targets<T: Real>(ch: &ChannelSet<T>, targets: &SinrTargets<T>) -> Result<()> {
    if targets.as_slice().len() != ch.users() {
        return Err(Error::InvalidInput(format!("{} SINR targets for {} users", targets.as_slice().len(), ch.users())));
    }
    Ok(())
}
