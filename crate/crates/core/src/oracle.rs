//! Brute-force reference solvers for small real-valued instances, a
//! finite-difference gradient, and classical sum-power iterative water-filling.
//!
//! The grid oracles cover `K = 2`, `Nt = 2`, `Nr <= 2` with real channels.
//! Covariances are parameterized as `R(theta) diag(a, b) R(theta)ᵀ` with the
//! four eigenvalues drawn from a simplex and the whole point scaled onto the
//! constraint boundary, which is optimal since rates grow with power.

use nalgebra::{Matrix2, Vector2};
use rayon::prelude::*;

use crate::channel::{mac_rates, ChannelSet, CovarianceSet, LinearConstraint, Side, SinrTargets};
use crate::error::{Error, Result};
use crate::hermitian::{eig_hermitian, inv_sqrt, CMatrix, HermitianMatrix, PD_FLOOR};
use crate::scalar::cx;

/// Largest number of points evaluated per zoom level.
pub const GRID_BUDGET: u128 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub points_per_axis: usize,
    /// Extra passes, each re-centered on the incumbent with a smaller box.
    pub zoom_levels: usize,
    /// Box shrink factor per zoom level (> 1).
    pub zoom_factor: f64,
}

impl GridSpec {
    pub fn new(points_per_axis: usize, zoom_levels: usize, zoom_factor: f64) -> Result<Self> {
        if points_per_axis < 2 || !(zoom_factor > 1.0) {
            return Err(Error::InvalidInput("grid needs at least 2 points per axis and zoom factor > 1".into()));
        }
        Ok(Self { points_per_axis, zoom_levels, zoom_factor })
    }

    fn points(&self, dims: usize) -> Result<u128> {
        let pts = (self.points_per_axis as u128).checked_pow(dims as u32).unwrap_or(u128::MAX);
        if pts > GRID_BUDGET {
            return Err(Error::GridBudgetExceeded { points: pts, budget: GRID_BUDGET });
        }
        Ok(pts)
    }
}

/// Maximizes `f` over a box by exhaustive grids, zooming onto the incumbent.
fn zoom_search<const D: usize>(
    grid: &GridSpec,
    lo0: [f64; D],
    hi0: [f64; D],
    periodic: [bool; D],
    f: impl Fn(&[f64; D]) -> f64 + Sync,
) -> Result<(f64, [f64; D])> {
    let total = grid.points(D)? as usize;
    let n = grid.points_per_axis;
    let (mut lo, mut hi) = (lo0, hi0);
    let mut best = (f64::NEG_INFINITY, lo0);
    for _ in 0..=grid.zoom_levels {
        let found = (0..total)
            .into_par_iter()
            .map(|mut idx| {
                let mut x = [0.0; D];
                for d in 0..D {
                    let i = idx % n;
                    idx /= n;
                    x[d] = lo[d] + (hi[d] - lo[d]) * i as f64 / (n - 1) as f64;
                }
                (f(&x), x)
            })
            .reduce(|| (f64::NEG_INFINITY, lo0), |a, b| if b.0 > a.0 { b } else { a });
        if found.0 > best.0 {
            best = found;
        }
        for d in 0..D {
            let half = (hi[d] - lo[d]) / 2.0 / grid.zoom_factor;
            let (mut a, mut b) = (best.1[d] - half, best.1[d] + half);
            if !periodic[d] {
                if a < lo0[d] {
                    b += lo0[d] - a;
                    a = lo0[d];
                }
                if b > hi0[d] {
                    a -= b - hi0[d];
                    b = hi0[d];
                }
                a = a.max(lo0[d]);
            }
            lo[d] = a;
            hi[d] = b;
        }
    }
    Ok(best)
}

fn rotation(theta: f64) -> Matrix2<f64> {
    let (s, c) = theta.sin_cos();
    Matrix2::new(c, -s, s, c)
}

fn rotated(theta: f64, a: f64, b: f64) -> Matrix2<f64> {
    let r = rotation(theta);
    r * Matrix2::from_diagonal(&Vector2::new(a, b)) * r.transpose()
}

/// Stick-breaking map from the unit cube onto the 4-simplex.
fn simplex4(u: [f64; 3]) -> [f64; 4] {
    let a = u[0];
    let b = (1.0 - u[0]) * u[1];
    let c = (1.0 - u[0]) * (1.0 - u[1]) * u[2];
    [a, b, c, (1.0 - a - b - c).max(0.0)]
}

fn real2(m: &CMatrix<f64>) -> Matrix2<f64> {
    Matrix2::from_fn(|i, j| if i < m.nrows() && j < m.ncols() { m[(i, j)].re } else { 0.0 })
}

struct Real2User {
    h: Matrix2<f64>,
    inv_sigma2: f64,
}

fn real_two_user(ch: &ChannelSet<f64>) -> Result<Vec<Real2User>> {
    if ch.users() != 2 || ch.nt() != 2 || ch.nr() > 2 || !ch.is_real() {
        return Err(Error::InvalidInput(
            "grid oracles need 2 users, 2 transmit antennas, at most 2 receive antennas and real channels".into(),
        ));
    }
    Ok((0..2).map(|k| Real2User { h: real2(ch.channel(k)), inv_sigma2: 1.0 / ch.sigma2(k) }).collect())
}

fn real_constraints(constraints: &[LinearConstraint<f64>]) -> Result<Vec<(Matrix2<f64>, f64)>> {
    if constraints.is_empty() || constraints.iter().any(|c| c.matrix().dim() != 2) {
        return Err(Error::InvalidInput("grid oracles need 2x2 constraint matrices".into()));
    }
    Ok(constraints.iter().map(|c| (real2(c.matrix().matrix()), c.budget())).collect())
}

fn det_i_plus(h: &Matrix2<f64>, q: &Matrix2<f64>, scale: f64) -> f64 {
    (Matrix2::identity() + h * q * h.transpose() * scale).determinant()
}

fn trace_prod(a: &Matrix2<f64>, b: &Matrix2<f64>) -> f64 {
    (a * b).trace()
}

/// Grid lower bound on the best weighted DPC sum rate (nats) of a real 2-user
/// broadcast channel under linear constraints, in the channel's encoding order.
pub fn brute_wsr(
    ch: &ChannelSet<f64>,
    constraints: &[LinearConstraint<f64>],
    weights: &[f64],
    grid: &GridSpec,
) -> Result<f64> {
    let users = real_two_user(ch)?;
    let cons = real_constraints(constraints)?;
    if weights.len() != 2 {
        return Err(Error::InvalidInput("two weights are required".into()));
    }
    let first = ch.encoding_order()[0];
    let last = ch.encoding_order()[1];
    let half_pi = std::f64::consts::FRAC_PI_2;
    let f = |x: &[f64; 5]| {
        let e = simplex4([x[2], x[3], x[4]]);
        let mut q = [rotated(x[0], e[0], e[1]), rotated(x[1], e[2], e[3])];
        let total = q[0] + q[1];
        let scale = cons.iter().fold(f64::INFINITY, |s, (a, p)| {
            let t = trace_prod(&total, a);
            if t > 0.0 {
                s.min(p / t)
            } else {
                s
            }
        });
        if !scale.is_finite() {
            return f64::NEG_INFINITY;
        }
        q[0] *= scale;
        q[1] *= scale;
        let (qf, ql) = (&q[0], &q[1]);
        let uf = &users[first];
        let ul = &users[last];
        let r_first = (det_i_plus(&uf.h, &(qf + ql), uf.inv_sigma2) / det_i_plus(&uf.h, ql, uf.inv_sigma2)).ln();
        let r_last = det_i_plus(&ul.h, ql, ul.inv_sigma2).ln();
        weights[first] * r_first + weights[last] * r_last
    };
    let (v, _) = zoom_search(
        grid,
        [0.0, 0.0, 0.0, 0.0, 0.0],
        [half_pi, half_pi, 1.0, 1.0, 1.0],
        [true, true, false, false, false],
        f,
    )?;
    Ok(v.max(0.0))
}

/// Grid lower bound on the best weighted dual-MAC sum rate (nats) with noise
/// covariance `noise` and budget `sum sigma_k^2 tr(Q_k) <= budget`.
pub fn brute_wsr_mac(
    ch: &ChannelSet<f64>,
    noise: &HermitianMatrix<f64>,
    budget: f64,
    weights: &[f64],
    grid: &GridSpec,
) -> Result<f64> {
    let users = real_two_user(ch)?;
    if noise.dim() != 2 || weights.len() != 2 {
        return Err(Error::InvalidInput("need a 2x2 noise covariance and two weights".into()));
    }
    if budget <= 0.0 {
        return Ok(0.0);
    }
    let n = real2(noise.matrix());
    let base = n.determinant();
    if !(base > 0.0) {
        return Err(Error::NotPositiveDefinite(base));
    }
    let first = ch.encoding_order()[0];
    let last = ch.encoding_order()[1];
    let half_pi = std::f64::consts::FRAC_PI_2;
    let f = |x: &[f64; 5]| {
        let e = simplex4([x[2], x[3], x[4]]);
        let s = [rotated(x[0], e[0], e[1]), rotated(x[1], e[2], e[3])];
        let used: f64 = (0..2).map(|k| s[k].trace() / users[k].inv_sigma2).sum();
        if used <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let scale = budget / used;
        let term = |k: usize| users[k].h.transpose() * s[k] * users[k].h * scale;
        // user encoded first is decoded last on the MAC
        let z_first = n + term(first);
        let z_all = z_first + term(last);
        let r_first = (z_first.determinant() / base).ln();
        let r_last = (z_all.determinant() / z_first.determinant()).ln();
        weights[first] * r_first + weights[last] * r_last
    };
    let (v, _) = zoom_search(grid, [0.0; 5], [half_pi, half_pi, 1.0, 1.0, 1.0], [true, true, false, false, false], f)?;
    Ok(v.max(0.0))
}

struct MisoBeams {
    h: [Vector2<f64>; 2],
    sigma2: [f64; 2],
    gamma: [f64; 2],
    /// Encoding order.
    order: [usize; 2],
}

fn miso_two_user(ch: &ChannelSet<f64>, targets: &SinrTargets<f64>) -> Result<MisoBeams> {
    if ch.users() != 2 || ch.nt() != 2 || ch.nr() != 1 || !ch.is_real() {
        return Err(Error::InvalidInput(
            "beam oracles need 2 real single-antenna users and 2 transmit antennas".into(),
        ));
    }
    if targets.as_slice().len() != 2 {
        return Err(Error::InvalidInput("two SINR targets are required".into()));
    }
    let h = |k: usize| Vector2::new(ch.channel(k)[(0, 0)].re, ch.channel(k)[(0, 1)].re);
    Ok(MisoBeams {
        h: [h(0), h(1)],
        sigma2: [ch.sigma2(0), ch.sigma2(1)],
        gamma: [targets.get(0), targets.get(1)],
        order: [ch.encoding_order()[0], ch.encoding_order()[1]],
    })
}

impl MisoBeams {
    /// Constraint loads `c1 a + c2 a^2` of DPC powers meeting `SINR_k = a gamma_k`
    /// with unit beams at angles `theta`, or `None` for a zero-gain beam.
    fn load_coefficients(&self, theta: [f64; 2], cons: &[(Matrix2<f64>, f64)]) -> Option<Vec<(f64, f64, f64)>> {
        let u = [Vector2::new(theta[0].cos(), theta[0].sin()), Vector2::new(theta[1].cos(), theta[1].sin())];
        let [f, l] = self.order;
        let g = |k: usize, j: usize| self.h[k].dot(&u[j]).powi(2);
        let (gff, gfl, gll) = (g(f, f), g(f, l), g(l, l));
        if gff <= 1e-300 || gll <= 1e-300 {
            return None;
        }
        // p_l = a gl sl / gll ; p_f = a gf (p_l gfl + sf) / gff
        let pl1 = self.gamma[l] * self.sigma2[l] / gll;
        let pf1 = self.gamma[f] * self.sigma2[f] / gff;
        let pf2 = self.gamma[f] * pl1 * gfl / gff;
        Some(
            cons.iter()
                .map(|(a, p)| {
                    let wf = u[f].dot(&(a * u[f]));
                    let wl = u[l].dot(&(a * u[l]));
                    (pl1 * wl + pf1 * wf, pf2 * wf, *p)
                })
                .collect(),
        )
    }
}

/// Grid estimate of the best balanced ratio `min_k SINR_k / gamma_k` over
/// real unit beams, with DPC powers solved exactly for each beam pair.
pub fn brute_sinr_balance(
    ch: &ChannelSet<f64>,
    constraints: &[LinearConstraint<f64>],
    targets: &SinrTargets<f64>,
    grid: &GridSpec,
) -> Result<f64> {
    let m = miso_two_user(ch, targets)?;
    let cons = real_constraints(constraints)?;
    let pi = std::f64::consts::PI;
    let f = |x: &[f64; 2]| {
        let Some(coef) = m.load_coefficients([x[0], x[1]], &cons) else {
            return f64::NEG_INFINITY;
        };
        coef.iter().fold(f64::INFINITY, |best, &(c1, c2, p)| {
            let a = if c2 > 1e-300 {
                2.0 * p / (c1 + (c1 * c1 + 4.0 * c2 * p).sqrt())
            } else if c1 > 0.0 {
                p / c1
            } else {
                f64::INFINITY
            };
            best.min(a)
        })
    };
    Ok(zoom_search(grid, [0.0, 0.0], [pi, pi], [true, true], f)?.0)
}

/// Grid estimate of the smallest `max_l tr(Q A_l) / P_l` meeting every SINR
/// target exactly, over real unit beams.
pub fn brute_power_balance(
    ch: &ChannelSet<f64>,
    constraints: &[LinearConstraint<f64>],
    targets: &SinrTargets<f64>,
    grid: &GridSpec,
) -> Result<f64> {
    let m = miso_two_user(ch, targets)?;
    let cons = real_constraints(constraints)?;
    let pi = std::f64::consts::PI;
    let f = |x: &[f64; 2]| match m.load_coefficients([x[0], x[1]], &cons) {
        Some(coef) => -coef.iter().fold(0.0f64, |w, &(c1, c2, p)| w.max((c1 + c2) / p)),
        None => f64::NEG_INFINITY,
    };
    Ok(-zoom_search(grid, [0.0, 0.0], [pi, pi], [true, true], f)?.0)
}

/// Central-difference gradient of `f` at Hermitian `q` on the Hermitian basis,
/// returned as the matrix `G` with `df = Re tr(G dQ)`.
pub fn finite_diff_gradient(
    f: impl Fn(&HermitianMatrix<f64>) -> f64,
    q: &HermitianMatrix<f64>,
    h: f64,
) -> Result<HermitianMatrix<f64>> {
    if !(1e-7..=1e-4).contains(&h) {
        return Err(Error::InvalidInput(format!("step {h:e} outside [1e-7, 1e-4]")));
    }
    let n = q.dim();
    let deriv = |e: &CMatrix<f64>| {
        let plus = HermitianMatrix::from_hermitian_part(q.matrix() + e * cx(h));
        let minus = HermitianMatrix::from_hermitian_part(q.matrix() - e * cx(h));
        (f(&plus) - f(&minus)) / (2.0 * h)
    };
    let mut g = CMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        let mut e = CMatrix::zeros(n, n);
        e[(i, i)] = cx(1.0);
        g[(i, i)] = cx(deriv(&e));
        for j in i + 1..n {
            let mut re = CMatrix::zeros(n, n);
            re[(i, j)] = cx(1.0);
            re[(j, i)] = cx(1.0);
            let mut im = CMatrix::zeros(n, n);
            im[(i, j)] = nalgebra::Complex::new(0.0, 1.0);
            im[(j, i)] = nalgebra::Complex::new(0.0, -1.0);
            let v = nalgebra::Complex::new(deriv(&re), deriv(&im)) / cx(2.0);
            g[(i, j)] = v;
            g[(j, i)] = v.conj();
        }
    }
    Ok(HermitianMatrix::from_hermitian_part(g))
}

/// Sum-capacity MAC covariances for unit noise and a plain sum-power budget by
/// iterative water-filling with averaging over `iters` rounds.
pub fn sum_power_iwf(ch: &ChannelSet<f64>, budget: f64, iters: usize) -> Result<CovarianceSet<f64>> {
    let k = ch.users();
    let (nt, nr) = (ch.nt(), ch.nr());
    let mut q = vec![CMatrix::<f64>::zeros(nr, nr); k];
    for _ in 0..iters {
        let total = (0..k)
            .fold(CMatrix::<f64>::identity(nt, nt), |acc, j| acc + ch.channel(j).adjoint() * &q[j] * ch.channel(j));
        let mut eff = Vec::with_capacity(k);
        for (j, qj) in q.iter().enumerate() {
            let others = &total - ch.channel(j).adjoint() * qj * ch.channel(j);
            let w = inv_sqrt(&HermitianMatrix::from_hermitian_part(others), PD_FLOOR)?;
            let g = ch.channel(j) * w.matrix();
            eff.push(eig_hermitian(&HermitianMatrix::from_hermitian_part(&g * g.adjoint()))?);
        }
        let gains: Vec<f64> = eff.iter().flat_map(|e| e.values.iter().copied()).filter(|&x| x > 1e-14).collect();
        let level = water_level(&gains, budget);
        for j in 0..k {
            let s = eff[j].map_values(|x| if x > 1e-14 { (level - 1.0 / x).max(0.0) } else { 0.0 });
            q[j] = &q[j] * cx((k as f64 - 1.0) / k as f64) + s.matrix() * cx(1.0 / k as f64);
        }
    }
    CovarianceSet::new(Side::Mac, q.into_iter().map(HermitianMatrix::from_hermitian_part).collect())
}

/// `mu` with `sum (mu - 1/g)^+ = budget`.
fn water_level(gains: &[f64], budget: f64) -> f64 {
    let mut inv: Vec<f64> = gains.iter().map(|g| 1.0 / g).collect();
    inv.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let mut acc = 0.0;
    let mut level = 0.0;
    for (i, &x) in inv.iter().enumerate() {
        acc += x;
        let mu = (budget + acc) / (i + 1) as f64;
        if mu > x {
            level = mu;
        } else {
            break;
        }
    }
    level
}

/// Per-user MAC rates (nats) of the iterative water-filling solution.
pub fn sum_power_iwf_rates(ch: &ChannelSet<f64>, budget: f64, iters: usize) -> Result<Vec<f64>> {
    let cov = sum_power_iwf(ch, budget, iters)?;
    mac_rates(ch, &cov, &HermitianMatrix::identity(ch.nt()))
}
