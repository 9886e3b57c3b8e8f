//! Broadcast channel instances, linear covariance constraints, covariance and
//! beamforming solutions, and the rate/SINR evaluators for both the broadcast
//! channel and its dual multiple-access channel.
//!
//! Users are indexed `0..K` everywhere. The encoding order is a permutation of
//! the user indices: the user at position 0 is encoded first and therefore sees
//! interference from every later-encoded user. On the dual MAC the order is
//! reversed: the user at position `t` is interfered by users at positions `< t`.

use nalgebra::ComplexField;

use crate::error::{Error, Result};
use crate::hermitian::{
    clamp_psd, eig_hermitian, inv_sqrt, inverse_pd_fast, logdet_pd, CMatrix, CVector, HermitianMatrix, PD_FLOOR,
};
use crate::scalar::{cx, lit, to_f64, tol_for, Real};

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet<T: Real> {
    h: Vec<CMatrix<T>>,
    sigma2: Vec<T>,
    order: Vec<usize>,
}

impl<T: Real> ChannelSet<T> {
    /// `h[k]` is the `Nr x Nt` channel of user `k`, `sigma2[k]` its noise power.
    /// The encoding order defaults to the index order.
    pub fn new(h: Vec<CMatrix<T>>, sigma2: Vec<T>) -> Result<Self> {
        let Some(first) = h.first() else {
            return Err(Error::InvalidInput("channel set needs at least one user".into()));
        };
        let (nr, nt) = first.shape();
        if nr == 0 || nt == 0 {
            return Err(Error::InvalidInput("channel matrices must be non-empty".into()));
        }
        if h.iter().any(|m| m.shape() != (nr, nt)) {
            return Err(Error::InvalidInput("all channel matrices must share one shape".into()));
        }
        if h.iter().flat_map(|m| m.iter()).any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput("channel entries must be finite".into()));
        }
        if sigma2.len() != h.len() {
            return Err(Error::InvalidInput(format!("{} noise powers for {} users", sigma2.len(), h.len())));
        }
        if sigma2.iter().any(|&s| !(s > T::zero()) || !s.is_finite()) {
            return Err(Error::InvalidInput("noise powers must be positive".into()));
        }
        let order = (0..h.len()).collect();
        Ok(Self { h, sigma2, order })
    }

    /// Unit noise power for every user.
    pub fn with_unit_noise(h: Vec<CMatrix<T>>) -> Result<Self> {
        let k = h.len();
        Self::new(h, vec![T::one(); k])
    }

    /// Replaces the encoding order (0-based permutation, first entry encoded first).
    pub fn with_encoding_order(mut self, order: Vec<usize>) -> Result<Self> {
        let k = self.users();
        let mut seen = vec![false; k];
        if order.len() != k {
            return Err(Error::InvalidInput("encoding order must list every user once".into()));
        }
        for &u in &order {
            if u >= k || seen[u] {
                return Err(Error::InvalidInput(format!("invalid encoding order {order:?}")));
            }
            seen[u] = true;
        }
        self.order = order;
        Ok(self)
    }

    pub fn users(&self) -> usize {
        self.h.len()
    }

    pub fn nt(&self) -> usize {
        self.h[0].ncols()
    }

    pub fn nr(&self) -> usize {
        self.h[0].nrows()
    }

    /// Streams per user, `min(Nt, Nr)`.
    pub fn streams_per_user(&self) -> usize {
        self.nt().min(self.nr())
    }

    pub fn channel(&self, user: usize) -> &CMatrix<T> {
        &self.h[user]
    }

    pub fn channels(&self) -> &[CMatrix<T>] {
        &self.h
    }

    pub fn sigma2(&self, user: usize) -> T {
        self.sigma2[user]
    }

    pub fn noise_powers(&self) -> &[T] {
        &self.sigma2
    }

    pub fn encoding_order(&self) -> &[usize] {
        &self.order
    }

    /// Position of `user` in the encoding order.
    pub fn position(&self, user: usize) -> usize {
        self.order.iter().position(|&u| u == user).expect("user index in range")
    }

    /// True when every channel entry is real.
    pub fn is_real(&self) -> bool {
        self.h.iter().flat_map(|m| m.iter()).all(|z| z.im == T::zero())
    }

    /// Normalized channels `H_k N^{-1/2} / sigma_k` of the virtual system with
    /// identity noise on both sides.
    pub fn whitened(&self, noise: &HermitianMatrix<T>, floor: T) -> Result<Vec<CMatrix<T>>> {
        self.check_nt(noise.dim())?;
        let w = inv_sqrt(noise, floor)?;
        Ok(self.h.iter().zip(&self.sigma2).map(|(h, &s)| (h * w.matrix()) * cx(T::one() / s.sqrt())).collect())
    }

    pub(crate) fn check_nt(&self, n: usize) -> Result<()> {
        if n != self.nt() {
            return Err(Error::InvalidInput(format!("expected {}x{} matrix, got {n}x{n}", self.nt(), self.nt())));
        }
        Ok(())
    }
}

/// `tr(Q A) <= P`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearConstraint<T: Real> {
    a: HermitianMatrix<T>,
    budget: T,
}

impl<T: Real> LinearConstraint<T> {
    pub fn new(a: HermitianMatrix<T>, budget: T) -> Result<Self> {
        if !(budget > T::zero()) || !budget.is_finite() {
            return Err(Error::InvalidInput("constraint budget must be positive".into()));
        }
        let a = clamp_psd(&a)?;
        Ok(Self { a, budget })
    }

    /// Total transmit power.
    pub fn sum_power(nt: usize, budget: T) -> Result<Self> {
        Self::new(HermitianMatrix::identity(nt), budget)
    }

    /// Power of antenna `antenna`.
    pub fn per_antenna(nt: usize, antenna: usize, budget: T) -> Result<Self> {
        if antenna >= nt {
            return Err(Error::InvalidInput(format!("antenna {antenna} out of range for {nt} antennas")));
        }
        let mut d = vec![T::zero(); nt];
        d[antenna] = T::one();
        Self::new(HermitianMatrix::from_diagonal(&d), budget)
    }

    /// Interference power `hᴴ Q h` received through `h`.
    pub fn interference(h: &CVector<T>, budget: T) -> Result<Self> {
        Self::new(HermitianMatrix::outer(h), budget)
    }

    pub fn matrix(&self) -> &HermitianMatrix<T> {
        &self.a
    }

    pub fn budget(&self) -> T {
        self.budget
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Broadcast covariances, `Nt x Nt`.
    Bc,
    /// Dual MAC covariances, `Nr x Nr`.
    Mac,
}

/// Per-user transmit covariances on one side of the duality.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceSet<T: Real> {
    side: Side,
    q: Vec<HermitianMatrix<T>>,
}

impl<T: Real> CovarianceSet<T> {
    pub fn new(side: Side, q: Vec<HermitianMatrix<T>>) -> Result<Self> {
        if q.is_empty() {
            return Err(Error::InvalidInput("covariance set needs at least one user".into()));
        }
        let n = q[0].dim();
        if q.iter().any(|m| m.dim() != n) {
            return Err(Error::InvalidInput("covariances must share one dimension".into()));
        }
        let q = q.iter().map(clamp_psd).collect::<Result<Vec<_>>>()?;
        Ok(Self { side, q })
    }

    pub(crate) fn new_unchecked(side: Side, q: Vec<HermitianMatrix<T>>) -> Self {
        Self { side, q }
    }

    pub fn zeros(side: Side, users: usize, dim: usize) -> Self {
        Self { side, q: vec![HermitianMatrix::zeros(dim); users] }
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn users(&self) -> usize {
        self.q.len()
    }

    pub fn dim(&self) -> usize {
        self.q[0].dim()
    }

    pub fn get(&self, user: usize) -> &HermitianMatrix<T> {
        &self.q[user]
    }

    pub fn covariances(&self) -> &[HermitianMatrix<T>] {
        &self.q
    }

    /// Sum over users.
    pub fn total(&self) -> HermitianMatrix<T> {
        self.q.iter().skip(1).fold(self.q[0].clone(), |acc, m| acc.add(m))
    }

    /// Sum of traces weighted by `weights[k]`.
    pub fn weighted_trace(&self, weights: &[T]) -> T {
        self.q.iter().zip(weights).fold(T::zero(), |acc, (m, &w)| acc + w * m.trace())
    }

    pub fn scaled(&self, s: T) -> Self {
        Self { side: self.side, q: self.q.iter().map(|m| m.scale(s)).collect() }
    }

    fn check(&self, ch: &ChannelSet<T>, side: Side) -> Result<()> {
        let dim = match side {
            Side::Bc => ch.nt(),
            Side::Mac => ch.nr(),
        };
        if self.side != side || self.users() != ch.users() || self.dim() != dim {
            return Err(Error::InvalidInput(format!(
                "expected {:?} covariances for {} users of dimension {dim}, got {:?} x{} of dimension {}",
                side,
                ch.users(),
                self.side,
                self.users(),
                self.dim()
            )));
        }
        Ok(())
    }
}

/// One data stream: BC transmit / MAC receive vector `u` (`Nt`), BC receive /
/// MAC transmit vector `v` (`Nr`), BC power `p` and MAC power `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct Stream<T: Real> {
    pub user: usize,
    pub u: CVector<T>,
    pub v: CVector<T>,
    pub p: T,
    pub q: T,
}

/// Streams listed in encoding order: users by their encoding position, and
/// within a user by decoding index.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamformingSolution<T: Real> {
    streams: Vec<Stream<T>>,
}

impl<T: Real> BeamformingSolution<T> {
    pub fn new(ch: &ChannelSet<T>, streams: Vec<Stream<T>>) -> Result<Self> {
        let bf = Self { streams };
        bf.validate(ch)?;
        Ok(bf)
    }

    pub fn validate(&self, ch: &ChannelSet<T>) -> Result<()> {
        let tol = tol_for::<T>(1e-10);
        let mut last_pos = 0;
        for s in &self.streams {
            if s.user >= ch.users() {
                return Err(Error::InvalidInput(format!("stream for unknown user {}", s.user)));
            }
            let pos = ch.position(s.user);
            if pos < last_pos {
                return Err(Error::InvalidInput("streams must follow the encoding order".into()));
            }
            last_pos = pos;
            if s.u.len() != ch.nt() || s.v.len() != ch.nr() {
                return Err(Error::InvalidInput("beamvector dimension mismatch".into()));
            }
            if (s.u.norm() - T::one()).abs() > tol || (s.v.norm() - T::one()).abs() > tol {
                return Err(Error::InvalidInput("beamvectors must have unit norm".into()));
            }
            if s.p < T::zero() || s.q < T::zero() {
                return Err(Error::InvalidInput("stream powers must be nonnegative".into()));
            }
        }
        Ok(())
    }

    pub fn streams(&self) -> &[Stream<T>] {
        &self.streams
    }

    pub fn streams_mut(&mut self) -> &mut [Stream<T>] {
        &mut self.streams
    }

    pub fn len(&self) -> usize {
        self.streams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.streams.is_empty()
    }

    /// `Q_i = sum_j p_ij u_ij u_ijᴴ`.
    pub fn bc_covariances(&self, ch: &ChannelSet<T>) -> CovarianceSet<T> {
        let mut q = vec![HermitianMatrix::zeros(ch.nt()); ch.users()];
        for s in &self.streams {
            q[s.user] = q[s.user].add(&HermitianMatrix::outer(&s.u).scale(s.p));
        }
        CovarianceSet::new_unchecked(Side::Bc, q)
    }

    /// `Q_i^(m) = sum_j q_ij v_ij v_ijᴴ`.
    pub fn mac_covariances(&self, ch: &ChannelSet<T>) -> CovarianceSet<T> {
        let mut q = vec![HermitianMatrix::zeros(ch.nr()); ch.users()];
        for s in &self.streams {
            q[s.user] = q[s.user].add(&HermitianMatrix::outer(&s.v).scale(s.q));
        }
        CovarianceSet::new_unchecked(Side::Mac, q)
    }

    /// `sum_s p_s u_sᴴ A u_s`, the BC side of the power-balance identity.
    pub fn bc_weighted_power(&self, a: &HermitianMatrix<T>) -> T {
        self.streams.iter().fold(T::zero(), |acc, s| acc + s.p * a.quad(&s.u))
    }

    /// `sum_s sigma_i^2 q_s`, the MAC side of the power-balance identity.
    pub fn mac_weighted_power(&self, ch: &ChannelSet<T>) -> T {
        self.streams.iter().fold(T::zero(), |acc, s| acc + ch.sigma2(s.user) * s.q)
    }
}

/// Positive SINR targets, one per user.
#[derive(Debug, Clone, PartialEq)]
pub struct SinrTargets<T: Real>(Vec<T>);

impl<T: Real> SinrTargets<T> {
    pub fn new(gamma: Vec<T>) -> Result<Self> {
        if gamma.is_empty() || gamma.iter().any(|&g| !(g > T::zero()) || !g.is_finite()) {
            return Err(Error::InvalidInput("SINR targets must be positive".into()));
        }
        Ok(Self(gamma))
    }

    pub fn uniform(users: usize, gamma: T) -> Result<Self> {
        Self::new(vec![gamma; users])
    }

    pub fn get(&self, user: usize) -> T {
        self.0[user]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn scaled(&self, c: T) -> Result<Self> {
        Self::new(self.0.iter().map(|&g| g * c).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SinrScheme {
    /// Dirty paper coding with SIC: stream `s` sees only streams encoded after it.
    Dpc,
    /// Plain beamforming: every other stream interferes.
    Linear,
}

/// Per-user DPC rates in nats under the channel's encoding order.
pub fn bc_rates_dpc<T: Real>(ch: &ChannelSet<T>, cov: &CovarianceSet<T>) -> Result<Vec<T>> {
    cov.check(ch, Side::Bc)?;
    let k = ch.users();
    let order = ch.encoding_order();
    let mut rates = vec![T::zero(); k];
    // Interference from users encoded after position t.
    let mut later = CMatrix::<T>::zeros(ch.nt(), ch.nt());
    for t in (0..k).rev() {
        let user = order[t];
        let h = ch.channel(user);
        let base = CMatrix::identity(ch.nr(), ch.nr()) * cx(ch.sigma2(user));
        let without = &base + h * &later * h.adjoint();
        let with_own = &without + h * cov.get(user).matrix() * h.adjoint();
        rates[user] = logdet_pd(&hermitize(with_own))? - logdet_pd(&hermitize(without))?;
        later += cov.get(user).matrix();
    }
    Ok(rates)
}

/// Per-user dual-MAC rates in nats with BS noise covariance `noise`; the
/// decoding order is the reverse of the encoding order.
pub fn mac_rates<T: Real>(ch: &ChannelSet<T>, cov: &CovarianceSet<T>, noise: &HermitianMatrix<T>) -> Result<Vec<T>> {
    cov.check(ch, Side::Mac)?;
    ch.check_nt(noise.dim())?;
    let eig = eig_hermitian(noise)?;
    crate::hermitian::require_pd(&eig, lit(PD_FLOOR))?;
    let order = ch.encoding_order();
    let mut rates = vec![T::zero(); ch.users()];
    let mut z = noise.matrix().clone();
    let mut prev = logdet_pd(&z)?;
    for &user in order {
        let h = ch.channel(user);
        z += h.adjoint() * cov.get(user).matrix() * h;
        let cur = logdet_pd(&hermitize(z.clone()))?;
        rates[user] = cur - prev;
        prev = cur;
    }
    Ok(rates)
}

/// Per-stream BC SINRs, in the order of `bf.streams()`.
pub fn bc_sinr<T: Real>(ch: &ChannelSet<T>, bf: &BeamformingSolution<T>, scheme: SinrScheme) -> Result<Vec<T>> {
    bf.validate(ch)?;
    let streams = bf.streams();
    let mut out = Vec::with_capacity(streams.len());
    for (idx, s) in streams.iter().enumerate() {
        let h = ch.channel(s.user);
        let hv = h.adjoint() * &s.v;
        let gain = |u: &CVector<T>| hv.dotc(u).modulus_squared();
        let signal = s.p * gain(&s.u);
        let interferers: Box<dyn Iterator<Item = (usize, &Stream<T>)>> = match scheme {
            SinrScheme::Dpc => Box::new(streams.iter().enumerate().skip(idx + 1)),
            SinrScheme::Linear => Box::new(streams.iter().enumerate().filter(move |(j, _)| *j != idx)),
        };
        let interference = interferers.fold(T::zero(), |acc, (_, o)| acc + o.p * gain(&o.u));
        out.push(signal / (interference + ch.sigma2(s.user) * s.v.norm_squared()));
    }
    Ok(out)
}

/// Per-stream dual-MAC SINRs with SIC at the base station.
pub fn mac_sinr<T: Real>(
    ch: &ChannelSet<T>,
    bf: &BeamformingSolution<T>,
    noise: &HermitianMatrix<T>,
) -> Result<Vec<T>> {
    bf.validate(ch)?;
    ch.check_nt(noise.dim())?;
    let eig = eig_hermitian(noise)?;
    crate::hermitian::require_pd(&eig, lit(PD_FLOOR))?;
    let mut r = noise.matrix().clone();
    let mut out = Vec::with_capacity(bf.len());
    for s in bf.streams() {
        let g = ch.channel(s.user).adjoint() * &s.v;
        let signal = s.q * s.u.dotc(&g).modulus_squared();
        let denom = (s.u.adjoint() * &r * &s.u)[(0, 0)].re;
        out.push(signal / denom);
        r += (&g * g.adjoint()) * cx(s.q);
    }
    Ok(out)
}

/// `tr((sum_i Q_i) A)`.
pub fn constraint_value<T: Real>(cov: &CovarianceSet<T>, c: &LinearConstraint<T>) -> Result<T> {
    if cov.side() != Side::Bc || cov.dim() != c.matrix().dim() {
        return Err(Error::InvalidInput("constraint needs BC covariances of matching dimension".into()));
    }
    Ok(cov.total().inner(c.matrix()))
}

/// Replaces every BC receive vector with the normalized MMSE-SIC filter
/// `(sigma^2 I + H (sum_{later} p u uᴴ) Hᴴ)^{-1} H u`.
pub fn bc_mmse_receivers<T: Real>(ch: &ChannelSet<T>, bf: &BeamformingSolution<T>) -> Result<BeamformingSolution<T>> {
    let mut out = bf.clone();
    let n = bf.len();
    let mut later = CMatrix::<T>::zeros(ch.nt(), ch.nt());
    for idx in (0..n).rev() {
        let s = &bf.streams()[idx];
        let h = ch.channel(s.user);
        let cov = CMatrix::identity(ch.nr(), ch.nr()) * cx(ch.sigma2(s.user)) + h * &later * h.adjoint();
        let v = inverse_pd_fast(&cov)? * (h * &s.u);
        out.streams[idx].v = normalize(v)?;
        later += HermitianMatrix::outer(&s.u).scale(s.p).matrix();
    }
    Ok(out)
}

/// Replaces every MAC receive vector with the normalized MMSE-SIC filter
/// `(N + sum_{earlier} q Hᴴ v vᴴ H)^{-1} Hᴴ v`.
pub fn mac_mmse_receivers<T: Real>(
    ch: &ChannelSet<T>,
    bf: &BeamformingSolution<T>,
    noise: &HermitianMatrix<T>,
) -> Result<BeamformingSolution<T>> {
    let mut out = bf.clone();
    let mut r = noise.matrix().clone();
    for (idx, s) in bf.streams().iter().enumerate() {
        let g = ch.channel(s.user).adjoint() * &s.v;
        out.streams[idx].u = normalize(inverse_pd_fast(&r)? * &g)?;
        r += (&g * g.adjoint()) * cx(s.q);
    }
    Ok(out)
}

/// Splits MAC covariances into eigen-streams (`v`, `q`), dropping zero-power
/// eigenvalues. Receive vectors `u` are left as the first canonical vector
/// until an MMSE pass fills them in.
pub fn mac_streams<T: Real>(ch: &ChannelSet<T>, cov: &CovarianceSet<T>) -> Result<BeamformingSolution<T>> {
    cov.check(ch, Side::Mac)?;
    let mut streams = Vec::new();
    let scale = cov.covariances().iter().fold(T::zero(), |a, m| a.max(m.norm_inf()));
    let cutoff = tol_for::<T>(1e-13) * scale;
    for &user in ch.encoding_order() {
        let eig = eig_hermitian(cov.get(user))?;
        for j in (0..eig.values.len()).rev() {
            let q = eig.values[j];
            if q > cutoff && q > T::zero() {
                streams.push(Stream {
                    user,
                    u: CVector::from_fn(ch.nt(), |i, _| if i == 0 { cx(T::one()) } else { cx(T::zero()) }),
                    v: eig.vectors.column(j).into_owned(),
                    p: T::zero(),
                    q,
                });
            }
        }
    }
    Ok(BeamformingSolution { streams })
}

pub(crate) fn normalize<T: Real>(v: CVector<T>) -> Result<CVector<T>> {
    let n = v.norm();
    if !(n > T::zero()) || !n.is_finite() {
        return Err(Error::DegenerateTransform(format!("cannot normalize vector of norm {}", to_f64(n))));
    }
    Ok(v * cx(T::one() / n))
}

pub(crate) fn hermitize<T: Real>(m: CMatrix<T>) -> CMatrix<T> {
    let half = cx(lit::<T>(0.5));
    (&m + m.adjoint()) * half
}
