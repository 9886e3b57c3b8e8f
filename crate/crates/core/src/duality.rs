//! Covariance and beamformer transformations between a broadcast channel with
//! one linear constraint `tr(Q A) <= P` and its dual MAC with noise `A` and
//! weighted power budget `sum_i sigma_i^2 tr(Q_i) <= P`.
//!
//! The capacity transforms work on the whitened system `G_k = H_k A^{-1/2}/sigma_k`
//! with BC covariances `X_k = A^{1/2} Q_k A^{1/2}` and MAC covariances
//! `S_k = sigma_k^2 Q_k^(m)`, user by user, using for each user the SVD of
//! `B^{-1/2} G_k M^{-1/2}` where `M` is the MAC interference-plus-noise seen by
//! the user and `B` its BC interference-plus-noise.

use nalgebra::ComplexField;

use crate::channel::{
    bc_rates_dpc, bc_sinr, mac_rates, mac_sinr, normalize, BeamformingSolution, ChannelSet, CovarianceSet, Side,
    SinrScheme,
};
use crate::error::{Error, Result};
use crate::hermitian::{inv_sqrt, inverse_pd_fast, sqrt_psd, svd_phased, CMatrix, CVector, HermitianMatrix, PD_FLOOR};
use crate::scalar::{cx, lit, to_f64, Real};

/// Audit record of one transform.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformReport<T: Real> {
    pub side_from: Side,
    pub side_to: Side,
    /// Largest per-user rate gap (capacity) or per-stream SINR gap (beamforming).
    pub rate_or_sinr_gap: T,
    /// MAC weighted power minus BC constraint value; nonnegative up to roundoff.
    pub constraint_slack: T,
}

struct Whitened<T: Real> {
    g: Vec<CMatrix<T>>,
    a_inv_sqrt: HermitianMatrix<T>,
    a_sqrt: HermitianMatrix<T>,
}

fn whiten<T: Real>(ch: &ChannelSet<T>, a: &HermitianMatrix<T>) -> Result<Whitened<T>> {
    let a_inv_sqrt = inv_sqrt(a, lit(PD_FLOOR))?;
    let a_sqrt = sqrt_psd(a)?;
    Ok(Whitened { g: ch.whitened(a, lit(PD_FLOOR))?, a_inv_sqrt, a_sqrt })
}

fn check_side<T: Real>(ch: &ChannelSet<T>, cov: &CovarianceSet<T>, side: Side) -> Result<()> {
    let dim = if side == Side::Bc { ch.nt() } else { ch.nr() };
    if cov.side() != side || cov.users() != ch.users() || cov.dim() != dim {
        return Err(Error::InvalidInput(format!("expected {side:?} covariances matching the channel")));
    }
    Ok(())
}

/// `(P^{1/2}, P^{-1/2})` for `P = I + (PSD)`.
fn roots<T: Real>(m: CMatrix<T>) -> Result<(HermitianMatrix<T>, HermitianMatrix<T>)> {
    let h = HermitianMatrix::from_hermitian_part(m);
    Ok((sqrt_psd(&h)?, inv_sqrt(&h, T::zero())?))
}

/// Per-user thin SVD factors of `B^{-1/2} G M^{-1/2}`: left factor `F` and right factor `V`.
fn svd_factors<T: Real>(
    g: &CMatrix<T>,
    b_inv_sqrt: &HermitianMatrix<T>,
    m_inv_sqrt: &HermitianMatrix<T>,
) -> Result<(CMatrix<T>, CMatrix<T>)> {
    let e = b_inv_sqrt.matrix() * g * m_inv_sqrt.matrix();
    let svd = svd_phased(&e)?;
    Ok((svd.u, svd.v))
}

/// Rate-preserving MAC to BC covariance transform.
pub fn mac_to_bc_capacity<T: Real>(
    ch: &ChannelSet<T>,
    cov_mac: &CovarianceSet<T>,
    a: &HermitianMatrix<T>,
) -> Result<CovarianceSet<T>> {
    check_side(ch, cov_mac, Side::Mac)?;
    ch.check_nt(a.dim())?;
    let w = whiten(ch, a)?;
    let order = ch.encoding_order();
    let k = ch.users();
    let (nt, nr) = (ch.nt(), ch.nr());
    let s: Vec<_> = (0..k).map(|u| cov_mac.get(u).scale(ch.sigma2(u))).collect();

    // MAC interference for position t: users at positions < t.
    let mut m_at = Vec::with_capacity(k);
    let mut acc = CMatrix::<T>::identity(nt, nt);
    for &u in order {
        m_at.push(acc.clone());
        acc += w.g[u].adjoint() * s[u].matrix() * &w.g[u];
    }

    let mut x = vec![HermitianMatrix::zeros(nt); k];
    let mut later = CMatrix::<T>::zeros(nt, nt);
    for t in (0..k).rev() {
        let u = order[t];
        let g = &w.g[u];
        let (_, m_is) = roots(m_at[t].clone())?;
        let (b_s, b_is) = roots(CMatrix::identity(nr, nr) + g * &later * g.adjoint())?;
        let (f, v) = svd_factors(g, &b_is, &m_is)?;
        let wmat = s[u].congruence(b_s.matrix());
        let tmat = wmat.congruence(&f.adjoint());
        let xk = tmat.congruence(&(m_is.matrix() * v));
        later += xk.matrix();
        x[u] = xk;
    }
    let q = x.iter().map(|xk| xk.congruence(w.a_inv_sqrt.matrix())).collect();
    CovarianceSet::new(Side::Bc, q)
}

/// Rate-preserving BC to MAC covariance transform.
pub fn bc_to_mac_capacity<T: Real>(
    ch: &ChannelSet<T>,
    cov_bc: &CovarianceSet<T>,
    a: &HermitianMatrix<T>,
) -> Result<CovarianceSet<T>> {
    check_side(ch, cov_bc, Side::Bc)?;
    ch.check_nt(a.dim())?;
    let w = whiten(ch, a)?;
    let order = ch.encoding_order();
    let k = ch.users();
    let (nt, nr) = (ch.nt(), ch.nr());
    let x: Vec<_> = (0..k).map(|u| cov_bc.get(u).congruence(w.a_sqrt.matrix())).collect();

    // BC interference for position t: users at positions > t.
    let mut later_at = vec![CMatrix::<T>::zeros(nt, nt); k];
    let mut acc = CMatrix::<T>::zeros(nt, nt);
    for t in (0..k).rev() {
        later_at[t] = acc.clone();
        acc += x[order[t]].matrix();
    }

    let mut s = vec![HermitianMatrix::zeros(nr); k];
    let mut m = CMatrix::<T>::identity(nt, nt);
    for t in 0..k {
        let u = order[t];
        let g = &w.g[u];
        let (m_s, m_is) = roots(m.clone())?;
        let (_, b_is) = roots(CMatrix::identity(nr, nr) + g * &later_at[t] * g.adjoint())?;
        let (f, v) = svd_factors(g, &b_is, &m_is)?;
        let y = x[u].congruence(m_s.matrix());
        let tmat = y.congruence(&v.adjoint());
        let sk = tmat.congruence(&(b_is.matrix() * f));
        m += g.adjoint() * sk.matrix() * g;
        s[u] = sk;
    }
    let q = s.iter().enumerate().map(|(u, sk)| sk.scale(T::one() / ch.sigma2(u))).collect();
    CovarianceSet::new(Side::Mac, q)
}

/// Compares the rate vectors and powers of a MAC/BC covariance pair.
pub fn capacity_report<T: Real>(
    ch: &ChannelSet<T>,
    cov_mac: &CovarianceSet<T>,
    cov_bc: &CovarianceSet<T>,
    a: &HermitianMatrix<T>,
    from: Side,
) -> Result<TransformReport<T>> {
    let rm = mac_rates(ch, cov_mac, a)?;
    let rb = bc_rates_dpc(ch, cov_bc)?;
    let gap = rm.iter().zip(&rb).fold(T::zero(), |g, (x, y)| g.max((*x - *y).abs()));
    let mac_power = cov_mac.weighted_trace(ch.noise_powers());
    let bc_power = cov_bc.total().inner(a);
    let to = if from == Side::Mac { Side::Bc } else { Side::Mac };
    Ok(TransformReport { side_from: from, side_to: to, rate_or_sinr_gap: gap, constraint_slack: mac_power - bc_power })
}

/// SINR-preserving MAC to BC beamformer transform.
///
/// MAC receive vectors are replaced by unit-norm MMSE-SIC filters; BC receive
/// vectors are the MAC transmit vectors; BC powers are solved by
/// back-substitution from the last-encoded stream so that every BC SINR equals
/// the corresponding MAC SINR. The result satisfies
/// `sum p uᴴ A u = sum sigma^2 q`.
pub fn mac_to_bc_sinr<T: Real>(
    ch: &ChannelSet<T>,
    bf_mac: &BeamformingSolution<T>,
    a: &HermitianMatrix<T>,
) -> Result<BeamformingSolution<T>> {
    ch.check_nt(a.dim())?;
    inv_sqrt(a, lit(PD_FLOOR))?;
    let mut out = bf_mac.clone();
    let n = out.len();
    let nt = ch.nt();

    let mut r = a.matrix().clone();
    let mut mac_gamma = Vec::with_capacity(n);
    for s in out.streams_mut() {
        let g: CVector<T> = ch.channel(s.user).adjoint() * &s.v;
        let x = inverse_pd_fast(&r)? * &g;
        if x.norm() > T::zero() {
            s.u = normalize(x)?;
        } else if s.q > T::zero() {
            return Err(Error::DegenerateTransform(format!(
                "stream of user {} has zero signal with power {:e}",
                s.user,
                to_f64(s.q)
            )));
        } else {
            s.u = CVector::from_fn(nt, |i, _| cx(if i == 0 { T::one() } else { T::zero() }));
        }
        let sig = s.q * s.u.dotc(&g).modulus_squared();
        let den = (s.u.adjoint() * &r * &s.u)[(0, 0)].re;
        mac_gamma.push(sig / den);
        r += (&g * g.adjoint()) * cx(s.q);
    }

    bc_powers_for_sinr(ch, &out, &mac_gamma)
}

/// BC powers for fixed beams so that stream `s` reaches SINR `goal[s]` under
/// DPC, by back-substitution from the last-encoded stream.
pub fn bc_powers_for_sinr<T: Real>(
    ch: &ChannelSet<T>,
    bf: &BeamformingSolution<T>,
    goal: &[T],
) -> Result<BeamformingSolution<T>> {
    if goal.len() != bf.len() || goal.iter().any(|&g| !(g >= T::zero())) {
        return Err(Error::InvalidInput("one nonnegative SINR goal per stream is required".into()));
    }
    let mut out = bf.clone();
    for idx in (0..out.len()).rev() {
        let streams = out.streams();
        let s = &streams[idx];
        let hv: CVector<T> = ch.channel(s.user).adjoint() * &s.v;
        let gain = |u: &CVector<T>| hv.dotc(u).modulus_squared();
        let interference = streams[idx + 1..].iter().fold(T::zero(), |acc, o| acc + o.p * gain(&o.u));
        let own = gain(&s.u);
        let p = if goal[idx] == T::zero() {
            T::zero()
        } else if own > T::zero() {
            goal[idx] * (interference + ch.sigma2(s.user)) / own
        } else {
            return Err(Error::DegenerateTransform(format!("stream {idx} has zero BC gain")));
        };
        out.streams_mut()[idx].p = p;
    }
    out.validate(ch)?;
    Ok(out)
}

/// Per-stream SINR gap and power-identity slack of a transformed pair.
pub fn sinr_report<T: Real>(
    ch: &ChannelSet<T>,
    bf: &BeamformingSolution<T>,
    a: &HermitianMatrix<T>,
) -> Result<TransformReport<T>> {
    let bc = bc_sinr(ch, bf, SinrScheme::Dpc)?;
    let mac = mac_sinr(ch, bf, a)?;
    let gap = bc.iter().zip(&mac).fold(T::zero(), |g, (x, y)| g.max((*x - *y).abs()));
    Ok(TransformReport {
        side_from: Side::Mac,
        side_to: Side::Bc,
        rate_or_sinr_gap: gap,
        constraint_slack: bf.mac_weighted_power(ch) - bf.bc_weighted_power(a),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{constraint_value, LinearConstraint, Stream};
    use crate::hermitian::cmatrix_from_real;
    use nalgebra::Complex;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn crand(rng: &mut ChaCha8Rng, r: usize, c: usize) -> CMatrix<f64> {
        CMatrix::from_fn(r, c, |_, _| Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    fn rand_psd(rng: &mut ChaCha8Rng, n: usize) -> HermitianMatrix<f64> {
        let g = crand(rng, n, n);
        HermitianMatrix::from_hermitian_part(&g * g.adjoint())
    }

    #[test]
    fn single_user_flip() {
        let h = cmatrix_from_real::<f64>(&[vec![1.0, 0.5], vec![0.0, 2.0]]).unwrap();
        let ch = ChannelSet::with_unit_noise(vec![h]).unwrap();
        let a = HermitianMatrix::identity(2);
        let mac = CovarianceSet::new(Side::Mac, vec![HermitianMatrix::from_diagonal(&[1.0, 2.0])]).unwrap();
        let bc = mac_to_bc_capacity(&ch, &mac, &a).unwrap();
        let rep = capacity_report(&ch, &mac, &bc, &a, Side::Mac).unwrap();
        assert!(rep.rate_or_sinr_gap < 1e-12);
        assert!(rep.constraint_slack.abs() < 1e-12);
    }

    #[test]
    fn zeros_map_to_zeros() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let ch = ChannelSet::with_unit_noise(vec![crand(&mut rng, 2, 2), crand(&mut rng, 2, 2)]).unwrap();
        let a = rand_psd(&mut rng, 2).add(&HermitianMatrix::identity(2));
        let bc = mac_to_bc_capacity(&ch, &CovarianceSet::zeros(Side::Mac, 2, 2), &a).unwrap();
        assert!(bc.total().norm_fro() < 1e-15);
        let mac = bc_to_mac_capacity(&ch, &CovarianceSet::zeros(Side::Bc, 2, 2), &a).unwrap();
        assert!(mac.total().norm_fro() < 1e-15);
    }

    #[test]
    fn random_capacity_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        for case in 0..40 {
            let k = 1 + case % 3;
            let nt = 1 + (case / 3) % 3;
            let nr = 1 + (case / 9) % 3;
            let sig: Vec<f64> = (0..k).map(|_| rng.gen_range(0.3..2.0)).collect();
            let order = {
                let mut o: Vec<usize> = (0..k).collect();
                o.rotate_left(case % k);
                o
            };
            let ch = ChannelSet::new((0..k).map(|_| crand(&mut rng, nr, nt)).collect(), sig)
                .unwrap()
                .with_encoding_order(order)
                .unwrap();
            let a = rand_psd(&mut rng, nt).add(&HermitianMatrix::identity(nt).scale(0.1));
            let mac = CovarianceSet::new(Side::Mac, (0..k).map(|_| rand_psd(&mut rng, nr)).collect()).unwrap();
            let bc = mac_to_bc_capacity(&ch, &mac, &a).unwrap();
            let rep = capacity_report(&ch, &mac, &bc, &a, Side::Mac).unwrap();
            assert!(rep.rate_or_sinr_gap < 1e-9, "case {case}: gap {}", rep.rate_or_sinr_gap);
            assert!(rep.constraint_slack > -1e-9, "case {case}: slack {}", rep.constraint_slack);
            let back = bc_to_mac_capacity(&ch, &bc, &a).unwrap();
            let rep = capacity_report(&ch, &back, &bc, &a, Side::Bc).unwrap();
            assert!(rep.rate_or_sinr_gap < 1e-9, "case {case}: back gap {}", rep.rate_or_sinr_gap);
            assert!(rep.constraint_slack < 1e-9, "case {case}: back slack {}", rep.constraint_slack);
        }
    }

    #[test]
    fn per_antenna_surrogate_example_channels() {
        let h1 = cmatrix_from_real(&[vec![1.0, 0.0], vec![0.2, 0.6]]).unwrap();
        let h2 = cmatrix_from_real(&[vec![0.5, 0.0], vec![0.2, 1.0]]).unwrap();
        let ch = ChannelSet::with_unit_noise(vec![h1, h2]).unwrap();
        let a = HermitianMatrix::from_diagonal(&[1.0 + 1e-3, 1e-3]);
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let mac = CovarianceSet::new(Side::Mac, vec![rand_psd(&mut rng, 2), rand_psd(&mut rng, 2)]).unwrap();
        let bc = mac_to_bc_capacity(&ch, &mac, &a).unwrap();
        let rep = capacity_report(&ch, &mac, &bc, &a, Side::Mac).unwrap();
        assert!(rep.rate_or_sinr_gap < 1e-7);
        let c = LinearConstraint::new(a.clone(), 1.0).unwrap();
        let p = mac.weighted_trace(ch.noise_powers());
        assert!(constraint_value(&bc, &c).unwrap() <= p + 1e-8);
    }

    #[test]
    fn singular_a_rejected() {
        let ch = ChannelSet::with_unit_noise(vec![CMatrix::<f64>::identity(2, 2)]).unwrap();
        let r = mac_to_bc_capacity(
            &ch,
            &CovarianceSet::zeros(Side::Mac, 1, 2),
            &HermitianMatrix::from_diagonal(&[1.0, 0.0]),
        );
        assert!(matches!(r, Err(Error::SingularConstraintMatrix { .. })));
    }

    fn miso_bf(rng: &mut ChaCha8Rng, ch: &ChannelSet<f64>) -> BeamformingSolution<f64> {
        let one = CVector::from_element(1, cx(1.0));
        let streams = ch
            .encoding_order()
            .iter()
            .map(|&user| Stream {
                user,
                u: CVector::from_fn(ch.nt(), |i, _| cx(if i == 0 { 1.0 } else { 0.0 })),
                v: one.clone(),
                p: 0.0,
                q: rng.gen_range(0.1..3.0),
            })
            .collect();
        BeamformingSolution::new(ch, streams).unwrap()
    }

    #[test]
    fn conventional_sinr_duality() {
        let h = cmatrix_from_real::<f64>(&[vec![0.8]]).unwrap();
        let ch = ChannelSet::with_unit_noise(vec![h]).unwrap();
        let one = CVector::from_element(1, cx(1.0));
        let bf =
            BeamformingSolution::new(&ch, vec![Stream { user: 0, u: one.clone(), v: one, p: 0.0, q: 2.5 }]).unwrap();
        let out = mac_to_bc_sinr(&ch, &bf, &HermitianMatrix::identity(1)).unwrap();
        assert!((out.streams()[0].p - 2.5).abs() < 1e-14);
    }

    #[test]
    fn zero_mac_power_gives_zero_bc_power() {
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        let ch = ChannelSet::with_unit_noise(vec![crand(&mut rng, 1, 2), crand(&mut rng, 1, 2)]).unwrap();
        let mut bf = miso_bf(&mut rng, &ch);
        for s in bf.streams_mut() {
            s.q = 0.0;
        }
        let out = mac_to_bc_sinr(&ch, &bf, &HermitianMatrix::identity(2)).unwrap();
        assert!(out.streams().iter().all(|s| s.p == 0.0));
    }

    #[test]
    fn random_miso_sinr_transform() {
        let mut rng = ChaCha8Rng::seed_from_u64(35);
        for case in 0..30 {
            let k = 1 + case % 3;
            let nt = 1 + case % 4;
            let ch = ChannelSet::new(
                (0..k).map(|_| crand(&mut rng, 1, nt)).collect(),
                (0..k).map(|_| rng.gen_range(0.3..2.0)).collect(),
            )
            .unwrap();
            let a = rand_psd(&mut rng, nt).add(&HermitianMatrix::identity(nt).scale(0.1));
            let bf = miso_bf(&mut rng, &ch);
            let out = mac_to_bc_sinr(&ch, &bf, &a).unwrap();
            let rep = sinr_report(&ch, &out, &a).unwrap();
            let scale = out.mac_weighted_power(&ch);
            assert!(rep.rate_or_sinr_gap < 1e-8, "case {case}: {}", rep.rate_or_sinr_gap);
            assert!(rep.constraint_slack.abs() < 1e-8 * scale.max(1.0), "case {case}: {}", rep.constraint_slack);
        }
    }

    #[test]
    fn zero_signal_is_degenerate() {
        let h1 = cmatrix_from_real(&[vec![1.0, 0.0]]).unwrap();
        let h2 = cmatrix_from_real(&[vec![0.0, 0.0]]).unwrap();
        let ch = ChannelSet::with_unit_noise(vec![h1, h2]).unwrap();
        let one = CVector::from_element(1, cx(1.0));
        let e1 = CVector::from_vec(vec![cx(1.0), cx(0.0)]);
        let bf = BeamformingSolution::new(
            &ch,
            vec![
                Stream { user: 0, u: e1.clone(), v: one.clone(), p: 0.0, q: 1.0 },
                Stream { user: 1, u: e1, v: one, p: 0.0, q: 1.0 },
            ],
        )
        .unwrap();
        assert!(matches!(mac_to_bc_sinr(&ch, &bf, &HermitianMatrix::identity(2)), Err(Error::DegenerateTransform(_))));
    }
}
