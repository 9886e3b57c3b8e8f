#![allow(dead_code)]

use bcmac::channel::ChannelSet;
use bcmac::channel::{BeamformingSolution, Stream};
use bcmac::hermitian::{CMatrix, CVector, HermitianMatrix};
use bcmac::Complex;
use proptest::prelude::*;

pub fn cmat(r: usize, c: usize) -> impl Strategy<Value = CMatrix<f64>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), r * c)
        .prop_map(move |v| CMatrix::from_fn(r, c, |i, j| Complex::new(v[i * c + j].0, v[i * c + j].1)))
}

pub fn rmat(r: usize, c: usize) -> impl Strategy<Value = CMatrix<f64>> {
    prop::collection::vec(-1.0f64..1.0, r * c)
        .prop_map(move |v| CMatrix::from_fn(r, c, |i, j| Complex::new(v[i * c + j], 0.0)))
}

pub fn psd(n: usize) -> impl Strategy<Value = HermitianMatrix<f64>> {
    cmat(n, n).prop_map(|g| HermitianMatrix::from_hermitian_part(&g * g.adjoint()))
}

/// PSD plus `0.1 I`.
pub fn pd(n: usize) -> impl Strategy<Value = HermitianMatrix<f64>> {
    psd(n).prop_map(move |m| m.add(&HermitianMatrix::identity(n).scale(0.1)))
}

pub fn hermitian(n: usize) -> impl Strategy<Value = HermitianMatrix<f64>> {
    cmat(n, n).prop_map(HermitianMatrix::from_hermitian_part)
}

/// Random channel with noise powers in `[0.3, 2)` and a rotated encoding order.
pub fn channel(k: usize, nr: usize, nt: usize) -> impl Strategy<Value = ChannelSet<f64>> {
    (prop::collection::vec(cmat(nr, nt), k), prop::collection::vec(0.3f64..2.0, k), 0..k).prop_map(
        move |(h, s, rot)| {
            let mut order: Vec<usize> = (0..k).collect();
            order.rotate_left(rot);
            ChannelSet::new(h, s).unwrap().with_encoding_order(order).unwrap()
        },
    )
}

pub fn any_channel() -> impl Strategy<Value = ChannelSet<f64>> {
    (1usize..=3, 1usize..=3, 1usize..=3).prop_flat_map(|(k, nr, nt)| channel(k, nr, nt))
}

/// MISO MAC beamformers with powers in `[0.1, 3)`; receivers are placeholders.
pub fn miso_bf(ch: &ChannelSet<f64>, q: &[f64]) -> BeamformingSolution<f64> {
    let streams = ch
        .encoding_order()
        .iter()
        .map(|&user| Stream {
            user,
            u: CVector::from_fn(ch.nt(), |i, _| Complex::new(if i == 0 { 1.0 } else { 0.0 }, 0.0)),
            v: CVector::from_element(1, Complex::new(1.0, 0.0)),
            p: 0.0,
            q: q[user],
        })
        .collect();
    BeamformingSolution::new(ch, streams).unwrap()
}

pub fn rel_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}
