//! Capacity regions and beamforming for Gaussian MIMO broadcast channels under
//! several linear (or convex nonlinear) transmit covariance constraints.
//!
//! A broadcast problem with one constraint `tr(Q A) <= P` is solved on its dual
//! multiple-access channel, whose noise covariance is `A` and whose users share a
//! weighted sum-power budget `P`. Several constraints are merged into one with
//! nonnegative weights that an outer loop adjusts; nonlinear constraints are
//! approximated by accumulated tangent hyperplanes.
//!
//! The numeric modules are generic over the real scalar ([`Real`]); the aliases
//! below fix it to `f64`.
#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0)` also rejects NaN

pub mod channel;
pub mod duality;
pub mod error;
pub mod hermitian;
pub mod mac;
pub mod oracle;
pub mod orchestrator;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

pub use nalgebra::Complex;

pub type CMatrix = hermitian::CMatrix<f64>;
pub type CVector = hermitian::CVector<f64>;
pub type Hermitian = hermitian::HermitianMatrix<f64>;
pub type ChannelSet = channel::ChannelSet<f64>;
pub type LinearConstraint = channel::LinearConstraint<f64>;
pub type CovarianceSet = channel::CovarianceSet<f64>;
pub type BeamformingSolution = channel::BeamformingSolution<f64>;
pub type SinrTargets = channel::SinrTargets<f64>;
pub type SolverSettings = mac::SolverSettings<f64>;
pub type MacSolution = mac::MacSolution<f64>;
pub type OuterSettings = orchestrator::OuterSettings<f64>;
pub type DualWeights = orchestrator::DualWeights<f64>;
