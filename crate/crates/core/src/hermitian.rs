//! Dense complex matrix primitives: Hermitian eigendecomposition, inverse
//! square roots, PSD projection, log-determinants and a phase-normalized SVD.
//!
//! Everything here is a pure function of its inputs.

use nalgebra::{Cholesky, Complex, ComplexField, DMatrix, DVector, SymmetricEigen, SVD};

use crate::error::{Error, Result};
use crate::scalar::{cx, lit, to_f64, tol_for, Real};

pub type CMatrix<T> = DMatrix<Complex<T>>;
pub type CVector<T> = DVector<Complex<T>>;

/// Default eigenvalue floor for matrices that must be inverted.
pub const PD_FLOOR: f64 = 1e-8;
/// Negative eigenvalues down to `-PSD_CLAMP * max(1, |M|)` are treated as roundoff.
pub const PSD_CLAMP: f64 = 1e-9;

/// A square complex matrix equal to its conjugate transpose.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix<T: Real> {
    m: CMatrix<T>,
}

impl<T: Real> HermitianMatrix<T> {
    /// Validates `m` (square, finite, Hermitian to working precision) and
    /// symmetrizes away the residual asymmetry.
    pub fn new(m: CMatrix<T>) -> Result<Self> {
        if m.nrows() == 0 || m.nrows() != m.ncols() {
            return Err(Error::InvalidInput(format!(
                "Hermitian matrix must be square and non-empty, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        check_finite(&m)?;
        let scale = inf_norm(&m);
        let asym = inf_norm(&(&m - m.adjoint()));
        if asym > tol_for::<T>(1e-12) * scale {
            return Err(Error::InvalidInput(format!(
                "matrix is not Hermitian (asymmetry {:e}, norm {:e})",
                to_f64(asym),
                to_f64(scale)
            )));
        }
        Ok(Self::from_hermitian_part(m))
    }

    /// Takes `(m + mᴴ)/2` without validation.
    pub fn from_hermitian_part(m: CMatrix<T>) -> Self {
        debug_assert_eq!(m.nrows(), m.ncols());
        let half = cx(lit::<T>(0.5));
        let h = (&m + m.adjoint()) * half;
        Self { m: h }
    }

    pub fn identity(n: usize) -> Self {
        Self { m: CMatrix::identity(n, n) }
    }

    pub fn zeros(n: usize) -> Self {
        Self { m: CMatrix::zeros(n, n) }
    }

    pub fn from_diagonal(d: &[T]) -> Self {
        let v = CVector::from_iterator(d.len(), d.iter().map(|&x| cx(x)));
        Self { m: CMatrix::from_diagonal(&v) }
    }

    /// Builds a real symmetric matrix from rows.
    pub fn from_real_rows(rows: &[Vec<T>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidInput("matrix rows must all have length n".into()));
        }
        Self::new(CMatrix::from_fn(n, n, |i, j| cx(rows[i][j])))
    }

    /// `v vᴴ`.
    pub fn outer(v: &CVector<T>) -> Self {
        Self { m: v * v.adjoint() }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix<T> {
        self.m
    }

    pub fn trace(&self) -> T {
        self.m.trace().re
    }

    pub fn norm_inf(&self) -> T {
        inf_norm(&self.m)
    }

    pub fn norm_fro(&self) -> T {
        self.m.norm()
    }

    pub fn scale(&self, s: T) -> Self {
        Self { m: &self.m * cx(s) }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { m: &self.m + &other.m }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self { m: &self.m - &other.m }
    }

    /// `X M Xᴴ`, Hermitian for any conformable `X`.
    pub fn congruence(&self, x: &CMatrix<T>) -> Self {
        Self::from_hermitian_part(x * &self.m * x.adjoint())
    }

    /// `vᴴ M v` (real for Hermitian `M`).
    pub fn quad(&self, v: &CVector<T>) -> T {
        (v.adjoint() * &self.m * v)[(0, 0)].re
    }

    /// Real inner product `Re tr(M N)`.
    pub fn inner(&self, other: &Self) -> T {
        self.m.iter().zip(other.m.transpose().iter()).fold(T::zero(), |acc, (a, b)| acc + (*a * *b).re)
    }
}

/// Eigenpairs of a Hermitian matrix with eigenvalues in ascending order.
#[derive(Debug, Clone)]
pub struct EigenDecomposition<T: Real> {
    pub values: DVector<T>,
    pub vectors: CMatrix<T>,
}

impl<T: Real> EigenDecomposition<T> {
    pub fn min_value(&self) -> T {
        self.values[0]
    }

    pub fn max_value(&self) -> T {
        self.values[self.values.len() - 1]
    }

    /// `V f(Λ) Vᴴ`.
    pub fn map_values(&self, f: impl Fn(T) -> T) -> HermitianMatrix<T> {
        let d = CVector::from_iterator(self.values.len(), self.values.iter().map(|&x| cx(f(x))));
        let scaled = CMatrix::from_fn(self.vectors.nrows(), self.vectors.ncols(), |i, j| self.vectors[(i, j)] * d[j]);
        HermitianMatrix::from_hermitian_part(scaled * self.vectors.adjoint())
    }

    pub fn reconstruct(&self) -> HermitianMatrix<T> {
        self.map_values(|x| x)
    }
}

/// Hermitian eigendecomposition `M = V Λ Vᴴ` with ascending eigenvalues.
pub fn eig_hermitian<T: Real>(m: &HermitianMatrix<T>) -> Result<EigenDecomposition<T>> {
    check_finite(&m.m)?;
    let eig = SymmetricEigen::new(m.m.clone());
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap_or(std::cmp::Ordering::Equal));
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(EigenDecomposition { values, vectors })
}

/// Hermitian `M^{-1/2}`; fails when the smallest eigenvalue is at or below `floor`.
pub fn inv_sqrt<T: Real>(m: &HermitianMatrix<T>, floor: T) -> Result<HermitianMatrix<T>> {
    let eig = eig_hermitian(m)?;
    require_pd(&eig, floor)?;
    Ok(eig.map_values(|x| T::one() / x.sqrt()))
}

/// Principal square root of the PSD part of `M`.
pub fn sqrt_psd<T: Real>(m: &HermitianMatrix<T>) -> Result<HermitianMatrix<T>> {
    let eig = eig_hermitian(m)?;
    Ok(eig.map_values(|x| x.max(T::zero()).sqrt()))
}

/// Inverse of a positive definite matrix.
pub fn inverse_pd<T: Real>(m: &HermitianMatrix<T>, floor: T) -> Result<HermitianMatrix<T>> {
    let eig = eig_hermitian(m)?;
    require_pd(&eig, floor)?;
    Ok(eig.map_values(|x| T::one() / x))
}

/// Nearest PSD matrix in Frobenius norm (negative eigenvalues clipped to zero).
pub fn project_psd<T: Real>(m: &HermitianMatrix<T>) -> Result<HermitianMatrix<T>> {
    let eig = eig_hermitian(m)?;
    if eig.min_value() >= T::zero() {
        return Ok(m.clone());
    }
    Ok(eig.map_values(|x| x.max(T::zero())))
}

/// Clamps roundoff-level negative eigenvalues to zero and rejects anything
/// more negative than `-PSD_CLAMP * max(1, |M|)`.
pub fn clamp_psd<T: Real>(m: &HermitianMatrix<T>) -> Result<HermitianMatrix<T>> {
    let eig = eig_hermitian(m)?;
    let min = eig.min_value();
    if min >= T::zero() {
        return Ok(m.clone());
    }
    let allowed = tol_for::<T>(PSD_CLAMP) * m.norm_inf().max(T::one());
    if -min > allowed {
        return Err(Error::NotPositiveSemidefinite(to_f64(min)));
    }
    Ok(eig.map_values(|x| x.max(T::zero())))
}

/// `log det M` in nats for positive definite `M`.
pub fn logdet_psd<T: Real>(m: &HermitianMatrix<T>) -> Result<T> {
    let eig = eig_hermitian(m)?;
    if eig.min_value() <= T::zero() {
        return Err(Error::NotPositiveDefinite(to_f64(eig.min_value())));
    }
    Ok(eig.values.iter().fold(T::zero(), |acc, &x| acc + x.ln()))
}

/// Cholesky-based `log det` for matrices already known to be positive definite
/// (identity plus PSD terms). Falls back to the eigenvalue route when the
/// factorization fails.
pub fn logdet_pd<T: Real>(m: &CMatrix<T>) -> Result<T> {
    match Cholesky::new(m.clone()) {
        Some(ch) => {
            let l = ch.l_dirty();
            let two = lit::<T>(2.0);
            Ok((0..m.nrows()).fold(T::zero(), |acc, i| acc + two * l[(i, i)].re.ln()))
        }
        None => logdet_psd(&HermitianMatrix::from_hermitian_part(m.clone())),
    }
}

/// Inverse of a positive definite matrix through Cholesky, falling back to the
/// eigenvalue route.
pub fn inverse_pd_fast<T: Real>(m: &CMatrix<T>) -> Result<CMatrix<T>> {
    match Cholesky::new(m.clone()) {
        Some(ch) => Ok(ch.inverse()),
        None => Ok(inverse_pd(&HermitianMatrix::from_hermitian_part(m.clone()), T::zero())?.into_matrix()),
    }
}

/// Thin SVD `M = U diag(s) Vᴴ` with singular values in descending order and
/// the largest-magnitude entry of every left singular vector real positive.
#[derive(Debug, Clone)]
pub struct PhasedSvd<T: Real> {
    pub u: CMatrix<T>,
    pub singular_values: DVector<T>,
    pub v: CMatrix<T>,
}

pub fn svd_phased<T: Real>(m: &CMatrix<T>) -> Result<PhasedSvd<T>> {
    check_finite(m)?;
    let svd = SVD::new(m.clone(), true, true);
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Err(Error::InvalidInput("SVD did not converge".into())),
    };
    let r = svd.singular_values.len();
    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b].partial_cmp(&svd.singular_values[a]).unwrap_or(std::cmp::Ordering::Equal)
    });
    let v_full = v_t.adjoint();
    let mut uo = CMatrix::zeros(m.nrows(), r);
    let mut vo = CMatrix::zeros(m.ncols(), r);
    let mut s = DVector::zeros(r);
    for (dst, &src) in order.iter().enumerate() {
        s[dst] = svd.singular_values[src];
        let ucol = u.column(src);
        let mut best = 0;
        for i in 0..ucol.len() {
            if ucol[i].modulus() > ucol[best].modulus() {
                best = i;
            }
        }
        let lead = ucol[best];
        let phase = if lead.modulus() > T::zero() { (lead / cx(lead.modulus())).conj() } else { cx(T::one()) };
        uo.set_column(dst, &(ucol * phase));
        vo.set_column(dst, &(v_full.column(src) * phase));
    }
    Ok(PhasedSvd { u: uo, singular_values: s, v: vo })
}

pub(crate) fn require_pd<T: Real>(eig: &EigenDecomposition<T>, floor: T) -> Result<()> {
    let min = eig.min_value();
    if min <= floor {
        return Err(Error::SingularConstraintMatrix { min_eigenvalue: to_f64(min), floor: to_f64(floor) });
    }
    Ok(())
}

pub(crate) fn check_finite<T: Real>(m: &CMatrix<T>) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidInput("matrix has non-finite entries".into()))
    }
}

/// Maximum absolute row sum.
pub fn inf_norm<T: Real>(m: &CMatrix<T>) -> T {
    (0..m.nrows()).map(|i| m.row(i).iter().fold(T::zero(), |acc, z| acc + z.modulus())).fold(T::zero(), |a, b| a.max(b))
}

/// Real matrix from rows, embedded as complex.
pub fn cmatrix_from_real<T: Real>(rows: &[Vec<T>]) -> Result<CMatrix<T>> {
    let nr = rows.len();
    let nc = rows.first().map_or(0, |r| r.len());
    if nr == 0 || nc == 0 || rows.iter().any(|r| r.len() != nc) {
        return Err(Error::InvalidInput("matrix must be non-empty and rectangular".into()));
    }
    Ok(CMatrix::from_fn(nr, nc, |i, j| cx(rows[i][j])))
}
