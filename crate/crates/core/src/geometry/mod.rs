//! Points, tangent vectors and geometric operators on the manifold of
//! fixed-rank positive semi-definite matrices.
//!
//! Two representations are used:
//!
//! * [`PsdPoint`] stores `X = U diag(lambda) U^T` through its compact
//!   eigendecomposition; it is the state of the embedded-metric chain.
//! * [`FactorPoint`] stores a full-rank factor `Y` with `X = Y Y^T`; it is the
//!   state of the Bures–Wasserstein chain, where `Y` and `Y O` (`O`
//!   orthogonal) represent the same point.

mod decomp;
mod embedded;
mod quotient;

pub use decomp::{asymmetry, compact_svd, symmetric_eig_descending, CompactSvd, RankedEigen};
pub use embedded::{
    mean_curvature_embedded, ortho_complement, project_to_rank, retract_projection, riemannian_gradient_embedded,
};
pub use quotient::{entropy, grad_entropy, grad_entropy_from_svd};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{StandardNormal, Uniform};

use crate::error::{Error, Result};

/// Relative threshold below which the p-th spectral value counts as zero.
pub const RANK_FLOOR: f64 = 1e-12;

/// Tolerance for orthonormality and symmetry checks.
pub const STRUCTURAL_TOL: f64 = 1e-10;

/// `lambda_p <= RANK_FLOOR * max(1, lambda_1)` means the point left the
/// manifold.
pub fn eigen_floor(lambda_max: f64) -> f64 {
    RANK_FLOOR * lambda_max.max(1.0)
}

fn orthonormality_defect(u: &DMatrix<f64>) -> f64 {
    let p = u.ncols();
    (u.transpose() * u - DMatrix::<f64>::identity(p, p)).norm()
}

/// A rank-p PSD matrix held as its compact eigendecomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdPoint {
    u: DMatrix<f64>,
    lambda: DVector<f64>,
}

impl PsdPoint {
    /// Validates orthonormal columns and a strictly positive, descending
    /// spectrum.
    pub fn new(u: DMatrix<f64>, lambda: DVector<f64>) -> Result<Self> {
        let (n, p) = u.shape();
        if p == 0 || p > n || lambda.len() != p {
            return Err(Error::dims(
                "U: n x p with p <= n, lambda: p",
                format!("U: {n}x{p}, lambda: {}", lambda.len()),
            ));
        }
        let deviation = orthonormality_defect(&u);
        if deviation > STRUCTURAL_TOL {
            return Err(Error::NotOrthonormal { deviation });
        }
        if lambda.as_slice().windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidConfig(
                "eigenvalues must be sorted in descending order".into(),
            ));
        }
        Self::check_rank(&lambda)?;
        Ok(Self { u, lambda })
    }

    pub(crate) fn from_parts_unchecked(u: DMatrix<f64>, lambda: DVector<f64>) -> Self {
        Self { u, lambda }
    }

    fn check_rank(lambda: &DVector<f64>) -> Result<()> {
        let floor = eigen_floor(lambda[0]);
        let smallest = lambda[lambda.len() - 1];
        if smallest <= floor || !smallest.is_finite() {
            return Err(Error::RankDeficient { smallest, floor });
        }
        Ok(())
    }

    /// Projects a symmetric matrix onto the rank-p manifold by keeping its `p`
    /// algebraically largest eigenpairs.
    pub fn from_dense(x: &DMatrix<f64>, p: usize) -> Result<Self> {
        project_to_rank(x, p).map(|(point, _)| point)
    }

    /// `diag(values)` padded with zeros to size `n`; `values` need not be
    /// sorted.
    pub fn from_diagonal(values: &[f64], n: usize) -> Result<Self> {
        let mut d = DMatrix::zeros(n, n);
        for (i, v) in values.iter().enumerate() {
            d[(i, i)] = *v;
        }
        Self::from_dense(&d, values.len())
    }

    /// Random point with Haar-distributed eigenvectors and the given
    /// eigenvalues (sorted internally).
    pub fn with_random_basis<R: Rng + ?Sized>(rng: &mut R, n: usize, eigenvalues: &[f64]) -> Result<Self> {
        let p = eigenvalues.len();
        if p == 0 || p > n {
            return Err(Error::dims(format!("1 <= p <= {n}"), format!("p = {p}")));
        }
        let u = random_orthonormal(rng, n, p)?;
        let mut lam = eigenvalues.to_vec();
        lam.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
        Self::new(u, DVector::from_vec(lam))
    }

    /// Random point with eigenvalues uniform in `[lo, hi]`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, n: usize, p: usize, lo: f64, hi: f64) -> Result<Self> {
        let dist =
            Uniform::new_inclusive(lo, hi).map_err(|e| Error::InvalidConfig(format!("eigenvalue range: {e}")))?;
        let values: Vec<f64> = (0..p).map(|_| rng.sample(dist)).collect();
        Self::with_random_basis(rng, n, &values)
    }

    pub fn n(&self) -> usize {
        self.u.nrows()
    }

    pub fn p(&self) -> usize {
        self.u.ncols()
    }

    pub fn u(&self) -> &DMatrix<f64> {
        &self.u
    }

    pub fn lambda(&self) -> &DVector<f64> {
        &self.lambda
    }

    /// `U diag(lambda) U^T`.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut ul = self.u.clone();
        for (j, l) in self.lambda.iter().enumerate() {
            ul.column_mut(j).scale_mut(*l);
        }
        let x = ul * self.u.transpose();
        (&x + x.transpose()) * 0.5
    }

    /// `||X||_F`, read off the spectrum.
    pub fn frobenius_norm(&self) -> f64 {
        self.lambda.norm()
    }

    /// Sum of reciprocal eigenvalues, the scalar factor of the mean curvature.
    pub fn inverse_eigen_sum(&self) -> f64 {
        self.lambda.iter().map(|l| 1.0 / l).sum()
    }

    /// The factor `U diag(sqrt(lambda))`.
    pub fn to_factor(&self) -> Result<FactorPoint> {
        let mut y = self.u.clone();
        for (j, l) in self.lambda.iter().enumerate() {
            y.column_mut(j).scale_mut(l.sqrt());
        }
        FactorPoint::new(y)
    }
}

/// A full-column-rank factor `Y` representing `[Y] = { Y O }`.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorPoint {
    y: DMatrix<f64>,
}

impl FactorPoint {
    pub fn new(y: DMatrix<f64>) -> Result<Self> {
        compact_svd(&y)?;
        Ok(Self { y })
    }

    pub(crate) fn from_validated(y: DMatrix<f64>) -> Self {
        Self { y }
    }

    /// Random factor whose squared singular values are uniform in `[lo, hi]`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, n: usize, p: usize, lo: f64, hi: f64) -> Result<Self> {
        PsdPoint::random(rng, n, p, lo, hi)?.to_factor()
    }

    pub fn n(&self) -> usize {
        self.y.nrows()
    }

    pub fn p(&self) -> usize {
        self.y.ncols()
    }

    pub fn y(&self) -> &DMatrix<f64> {
        &self.y
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.y
    }

    pub fn svd(&self) -> Result<CompactSvd> {
        compact_svd(&self.y)
    }

    /// `Y Y^T`.
    pub fn to_dense(&self) -> DMatrix<f64> {
        &self.y * self.y.transpose()
    }

    /// `||Y Y^T||_F = ||Y^T Y||_F`, computed on the p×p Gram matrix.
    pub fn frobenius_norm(&self) -> f64 {
        (self.y.transpose() * &self.y).norm()
    }

    pub fn to_psd_point(&self) -> Result<PsdPoint> {
        let svd = self.svd()?;
        let lambda = svd.sigma.map(|s| s * s);
        PsdPoint::check_rank(&lambda)?;
        Ok(PsdPoint::from_parts_unchecked(svd.q, lambda))
    }
}

/// Orthonormal basis `U_perp` of the complement of `range(U)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthoComplement {
    u_perp: DMatrix<f64>,
}

impl OrthoComplement {
    /// Checks that `[U U_perp]` is orthogonal.
    pub fn new(u: &DMatrix<f64>, u_perp: DMatrix<f64>) -> Result<Self> {
        let n = u.nrows();
        if u_perp.nrows() != n || u.ncols() + u_perp.ncols() != n {
            return Err(Error::dims(
                format!("{n}x{}", n - u.ncols().min(n)),
                format!("{}x{}", u_perp.nrows(), u_perp.ncols()),
            ));
        }
        let full = DMatrix::from_columns(
            &u.column_iter()
                .chain(u_perp.column_iter())
                .map(|c| c.into_owned())
                .collect::<Vec<_>>(),
        );
        let deviation = orthonormality_defect(&full);
        if deviation > STRUCTURAL_TOL {
            return Err(Error::NotOrthonormal { deviation });
        }
        Ok(Self { u_perp })
    }

    pub(crate) fn from_basis_unchecked(u_perp: DMatrix<f64>) -> Self {
        Self { u_perp }
    }

    pub fn u_perp(&self) -> &DMatrix<f64> {
        &self.u_perp
    }

    /// `U_perp U_perp^T = I - U U^T`.
    pub fn projector(&self) -> DMatrix<f64> {
        &self.u_perp * self.u_perp.transpose()
    }
}

/// Tangent vector at a [`PsdPoint`], in the compact form
/// `U H U^T + U_p U^T + U U_p^T` with `H` symmetric and `U^T U_p = 0`.
///
/// In the `[U U_perp]` basis this is the block matrix `[H K^T; K 0]` with
/// `K = U_perp^T U_p`.
#[derive(Debug, Clone)]
pub struct TangentEmbedded<'a> {
    base: &'a PsdPoint,
    h: DMatrix<f64>,
    u_p: DMatrix<f64>,
}

impl<'a> TangentEmbedded<'a> {
    pub fn new(base: &'a PsdPoint, h: DMatrix<f64>, u_p: DMatrix<f64>) -> Result<Self> {
        let (n, p) = (base.n(), base.p());
        if h.shape() != (p, p) || u_p.shape() != (n, p) {
            return Err(Error::dims(
                format!("H: {p}x{p}, U_p: {n}x{p}"),
                format!("H: {:?}, U_p: {:?}", h.shape(), u_p.shape()),
            ));
        }
        let h = (&h + h.transpose()) * 0.5;
        Ok(Self { base, h, u_p })
    }

    pub fn base(&self) -> &PsdPoint {
        self.base
    }

    pub fn h(&self) -> &DMatrix<f64> {
        &self.h
    }

    pub fn u_p(&self) -> &DMatrix<f64> {
        &self.u_p
    }

    /// Normal-block coordinates `K = U_perp^T U_p`.
    pub fn k(&self, complement: &OrthoComplement) -> DMatrix<f64> {
        complement.u_perp().transpose() * &self.u_p
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let u = self.base.u();
        let cross = &self.u_p * u.transpose();
        u * &self.h * u.transpose() + &cross + cross.transpose()
    }
}

/// Orthonormal n×p matrix from the QR factorization of a Gaussian matrix,
/// with the sign of each column fixed by the diagonal of R.
pub fn random_orthonormal<R: Rng + ?Sized>(rng: &mut R, n: usize, p: usize) -> Result<DMatrix<f64>> {
    if p > n {
        return Err(Error::dims(format!("p <= {n}"), format!("p = {p}")));
    }
    let g = DMatrix::from_fn(n, p, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..p {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    Ok(q)
}
