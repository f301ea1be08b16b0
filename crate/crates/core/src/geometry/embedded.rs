//! Operators for the metric induced by the Frobenius inner product.

use nalgebra::{DMatrix, DVector};

use super::decomp::{check_symmetric, symmetric_eig_descending};
use super::{eigen_floor, OrthoComplement, PsdPoint, TangentEmbedded, STRUCTURAL_TOL};
use crate::error::{Error, Result};

/// Completes the orthonormal columns of `u` to a basis of `R^n`.
///
/// Greedy Gram–Schmidt over the standard basis: at each step the unit
/// vector with the largest residual against the current basis is
/// orthogonalized (twice) and appended.
pub fn ortho_complement(u: &DMatrix<f64>) -> Result<OrthoComplement> {
    let (n, p) = u.shape();
    if p > n {
        return Err(Error::dims(format!("p <= {n}"), format!("p = {p}")));
    }
    let deviation = (u.transpose() * u - DMatrix::<f64>::identity(p, p)).norm();
    if deviation > STRUCTURAL_TOL {
        return Err(Error::NotOrthonormal { deviation });
    }

    let m = n - p;
    let mut basis: Vec<DVector<f64>> = u.column_iter().map(|c| c.into_owned()).collect();
    let mut picked = vec![false; n];
    let mut out = DMatrix::zeros(n, m);

    for col in 0..m {
        let mut best: Option<(usize, DVector<f64>, f64)> = None;
        for i in (0..n).filter(|&i| !picked[i]) {
            let mut r = DVector::zeros(n);
            r[i] = 1.0;
            for _ in 0..2 {
                for b in &basis {
                    let c = b.dot(&r);
                    r.axpy(-c, b, 1.0);
                }
            }
            let norm = r.norm();
            if best.as_ref().is_none_or(|(_, _, bn)| norm > *bn) {
                best = Some((i, r, norm));
            }
        }
        let (i, r, norm) = best.expect("n - p candidates remain");
        picked[i] = true;
        let v = r / norm;
        out.set_column(col, &v);
        basis.push(v);
    }
    Ok(OrthoComplement::from_basis_unchecked(out))
}

/// Projection of a Euclidean gradient onto the tangent space at `point`:
/// `T = G U`, `H = U^T T`, `U_p = T - U H`.
pub fn riemannian_gradient_embedded<'a>(point: &'a PsdPoint, egrad: &DMatrix<f64>) -> Result<TangentEmbedded<'a>> {
    let n = point.n();
    if egrad.shape() != (n, n) {
        return Err(Error::dims(
            format!("{n}x{n}"),
            format!("{}x{}", egrad.nrows(), egrad.ncols()),
        ));
    }
    check_symmetric(egrad)?;
    let u = point.u();
    let t = egrad * u;
    let h = u.transpose() * &t;
    let u_p = &t - u * &h;
    TangentEmbedded::new(point, h, u_p)
}

/// Euclidean projection of a symmetric matrix onto the rank-p manifold,
/// returning the point and the trailing eigenvectors as its complement.
pub fn project_to_rank(m: &DMatrix<f64>, p: usize) -> Result<(PsdPoint, OrthoComplement)> {
    let eig = symmetric_eig_descending(m, p)?;
    let floor = eigen_floor(eig.lambda[0]);
    let smallest = eig.lambda[p - 1];
    if smallest <= floor || !smallest.is_finite() {
        return Err(Error::RankDeficient { smallest, floor });
    }
    let complement = OrthoComplement::from_basis_unchecked(eig.trailing());
    Ok((PsdPoint::from_parts_unchecked(eig.u, eig.lambda), complement))
}

/// `P(X + Z)`: keep the `p` algebraically largest eigenpairs of `X + Z`.
pub fn retract_projection(point: &PsdPoint, z: &DMatrix<f64>) -> Result<PsdPoint> {
    let n = point.n();
    if z.shape() != (n, n) {
        return Err(Error::dims(format!("{n}x{n}"), format!("{}x{}", z.nrows(), z.ncols())));
    }
    let m = point.to_dense() + z;
    project_to_rank(&m, point.p()).map(|(x, _)| x)
}

/// Mean curvature `(sum_i 1/lambda_i) U_perp U_perp^T` of the embedding.
pub fn mean_curvature_embedded(point: &PsdPoint, complement: &OrthoComplement) -> DMatrix<f64> {
    complement.projector() * point.inverse_eigen_sum()
}
