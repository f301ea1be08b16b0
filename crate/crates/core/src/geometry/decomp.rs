//! Dense spectral decompositions with a fixed ordering and sign convention.

use nalgebra::{DMatrix, DVector};

use super::{RANK_FLOOR, STRUCTURAL_TOL};
use crate::error::{Error, Result};

const EIG_EPS: f64 = 1e-15;
const EIG_MAX_SWEEPS: usize = 10_000;

/// Full eigendecomposition of a symmetric matrix, sorted by descending
/// eigenvalue, with the first `p` pairs split out.
#[derive(Debug, Clone)]
pub struct RankedEigen {
    /// Leading `p` eigenvectors (n×p).
    pub u: DMatrix<f64>,
    /// Leading `p` eigenvalues, descending.
    pub lambda: DVector<f64>,
    /// All eigenvectors (n×n), same ordering as `values`.
    pub u_full: DMatrix<f64>,
    /// All eigenvalues, descending.
    pub values: DVector<f64>,
}

impl RankedEigen {
    /// Trailing `n - p` eigenvectors.
    pub fn trailing(&self) -> DMatrix<f64> {
        let p = self.u.ncols();
        self.u_full.columns(p, self.u_full.ncols() - p).into_owned()
    }
}

/// Compact SVD `Y = Q diag(sigma) P^T` of a tall full-rank matrix.
#[derive(Debug, Clone)]
pub struct CompactSvd {
    pub q: DMatrix<f64>,
    pub sigma: DVector<f64>,
    pub p: DMatrix<f64>,
}

impl CompactSvd {
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let mut qs = self.q.clone();
        for (j, s) in self.sigma.iter().enumerate() {
            qs.column_mut(j).scale_mut(*s);
        }
        qs * self.p.transpose()
    }
}

/// Largest absolute entry of `m - m^T`.
pub fn asymmetry(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for j in 0..n {
        for i in (j + 1)..n {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

/// Symmetry check scaled by the magnitude of the entries, so that matrices
/// with large eigenvalues are not rejected for round-off.
pub(crate) fn check_symmetric(m: &DMatrix<f64>) -> Result<()> {
    if !m.is_square() {
        return Err(Error::dims("square matrix", format!("{}x{}", m.nrows(), m.ncols())));
    }
    let scale = m.amax().max(1.0);
    let asym = asymmetry(m);
    if asym > STRUCTURAL_TOL * scale {
        return Err(Error::NonSymmetricInput { asymmetry: asym });
    }
    Ok(())
}

/// Flips the sign of column `j` (and of the paired column in `partner`, if
/// any) so that its first entry that is not negligible is positive.
fn normalize_sign(m: &mut DMatrix<f64>, j: usize, partner: Option<&mut DMatrix<f64>>) {
    let col = m.column(j);
    let scale = col.amax();
    let pivot = col
        .iter()
        .copied()
        .find(|v| v.abs() > 1e-12 * scale.max(f64::MIN_POSITIVE));
    if matches!(pivot, Some(v) if v < 0.0) {
        m.column_mut(j).neg_mut();
        if let Some(other) = partner {
            other.column_mut(j).neg_mut();
        }
    }
}

/// Eigendecomposition of a symmetric matrix with eigenpairs sorted by
/// descending eigenvalue. Each eigenvector's first non-negligible entry is
/// positive.
pub fn symmetric_eig_descending(m: &DMatrix<f64>, p: usize) -> Result<RankedEigen> {
    check_symmetric(m)?;
    let n = m.nrows();
    if p == 0 || p > n {
        return Err(Error::dims(format!("1 <= p <= {n}"), format!("p = {p}")));
    }
    // The solver reads one triangle only; feed it the averaged matrix so the
    // result does not depend on which side carries the round-off.
    let sym = (m + m.transpose()) * 0.5;
    let eig = nalgebra::SymmetricEigen::try_new(sym, EIG_EPS, EIG_MAX_SWEEPS).ok_or(Error::ConvergenceFailure)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    if eig.eigenvalues.iter().any(|v| !v.is_finite()) {
        return Err(Error::ConvergenceFailure);
    }

    let values = DVector::from_iterator(n, order.iter().map(|&k| eig.eigenvalues[k]));
    let mut u_full = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        u_full.set_column(dst, &eig.eigenvectors.column(src));
        normalize_sign(&mut u_full, dst, None);
    }
    Ok(RankedEigen {
        u: u_full.columns(0, p).into_owned(),
        lambda: values.rows(0, p).into_owned(),
        u_full,
        values,
    })
}

/// Compact SVD computed as a thin QR of `y` followed by an SVD of the p×p
/// triangular factor.
pub fn compact_svd(y: &DMatrix<f64>) -> Result<CompactSvd> {
    let (n, p) = y.shape();
    if p == 0 || n < p {
        return Err(Error::dims("n >= p >= 1", format!("{n}x{p}")));
    }
    let qr = y.clone().qr();
    let q_thin = qr.q();
    let r = qr.r();
    let svd =
        nalgebra::linalg::SVD::try_new(r, true, true, EIG_EPS, EIG_MAX_SWEEPS).ok_or(Error::ConvergenceFailure)?;
    let (ur, vt) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Err(Error::ConvergenceFailure),
    };
    let sv = svd.singular_values;

    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| sv[b].partial_cmp(&sv[a]).unwrap_or(std::cmp::Ordering::Equal));
    let sigma = DVector::from_iterator(p, order.iter().map(|&k| sv[k]));
    if sigma.iter().any(|s| !s.is_finite()) {
        return Err(Error::ConvergenceFailure);
    }
    let floor = RANK_FLOOR * sigma[0];
    if sigma[0] <= 0.0 || sigma[p - 1] <= floor {
        return Err(Error::RankDeficient {
            smallest: sigma[p - 1],
            floor,
        });
    }

    let q_unsorted = q_thin * ur;
    let v = vt.transpose();
    let mut q = DMatrix::zeros(n, p);
    let mut pm = DMatrix::zeros(p, p);
    for (dst, &src) in order.iter().enumerate() {
        q.set_column(dst, &q_unsorted.column(src));
        pm.set_column(dst, &v.column(src));
        normalize_sign(&mut q, dst, Some(&mut pm));
    }
    Ok(CompactSvd { q, sigma, p: pm })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_util::{random_symmetric, rng};
    use approx::assert_abs_diff_eq;

    #[test]
    fn diagonal_eigenpairs_come_out_sorted() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 1.0, 2.0]));
        let e = symmetric_eig_descending(&m, 2).unwrap();
        assert_eq!(e.lambda.as_slice(), &[3.0, 2.0]);
        assert_abs_diff_eq!(e.u.column(0).into_owned(), DVector::from_vec(vec![1.0, 0.0, 0.0]));
        assert_abs_diff_eq!(e.u.column(1).into_owned(), DVector::from_vec(vec![0.0, 0.0, 1.0]));
    }

    #[test]
    fn identity_has_unit_spectrum() {
        let e = symmetric_eig_descending(&DMatrix::identity(3, 3), 3).unwrap();
        assert_abs_diff_eq!(e.lambda, DVector::from_element(3, 1.0), epsilon = 1e-14);
    }

    #[test]
    fn eigenpairs_reconstruct_random_symmetric() {
        let mut r = rng(11);
        let m = random_symmetric(&mut r, 5);
        let e = symmetric_eig_descending(&m, 2).unwrap();
        let mut rebuilt = DMatrix::zeros(5, 5);
        for i in 0..5 {
            let v = e.u_full.column(i);
            rebuilt += e.values[i] * v * v.transpose();
        }
        assert!((rebuilt - &m).amax() < 1e-10);
        for w in e.values.as_slice().windows(2) {
            assert!(w[0] >= w[1]);
        }
        // sign convention: first significant entry positive
        for j in 0..5 {
            let first = e.u_full.column(j).iter().copied().find(|v| v.abs() > 1e-12).unwrap();
            assert!(first > 0.0);
        }
    }

    #[test]
    fn eig_is_deterministic() {
        let mut r = rng(3);
        let m = random_symmetric(&mut r, 6);
        let a = symmetric_eig_descending(&m, 3).unwrap();
        let b = symmetric_eig_descending(&m, 3).unwrap();
        assert_eq!(a.u_full, b.u_full);
        assert_eq!(a.values, b.values);
    }

    #[test]
    fn rejects_asymmetric_input() {
        let mut m = DMatrix::identity(3, 3);
        m[(0, 2)] = 1e-3;
        assert!(matches!(
            symmetric_eig_descending(&m, 1),
            Err(Error::NonSymmetricInput { .. })
        ));
    }

    #[test]
    fn svd_of_identity_and_column() {
        let s = compact_svd(&DMatrix::identity(3, 3)).unwrap();
        assert_abs_diff_eq!(s.sigma, DVector::from_element(3, 1.0), epsilon = 1e-14);
        let mut y = DMatrix::zeros(4, 1);
        y[(0, 0)] = 2.0;
        let s = compact_svd(&y).unwrap();
        assert_abs_diff_eq!(s.sigma[0], 2.0, epsilon = 1e-14);
    }

    #[test]
    fn svd_reconstructs_random_factor() {
        let mut r = rng(5);
        for (n, p) in [(6, 3), (10, 2), (4, 4), (7, 1)] {
            let y = crate::test_util::gaussian(&mut r, n, p);
            let s = compact_svd(&y).unwrap();
            assert!((s.reconstruct() - &y).amax() < 1e-10);
            assert!((s.q.transpose() * &s.q - DMatrix::identity(p, p)).amax() < 1e-12);
            for w in s.sigma.as_slice().windows(2) {
                assert!(w[0] >= w[1]);
            }
        }
    }

    #[test]
    fn svd_flags_rank_deficiency() {
        let mut y = DMatrix::zeros(4, 2);
        y[(0, 0)] = 1.0;
        y[(1, 0)] = 1.0;
        assert!(matches!(compact_svd(&y), Err(Error::RankDeficient { .. })));
    }
}
