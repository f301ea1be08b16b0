//! Energy functions `E(X)` with their Euclidean gradients.

use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::{eigen_floor, FactorPoint, PsdPoint};

/// An energy on rank-p PSD matrices.
///
/// `euclidean_grad` returns the symmetric matrix `[dE/dX_ij]`. Energies that
/// are defined on all symmetric matrices also implement the `_dense`
/// variants, which the flat-space chain relies on.
pub trait EnergyFn: Send + Sync {
    fn name(&self) -> &'static str;

    fn value(&self, x: &PsdPoint) -> Result<f64>;

    fn euclidean_grad(&self, x: &PsdPoint) -> Result<DMatrix<f64>>;

    fn value_dense(&self, _x: &DMatrix<f64>) -> Result<f64> {
        Err(Error::DenseUnsupported(self.name()))
    }

    fn euclidean_grad_dense(&self, _x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        Err(Error::DenseUnsupported(self.name()))
    }

    /// `F(Y) = E(Y Y^T)`.
    fn factor_value(&self, y: &FactorPoint) -> Result<f64> {
        self.value(&y.to_psd_point()?)
    }

    /// `grad F(Y) = 2 grad E(Y Y^T) Y`.
    fn factor_gradient(&self, y: &FactorPoint) -> Result<DMatrix<f64>> {
        let x = y.to_psd_point()?;
        Ok(self.euclidean_grad(&x)? * y.y() * 2.0)
    }
}

/// `2 grad E(Y Y^T) Y`, the horizontal gradient driving the factor chain.
pub fn factor_gradient(energy: &dyn EnergyFn, y: &FactorPoint) -> Result<DMatrix<f64>> {
    energy.factor_gradient(y)
}

/// `E(X) = 1/2 ||X||_F^2`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Frobenius;

impl EnergyFn for Frobenius {
    fn name(&self) -> &'static str {
        "frobenius"
    }

    fn value(&self, x: &PsdPoint) -> Result<f64> {
        Ok(0.5 * x.lambda().norm_squared())
    }

    fn euclidean_grad(&self, x: &PsdPoint) -> Result<DMatrix<f64>> {
        Ok(x.to_dense())
    }

    fn value_dense(&self, x: &DMatrix<f64>) -> Result<f64> {
        Ok(0.5 * x.norm_squared())
    }

    fn euclidean_grad_dense(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        Ok(x.clone())
    }

    fn factor_value(&self, y: &FactorPoint) -> Result<f64> {
        Ok(0.5 * (y.y().transpose() * y.y()).norm_squared())
    }

    fn factor_gradient(&self, y: &FactorPoint) -> Result<DMatrix<f64>> {
        let y = y.y();
        Ok(y * (y.transpose() * y) * 2.0)
    }
}

/// `E(X) = Tr(X log X) = sum_i lambda_i log lambda_i`.
///
/// `log X` is only defined on the range of `X`; the gradient returned is
/// `U (log Lambda + I) U^T`, i.e. zero on the orthogonal complement.
#[derive(Debug, Clone, Copy, Default)]
pub struct VonNeumann;

impl VonNeumann {
    fn check(x: &PsdPoint) -> Result<()> {
        let lambda = x.lambda();
        let floor = eigen_floor(lambda[0]);
        let smallest = lambda[lambda.len() - 1];
        if smallest <= floor {
            return Err(Error::RankDeficient { smallest, floor });
        }
        Ok(())
    }
}

impl EnergyFn for VonNeumann {
    fn name(&self) -> &'static str {
        "von_neumann"
    }

    fn value(&self, x: &PsdPoint) -> Result<f64> {
        Self::check(x)?;
        Ok(x.lambda().iter().map(|l| l * l.ln()).sum())
    }

    fn euclidean_grad(&self, x: &PsdPoint) -> Result<DMatrix<f64>> {
        Self::check(x)?;
        let mut ud = x.u().clone();
        for (j, l) in x.lambda().iter().enumerate() {
            ud.column_mut(j).scale_mut(l.ln() + 1.0);
        }
        let g = ud * x.u().transpose();
        Ok((&g + g.transpose()) * 0.5)
    }

    fn factor_gradient(&self, y: &FactorPoint) -> Result<DMatrix<f64>> {
        // 2 U (log Lambda + I) U^T Y with Y = Q Sigma P^T, U = Q, Lambda = Sigma^2
        let svd = y.svd()?;
        let mut q = svd.q.clone();
        for (j, s) in svd.sigma.iter().enumerate() {
            let lambda = s * s;
            if lambda <= eigen_floor(svd.sigma[0] * svd.sigma[0]) {
                return Err(Error::RankDeficient {
                    smallest: lambda,
                    floor: eigen_floor(svd.sigma[0] * svd.sigma[0]),
                });
            }
            q.column_mut(j).scale_mut(2.0 * s * (lambda.ln() + 1.0));
        }
        Ok(q * svd.p.transpose())
    }
}

/// A fixed rank-p target `A` for the quadratic energy.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetMatrix {
    point: PsdPoint,
    dense: DMatrix<f64>,
}

impl TargetMatrix {
    pub fn new(point: PsdPoint) -> Self {
        let dense = point.to_dense();
        Self { point, dense }
    }

    pub fn point(&self) -> &PsdPoint {
        &self.point
    }

    pub fn dense(&self) -> &DMatrix<f64> {
        &self.dense
    }
}

/// `E(X) = 1/2 ||X - A||_F^2`.
#[derive(Debug, Clone)]
pub struct QuadraticTarget {
    target: DMatrix<f64>,
}

impl QuadraticTarget {
    pub fn new(target: &TargetMatrix) -> Self {
        Self {
            target: target.dense().clone(),
        }
    }

    /// Uses an arbitrary symmetric matrix as target (e.g. the zero matrix).
    pub fn from_dense(target: DMatrix<f64>) -> Self {
        Self { target }
    }

    pub fn target(&self) -> &DMatrix<f64> {
        &self.target
    }

    fn check_shape(&self, x: &DMatrix<f64>) -> Result<()> {
        if x.shape() != self.target.shape() {
            return Err(Error::dims(
                format!("{:?}", self.target.shape()),
                format!("{:?}", x.shape()),
            ));
        }
        Ok(())
    }
}

impl EnergyFn for QuadraticTarget {
    fn name(&self) -> &'static str {
        "quadratic_target"
    }

    fn value(&self, x: &PsdPoint) -> Result<f64> {
        self.value_dense(&x.to_dense())
    }

    fn euclidean_grad(&self, x: &PsdPoint) -> Result<DMatrix<f64>> {
        self.euclidean_grad_dense(&x.to_dense())
    }

    fn value_dense(&self, x: &DMatrix<f64>) -> Result<f64> {
        self.check_shape(x)?;
        Ok(0.5 * (x - &self.target).norm_squared())
    }

    fn euclidean_grad_dense(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        self.check_shape(x)?;
        Ok(x - &self.target)
    }

    fn factor_value(&self, y: &FactorPoint) -> Result<f64> {
        self.value_dense(&y.to_dense())
    }

    fn factor_gradient(&self, y: &FactorPoint) -> Result<DMatrix<f64>> {
        let yy = y.y();
        self.check_shape(&DMatrix::zeros(yy.nrows(), yy.nrows()))?;
        Ok((yy * (yy.transpose() * yy) - &self.target * yy) * 2.0)
    }
}

/// Energy selector used by experiment configuration files.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnergyKey {
    Frobenius,
    VonNeumann,
    QuadraticTarget,
}

impl EnergyKey {
    pub fn as_str(&self) -> &'static str {
        match self {
            EnergyKey::Frobenius => "frobenius",
            EnergyKey::VonNeumann => "von_neumann",
            EnergyKey::QuadraticTarget => "quadratic_target",
        }
    }
}

impl FromStr for EnergyKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "frobenius" => Ok(EnergyKey::Frobenius),
            "von_neumann" => Ok(EnergyKey::VonNeumann),
            "quadratic_target" => Ok(EnergyKey::QuadraticTarget),
            other => Err(Error::InvalidConfig(format!("unknown energy `{other}`"))),
        }
    }
}

/// Target with eigenvalues equally spaced on `[lo, hi]` (descending) and
/// eigenvectors from `basis`.
pub fn equally_spaced_target(basis: DMatrix<f64>, lo: f64, hi: f64) -> Result<TargetMatrix> {
    let p = basis.ncols();
    let values: Vec<f64> = if p == 1 {
        vec![hi]
    } else {
        (0..p).map(|i| hi - (hi - lo) * i as f64 / (p - 1) as f64).collect()
    };
    Ok(TargetMatrix::new(PsdPoint::new(basis, DVector::from_vec(values))?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_util::{gaussian, random_psd, rng};
    use approx::assert_abs_diff_eq;

    #[test]
    fn frobenius_hand_values() {
        let z = DMatrix::<f64>::zeros(3, 3);
        assert_eq!(Frobenius.value_dense(&z).unwrap(), 0.0);
        assert_eq!(Frobenius.euclidean_grad_dense(&z).unwrap().amax(), 0.0);

        let x = PsdPoint::from_diagonal(&[1.0, 2.0], 3).unwrap();
        assert_abs_diff_eq!(Frobenius.value(&x).unwrap(), 2.5, epsilon = 1e-14);
        assert!((Frobenius.euclidean_grad(&x).unwrap() - x.to_dense()).amax() < 1e-14);
    }

    #[test]
    fn von_neumann_hand_values() {
        let e = (-1.0_f64).exp();
        let x = PsdPoint::from_diagonal(&[e, e, e], 5).unwrap();
        assert_abs_diff_eq!(VonNeumann.value(&x).unwrap(), -3.0 / 1.0_f64.exp(), epsilon = 1e-14);
        // log(e^-1) + 1 = 0: the minimizer has zero gradient
        assert!(VonNeumann.euclidean_grad(&x).unwrap().amax() < 1e-14);

        let x = PsdPoint::from_diagonal(&[1.0, 1.0], 3).unwrap();
        assert_abs_diff_eq!(VonNeumann.value(&x).unwrap(), 0.0);
    }

    #[test]
    fn von_neumann_rejects_dense() {
        assert!(matches!(
            VonNeumann.value_dense(&DMatrix::identity(2, 2)),
            Err(Error::DenseUnsupported("von_neumann"))
        ));
    }

    #[test]
    fn quadratic_target_consistency() {
        let mut r = rng(1);
        let a = TargetMatrix::new(random_psd(&mut r, 4, 2));
        let q = QuadraticTarget::new(&a);
        assert_abs_diff_eq!(q.value(a.point()).unwrap(), 0.0, epsilon = 1e-20);
        assert!(q.euclidean_grad(a.point()).unwrap().amax() < 1e-14);

        let zero = QuadraticTarget::from_dense(DMatrix::zeros(4, 4));
        let x = random_psd(&mut r, 4, 2);
        assert_abs_diff_eq!(zero.value(&x).unwrap(), Frobenius.value(&x).unwrap(), epsilon = 1e-12);
        assert!(matches!(
            q.value_dense(&DMatrix::zeros(3, 3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn factor_gradient_of_frobenius_expands_by_hand() {
        let mut r = rng(2);
        let y = FactorPoint::new(gaussian(&mut r, 5, 2)).unwrap();
        let yy = y.y();
        let expected = (yy * yy.transpose()) * yy * 2.0;
        assert!((factor_gradient(&Frobenius, &y).unwrap() - expected).amax() < 1e-12);
    }

    #[test]
    fn overridden_factor_gradients_match_generic_path() {
        struct Generic<'a>(&'a dyn EnergyFn);
        impl EnergyFn for Generic<'_> {
            fn name(&self) -> &'static str {
                "generic"
            }
            fn value(&self, x: &PsdPoint) -> Result<f64> {
                self.0.value(x)
            }
            fn euclidean_grad(&self, x: &PsdPoint) -> Result<DMatrix<f64>> {
                self.0.euclidean_grad(x)
            }
        }
        let mut r = rng(3);
        let a = TargetMatrix::new(random_psd(&mut r, 5, 3));
        let quad = QuadraticTarget::new(&a);
        let energies: [&dyn EnergyFn; 3] = [&Frobenius, &VonNeumann, &quad];
        for e in energies {
            let y = FactorPoint::new(gaussian(&mut r, 5, 3)).unwrap();
            let fast = e.factor_gradient(&y).unwrap();
            let slow = Generic(e).factor_gradient(&y).unwrap();
            assert!((&fast - &slow).amax() < 1e-9 * slow.amax().max(1.0), "{}", e.name());
        }
    }

    #[test]
    fn energy_keys_parse() {
        for key in [EnergyKey::Frobenius, EnergyKey::VonNeumann, EnergyKey::QuadraticTarget] {
            assert_eq!(key.as_str().parse::<EnergyKey>().unwrap(), key);
        }
        assert!("entropy".parse::<EnergyKey>().is_err());
    }
}
