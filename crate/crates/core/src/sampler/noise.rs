//! Gaussian noise for the two chains.
//!
//! Draw order is fixed so that a seed reproduces the same chain across
//! refactors:
//!
//! * embedded chain: the `p` diagonal entries of `B11`, then its strict upper
//!   triangle row by row, then `B12` row by row; `p(p+1)/2 + p(n-p)` standard
//!   normals per draw.
//! * factor chain: the `n×p` entries of `B` in column-major order.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

/// Tangent-space noise in the `[U U_perp]` basis: the block matrix
/// `[B11 B12; B12^T 0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct StructuredNoiseE {
    /// p×p symmetric; diagonal ~ N(0, 1), off-diagonal ~ N(0, 1/2).
    pub b11: DMatrix<f64>,
    /// p×(n-p); entries ~ N(0, 1/2).
    pub b12: DMatrix<f64>,
}

impl StructuredNoiseE {
    pub fn zeros(n: usize, p: usize) -> Self {
        Self {
            b11: DMatrix::zeros(p, p),
            b12: DMatrix::zeros(p, n - p),
        }
    }

    /// The full n×n block matrix.
    pub fn to_block(&self) -> DMatrix<f64> {
        let p = self.b11.nrows();
        let n = p + self.b12.ncols();
        let mut m = DMatrix::zeros(n, n);
        m.view_mut((0, 0), (p, p)).copy_from(&self.b11);
        m.view_mut((0, p), (p, n - p)).copy_from(&self.b12);
        m.view_mut((p, 0), (n - p, p)).copy_from(&self.b12.transpose());
        m
    }
}

pub fn sample_noise_e<R: Rng + ?Sized>(rng: &mut R, n: usize, p: usize) -> StructuredNoiseE {
    let half = std::f64::consts::FRAC_1_SQRT_2;
    let mut b11 = DMatrix::zeros(p, p);
    for i in 0..p {
        b11[(i, i)] = rng.sample::<f64, _>(StandardNormal);
    }
    for i in 0..p {
        for j in (i + 1)..p {
            let v = half * rng.sample::<f64, _>(StandardNormal);
            b11[(i, j)] = v;
            b11[(j, i)] = v;
        }
    }
    let mut b12 = DMatrix::zeros(p, n - p);
    for i in 0..p {
        for j in 0..(n - p) {
            b12[(i, j)] = half * rng.sample::<f64, _>(StandardNormal);
        }
    }
    StructuredNoiseE { b11, b12 }
}

/// i.i.d. standard normal n×p matrix.
pub fn sample_noise_bw<R: Rng + ?Sized>(rng: &mut R, n: usize, p: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, p, |_, _| rng.sample::<f64, _>(StandardNormal))
}
