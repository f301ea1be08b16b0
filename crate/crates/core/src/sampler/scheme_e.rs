//! Langevin chain for the embedded (Frobenius) metric.
//!
//! In the basis `Q = [U U_perp]` of the current iterate the pre-projection
//! matrix is
//!
//! ```text
//! [ Lambda - dt U^T G U + s B11     -dt U^T G U_perp + s B12 ]
//! [ (same)^T                         c I_{n-p}                ]
//! ```
//!
//! with `G` the Euclidean gradient, `s = sqrt(2 dt / beta)` and
//! `c = (dt / beta) sum_i 1/lambda_i` the mean-curvature drift. The next
//! iterate keeps the top `p` eigenpairs of `Q [..] Q^T`.

use nalgebra::DMatrix;
use rand::Rng;

use super::noise::{sample_noise_e, StructuredNoiseE};
use super::{with_boundary_policy, ChainConfig, ChainRng, Sample, Scheme, Stepped};
use crate::energy::EnergyFn;
use crate::error::{Error, Result};
use crate::geometry::{ortho_complement, project_to_rank, OrthoComplement, PsdPoint};

/// Iterate of the embedded chain together with a basis of the normal
/// directions (the trailing eigenvectors of the last projection).
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedState {
    pub point: PsdPoint,
    pub complement: OrthoComplement,
}

impl EmbeddedState {
    pub fn new(point: PsdPoint) -> Result<Self> {
        let complement = ortho_complement(point.u())?;
        Ok(Self { point, complement })
    }

    /// `[U U_perp]`.
    pub fn basis(&self) -> DMatrix<f64> {
        let u = self.point.u();
        let up = self.complement.u_perp();
        let (n, p) = u.shape();
        let mut q = DMatrix::zeros(n, n);
        q.columns_mut(0, p).copy_from(u);
        q.columns_mut(p, n - p).copy_from(up);
        q
    }
}

/// The symmetric matrix handed to the projection, for a given noise draw
/// (`None` means no noise, as for `beta = inf`).
pub fn scheme_e_proposal(
    state: &EmbeddedState,
    energy: &dyn EnergyFn,
    config: &ChainConfig,
    noise: Option<&StructuredNoiseE>,
) -> Result<DMatrix<f64>> {
    let point = &state.point;
    let (n, p) = (point.n(), point.p());
    let egrad = energy.euclidean_grad(point)?;
    if egrad.shape() != (n, n) {
        return Err(Error::dims(format!("{n}x{n}"), format!("{:?}", egrad.shape())));
    }
    let q = state.basis();
    let mut c = q.transpose() * egrad * &q;
    c *= -config.dt;
    // normal-normal block of the gradient is discarded by the tangent projection
    c.view_mut((p, p), (n - p, n - p)).fill_with_identity();
    c.view_mut((p, p), (n - p, n - p))
        .scale_mut(config.correction_scale() * point.inverse_eigen_sum());
    for i in 0..p {
        c[(i, i)] += point.lambda()[i];
    }
    if let Some(noise) = noise {
        let s = config.noise_scale();
        if noise.b11.shape() != (p, p) || noise.b12.shape() != (p, n - p) {
            return Err(Error::dims(
                format!("B11 {p}x{p}, B12 {p}x{}", n - p),
                format!("B11 {:?}, B12 {:?}", noise.b11.shape(), noise.b12.shape()),
            ));
        }
        let mut tl = c.view_mut((0, 0), (p, p));
        tl += &noise.b11 * s;
        let mut tr = c.view_mut((0, p), (p, n - p));
        tr += &noise.b12 * s;
        let mut bl = c.view_mut((p, 0), (n - p, p));
        bl += noise.b12.transpose() * s;
    }
    let m = &q * c * q.transpose();
    Ok((&m + m.transpose()) * 0.5)
}

/// One step with a given noise draw.
pub fn scheme_e_update(
    state: &EmbeddedState,
    energy: &dyn EnergyFn,
    config: &ChainConfig,
    noise: Option<&StructuredNoiseE>,
) -> Result<EmbeddedState> {
    let m = scheme_e_proposal(state, energy, config, noise)?;
    let (point, complement) = project_to_rank(&m, state.point.p())?;
    Ok(EmbeddedState { point, complement })
}

/// One step drawing `p(p+1)/2 + p(n-p)` normals per attempt (none when
/// `beta` is infinite).
pub fn step_scheme_e<R: Rng + ?Sized>(
    state: &EmbeddedState,
    energy: &dyn EnergyFn,
    config: &ChainConfig,
    rng: &mut R,
) -> Result<Stepped<EmbeddedState>> {
    let (n, p) = (state.point.n(), state.point.p());
    with_boundary_policy(config, || {
        if config.is_deterministic() {
            scheme_e_update(state, energy, config, None)
        } else {
            let noise = sample_noise_e(rng, n, p);
            scheme_e_update(state, energy, config, Some(&noise))
        }
    })
}

/// The embedded-metric chain.
#[derive(Debug, Clone, Copy, Default)]
pub struct SchemeE;

impl Scheme for SchemeE {
    type State = EmbeddedState;

    fn name(&self) -> &'static str {
        "E"
    }

    fn step(
        &self,
        state: &EmbeddedState,
        energy: &dyn EnergyFn,
        config: &ChainConfig,
        rng: &mut ChainRng,
    ) -> Result<Stepped<EmbeddedState>> {
        step_scheme_e(state, energy, config, rng)
    }

    fn sample<'a>(&self, state: &'a EmbeddedState) -> Sample<'a> {
        Sample::Embedded(&state.point)
    }
}
