//! Langevin Monte Carlo sampling of fixed-rank positive semi-definite
//! matrices.
//!
//! Two Euler–Maruyama chains target the Gibbs distribution
//! `exp(-beta E(X)) dV` on the manifold of n×n PSD matrices of rank p:
//!
//! * [`sampler::SchemeE`] works with the metric inherited from the Frobenius
//!   inner product. Each step moves in the tangent space, adds the
//!   mean-curvature drift and projects back onto the manifold by truncated
//!   eigendecomposition.
//! * [`sampler::SchemeBw`] works with the Bures–Wasserstein metric through a
//!   factor `X = Y Y^T`: a plain Langevin step on `Y` plus the gradient of
//!   the orbit entropy.
//!
//! [`reference`] holds the closed-form and quadrature distributions used to
//! check the samples, together with the Kolmogorov–Smirnov statistic and the
//! Monte Carlo integration estimator.
//!
//! With the default `parallel` feature, ensembles of chains and the
//! quadrature run on rayon; without it the same code runs sequentially.

// `!(x > 0.0)` guards are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod energy;
pub mod error;
pub mod geometry;
pub mod reference;
pub mod sampler;

pub use error::{Error, Result};
