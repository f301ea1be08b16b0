//! Monte Carlo estimation of `(1/Z) int f dV` from a Gibbs chain, and the
//! closed form for `f(X) = ||X||^k exp(-alpha ||X||^m / m)` under
//! `E(X) = ||X||_F^2 / 2`.

use statrs::function::gamma::ln_gamma;

use super::Metric;
use crate::error::{Error, Result};
use crate::sampler::ScalarTrace;

/// Largest exponent whose `exp` is finite.
const MAX_EXPONENT: f64 = 709.782_712_893_384;

fn check_aligned(a: &ScalarTrace, b: &ScalarTrace) -> Result<()> {
    if a.values.is_empty() || b.values.is_empty() {
        return Err(Error::EmptyTrace);
    }
    if a.values.len() != b.values.len() {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

/// `(1/m) sum_i f(X_i) exp(beta E(X_i))`.
pub fn mcmc_integral_estimate(energy: &ScalarTrace, f_values: &ScalarTrace, beta: f64) -> Result<f64> {
    check_aligned(energy, f_values)?;
    let mut sum = 0.0;
    for (&e, &f) in energy.values.iter().zip(&f_values.values) {
        let exponent = beta * e;
        if exponent > MAX_EXPONENT {
            return Err(Error::Overflow { exponent });
        }
        sum += f * exponent.exp();
    }
    Ok(sum / energy.values.len() as f64)
}

/// Same estimator with `log f` supplied, so that `f exp(beta E)` is formed
/// as one exponential.
pub fn mcmc_integral_estimate_log(energy: &ScalarTrace, log_f: &ScalarTrace, beta: f64) -> Result<f64> {
    check_aligned(energy, log_f)?;
    let mut sum = 0.0;
    for (&e, &lf) in energy.values.iter().zip(&log_f.values) {
        let exponent = lf + beta * e;
        if exponent > MAX_EXPONENT {
            return Err(Error::Overflow { exponent });
        }
        sum += exponent.exp();
    }
    Ok(sum / energy.values.len() as f64)
}

/// [`mcmc_integral_estimate_log`] over the first `m` samples, for each `m`
/// in `checkpoints` (ascending, at most the trace length).
pub fn mcmc_prefix_estimates(
    energy: &ScalarTrace,
    log_f: &ScalarTrace,
    beta: f64,
    checkpoints: &[usize],
) -> Result<Vec<f64>> {
    check_aligned(energy, log_f)?;
    if checkpoints.windows(2).any(|w| w[1] <= w[0])
        || checkpoints.first() == Some(&0)
        || checkpoints.last().is_some_and(|&m| m > energy.values.len())
    {
        return Err(Error::DomainError(
            "checkpoints must be ascending, positive and within the trace".into(),
        ));
    }
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut next = checkpoints.iter().peekable();
    let mut sum = 0.0;
    for (i, (&e, &lf)) in energy.values.iter().zip(&log_f.values).enumerate() {
        let Some(&&m) = next.peek() else { break };
        let exponent = lf + beta * e;
        if exponent > MAX_EXPONENT {
            return Err(Error::Overflow { exponent });
        }
        sum += exponent.exp();
        if i + 1 == m {
            out.push(sum / m as f64);
            next.next();
        }
    }
    Ok(out)
}

/// Ratio of `int_0^inf r^(k+d-1) exp(-alpha r^m / m) dr` to
/// `int_0^inf r^(d-1) exp(-beta r^2 / 2) dr`, with `d = manifold_dim` for
/// the embedded metric and `manifold_dim / 2` for Bures–Wasserstein.
///
/// Requires `m_exp > 2`, or `m_exp = 2` with `alpha >= beta` (for
/// `alpha < beta` the Monte Carlo estimator has infinite variance).
pub fn closed_form_integral(
    k: f64,
    m_exp: f64,
    alpha: f64,
    beta: f64,
    manifold_dim: usize,
    metric: Metric,
) -> Result<f64> {
    let d = match metric {
        Metric::Embedded => manifold_dim as f64,
        Metric::BuresWasserstein => manifold_dim as f64 / 2.0,
    };
    if !(alpha > 0.0 && beta > 0.0 && alpha.is_finite() && beta.is_finite()) {
        return Err(Error::DomainError(format!(
            "alpha={alpha}, beta={beta} must be positive"
        )));
    }
    if !(k + d > 0.0) {
        return Err(Error::DomainError(format!("k={k} must exceed -{d}")));
    }
    let admissible = m_exp > 2.0 || (m_exp == 2.0 && alpha >= beta);
    if !admissible {
        return Err(Error::DomainError(format!(
            "m_exp={m_exp} needs m_exp > 2, or m_exp = 2 with alpha >= beta"
        )));
    }
    let s = (k + d) / m_exp;
    let log_num = -m_exp.ln() - s * (alpha / m_exp).ln() + ln_gamma(s);
    let log_den = -(2f64.ln()) + 0.5 * d * (2.0 / beta).ln() + ln_gamma(0.5 * d);
    Ok((log_num - log_den).exp())
}

/// Least-squares slope of `log(error)` against `log(m)`.
pub fn error_decay_slope(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 4 {
        return Err(Error::InsufficientData {
            needed: 4,
            found: points.len(),
        });
    }
    if points.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::DomainError("m must be strictly increasing".into()));
    }
    if points.iter().any(|&(m, e)| !(m > 0.0 && e > 0.0)) {
        return Err(Error::DomainError("m and errors must be positive".into()));
    }
    let n = points.len() as f64;
    let (xs, ys): (Vec<f64>, Vec<f64>) = points.iter().map(|&(m, e)| (m.ln(), e.ln())).unzip();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}
