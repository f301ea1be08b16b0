//! CDF of `||X||_F` for the von Neumann energy `E(X) = Tr(X log X)`.
//!
//! The law of the spectrum has density (up to a constant)
//!
//! ```text
//! embedded:  prod_{i<j} |l_i - l_j|                    prod_i l_i^(a - beta l_i)
//! BW:        prod_{i<j} |l_i - l_j| / sqrt(l_i + l_j)  prod_i l_i^(a - beta l_i)
//! ```
//!
//! on the positive orthant, with `a = n - p` (embedded) or `a = (n - p - 1)/2`
//! (BW) by default. `F(t)` is its mass inside the ball of radius `t`,
//! normalized by the mass inside radius `t_max`.
//!
//! The density is symmetric in the eigenvalues, so it is integrated over the
//! ordered wedge `l_1 >= ... >= l_p`, where it is smooth, in polar (p = 2) or
//! spherical (p = 3) coordinates: `F(t) ∝ int_0^t g(r) dr` with
//! `g(r) = r^(p-1) int f(r w) dw`. Both the angular and the radial integrals
//! use composite Simpson rules; the radial rule is split at every query
//! point so that the cumulative sums are exact Simpson values there.

use std::f64::consts::FRAC_PI_2;
use std::f64::consts::FRAC_PI_4;

use super::{check_ascending, ManifoldDims, Metric, ReferenceCdf};
use crate::error::{Error, Result};

const DEFAULT_RESOLUTION: usize = 64;
const DEFAULT_TOLERANCE: f64 = 1e-4;
/// Radial intervals over `[0, t_max]` per angular interval.
const RADIAL_FACTOR: usize = 4;

/// Quadrature for the Example II CDF. Supports `p <= 3`.
#[derive(Debug, Clone, PartialEq)]
pub struct Example2Quadrature {
    dims: ManifoldDims,
    beta: f64,
    metric: Metric,
    exponent_offset: f64,
    t_max: f64,
    resolution: usize,
    max_resolution: usize,
    tolerance: f64,
}

impl Example2Quadrature {
    pub fn new(dims: ManifoldDims, beta: f64, metric: Metric, t_max: f64) -> Result<Self> {
        if dims.p > 3 {
            return Err(Error::UnsupportedRank(dims.p));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::DomainError(format!(
                "beta must be positive and finite, got {beta}"
            )));
        }
        if !(t_max > 0.0 && t_max.is_finite()) {
            return Err(Error::DomainError(format!("t_max must be positive, got {t_max}")));
        }
        let max_resolution = if dims.p == 3 { 512 } else { 1 << 14 };
        Self {
            dims,
            beta,
            metric,
            exponent_offset: Self::default_exponent_offset(dims, metric),
            t_max,
            resolution: DEFAULT_RESOLUTION,
            max_resolution,
            tolerance: DEFAULT_TOLERANCE,
        }
        .checked()
    }

    /// `n - p` for the embedded metric, `(n - p - 1)/2` for Bures–Wasserstein.
    pub fn default_exponent_offset(dims: ManifoldDims, metric: Metric) -> f64 {
        let np = (dims.n - dims.p) as f64;
        match metric {
            Metric::Embedded => np,
            Metric::BuresWasserstein => (np - 1.0) / 2.0,
        }
    }

    /// Overrides the power `a` in `l^(a - beta l)`. Must be nonnegative so
    /// that the integrand is bounded.
    pub fn with_exponent_offset(mut self, offset: f64) -> Result<Self> {
        self.exponent_offset = offset;
        self.checked()
    }

    /// Starting number of angular intervals (rounded up to even).
    pub fn with_resolution(mut self, resolution: usize) -> Result<Self> {
        self.resolution = resolution.max(2).next_multiple_of(2);
        self.max_resolution = self.max_resolution.max(self.resolution);
        self.checked()
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn exponent_offset(&self) -> f64 {
        self.exponent_offset
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    fn checked(self) -> Result<Self> {
        if !(self.exponent_offset >= 0.0 && self.exponent_offset.is_finite()) {
            return Err(Error::DomainError(format!(
                "exponent offset {} must be nonnegative (n = p is not supported for BW)",
                self.exponent_offset
            )));
        }
        Ok(self)
    }

    /// Unnormalized spectral density at `l`; zero on the boundary of the
    /// orthant and where two eigenvalues coincide.
    pub fn density(&self, lambda: &[f64]) -> f64 {
        let a = self.exponent_offset;
        let mut log_f = 0.0;
        for (i, &li) in lambda.iter().enumerate() {
            if li > 0.0 {
                log_f += (a - self.beta * li) * li.ln();
            } else if a > 0.0 {
                return 0.0;
            }
            for &lj in &lambda[i + 1..] {
                let gap = (li - lj).abs();
                if gap == 0.0 {
                    return 0.0;
                }
                log_f += gap.ln();
                if self.metric == Metric::BuresWasserstein {
                    log_f -= 0.5 * (li + lj).ln();
                }
            }
        }
        log_f.exp()
    }

    /// `g(r) = r^(p-1) * (angular integral over the ordered wedge)` with
    /// `intervals` Simpson intervals per angular direction.
    fn radial_density(&self, r: f64, intervals: usize) -> f64 {
        match self.dims.p {
            1 => self.density(&[r]),
            2 => {
                let h = FRAC_PI_4 / intervals as f64;
                let ang = simpson(intervals, h, |k| {
                    let th = k as f64 * h;
                    self.density(&[r * th.cos(), r * th.sin()])
                });
                r * ang
            }
            _ => {
                // l1 = r sin(th) cos(ph), l2 = r sin(th) sin(ph), l3 = r cos(th);
                // l1 >= l2 iff ph <= pi/4, l2 >= l3 iff th >= pi/2 - atan(sin(ph))
                let h_ph = FRAC_PI_4 / intervals as f64;
                let ang = simpson(intervals, h_ph, |k| {
                    let ph = k as f64 * h_ph;
                    let width = ph.sin().atan();
                    let lo = FRAC_PI_2 - width;
                    let h_th = width / intervals as f64;
                    let (sp, cp) = ph.sin_cos();
                    simpson(intervals, h_th, |j| {
                        let th = lo + j as f64 * h_th;
                        let (st, ct) = th.sin_cos();
                        self.density(&[r * st * cp, r * st * sp, r * ct]) * st
                    })
                });
                r * r * ang
            }
        }
    }

    /// Unnormalized `int_a^b g`, Simpson with `m` (even) intervals.
    fn cell_integral(&self, a: f64, b: f64, m: usize, angular: usize) -> f64 {
        let h = (b - a) / m as f64;
        simpson(m, h, |k| self.radial_density(a + k as f64 * h, angular))
    }

    /// CDF values on `grid` at a fixed resolution, without the drift check.
    pub fn cdf_at_resolution(&self, grid: &[f64], resolution: usize) -> Result<Vec<f64>> {
        check_ascending(grid)?;
        let angular = resolution.max(2).next_multiple_of(2);
        let radial_total = (RADIAL_FACTOR * angular) as f64;

        // cell boundaries: 0, interior query points, t_max
        let mut knots = vec![0.0];
        knots.extend(grid.iter().copied().filter(|&t| t > 0.0 && t < self.t_max));
        knots.push(self.t_max);
        let cells: Vec<(f64, f64)> = knots.windows(2).map(|w| (w[0], w[1])).collect();
        let integrate = |&(a, b): &(f64, f64)| {
            let m = ((radial_total * (b - a) / self.t_max / 2.0).ceil() as usize * 2).max(2);
            self.cell_integral(a, b, m, angular)
        };
        #[cfg(feature = "parallel")]
        let masses: Vec<f64> = {
            use rayon::prelude::*;
            cells.par_iter().map(integrate).collect()
        };
        #[cfg(not(feature = "parallel"))]
        let masses: Vec<f64> = cells.iter().map(integrate).collect();

        let mut cumulative = Vec::with_capacity(knots.len());
        let mut acc = 0.0;
        cumulative.push(0.0);
        for m in &masses {
            acc += m;
            cumulative.push(acc);
        }
        let total = acc;
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::DomainError(format!("normalizing mass is {total}")));
        }
        let values = grid
            .iter()
            .map(|&t| {
                if t <= 0.0 {
                    0.0
                } else if t >= self.t_max {
                    1.0
                } else {
                    let idx = knots.partition_point(|&k| k < t);
                    cumulative[idx] / total
                }
            })
            .collect();
        Ok(values)
    }

    /// CDF on `grid`, doubling the resolution until no value moves by more
    /// than the tolerance.
    pub fn cdf(&self, grid: &[f64]) -> Result<ReferenceCdf> {
        let mut resolution = self.resolution;
        let mut prev = self.cdf_at_resolution(grid, resolution)?;
        loop {
            resolution *= 2;
            let next = self.cdf_at_resolution(grid, resolution)?;
            let drift = prev.iter().zip(&next).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            if drift < self.tolerance {
                return ReferenceCdf::new(grid.to_vec(), next);
            }
            if resolution >= self.max_resolution {
                return Err(Error::QuadratureUnconverged { drift, resolution });
            }
            log::debug!("quadrature drift {drift:.2e} at resolution {resolution}");
            prev = next;
        }
    }
}

/// Composite Simpson sum `h/3 (f0 + 4 f1 + 2 f2 + ... + fm)` over `m` (even)
/// intervals, with `f(k)` the value at node `k`.
fn simpson(m: usize, h: f64, f: impl Fn(usize) -> f64) -> f64 {
    if h == 0.0 {
        return 0.0;
    }
    let mut s = f(0) + f(m);
    for k in 1..m {
        s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(k);
    }
    s * h / 3.0
}

/// Single-point convenience wrapper around [`Example2Quadrature`].
pub fn cdf_example2(dims: ManifoldDims, beta: f64, metric: Metric, t: f64, t_max: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::DomainError(format!("t must be positive, got {t}")));
    }
    let q = Example2Quadrature::new(dims, beta, metric, t_max)?;
    Ok(q.cdf(&[t])?.values[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference::uniform_grid;

    #[test]
    fn simpson_is_exact_on_cubics() {
        let h = 0.25;
        let v = simpson(8, h, |k| {
            let x = k as f64 * h;
            x * x * x - x
        });
        assert!((v - (16.0 / 4.0 - 2.0)).abs() < 1e-14);
    }

    #[test]
    fn rank_above_three_is_unsupported() {
        let d = ManifoldDims::new(6, 4).unwrap();
        assert_eq!(
            Example2Quadrature::new(d, 1.0, Metric::Embedded, 10.0),
            Err(Error::UnsupportedRank(4))
        );
    }

    #[test]
    fn rank_one_matches_direct_integration() {
        // p = 1: density l^(n-1-beta l) on (0, t)
        let d = ManifoldDims::new(3, 1).unwrap();
        let q = Example2Quadrature::new(d, 0.5, Metric::Embedded, 12.0).unwrap();
        let grid = uniform_grid(12.0, 25);
        let cdf = q.cdf(&grid).unwrap();
        let f = |x: f64| if x > 0.0 { x.powf(2.0 - 0.5 * x) } else { 0.0 };
        let trapz = |t: f64| {
            let m = 200_000;
            let h = t / m as f64;
            (0..m).map(|k| f((k as f64 + 0.5) * h) * h).sum::<f64>()
        };
        let total = trapz(12.0);
        for (t, v) in cdf.iter() {
            assert!((v - trapz(t) / total).abs() < 1e-6, "t={t}");
        }
    }

    #[test]
    fn monotone_and_normalized() {
        let d = ManifoldDims::new(5, 3).unwrap();
        for metric in [Metric::Embedded, Metric::BuresWasserstein] {
            let q = Example2Quadrature::new(d, 0.5, metric, 15.0).unwrap();
            let grid = uniform_grid(15.0, 100);
            let cdf = q.cdf(&grid).unwrap();
            assert_eq!(cdf.values[0], 0.0);
            assert_eq!(cdf.values[99], 1.0);
            assert!(cdf.values.windows(2).all(|w| w[1] >= w[0]));
        }
    }

    #[test]
    fn beyond_t_max_is_one() {
        let d = ManifoldDims::new(5, 2).unwrap();
        let v = cdf_example2(d, 0.5, Metric::Embedded, 20.0, 15.0).unwrap();
        assert_eq!(v, 1.0);
    }

    #[test]
    fn density_symmetry_and_zeros() {
        let d = ManifoldDims::new(5, 3).unwrap();
        let q = Example2Quadrature::new(d, 0.4, Metric::BuresWasserstein, 10.0).unwrap();
        let a = q.density(&[1.0, 2.0, 3.0]);
        assert!((a - q.density(&[3.0, 1.0, 2.0])).abs() < 1e-12 * a);
        assert_eq!(q.density(&[1.0, 1.0, 2.0]), 0.0);
        assert_eq!(q.density(&[0.0, 1.0, 2.0]), 0.0);
    }
}
