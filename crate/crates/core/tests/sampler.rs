//! Zero-temperature limits, equivariance, noise moments and replay.

mod common;

use common::{gaussian, max_abs, rng};
use psd_langevin::energy::{equally_spaced_target, EnergyFn, Frobenius, QuadraticTarget, VonNeumann};
use psd_langevin::geometry::{
    random_orthonormal, retract_projection, riemannian_gradient_embedded, FactorPoint, OrthoComplement, PsdPoint,
};
use psd_langevin::sampler::{
    run_chain, run_ensemble, run_ensemble_sequential, sample_noise_bw, sample_noise_e, scheme_bw_proposal,
    scheme_e_update, ChainConfig, EmbeddedState, EuclideanLangevin, Observable, SchemeBw, SchemeE,
};

fn quadratic(seed: u64) -> QuadraticTarget {
    let basis = random_orthonormal(&mut rng(seed), 5, 3).unwrap();
    QuadraticTarget::new(&equally_spaced_target(basis, 1.0, 3.0).unwrap())
}

fn deterministic(dt: f64, iters: u64) -> ChainConfig {
    ChainConfig::new(dt, f64::INFINITY, iters, 0).with_burn_in(0)
}

#[test]
fn embedded_chain_at_zero_temperature_is_riemannian_descent() {
    let energy = quadratic(1);
    let x0 = PsdPoint::random(&mut rng(2), 5, 3, 0.5, 2.0).unwrap();
    let dt = 0.05;
    let out = run_chain(
        &SchemeE,
        EmbeddedState::new(x0.clone()).unwrap(),
        &energy,
        &deterministic(dt, 100),
        &[],
    )
    .unwrap();

    let mut x = x0;
    for _ in 0..100 {
        let g = energy.euclidean_grad(&x).unwrap();
        let step = riemannian_gradient_embedded(&x, &g).unwrap().to_dense() * -dt;
        x = retract_projection(&x, &step).unwrap();
    }
    let err = max_abs(&(out.final_state.point.to_dense() - x.to_dense()));
    assert!(err <= 1e-10, "{err:e}");
}

#[test]
fn factor_chain_at_zero_temperature_is_gradient_descent_on_factors() {
    for (energy, seed) in [(&quadratic(3) as &dyn EnergyFn, 4u64), (&VonNeumann, 5)] {
        let y0 = PsdPoint::random(&mut rng(seed), 5, 3, 0.5, 2.0)
            .unwrap()
            .to_factor()
            .unwrap();
        let dt = 0.01;
        let out = run_chain(&SchemeBw, y0.clone(), energy, &deterministic(dt, 100), &[]).unwrap();
        let mut y = y0.y().clone();
        for _ in 0..100 {
            let x = &y * y.transpose();
            let g = energy.euclidean_grad(&PsdPoint::from_dense(&x, 3).unwrap()).unwrap();
            y -= &g * &y * (2.0 * dt);
        }
        let err = max_abs(&(out.final_state.y() - y));
        assert!(err <= 1e-10, "{}: {err:e}", energy.name());
    }
}

#[test]
fn euclidean_chain_at_zero_temperature_is_gradient_descent() {
    let energy = quadratic(6);
    let x0 = gaussian(&mut rng(7), 5, 5);
    let dt = 0.05;
    let out = run_chain(&EuclideanLangevin, x0.clone(), &energy, &deterministic(dt, 100), &[]).unwrap();
    let mut x = x0;
    for _ in 0..100 {
        x = &x - (&x - energy.target()) * dt;
    }
    assert!(max_abs(&(out.final_state - x)) <= 1e-10);
}

#[test]
fn factor_step_commutes_with_right_orthogonal_action() {
    let y = gaussian(&mut rng(8), 6, 3);
    let o = random_orthonormal(&mut rng(9), 3, 3).unwrap();
    let b = gaussian(&mut rng(10), 6, 3);
    let config = ChainConfig::new(0.01, 0.4, 1, 0);
    for energy in [&Frobenius as &dyn EnergyFn, &VonNeumann] {
        let a = scheme_bw_proposal(&FactorPoint::new(y.clone()).unwrap(), energy, &config, Some(&b)).unwrap();
        let r = scheme_bw_proposal(&FactorPoint::new(&y * &o).unwrap(), energy, &config, Some(&(&b * &o))).unwrap();
        assert!(max_abs(&(a * &o - r)) <= 1e-10);
    }
}

#[test]
fn embedded_step_commutes_with_conjugation() {
    let x = PsdPoint::random(&mut rng(11), 5, 3, 0.5, 2.0).unwrap();
    let q = random_orthonormal(&mut rng(12), 5, 5).unwrap();
    let rotated = PsdPoint::new(&q * x.u(), x.lambda().clone()).unwrap();
    let noise = sample_noise_e(&mut rng(13), 5, 3);
    let config = ChainConfig::new(0.01, 0.4, 1, 0);
    let s0 = EmbeddedState::new(x).unwrap();
    // the noise lives in the [U U_perp] frame, so rotate the complement too
    let s1 = EmbeddedState {
        complement: OrthoComplement::new(rotated.u(), &q * s0.complement.u_perp()).unwrap(),
        point: rotated,
    };
    let a = scheme_e_update(&s0, &VonNeumann, &config, Some(&noise)).unwrap();
    let b = scheme_e_update(&s1, &VonNeumann, &config, Some(&noise)).unwrap();
    let expect = &q * a.point.to_dense() * q.transpose();
    assert!(max_abs(&(b.point.to_dense() - expect)) <= 1e-10);
}

#[test]
fn noise_moments_at_one_million_draws() {
    const M: usize = 1_000_000;
    let (n, p) = (4, 2);
    let mut r = rng(14);
    // entries: b11 (0,0), (1,1), (0,1); b12 (0,0), (1,1)
    let mut sum = [0.0f64; 5];
    let mut sq = [0.0f64; 5];
    let mut cross = 0.0;
    for _ in 0..M {
        let b = sample_noise_e(&mut r, n, p);
        let v = [
            b.b11[(0, 0)],
            b.b11[(1, 1)],
            b.b11[(0, 1)],
            b.b12[(0, 0)],
            b.b12[(1, 1)],
        ];
        for k in 0..5 {
            sum[k] += v[k];
            sq[k] += v[k] * v[k];
        }
        cross += v[0] * v[3];
        assert_eq!(b.b11[(0, 1)], b.b11[(1, 0)]);
    }
    let m = M as f64;
    let want = [1.0, 1.0, 0.5, 0.5, 0.5];
    for k in 0..5 {
        assert!((sum[k] / m).abs() < 5.0 / m.sqrt(), "mean {k}");
        // sd of a sample variance is var * sqrt(2/m)
        assert!(
            (sq[k] / m - want[k]).abs() < 5.0 * want[k] * (2.0 / m).sqrt(),
            "var {k}: {}",
            sq[k] / m
        );
    }
    assert!((cross / m).abs() < 5.0 / m.sqrt());

    let mut r = rng(15);
    let (mut s, mut s2) = (0.0, 0.0);
    for _ in 0..M / 4 {
        let b = sample_noise_bw(&mut r, 2, 2);
        for v in b.iter() {
            s += v;
            s2 += v * v;
        }
    }
    assert!((s / m).abs() < 5.0 / m.sqrt());
    assert!((s2 / m - 1.0).abs() < 5.0 * (2.0 / m).sqrt());
}

#[test]
fn replay_is_bit_identical() {
    let config = ChainConfig::new(0.001, 0.4, 5000, 21)
        .with_burn_in(1000)
        .with_thinning(3);
    let obs = [Observable::frobenius_norm()];
    let x0 = PsdPoint::from_diagonal(&[1.0, 1.0, 1.0], 5).unwrap();
    let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();

    let a = run_chain(
        &SchemeE,
        EmbeddedState::new(x0.clone()).unwrap(),
        &VonNeumann,
        &config,
        &obs,
    )
    .unwrap();
    let b = run_chain(
        &SchemeE,
        EmbeddedState::new(x0.clone()).unwrap(),
        &VonNeumann,
        &config,
        &obs,
    )
    .unwrap();
    assert_eq!(bits(&a.traces[0].values), bits(&b.traces[0].values));
    assert_eq!(a.traces[0].values.len() as u64, config.retained());

    let c = run_chain(
        &SchemeE,
        EmbeddedState::new(x0.clone()).unwrap(),
        &VonNeumann,
        &config.clone().with_seed(22),
        &obs,
    )
    .unwrap();
    assert_ne!(bits(&a.traces[0].values), bits(&c.traces[0].values));

    let y0 = x0.to_factor().unwrap();
    let d = run_chain(&SchemeBw, y0.clone(), &VonNeumann, &config, &obs).unwrap();
    let e = run_chain(&SchemeBw, y0, &VonNeumann, &config, &obs).unwrap();
    assert_eq!(bits(&d.traces[0].values), bits(&e.traces[0].values));
}

#[test]
fn ensemble_matches_sequential_runs() {
    let configs: Vec<ChainConfig> = (0..4).map(|s| ChainConfig::new(0.001, 0.4, 2000, 100 + s)).collect();
    let obs = [Observable::frobenius_norm()];
    let x0 = PsdPoint::from_diagonal(&[1.0, 1.0], 6).unwrap();
    let init = |_: &ChainConfig| x0.to_factor();
    let par = run_ensemble(&SchemeBw, &configs, init, &Frobenius, &obs).unwrap();
    let seq = run_ensemble_sequential(&SchemeBw, &configs, init, &Frobenius, &obs).unwrap();
    for (a, b) in par.iter().zip(&seq) {
        let (a, b) = (a.as_ref().unwrap(), b.as_ref().unwrap());
        assert_eq!(a.traces, b.traces);
        assert_eq!(a.final_state.y(), b.final_state.y());
    }
    let single = run_chain(&SchemeBw, x0.to_factor().unwrap(), &Frobenius, &configs[2], &obs).unwrap();
    assert_eq!(single.traces, par[2].as_ref().unwrap().traces);
}
