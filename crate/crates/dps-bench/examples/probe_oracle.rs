//! Tuning probe for the oracle-agreement acceptance fixtures.
//!
//! Mode "mean": linear-Gaussian fixture, reports the l-inf error of the
//! guided sample mean vs the exact posterior mean over a rho grid.
//! Mode "w1": d=2 two-component mixture, reports per-axis 1-Wasserstein
//! distances of guided samples vs the grid posterior, next to the
//! distance between two independent oracle resamples.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use dps_core::{
    exact_gaussian_posterior, grid_posterior, run_chain, AnnealProfile, Covariance,
    GaussianMixturePrior, GridBounds, Guidance, GuidanceConfig, ImageShape, LinearOperator,
    Measurement, SamplerConfig, Schedule,
};

fn mean_probe() {
    let d = 16;
    let shape = ImageShape::new(4, 4, 1);
    let prior = GaussianMixturePrior::unit_gaussian(d);
    let op = LinearOperator::downsample(shape, 2).unwrap();
    let sigma = 0.05;
    let sched = Schedule::linear(1000, 1e-4, 0.02).unwrap();
    let mut cfg = SamplerConfig::ddpm();
    cfg.clip_denoised = false;

    let mut truth_rng = ChaCha12Rng::seed_from_u64(2024);
    let x_star = DVector::from_fn(d, |_, _| {
        rand::Rng::sample::<f64, _>(&mut truth_rng, rand_distr::StandardNormal)
    });
    let meas = op.measure(&x_star, sigma, &mut truth_rng).unwrap();

    let exact = exact_gaussian_posterior(
        &DVector::zeros(d),
        &DMatrix::identity(d, d),
        &op,
        &meas.y,
        sigma,
    )
    .unwrap();
    println!("exact mean range: [{:.3}, {:.3}]", exact.mean.min(), exact.mean.max());

    for anneal in [AnnealProfile::Constant, AnnealProfile::Linear] {
        for k in 1..=10 {
            let rho = k as f64 / 10.0;
            let mut gcfg = GuidanceConfig::ps(rho);
            gcfg.anneal = anneal;
            let guidance = Guidance {
                config: &gcfg,
                operator: &op,
                measurement: &meas,
            };
            let n = 256;
            let sum: DVector<f64> = (0..n)
                .into_par_iter()
                .map(|i| {
                    let mut rng = ChaCha12Rng::seed_from_u64(10_000 + i);
                    run_chain(&sched, &cfg, &prior, Some(guidance), &mut rng)
                        .unwrap()
                        .sample
                })
                .reduce(|| DVector::zeros(d), |a, b| a + b);
            let mean = sum / n as f64;
            let err = (&mean - &exact.mean).abs().max();
            println!("{anneal:?} rho={rho:.1} linf={err:.4}");
        }
    }
}

fn w1_axis(a: &mut [f64], b: &mut [f64]) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.len() as f64
}

fn w1_probe() {
    let sep: f64 = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(1.0);
    let sigma: f64 = std::env::args().nth(3).and_then(|s| s.parse().ok()).unwrap_or(0.4);
    let y0: f64 = std::env::args().nth(4).and_then(|s| s.parse().ok()).unwrap_or(0.0);
    let tau: f64 = std::env::args().nth(5).and_then(|s| s.parse().ok()).unwrap_or(0.35);
    let sep1: f64 = std::env::args().nth(6).and_then(|s| s.parse().ok()).unwrap_or(0.6);

    let prior = GaussianMixturePrior::new(
        vec![0.5, 0.5],
        vec![
            DVector::from_vec(vec![-sep, -sep1]),
            DVector::from_vec(vec![sep, sep1]),
        ],
        vec![
            Covariance::Diagonal(DVector::from_element(2, tau * tau)),
            Covariance::Diagonal(DVector::from_element(2, tau * tau)),
        ],
    )
    .unwrap();
    let op = LinearOperator::mask(ImageShape::new(1, 2, 1), vec![true, false]).unwrap();
    let y = DVector::from_vec(vec![y0]);
    let meas = Measurement { y: y.clone(), sigma };

    let bounds = GridBounds::from_prior(&prior);
    let grid = grid_posterior(&prior, &op, &y, sigma, &bounds, 512).unwrap();
    println!("grid mean: {:?}", grid.mean().as_slice());

    let n = 10_000usize;
    let mut rng = ChaCha12Rng::seed_from_u64(8);
    let draw = |rng: &mut ChaCha12Rng| -> (Vec<f64>, Vec<f64>) {
        let mut a0 = Vec::with_capacity(n);
        let mut a1 = Vec::with_capacity(n);
        for _ in 0..n {
            let p = grid.sample(rng);
            a0.push(p[0]);
            a1.push(p[1]);
        }
        (a0, a1)
    };
    let (mut r0a, mut r1a) = draw(&mut rng);
    let (mut r0b, mut r1b) = draw(&mut rng);
    let base0 = w1_axis(&mut r0a, &mut r0b);
    let base1 = w1_axis(&mut r1a, &mut r1b);
    println!("resample W1: axis0={base0:.5} axis1={base1:.5}  (3x = {:.5}, {:.5})", 3.0*base0, 3.0*base1);

    let sched = Schedule::linear(1000, 1e-4, 0.02).unwrap();
    let mut cfg = SamplerConfig::ddpm();
    cfg.clip_denoised = false;

    {
        let anneal = AnnealProfile::Constant;
        for rho in [0.0008, 0.001, 0.0012, 0.0015] {
            let mut gcfg = GuidanceConfig::ps(rho);
            gcfg.anneal = anneal;
            let guidance = Guidance {
                config: &gcfg,
                operator: &op,
                measurement: &meas,
            };
            let samples: Vec<DVector<f64>> = (0..n as u64)
                .into_par_iter()
                .map(|i| {
                    let mut rng = ChaCha12Rng::seed_from_u64(90_000 + i);
                    run_chain(&sched, &cfg, &prior, Some(guidance), &mut rng)
                        .unwrap()
                        .sample
                })
                .collect();
            let mut s0: Vec<f64> = samples.iter().map(|s| s[0]).collect();
            let mut s1: Vec<f64> = samples.iter().map(|s| s[1]).collect();
            let mut g0: Vec<f64> = r0a.clone();
            let mut g1: Vec<f64> = r1a.clone();
            let w0 = w1_axis(&mut s0, &mut g0);
            let w1 = w1_axis(&mut s1, &mut g1);
            println!(
                "{anneal:?} rho={rho:.4} W1 axis0={w0:.5} ({}) axis1={w1:.5} ({})",
                if w0 <= 3.0 * base0 { "PASS" } else { "fail" },
                if w1 <= 3.0 * base1 { "PASS" } else { "fail" },
            );
        }
    }
}

fn main() {
    match std::env::args().nth(1).as_deref() {
        Some("mean") => mean_probe(),
        Some("w1") => w1_probe(),
        _ => eprintln!("usage: probe_oracle <mean|w1> [sep sigma y0 tau sep1]"),
    }
}
