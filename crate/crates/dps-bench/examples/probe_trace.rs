use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use dps_core::*;

fn main() {
    let sched = Schedule::linear(200, 1e-4, 0.02).unwrap();
    let cfg = SamplerConfig { clip_denoised: false, ..SamplerConfig::ddpm() };
    let d_side = 4; let d = 16;
    let prior = GaussianMixturePrior::unit_gaussian(d);
    let op = LinearOperator::downsample(ImageShape::new(d_side, d_side, 1), 2).unwrap();
    let truth = DVector::from_fn(d, |i, _| ((i % 5) as f64 - 2.0) / 4.0);
    let meas = op.measure(&truth, 0.05, &mut ChaCha12Rng::seed_from_u64(7)).unwrap();
    for rho in [0.2, 0.5, 1.0, 2.0, 4.0] {
        let gcfg = GuidanceConfig::ps(rho);
        let mut traces: Vec<Vec<f64>> = Vec::new();
        for s in 0..32u64 {
            let mut rng = ChaCha12Rng::seed_from_u64(40_000 + s);
            let out = run_chain(&sched, &cfg, &prior, Some(Guidance{config:&gcfg, operator:&op, measurement:&meas}), &mut rng).unwrap();
            traces.push(out.residual_trace.iter().map(|&(_, r)| r).collect());
        }
        let steps = traces[0].len();
        let med = |j: usize| { let mut v: Vec<f64> = traces.iter().map(|t| t[j]).collect(); v.sort_by(|a,b| a.partial_cmp(b).unwrap()); (v[15]+v[16])/2.0 };
        print!("rho={rho}: ");
        for j in (steps-24)..steps { print!("{:.4} ", med(j)); }
        println!();
    }
}
