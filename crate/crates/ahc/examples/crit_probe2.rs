use ahc::homogenize::*;
use ahc::medium::MediumSpec;
use ahc::potential::{DoubleWell, TransitionProfile, sigma_1d};
use ahc::solve::SolverOptions;
use std::time::Instant;

fn main() {
    let w = DoubleWell::Quartic;
    let q = TransitionProfile::Tanh;
    let spec = MediumSpec::checkerboard(2, &[1.0, 2.0], 1.0, 4.0);
    let opts = SolverOptions::default();
    let seeds: Vec<u64> = (1..=16).collect();
    let cfg = SweepConfig {
        dim: 2, direction: [0.0, 1.0, 0.0], spacing: 0.1,
        medium: &spec, w: &w, q: &q, opts: &opts, seeds: &seeds,
    };

    // criterion 6 scale: checkerboard r-sweep kappa=1 R=(8,16,32)
    let t0 = Instant::now();
    let res = r_sweep(&cfg, 1.0, &[8.0, 16.0, 32.0]).unwrap();
    println!("crit6 sweep wall={:.1}s pass={}", t0.elapsed().as_secs_f64(), res.pass);
    for e in &res.ensemble {
        println!("  R={:>4}: mean={:.5} std={:.3e} se={:.3e}", e.param, e.mean, e.std, e.stderr);
    }
    let fit = res.extrapolated.as_ref().unwrap();
    println!("  limit={:.5} +- {:.3e}", fit.limit, fit.stderr);
    for r in &res.residuals { println!("  {}: v={:.3e} b={:.3e} {}", r.name, r.value, r.bound, r.pass); }

    // criterion 7 scale: kappa=2 on (4,8,16)
    let t0 = Instant::now();
    let r1 = r_sweep(&cfg, 1.0, &[4.0, 8.0, 16.0]).unwrap();
    let r2 = r_sweep(&cfg, 2.0, &[4.0, 8.0, 16.0]).unwrap();
    let ki = kappa_independence(&r1, &r2);
    println!("crit7 wall={:.1}s k1={:.5}+-{:.2e} k2={:.5}+-{:.2e} diff={:.3e} tol={:.3e} pass={}",
        t0.elapsed().as_secs_f64(),
        r1.extrapolated.as_ref().unwrap().limit, r1.extrapolated.as_ref().unwrap().stderr,
        r2.extrapolated.as_ref().unwrap().limit, r2.extrapolated.as_ref().unwrap().stderr,
        ki.value, ki.bound, ki.pass);

    let oracle = sigma_1d(&w, 1.0);
    println!("oracle for reference: {oracle:.6}");
}
