use ahc::homogenize::*;
use ahc::medium::MediumSpec;
use ahc::potential::{DoubleWell, TransitionProfile};
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
    let t0 = Instant::now();
    let res = r_sweep(&cfg, 1.0, &[8.0, 16.0, 32.0]).unwrap();
    println!("crit6 wall={:.1}s pass={} limit={:.5}+-{:.2e}",
        t0.elapsed().as_secs_f64(), res.pass,
        res.extrapolated.as_ref().unwrap().limit, res.extrapolated.as_ref().unwrap().stderr);
    for e in &res.ensemble { println!("  R={:>4}: mean={:.5} std={:.3e}", e.param, e.mean, e.std); }

    let t0 = Instant::now();
    let off = off_center_check(&cfg, [0.3, 0.7, 0.0], 1.0, &[32.0]).unwrap();
    println!("crit8 wall={:.1}s pass={} cmp: |diff|={:.3e} tol={:.3e}",
        t0.elapsed().as_secs_f64(), off.pass, off.comparison.value, off.comparison.bound);

    let t0 = Instant::now();
    let mut all = true;
    for seed in 1..=16u64 {
        let sub = subadditive_split_check(&cfg, 16.0, 8.0, seed).unwrap();
        all &= sub.pass;
    }
    println!("crit5 wall={:.1}s all_pass={all}", t0.elapsed().as_secs_f64());

    let t0 = Instant::now();
    let wl = wulff_scan(&cfg, 16, 8.0, 8.0).unwrap();
    println!("crit10 wall={:.1}s pass={} calib={:.4}", t0.elapsed().as_secs_f64(), wl.pass, wl.calibration);
    for r in &wl.residuals { println!("  {}: v={:.3e} b={:.3e} {}", r.name, r.value, r.bound, r.pass); }
    println!("  values: {:?}", wl.table.values.iter().map(|v| (v * 1000.0).round() / 1000.0).collect::<Vec<_>>());
}
