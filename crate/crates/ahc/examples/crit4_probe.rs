use ahc::homogenize::{h_sweep, SweepConfig};
use ahc::medium::MediumSpec;
use ahc::potential::{DoubleWell, TransitionProfile};
use ahc::solve::SolverOptions;
use std::time::Instant;

fn main() {
    let w = DoubleWell::Quartic;
    let q = TransitionProfile::Tanh;
    let spec = MediumSpec::checkerboard(2, &[1.0, 2.0], 1.0, 4.0);
    for gt in [1e-4, 1e-6] {
        let opts = SolverOptions { grad_tol: gt, max_iters: 20000, ..Default::default() };
        let seeds: Vec<u64> = (1..=16).collect();
        let cfg = SweepConfig {
            dim: 2, direction: [0.0, 1.0, 0.0], spacing: 0.1,
            medium: &spec, w: &w, q: &q, opts: &opts, seeds: &seeds,
        };
        let t0 = Instant::now();
        let res = h_sweep(&cfg, 8.0, &[2.0, 4.0, 8.0]).unwrap();
        println!("grad_tol={gt:.0e}  wall={:.1}s", t0.elapsed().as_secs_f64());
        for r in &res.residuals {
            println!("  {}: value={:.4e} bound={:.4e} pass={}", r.name, r.value, r.bound, r.pass);
        }
        let max_it = res.samples.iter().map(|s| s.iters).max().unwrap();
        println!("  max iters = {max_it}");
    }
}
