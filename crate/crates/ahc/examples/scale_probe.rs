use ahc::medium::MediumSpec;
use ahc::potential::{DoubleWell, TransitionProfile, sigma_1d};
use ahc::solve::{SolverOptions, SigmaProblem, centered_sigma};

fn main() {
    let w = DoubleWell::Quartic;
    let q = TransitionProfile::Tanh;
    for h in [4.0, 8.0, 12.0] {
        for gt in [1e-4, 1e-5] {
            let opts = SolverOptions { grad_tol: gt, ..Default::default() };
            let run = |c: f64| {
                let m = MediumSpec::constant(2, c).realize(0).unwrap();
                let prob = SigmaProblem { medium: &m, w: &w, q: &q, opts: &opts, seed: 0 };
                let (s, _) = centered_sigma(&prob, 2, [1.0, 0.0, 0.0], 4.0, h, 0.125, None).unwrap();
                (s.value, s.iters)
            };
            let (v1, i1) = run(1.0);
            let (v2, i2) = run(2.0);
            println!("h={h} gt={gt:.0e}: v1={v1:.6} ({i1} it) v2={v2:.6} ({i2} it) ratio={:.5} rel={:.4e} oracle1={:.6}",
                v2 / v1, (v2 - 2.0*v1).abs() / v2, 4.0*sigma_1d(&w, 1.0));
        }
    }
}
