use fgl::solver::{solve, DirichletProblem, DomainShape, Init, SolverConfig, SourceTerm};
use fgl::YoungFunction;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() {
    let problem = DirichletProblem {
        yf: YoungFunction::power(3.0).unwrap(),
        domain: DomainShape::Interval { a: -1.0, b: 1.0 },
        s: 0.5,
        source: SourceTerm::constant(1.0),
    };

    for nx in [33usize, 49, 50, 51, 65] {
        let cfg = SolverConfig { nx, grad_tol: 1e-9, max_iters: 50_000, ..SolverConfig::default() };
        let sol = solve(&problem, &cfg).unwrap();
        let n_free = sol.free.iter().filter(|&&f| f).count();
        println!(
            "nx={nx} zero-init: conv={} iters={} gn={:.3e} sup={:.6e} free={n_free}",
            sol.converged, sol.iterations, sol.final_grad_norm, sol.sup_norm()
        );
    }

    let base = SolverConfig { nx: 65, grad_tol: 1e-9, max_iters: 50_000, ..SolverConfig::default() };
    let a = solve(&problem, &base).unwrap();

    let warm: Vec<f64> = (0..65)
        .map(|i| {
            let x = -1.0 + 2.0 * i as f64 / 64.0;
            0.4 * (1.0 - x * x).max(0.0)
        })
        .collect();
    let sol = solve(&problem, &SolverConfig { init: Init::Given(warm), ..base.clone() }).unwrap();
    let gap = a
        .u
        .values
        .iter()
        .zip(&sol.u.values)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0f64, f64::max);
    println!(
        "nx=65 warm-init: conv={} iters={} gn={:.3e} gap-to-zero-init={:.3e}",
        sol.converged, sol.iterations, sol.final_grad_norm, gap
    );

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut init = vec![0.0; 65];
    for (i, v) in init.iter_mut().enumerate() {
        if a.free[i] {
            *v = rng.gen_range(-0.3..0.3);
        }
    }
    let sol = solve(&problem, &SolverConfig { init: Init::Given(init), ..base.clone() }).unwrap();
    let gap = a
        .u
        .values
        .iter()
        .zip(&sol.u.values)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0f64, f64::max);
    println!(
        "nx=65 rand-init: conv={} iters={} gn={:.3e} gap-to-zero-init={:.3e}",
        sol.converged, sol.iterations, sol.final_grad_norm, gap
    );

    let c33 = SolverConfig { nx: 33, grad_tol: 1e-7, ..SolverConfig::default() };
    let s33 = solve(&problem, &c33).unwrap();
    let c50 = SolverConfig { nx: 50, grad_tol: 1e-7, ..SolverConfig::default() };
    let s50 = solve(&problem, &c50).unwrap();
    println!(
        "sup33={:.6} sup50={:.6} rel gap={:.4}",
        s33.sup_norm(),
        s50.sup_norm(),
        (s33.sup_norm() - s50.sup_norm()).abs() / s50.sup_norm()
    );
}
