//! The four solvers on one overdetermined and one underdetermined system.
//!
//!     cargo run --release --example solver_comparison

use chaosfit::solvers::{kkt_violation, lambda_max, solve_ulasso, Method};
use chaosfit::{LinearSystem, RandomStream, SolverConfig};
use nalgebra::{DMatrix, DVector};

fn main() -> chaosfit::Result<()> {
    let mut stream = RandomStream::new(11, 0);
    for (m, n) in [(120, 40), (40, 120)] {
        let a = DMatrix::from_row_slice(m, n, &stream.standard_normal(m * n));
        let mut x_true = vec![0.0; n];
        for j in stream.sample_indices(n, 6) {
            x_true[j] = stream.uniform_symmetric_one();
        }
        let y =
            &a * DVector::from_vec(x_true) + DVector::from_vec(stream.standard_normal(m)) * 0.01;
        let system = LinearSystem::new(a, y)?;
        let lambda = 0.01 * lambda_max(&system);
        println!("{m} x {n}, lambda = {lambda:.4e}");
        println!(
            "  {:<20} {:>14} {:>8} {:>10} {:>10}",
            "solver", "objective", "iters", "KKT", "nonzeros"
        );
        for method in [
            Method::Admm,
            Method::ProxGradBb,
            Method::CoordinateDescent,
            Method::Ols,
        ] {
            if method == Method::Ols && m < n {
                continue;
            }
            let sol = solve_ulasso(&system, lambda, &SolverConfig::for_method(method))?;
            println!(
                "  {:<20} {:>14.8e} {:>8} {:>10.2e} {:>10}",
                method.to_string(),
                sol.objective,
                sol.iterations,
                kkt_violation(&system, lambda, &sol.x),
                sol.x.iter().filter(|v| v.abs() > 1e-8).count()
            );
        }
    }
    Ok(())
}
