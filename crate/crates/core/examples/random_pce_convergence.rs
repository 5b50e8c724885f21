//! Errors versus sample size for a 20-sparse random PCE in five Gaussian
//! inputs at total degree 5 (251 columns).
//!
//!     cargo run --release --example random_pce_convergence [seed]

use chaosfit::cross_validation::default_lambda_grid;
use chaosfit::experiments::{convergence_sweep, CaseSpec};
use chaosfit::stop_sampling::StopParams;
use chaosfit::{RandomStream, SolverConfig};

fn main() -> chaosfit::Result<()> {
    let seed = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(0);
    let case = CaseSpec::RandomPce {
        dims: 5,
        degree: 5,
        s: 20,
    };
    let n = case.columns()?;
    let schedule: Vec<usize> = (1..=10).map(|i| 25 * i).collect();
    let sweep = convergence_sweep(
        &case,
        &schedule,
        &default_lambda_grid(),
        20,
        &SolverConfig::admm(),
        &StopParams::for_columns(n),
        1000,
        &RandomStream::new(seed, 0),
    )?;
    println!(
        "{:>5} {:>11} {:>11} {:>11} {:>10}",
        "m", "cv", "validation", "solution", "lambda*"
    );
    for r in &sweep.records {
        println!(
            "{:>5} {:>11.3e} {:>11.3e} {:>11.3e} {:>10.3e}{}",
            r.m,
            r.cv_error,
            r.validation_error.unwrap_or(f64::NAN),
            r.solution_error.unwrap_or(f64::NAN),
            r.lambda_star,
            if r.stop_flag { "  <- stop" } else { "" }
        );
    }
    Ok(())
}
