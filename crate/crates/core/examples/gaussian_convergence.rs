//! Errors versus sample size for a Gaussian random matrix with a 25-sparse
//! solution (n = 500), with the would-stop point of the stop-sampling rule.
//!
//!     cargo run --release --example gaussian_convergence [seed]

use std::time::Instant;

use chaosfit::cross_validation::default_lambda_grid;
use chaosfit::experiments::{convergence_sweep, CaseSpec};
use chaosfit::stop_sampling::StopParams;
use chaosfit::{RandomStream, SolverConfig};

fn main() -> chaosfit::Result<()> {
    let seed = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(2024);
    let case = CaseSpec::Gaussian { n: 500, s: 25 };
    let schedule: Vec<usize> = (1..=10).map(|i| 25 * i).collect();
    let params = StopParams::for_columns(500);
    let start = Instant::now();
    let sweep = convergence_sweep(
        &case,
        &schedule,
        &default_lambda_grid(),
        20,
        &SolverConfig::admm(),
        &params,
        1000,
        &RandomStream::new(seed, 0),
    )?;
    println!(
        "{:>5} {:>12} {:>12} {:>12} {:>10}",
        "m", "cv", "validation", "solution", "lambda*"
    );
    for r in &sweep.records {
        println!(
            "{:>5} {:>12.4e} {:>12.4e} {:>12.4e} {:>10.3e}{}",
            r.m,
            r.cv_error,
            r.validation_error.unwrap_or(f64::NAN),
            r.solution_error.unwrap_or(f64::NAN),
            r.lambda_star,
            if r.stop_flag { "  <- stop" } else { "" }
        );
    }
    match sweep.stop() {
        Some((m, reason)) => println!("stop at m = {m} ({reason})   ({:.1?})", start.elapsed()),
        None => println!("no stop within the schedule   ({:.1?})", start.elapsed()),
    }
    Ok(())
}
