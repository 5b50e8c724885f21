//! Grow the sample set in batches until the stop-sampling rule fires, for a
//! Genz exponential in five Gaussian inputs.
//!
//!     cargo run --release --example adaptive_sampling

use chaosfit::cross_validation::default_lambda_grid;
use chaosfit::experiments::{genz_exponential, PceModelSource, PceSystemBuilder};
use chaosfit::pce::{BasisSpec, Family};
use chaosfit::stop_sampling::{run_adaptive, StopParams};
use chaosfit::{RandomStream, SolverConfig};

fn main() -> chaosfit::Result<()> {
    let a = [1.0, 0.0, 0.0, 0.25, 0.2];
    let spec = BasisSpec::uniform(Family::HermiteGaussian, 5, 4)?;
    let builder = PceSystemBuilder::total_order(spec.clone())?;
    let columns = builder.index_set().len() - 1;
    let mut oracle = PceModelSource::new(
        spec,
        |xi: &[f64]| genz_exponential(&a, xi),
        RandomStream::new(3, 0),
    );

    let params = StopParams::for_columns(columns);
    println!(
        "{columns} columns, batches of {}, budget {}",
        params.delta_m, params.m_max
    );
    let outcome = run_adaptive(
        &mut oracle,
        &builder,
        &default_lambda_grid(),
        20,
        &params,
        &SolverConfig::admm(),
        &RandomStream::new(3, 1),
    )?;

    println!("{:>5} {:>11} {:>11} {:>11}", "m", "e*", "lambda*", "slope");
    for r in outcome.history.records() {
        let slope = r
            .slope_estimate
            .map_or(String::from("-"), |s| format!("{s:.4}"));
        println!(
            "{:>5} {:>11.3e} {:>11.3e} {:>11}",
            r.m, r.e_star, r.lambda_star, slope
        );
    }
    let (m, reason) = outcome
        .history
        .decision()
        .expect("the driver always records a decision");
    let nonzero = outcome.solution.x.iter().filter(|v| **v != 0.0).count();
    println!(
        "stopped at m = {m} ({reason}); {nonzero} nonzero coefficients at lambda* = {:.3e}",
        outcome.lambda_star
    );
    Ok(())
}
