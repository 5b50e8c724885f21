//! CV error of Hermite PCE fits to the Genz exponential for total degrees 3
//! and 5, for the decaying coefficients `a_j = 1/j` and for a sparser variant
//! with `a_2 = a_3 = 0`. Least squares is shown once the system is
//! overdetermined.
//!
//!     cargo run --release --example genz_degrees

use chaosfit::cross_validation::default_lambda_grid;
use chaosfit::experiments::{convergence_sweep, validation_error, CaseSpec};
use chaosfit::solvers::solve_ols;
use chaosfit::stop_sampling::StopParams;
use chaosfit::{RandomStream, SolverConfig};

fn main() -> chaosfit::Result<()> {
    let schedule = [50, 100, 200, 300, 400, 600, 790];
    let root = RandomStream::new(0, 0);
    for (name, a) in [
        (
            "decaying",
            vec![1.0, 1.0 / 2.0, 1.0 / 3.0, 1.0 / 4.0, 1.0 / 5.0],
        ),
        ("sparse", vec![1.0, 0.0, 0.0, 1.0 / 4.0, 1.0 / 5.0]),
    ] {
        for degree in [3, 5] {
            let case = CaseSpec::Genz {
                dims: 5,
                degree,
                coefficients: a.clone(),
            };
            let n = case.columns()?;
            let sweep = convergence_sweep(
                &case,
                &schedule,
                &default_lambda_grid(),
                20,
                &SolverConfig::admm(),
                &StopParams::for_columns(n),
                1000,
                &root,
            )?;
            let full = case.generate(790, 1000, &mut root.substream(1))?;
            println!("{name}, p = {degree} (n = {n})");
            println!(
                "  {:>5} {:>11} {:>11} {:>11}",
                "m", "cv", "validation", "ols val"
            );
            for r in &sweep.records {
                let ols = if r.m > n {
                    let inst = full.prefix(r.m)?;
                    format!(
                        "{:.3e}",
                        validation_error(&inst, &solve_ols(&inst.system)?.x)?
                    )
                } else {
                    "-".into()
                };
                println!(
                    "  {:>5} {:>11.3e} {:>11.3e} {:>11}{}",
                    r.m,
                    r.cv_error,
                    r.validation_error.unwrap_or(f64::NAN),
                    ols,
                    if r.stop_flag { "  <- stop" } else { "" }
                );
            }
        }
    }
    Ok(())
}
