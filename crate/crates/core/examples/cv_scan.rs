//! Training and CV error over the lambda grid for the 25-sparse Gaussian
//! case, at a size too small to recover the solution and at one past the
//! recovery threshold.
//!
//!     cargo run --release --example cv_scan

use chaosfit::cross_validation::{default_lambda_grid, select_lambda};
use chaosfit::experiments::CaseSpec;
use chaosfit::{RandomStream, SolverConfig};

fn main() -> chaosfit::Result<()> {
    let case = CaseSpec::Gaussian { n: 500, s: 25 };
    let root = RandomStream::new(0, 0);
    let full = case.generate(150, 0, &mut root.substream(1))?;
    for m in [25, 150] {
        let inst = full.prefix(m)?;
        let profile = select_lambda(
            &inst.system,
            &default_lambda_grid(),
            20,
            &SolverConfig::admm(),
            &mut root.substream(2).substream(m as u64),
        )?;
        println!("m = {m}");
        println!("  {:>10} {:>12} {:>12}", "lambda", "cv", "training");
        for j in (0..profile.lambda_grid.len()).rev() {
            let mark = if j == profile.star_index { " *" } else { "" };
            println!(
                "  {:>10.3e} {:>12.4e} {:>12.4e}{mark}",
                profile.lambda_grid[j], profile.cv_errors[j], profile.training_errors[j]
            );
        }
    }
    Ok(())
}
