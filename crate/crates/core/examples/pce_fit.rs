//! Fit a sparse PCE to a model with one Gaussian and two uniform inputs, then
//! check the surrogate on fresh points.
//!
//!     cargo run --release --example pce_fit

use chaosfit::cross_validation::{default_lambda_grid, select_lambda};
use chaosfit::pce::{
    assemble_regression_system, predict, sample_germ, BasisSpec, Family, SampleSet,
};
use chaosfit::{RandomStream, SolverConfig};
use nalgebra::DVector;

fn model(xi: &[f64]) -> f64 {
    (0.7 * xi[0]).exp() * (1.0 + 0.4 * xi[1]) + 0.3 * xi[2] * xi[2] * xi[1]
}

fn main() -> chaosfit::Result<()> {
    let spec = BasisSpec::new(
        vec![
            Family::HermiteGaussian,
            Family::LegendreUniform,
            Family::LegendreUniform,
        ],
        5,
    )?;
    let idx = spec.total_order_index_set()?;
    let mut stream = RandomStream::new(7, 0);

    let points = sample_germ(&spec, 80, &mut stream);
    let y = DVector::from_iterator(
        points.nrows(),
        points.row_iter().map(|r| model(&[r[0], r[1], r[2]])),
    );
    let samples = SampleSet::new(points, y)?;
    let system = assemble_regression_system(&spec, &idx, &samples, true)?;

    let profile = select_lambda(
        &system,
        &default_lambda_grid(),
        20,
        &SolverConfig::admm(),
        &mut stream.substream(1),
    )?;
    let x = &profile.solution_at_star.x;
    println!("{} samples, {} basis terms", samples.len(), idx.len());
    println!(
        "lambda* = {:.3e}, CV error = {:.3e}",
        profile.lambda_star,
        profile.cv_error_star()
    );

    let labels = system.column_labels().expect("labelled columns");
    let mut order: Vec<usize> = (0..x.len()).filter(|&j| x[j] != 0.0).collect();
    order.sort_by(|&a, &b| x[b].abs().total_cmp(&x[a].abs()));
    println!("{} nonzero coefficients; largest:", order.len());
    println!("  {:<12} {:>12.5}   (mean)", "(0,0,0)", system.y_offset());
    for &j in order.iter().take(8) {
        println!("  {:<12} {:>12.5}", labels[j], x[j]);
    }

    let test = sample_germ(&spec, 2000, &mut stream.substream(2));
    let (mut num, mut den) = (0.0, 0.0);
    let truth: Vec<f64> = test
        .row_iter()
        .map(|r| model(&[r[0], r[1], r[2]]))
        .collect();
    let mean = truth.iter().sum::<f64>() / truth.len() as f64;
    for (row, t) in test.row_iter().zip(&truth) {
        let p = predict(&spec, &idx, x, system.y_offset(), &[row[0], row[1], row[2]])?;
        num += (p - t).powi(2);
        den += (t - mean).powi(2);
    }
    println!(
        "relative error on 2000 fresh points: {:.3e}",
        (num / den).sqrt()
    );
    Ok(())
}
