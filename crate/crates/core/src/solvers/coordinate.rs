use nalgebra::DVector;

use super::{soft_threshold, LinearSystem, SolverConfig};

/// Cyclic coordinate descent with exact 1-D minimization:
/// `x_i <- soft(A_i^T r_{-i}, lambda/2) / ||A_i||^2`. Zero columns keep a
/// zero coefficient. Stops once a full sweep moves no coordinate by more
/// than `tol_abs`.
pub(super) fn solve(
    system: &LinearSystem,
    col_sq: &[f64],
    lambda: f64,
    config: &SolverConfig,
) -> (Vec<f64>, usize, bool) {
    let a = system.a();
    let n = system.cols();
    let half_lambda = 0.5 * lambda;
    let mut x = vec![0.0; n];
    let mut r: DVector<f64> = system.y().clone();

    for sweep in 1..=config.max_iterations {
        let mut max_change: f64 = 0.0;
        for i in 0..n {
            if col_sq[i] == 0.0 {
                continue;
            }
            let col = a.column(i);
            let old = x[i];
            let corr = col.dot(&r) + col_sq[i] * old;
            let new = soft_threshold(corr, half_lambda) / col_sq[i];
            if new != old {
                r.axpy(old - new, &col, 1.0);
                x[i] = new;
                max_change = max_change.max((new - old).abs());
            }
        }
        if max_change <= config.tol_abs {
            return (x, sweep, true);
        }
        if sweep % 64 == 0 {
            r = -system.residual(&x);
        }
    }
    (x, config.max_iterations, false)
}
