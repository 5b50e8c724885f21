use nalgebra::DVector;

use super::{soft_threshold, LinearSystem, SolverConfig};

const ALPHA_MIN: f64 = 1e-30;
const ALPHA_MAX: f64 = 1e30;
const MIN_ITERATIONS: usize = 5;
/// Growth factor for `alpha` when the monotone safeguard rejects a step.
const ETA: f64 = 2.0;

/// Proximal gradient with Barzilai-Borwein step lengths. `alpha` is the
/// inverse step; each iteration takes
/// `x+ = soft(x - grad / alpha, lambda / alpha)` and then resets `alpha` to
/// the BB curvature `2 ||A dx||^2 / ||dx||^2` of the quadratic term.
/// Stops when the relative objective change drops to `tol_rel`.
pub(super) fn solve(
    system: &LinearSystem,
    lambda: f64,
    config: &SolverConfig,
) -> (Vec<f64>, usize, bool) {
    let a = system.a();
    let n = system.cols();
    let l1 = |v: &DVector<f64>| v.iter().map(|t| t.abs()).sum::<f64>();

    let mut x = DVector::<f64>::zeros(n);
    let mut r = -system.y(); // Ax - y
    let mut grad = DVector::zeros(n);
    grad.gemv_tr(2.0, a, &r, 0.0);
    let mut f = r.norm_squared();
    let mut alpha: f64 = 1.0;

    let mut x_new = DVector::zeros(n);
    let mut a_dx = DVector::zeros(system.rows());

    for iter in 1..=config.max_iterations {
        let mut f_new;
        let mut retries = 0;
        loop {
            let kappa = lambda / alpha;
            for i in 0..n {
                x_new[i] = soft_threshold(x[i] - grad[i] / alpha, kappa);
            }
            let dx = &x_new - &x;
            a_dx.gemv(1.0, a, &dx, 0.0);
            f_new = (&r + &a_dx).norm_squared() + lambda * l1(&x_new);
            if !config.monotone || f_new <= f || retries >= 60 {
                break;
            }
            alpha = (alpha * ETA).min(ALPHA_MAX);
            retries += 1;
        }

        let dx = &x_new - &x;
        let dd = dx.norm_squared();
        if dd == 0.0 {
            return (x.as_slice().to_vec(), iter, true);
        }
        alpha = (2.0 * a_dx.norm_squared() / dd).clamp(ALPHA_MIN, ALPHA_MAX);

        x.copy_from(&x_new);
        if iter % 64 == 0 {
            r.gemv(1.0, a, &x, 0.0);
            r -= system.y();
        } else {
            r += &a_dx;
        }
        grad.gemv_tr(2.0, a, &r, 0.0);

        let rel = (f_new - f).abs() / f.abs().max(f64::MIN_POSITIVE);
        f = f_new;
        if iter >= MIN_ITERATIONS && rel <= config.tol_rel {
            return (x.as_slice().to_vec(), iter, true);
        }
    }
    (x.as_slice().to_vec(), config.max_iterations, false)
}
