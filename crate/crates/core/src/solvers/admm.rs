use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use super::{soft_threshold, LinearSystem, SolverConfig};
use crate::error::{Error, Result};

/// Cached factorization for the ADMM x-update `(2 A^T A + rho I) x = q`.
///
/// Wide systems (`m < n`) factor the `m x m` matrix `A A^T + (rho/2) I` and
/// apply the inverse through the matrix-inversion identity
/// `(rho I + 2 A^T A)^{-1} q = (q - A^T (A A^T + rho/2 I)^{-1} A q) / rho`.
/// Tall systems factor the `n x n` matrix directly. Immutable once built.
pub struct AdmmFactor {
    rho: f64,
    a: DMatrix<f64>,
    chol: Cholesky<f64, Dyn>,
    wide: bool,
}

impl AdmmFactor {
    pub fn new(a: &DMatrix<f64>, rho: f64) -> Result<Self> {
        let (m, n) = a.shape();
        let wide = m < n;
        let mut gram = if wide {
            let mut g = a * a.transpose();
            for i in 0..m {
                g[(i, i)] += 0.5 * rho;
            }
            g
        } else {
            let mut g = a.tr_mul(a) * 2.0;
            for i in 0..n {
                g[(i, i)] += rho;
            }
            g
        };
        // Symmetrize against round-off in the product.
        gram = (&gram + gram.transpose()) * 0.5;
        let chol = Cholesky::new(gram)
            .ok_or_else(|| Error::Factorization("ADMM system is not positive definite".into()))?;
        Ok(Self {
            rho,
            a: a.clone(),
            chol,
            wide,
        })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Overwrites `q` with `(2 A^T A + rho I)^{-1} q`. `work` must have
    /// length `m`.
    fn solve_in_place(&self, q: &mut DVector<f64>, work: &mut DVector<f64>) {
        if self.wide {
            work.gemv(1.0, &self.a, q, 0.0);
            self.chol.solve_mut(work);
            q.gemv_tr(-1.0, &self.a, work, 1.0);
            *q /= self.rho;
        } else {
            self.chol.solve_mut(q);
        }
    }
}

/// Scaled-form ADMM on the splitting `x - z = 0`. Returns `(z, iterations,
/// converged)`; `z` is the sparse iterate.
pub(super) fn solve(
    system: &LinearSystem,
    aty: &DVector<f64>,
    factor: &AdmmFactor,
    lambda: f64,
    config: &SolverConfig,
) -> (Vec<f64>, usize, bool) {
    let n = system.cols();
    let rho = factor.rho;
    let alpha = config.alpha;
    let kappa = lambda / rho;
    let sqrt_n = (n as f64).sqrt();

    let two_aty = aty * 2.0;
    let mut x = DVector::zeros(n);
    let mut z = DVector::<f64>::zeros(n);
    let mut u = DVector::<f64>::zeros(n);
    let mut z_old = DVector::zeros(n);
    let mut x_hat = DVector::zeros(n);
    let mut work = DVector::zeros(system.rows());

    for iter in 1..=config.max_iterations {
        // x = (2 A^T A + rho I)^{-1} (2 A^T y + rho (z - u))
        x.copy_from(&z);
        x -= &u;
        x *= rho;
        x += &two_aty;
        factor.solve_in_place(&mut x, &mut work);

        x_hat.copy_from(&x);
        x_hat *= alpha;
        x_hat.axpy(1.0 - alpha, &z, 1.0);

        z_old.copy_from(&z);
        for i in 0..n {
            z[i] = soft_threshold(x_hat[i] + u[i], kappa);
        }
        u += &x_hat;
        u -= &z;

        let r_norm = x.metric_distance(&z);
        let s_norm = rho * z.metric_distance(&z_old);
        let eps_pri = sqrt_n * config.tol_abs + config.tol_rel * x.norm().max(z.norm());
        let eps_dual = sqrt_n * config.tol_abs + config.tol_rel * rho * u.norm();
        if r_norm < eps_pri && s_norm < eps_dual {
            return (z.as_slice().to_vec(), iter, true);
        }
    }
    (z.as_slice().to_vec(), config.max_iterations, false)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_inverse(m: usize, n: usize) {
        let a = DMatrix::from_fn(m, n, |i, j| {
            ((i * 7 + j * 3) % 11) as f64 - 5.0 + 0.1 * i as f64
        });
        let rho = 1.3;
        let f = AdmmFactor::new(&a, rho).unwrap();
        let q = DVector::from_fn(n, |i, _| (i as f64).sin());
        let mut x = q.clone();
        let mut work = DVector::zeros(m);
        f.solve_in_place(&mut x, &mut work);
        let mut lhs = a.tr_mul(&a) * 2.0;
        for i in 0..n {
            lhs[(i, i)] += rho;
        }
        let back = lhs * x;
        assert!((back - q).norm() < 1e-9);
    }

    #[test]
    fn wide_and_tall_updates_agree_with_direct_solve() {
        check_inverse(4, 9);
        check_inverse(9, 4);
        check_inverse(5, 5);
    }
}
