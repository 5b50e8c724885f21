//! K-fold cross-validation error and grid search over lambda.
//!
//! For each fold `k` the LASSO is solved on the other folds' rows and the
//! held-out residual `R_k = ||A_k x_{~k} - y_k||` is recorded. The CV error
//! is `sqrt(sum_k R_k^2) / ||y||`. The denominator is accumulated fold by
//! fold in the same order as the residuals, so a grid point whose fold
//! solutions are all zero scores exactly 1.0.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::training_error;
use crate::io::{fmt_f64, write_csv};
use crate::sampling::RandomStream;
use crate::solvers::{LinearSystem, PreparedSolver, SolverConfig, SolverSolution};

/// Default lambda grid: 15 log-spaced points on [1e-4, 1e4].
pub fn default_lambda_grid() -> Vec<f64> {
    log_grid(1e-4, 1e4, 15)
}

/// `count` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.log10(), hi.log10());
            (0..count)
                .map(|i| {
                    if i == 0 {
                        lo
                    } else if i + 1 == count {
                        hi
                    } else {
                        10f64.powf(a + (b - a) * i as f64 / (count - 1) as f64)
                    }
                })
                .collect()
        }
    }
}

/// Drops grid points above `lambda_max` and appends `lambda_max` itself if
/// anything was dropped, so the zero solution stays on the grid.
pub fn clip_grid(grid: &[f64], lambda_max: f64) -> Vec<f64> {
    let mut out: Vec<f64> = grid.iter().copied().filter(|&l| l <= lambda_max).collect();
    if out.len() < grid.len() && lambda_max > 0.0 {
        out.push(lambda_max);
    }
    out
}

/// Assignment of each row to one of `k` folds.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    assignments: Vec<usize>,
    k: usize,
}

impl FoldPlan {
    pub fn new(assignments: Vec<usize>, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("fold count must be positive".into()));
        }
        let mut sizes = vec![0usize; k];
        for &f in &assignments {
            if f >= k {
                return Err(Error::InvalidArgument(format!(
                    "fold id {f} out of range 0..{k}"
                )));
            }
            sizes[f] += 1;
        }
        if sizes.contains(&0) {
            return Err(Error::InvalidArgument(
                "every fold must be non-empty".into(),
            ));
        }
        Ok(Self { assignments, k })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    pub fn assignments(&self) -> &[usize] {
        &self.assignments
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.assignments {
            sizes[f] += 1;
        }
        sizes
    }

    /// Held-out rows of `fold`, ascending.
    pub fn validation_rows(&self, fold: usize) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.assignments[i] == fold)
            .collect()
    }

    /// Rows used for training when `fold` is held out, ascending.
    pub fn training_rows(&self, fold: usize) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.assignments[i] != fold)
            .collect()
    }

    pub fn is_leave_one_out(&self) -> bool {
        self.k == self.len()
    }
}

/// Random near-equal partition of `m` rows into `k` folds; the first
/// `m mod k` folds get one extra row. Falls back to leave-one-out when
/// `k >= m`.
pub fn kfold_partition(m: usize, k: usize, stream: &mut RandomStream) -> Result<FoldPlan> {
    if m < 2 {
        return Err(Error::InvalidArgument(format!(
            "cross-validation needs m >= 2, got {m}"
        )));
    }
    if k < 2 {
        return Err(Error::InvalidArgument(format!(
            "fold count must be >= 2, got {k}"
        )));
    }
    let k = k.min(m);
    let perm = stream.permutation(m);
    let (base, extra) = (m / k, m % k);
    let mut assignments = vec![0; m];
    let mut pos = 0;
    for fold in 0..k {
        let size = base + usize::from(fold < extra);
        for &row in &perm[pos..pos + size] {
            assignments[row] = fold;
        }
        pos += size;
    }
    FoldPlan::new(assignments, k)
}

/// Squared held-out residuals, `[fold][lambda]`, plus the number of reduced
/// solves that stopped at the iteration cap.
struct FoldTable {
    squared: Vec<Vec<f64>>,
    held_out_sq: Vec<f64>,
    unconverged: usize,
}

fn fold_table(
    system: &LinearSystem,
    plan: &FoldPlan,
    grid: &[f64],
    config: &SolverConfig,
) -> Result<FoldTable> {
    if plan.len() != system.rows() {
        return Err(Error::DimensionMismatch {
            what: "fold plan length",
            expected: system.rows(),
            actual: plan.len(),
        });
    }
    let per_fold: Vec<Result<(Vec<f64>, f64, usize)>> = (0..plan.k())
        .into_par_iter()
        .map(|fold| {
            let train_rows = plan.training_rows(fold);
            if train_rows.is_empty() {
                return Err(Error::InvalidArgument(format!(
                    "fold {fold} holds out every row; training subset is empty"
                )));
            }
            let train = system.select_rows(&train_rows)?;
            let held = system.select_rows(&plan.validation_rows(fold))?;
            let solver = PreparedSolver::new(&train, *config)?;
            let mut squared = Vec::with_capacity(grid.len());
            let mut unconverged = 0;
            for &lambda in grid {
                let sol = solver.solve(lambda).map_err(|e| annotate(e, lambda))?;
                unconverged += usize::from(!sol.converged);
                squared.push(held.residual(&sol.x).norm_squared());
            }
            Ok((squared, held.y().norm_squared(), unconverged))
        })
        .collect();
    let mut table = FoldTable {
        squared: Vec::with_capacity(plan.k()),
        held_out_sq: Vec::with_capacity(plan.k()),
        unconverged: 0,
    };
    for r in per_fold {
        let (sq, held, unconv) = r?;
        table.squared.push(sq);
        table.held_out_sq.push(held);
        table.unconverged += unconv;
    }
    Ok(table)
}

fn annotate(e: Error, lambda: f64) -> Error {
    match e {
        e @ Error::AtLambda { .. } => e,
        e => e.at_lambda(lambda),
    }
}

impl FoldTable {
    fn cv_error(&self, j: usize) -> Result<f64> {
        let mut num = 0.0;
        let mut den = 0.0;
        for (row, held) in self.squared.iter().zip(&self.held_out_sq) {
            num += row[j];
            den += held;
        }
        if den == 0.0 {
            return Err(Error::ZeroDenominator("CV error (||y|| = 0)"));
        }
        Ok(num.sqrt() / den.sqrt())
    }
}

/// Normalized K-fold CV error at one lambda.
pub fn cv_error(
    system: &LinearSystem,
    lambda: f64,
    plan: &FoldPlan,
    config: &SolverConfig,
) -> Result<f64> {
    fold_table(system, plan, &[lambda], config)?.cv_error(0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvProfile {
    /// Ascending.
    pub lambda_grid: Vec<f64>,
    pub cv_errors: Vec<f64>,
    pub training_errors: Vec<f64>,
    pub lambda_star: f64,
    pub star_index: usize,
    pub solution_at_star: SolverSolution,
    pub fold_plan: FoldPlan,
    /// Reduced solves that hit the iteration cap; their residuals still count.
    pub unconverged_solves: usize,
}

impl CvProfile {
    pub fn cv_error_star(&self) -> f64 {
        self.cv_errors[self.star_index]
    }

    /// `lambda,cv_error,training_error`, largest lambda first.
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let rows: Vec<Vec<String>> = (0..self.lambda_grid.len())
            .rev()
            .map(|j| {
                vec![
                    fmt_f64(self.lambda_grid[j]),
                    fmt_f64(self.cv_errors[j]),
                    fmt_f64(self.training_errors[j]),
                ]
            })
            .collect();
        write_csv(writer, &["lambda", "cv_error", "training_error"], &rows)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Grid search for the lambda with the smallest CV error. One fold plan is
/// drawn from `stream` and shared by every grid point. Ties go to the larger
/// lambda. The full system is then solved at every grid point for the
/// training errors, and the solve at `lambda_star` is returned.
pub fn select_lambda(
    system: &LinearSystem,
    lambda_grid: &[f64],
    k: usize,
    config: &SolverConfig,
    stream: &mut RandomStream,
) -> Result<CvProfile> {
    if lambda_grid.is_empty() {
        return Err(Error::InvalidArgument("lambda grid is empty".into()));
    }
    if lambda_grid.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
        return Err(Error::InvalidArgument(
            "lambda grid must be positive and finite".into(),
        ));
    }
    let mut grid = lambda_grid.to_vec();
    grid.sort_by(f64::total_cmp);
    grid.dedup();

    let plan = kfold_partition(system.rows(), k, stream)?;
    let table = fold_table(system, &plan, &grid, config)?;
    let cv_errors = (0..grid.len())
        .map(|j| table.cv_error(j))
        .collect::<Result<Vec<_>>>()?;

    let mut star_index = 0;
    for (j, &e) in cv_errors.iter().enumerate() {
        if e <= cv_errors[star_index] {
            star_index = j;
        }
    }

    let solver = PreparedSolver::new(system, *config)?;
    let full: Vec<SolverSolution> = grid
        .par_iter()
        .map(|&lambda| solver.solve(lambda).map_err(|e| annotate(e, lambda)))
        .collect::<Result<_>>()?;
    let training_errors = full
        .iter()
        .map(|s| training_error(system, &s.x))
        .collect::<Result<Vec<_>>>()?;
    let solution_at_star = full.into_iter().nth(star_index).expect("grid is non-empty");

    Ok(CvProfile {
        lambda_star: grid[star_index],
        lambda_grid: grid,
        cv_errors,
        training_errors,
        star_index,
        solution_at_star,
        fold_plan: plan,
        unconverged_solves: table.unconverged,
    })
}
