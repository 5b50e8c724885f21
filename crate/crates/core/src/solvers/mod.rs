//! Unconstrained LASSO solvers.
//!
//! Every solver minimizes `f(x) = ||Ax - y||_2^2 + lambda ||x||_1`, with no
//! one-half on the quadratic term. Thresholds inside the solvers (`lambda/rho`
//! for ADMM, `lambda/2` for coordinate descent) are derived for this scaling,
//! and so is [`lambda_max`].

mod admm;
mod coordinate;
mod ols;
mod prox;

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use admm::AdmmFactor;

/// Regression matrix and observations, plus the mean removed from `y` when
/// the system was centered.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearSystem {
    a: DMatrix<f64>,
    y: DVector<f64>,
    y_offset: f64,
    column_labels: Option<Vec<String>>,
}

impl LinearSystem {
    pub fn new(a: DMatrix<f64>, y: DVector<f64>) -> Result<Self> {
        if a.nrows() == 0 || a.ncols() == 0 {
            return Err(Error::InvalidArgument(format!(
                "system must be at least 1x1, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        if y.len() != a.nrows() {
            return Err(Error::DimensionMismatch {
                what: "observation count",
                expected: a.nrows(),
                actual: y.len(),
            });
        }
        Ok(Self {
            a,
            y,
            y_offset: 0.0,
            column_labels: None,
        })
    }

    pub fn with_offset(mut self, offset: f64) -> Self {
        self.y_offset = offset;
        self
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Self {
        debug_assert_eq!(labels.len(), self.a.ncols());
        self.column_labels = Some(labels);
        self
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn y(&self) -> &DVector<f64> {
        &self.y
    }

    pub fn y_offset(&self) -> f64 {
        self.y_offset
    }

    pub fn column_labels(&self) -> Option<&[String]> {
        self.column_labels.as_deref()
    }

    pub fn rows(&self) -> usize {
        self.a.nrows()
    }

    pub fn cols(&self) -> usize {
        self.a.ncols()
    }

    /// Subsystem made of the given rows, in the given order. Offset and
    /// labels carry over unchanged.
    pub fn select_rows(&self, rows: &[usize]) -> Result<LinearSystem> {
        if rows.is_empty() {
            return Err(Error::InvalidArgument("row selection is empty".into()));
        }
        Ok(LinearSystem {
            a: self.a.select_rows(rows.iter()),
            y: self.y.select_rows(rows.iter()),
            y_offset: self.y_offset,
            column_labels: self.column_labels.clone(),
        })
    }

    /// First `m` rows.
    pub fn prefix(&self, m: usize) -> Result<LinearSystem> {
        let rows: Vec<usize> = (0..m.min(self.rows())).collect();
        self.select_rows(&rows)
    }

    pub fn residual(&self, x: &[f64]) -> DVector<f64> {
        let mut r = self.y.clone();
        r.gemv(1.0, &self.a, &DVector::from_column_slice(x), -1.0);
        r
    }

    fn check_finite(&self) -> Result<()> {
        if !self.a.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("A"));
        }
        if !self.y.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("y"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Admm,
    #[serde(alias = "prox-bb")]
    ProxGradBb,
    #[serde(alias = "cd")]
    CoordinateDescent,
    Ols,
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "admm" => Ok(Method::Admm),
            "prox-bb" | "prox-grad-bb" | "sparsa" => Ok(Method::ProxGradBb),
            "cd" | "coordinate-descent" => Ok(Method::CoordinateDescent),
            "ols" => Ok(Method::Ols),
            other => Err(Error::InvalidArgument(format!("unknown solver '{other}'"))),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Admm => "admm",
            Method::ProxGradBb => "prox-bb",
            Method::CoordinateDescent => "cd",
            Method::Ols => "ols",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub method: Method,
    /// ADMM augmented-Lagrangian penalty.
    pub rho: f64,
    /// ADMM over-relaxation, in `[1, 2)`.
    pub alpha: f64,
    pub max_iterations: usize,
    pub tol_abs: f64,
    pub tol_rel: f64,
    /// Proximal gradient only: reject steps that raise the objective.
    pub monotone: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self::admm()
    }
}

impl SolverConfig {
    pub fn admm() -> Self {
        Self {
            method: Method::Admm,
            rho: 1.0,
            alpha: 1.0,
            max_iterations: 1000,
            tol_abs: 1e-4,
            tol_rel: 1e-2,
            monotone: false,
        }
    }

    pub fn prox_bb() -> Self {
        Self {
            method: Method::ProxGradBb,
            max_iterations: 1000,
            tol_abs: 0.0,
            tol_rel: 1e-8,
            ..Self::admm()
        }
    }

    /// Settings for verification duty: run until coordinates settle to 1e-10.
    pub fn coordinate_descent() -> Self {
        Self {
            method: Method::CoordinateDescent,
            max_iterations: 100_000,
            tol_abs: 1e-10,
            tol_rel: 0.0,
            ..Self::admm()
        }
    }

    pub fn ols() -> Self {
        Self {
            method: Method::Ols,
            ..Self::admm()
        }
    }

    pub fn for_method(method: Method) -> Self {
        match method {
            Method::Admm => Self::admm(),
            Method::ProxGradBb => Self::prox_bb(),
            Method::CoordinateDescent => Self::coordinate_descent(),
            Method::Ols => Self::ols(),
        }
    }

    pub fn with_tolerances(mut self, tol_abs: f64, tol_rel: f64) -> Self {
        self.tol_abs = tol_abs;
        self.tol_rel = tol_rel;
        self
    }

    pub fn with_max_iterations(mut self, max_iterations: usize) -> Self {
        self.max_iterations = max_iterations;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "rho must be positive, got {}",
                self.rho
            )));
        }
        if !(1.0..2.0).contains(&self.alpha) {
            return Err(Error::InvalidArgument(format!(
                "alpha must lie in [1, 2), got {}",
                self.alpha
            )));
        }
        if self.tol_abs < 0.0 || self.tol_rel < 0.0 {
            return Err(Error::InvalidArgument(
                "tolerances must be non-negative".into(),
            ));
        }
        if self.max_iterations == 0 && self.method != Method::Ols {
            return Err(Error::InvalidArgument(
                "max_iterations must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    ResidualTolerance,
    MaxIterations,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverSolution {
    pub x: Vec<f64>,
    /// `||Ax - y||^2 + lambda ||x||_1` at `x`.
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub termination: Termination,
    /// Set for `lambda = 0` on an underdetermined system, where the
    /// minimizer is not unique.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub non_unique: bool,
}

impl SolverSolution {
    fn finish(
        system: &LinearSystem,
        lambda: f64,
        x: Vec<f64>,
        iterations: usize,
        converged: bool,
    ) -> Self {
        let objective = objective(system, lambda, &x);
        Self {
            x,
            objective,
            iterations,
            converged,
            termination: if converged {
                Termination::ResidualTolerance
            } else {
                Termination::MaxIterations
            },
            non_unique: lambda == 0.0 && system.rows() < system.cols(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.x.iter().all(|&v| v == 0.0)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

pub fn soft_threshold(v: f64, kappa: f64) -> f64 {
    if v > kappa {
        v - kappa
    } else if v < -kappa {
        v + kappa
    } else {
        0.0
    }
}

fn inf_norm(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Smallest lambda at which the zero vector is optimal: `2 ||A^T y||_inf`.
pub fn lambda_max(system: &LinearSystem) -> f64 {
    2.0 * inf_norm(&system.a().tr_mul(system.y()))
}

pub fn objective(system: &LinearSystem, lambda: f64, x: &[f64]) -> f64 {
    let r = system.residual(x);
    r.norm_squared() + lambda * x.iter().map(|v| v.abs()).sum::<f64>()
}

/// Largest breach of the subgradient optimality conditions at `x`; zero
/// exactly at a global minimizer.
pub fn kkt_violation(system: &LinearSystem, lambda: f64, x: &[f64]) -> f64 {
    let r = system.residual(x);
    let g = system.a().tr_mul(&r) * 2.0;
    g.iter()
        .zip(x)
        .map(|(&gi, &xi)| {
            if xi != 0.0 {
                (gi + lambda * xi.signum()).abs()
            } else {
                (gi.abs() - lambda).max(0.0)
            }
        })
        .fold(0.0, f64::max)
}

enum Backend {
    Admm(AdmmFactor),
    Prox,
    Coordinate(Vec<f64>),
    Ols(ols::OlsFactor),
}

/// A system paired with whatever the configured method can reuse across
/// lambda values (ADMM factorization, column norms, QR).
pub struct PreparedSolver<'a> {
    system: &'a LinearSystem,
    config: SolverConfig,
    aty: DVector<f64>,
    lambda_max: f64,
    backend: Backend,
}

impl<'a> PreparedSolver<'a> {
    pub fn new(system: &'a LinearSystem, config: SolverConfig) -> Result<Self> {
        config.validate()?;
        system.check_finite()?;
        let aty = system.a().tr_mul(system.y());
        let lambda_max = 2.0 * inf_norm(&aty);
        let backend = match config.method {
            Method::Admm => Backend::Admm(AdmmFactor::new(system.a(), config.rho)?),
            Method::ProxGradBb => Backend::Prox,
            Method::CoordinateDescent => {
                Backend::Coordinate(system.a().column_iter().map(|c| c.norm_squared()).collect())
            }
            Method::Ols => Backend::Ols(ols::OlsFactor::new(system.a())?),
        };
        Ok(Self {
            system,
            config,
            aty,
            lambda_max,
            backend,
        })
    }

    pub fn system(&self) -> &LinearSystem {
        self.system
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambda_max
    }

    pub fn solve(&self, lambda: f64) -> Result<SolverSolution> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "lambda must be finite and non-negative, got {lambda}"
            )));
        }
        if let Backend::Ols(f) = &self.backend {
            let x = f.solve(self.system.y());
            return Ok(SolverSolution::finish(self.system, 0.0, x, 0, true));
        }
        let n = self.system.cols();
        // Zero is optimal here; the KKT conditions hold exactly.
        if lambda >= self.lambda_max {
            return Ok(SolverSolution::finish(
                self.system,
                lambda,
                vec![0.0; n],
                0,
                true,
            ));
        }
        let (x, iterations, converged) = match &self.backend {
            Backend::Admm(f) => admm::solve(self.system, &self.aty, f, lambda, &self.config),
            Backend::Prox => prox::solve(self.system, lambda, &self.config),
            Backend::Coordinate(col_sq) => {
                coordinate::solve(self.system, col_sq, lambda, &self.config)
            }
            Backend::Ols(_) => unreachable!(),
        };
        if !x.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("solution").at_lambda(lambda));
        }
        Ok(SolverSolution::finish(
            self.system,
            lambda,
            x,
            iterations,
            converged,
        ))
    }
}

pub fn solve_ulasso(
    system: &LinearSystem,
    lambda: f64,
    config: &SolverConfig,
) -> Result<SolverSolution> {
    PreparedSolver::new(system, *config)?.solve(lambda)
}

/// Least squares through a Householder QR. Requires `m >= n` and full
/// column rank.
pub fn solve_ols(system: &LinearSystem) -> Result<SolverSolution> {
    solve_ulasso(system, 0.0, &SolverConfig::ols())
}
