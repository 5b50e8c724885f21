//! Sparse polynomial chaos fitting by cross-validated LASSO.
//!
//! The crate solves `min ||Ax - y||^2 + lambda ||x||_1` with ADMM, proximal
//! gradient (Barzilai-Borwein steps) or coordinate descent, chooses
//! `lambda` by K-fold cross-validation over a grid, and decides when to stop
//! collecting samples by watching the slope of the log CV error.
//!
//! * [`pce`]: total-order Hermite/Legendre bases and regression systems
//! * [`solvers`]: LASSO solvers, OLS and a KKT certificate
//! * [`cross_validation`]: K-fold CV error and lambda selection
//! * [`stop_sampling`]: stop-sampling rule and the adaptive driver
//! * [`experiments`]: synthetic benchmarks, error metrics, phase diagrams
//! * [`cli`]: the `chaosfit` command-line front end

pub mod cli;
pub mod cross_validation;
pub mod error;
pub mod experiments;
pub mod io;
pub mod pce;
pub mod sampling;
pub mod solvers;
pub mod stop_sampling;

pub use error::{Error, Result};
pub use sampling::RandomStream;
pub use solvers::{LinearSystem, Method, SolverConfig, SolverSolution};
