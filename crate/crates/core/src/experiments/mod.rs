//! Synthetic benchmark cases, error metrics, convergence sweeps and
//! phase-transition diagrams.

mod generators;
mod phase;
mod sources;
pub(crate) mod sweep;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solvers::LinearSystem;

pub use generators::{
    gen_gaussian_instance, gen_genz_instance, gen_random_pce_instance, genz_exponential, CaseSpec,
};
pub use phase::{
    phase_diagram, phase_trials, summarize_phase, Ensemble, NodeTrials, PhaseDiagramResult,
    PhaseDiagramSpec, PhaseMetric, PhaseNode, TrialRecord,
};
pub use sources::{InstanceRows, PceModelSource, PceSystemBuilder};
pub use sweep::{convergence_sweep, ConvergenceRecord, ConvergenceSweep};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GeneratorTag {
    GaussianRandom,
    RandomPce,
    GenzExponential,
    External,
}

/// Held-out rows with their raw (uncentered) observations.
#[derive(Clone, Debug, PartialEq)]
pub struct ValidationSet {
    pub a: DMatrix<f64>,
    pub y: DVector<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TestInstance {
    pub system: LinearSystem,
    pub x_true: Option<Vec<f64>>,
    pub validation: Option<ValidationSet>,
    pub generator: GeneratorTag,
    raw_y: DVector<f64>,
    centered: bool,
}

impl TestInstance {
    /// Wraps an external system. `raw_y` is `system.y()` plus its offset.
    pub fn new(
        system: LinearSystem,
        x_true: Option<Vec<f64>>,
        validation: Option<ValidationSet>,
        generator: GeneratorTag,
    ) -> Result<Self> {
        if let Some(x) = &x_true {
            if x.len() != system.cols() {
                return Err(Error::DimensionMismatch {
                    what: "true solution length",
                    expected: system.cols(),
                    actual: x.len(),
                });
            }
        }
        if let Some(v) = &validation {
            if v.a.ncols() != system.cols() || v.a.nrows() != v.y.len() {
                return Err(Error::DimensionMismatch {
                    what: "validation block columns",
                    expected: system.cols(),
                    actual: v.a.ncols(),
                });
            }
        }
        let centered = system.y_offset() != 0.0;
        let raw_y = system.y().add_scalar(system.y_offset());
        Ok(Self {
            system,
            x_true,
            validation,
            generator,
            raw_y,
            centered,
        })
    }

    pub(crate) fn centered_from_raw(
        a: DMatrix<f64>,
        raw_y: DVector<f64>,
        x_true: Option<Vec<f64>>,
        validation: Option<ValidationSet>,
        generator: GeneratorTag,
        labels: Option<Vec<String>>,
    ) -> Result<Self> {
        let offset = raw_y.mean();
        let mut system = LinearSystem::new(a, raw_y.add_scalar(-offset))?.with_offset(offset);
        if let Some(l) = labels {
            system = system.with_labels(l);
        }
        Ok(Self {
            system,
            x_true,
            validation,
            generator,
            raw_y,
            centered: true,
        })
    }

    pub fn rows(&self) -> usize {
        self.system.rows()
    }

    pub fn cols(&self) -> usize {
        self.system.cols()
    }

    /// The instance restricted to its first `m` rows. Centered instances are
    /// re-centered on the retained observations.
    pub fn prefix(&self, m: usize) -> Result<TestInstance> {
        let m = m.min(self.rows());
        let mut system = self.system.prefix(m)?;
        let raw_y = self.raw_y.rows(0, m).into_owned();
        if self.centered {
            let offset = raw_y.mean();
            let a = system.a().clone();
            let labels = system.column_labels().map(<[String]>::to_vec);
            system = LinearSystem::new(a, raw_y.add_scalar(-offset))?.with_offset(offset);
            if let Some(l) = labels {
                system = system.with_labels(l);
            }
        }
        Ok(TestInstance {
            system,
            x_true: self.x_true.clone(),
            validation: self.validation.clone(),
            generator: self.generator,
            raw_y,
            centered: self.centered,
        })
    }

    /// Adds i.i.d. Gaussian noise of standard deviation `std` to the training
    /// observations. Validation data stay noiseless.
    pub fn with_noise(
        mut self,
        std: f64,
        stream: &mut crate::sampling::RandomStream,
    ) -> Result<Self> {
        if std == 0.0 {
            return Ok(self);
        }
        for v in self.raw_y.iter_mut() {
            *v += std * stream.normal();
        }
        let offset = if self.centered {
            self.raw_y.mean()
        } else {
            0.0
        };
        let a = self.system.a().clone();
        let labels = self.system.column_labels().map(<[String]>::to_vec);
        let mut system = LinearSystem::new(a, self.raw_y.add_scalar(-offset))?.with_offset(offset);
        if let Some(l) = labels {
            system = system.with_labels(l);
        }
        self.system = system;
        Ok(self)
    }
}

fn ratio(num: f64, den: f64, what: &'static str) -> Result<f64> {
    if den == 0.0 {
        return Err(Error::ZeroDenominator(what));
    }
    Ok(num / den)
}

/// `||Ax - y|| / ||y||`.
pub fn training_error(system: &LinearSystem, x: &[f64]) -> Result<f64> {
    check_len(system, x)?;
    ratio(
        system.residual(x).norm(),
        system.y().norm(),
        "training error",
    )
}

/// `||A_V x - y_V|| / ||y_V||`, with both sides shifted by the training
/// offset when the system is centered.
pub fn validation_error(instance: &TestInstance, x: &[f64]) -> Result<f64> {
    check_len(&instance.system, x)?;
    let v = instance
        .validation
        .as_ref()
        .ok_or(Error::Missing("validation set"))?;
    let offset = instance.system.y_offset();
    let target = v.y.add_scalar(-offset);
    let mut r = target.clone();
    r.gemv(1.0, &v.a, &DVector::from_column_slice(x), -1.0);
    ratio(r.norm(), target.norm(), "validation error")
}

/// `||x - x*|| / ||x*||`.
pub fn solution_error(instance: &TestInstance, x: &[f64]) -> Result<f64> {
    check_len(&instance.system, x)?;
    let truth = instance
        .x_true
        .as_ref()
        .ok_or(Error::Missing("true solution"))?;
    let diff: f64 = x
        .iter()
        .zip(truth)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();
    let norm: f64 = truth.iter().map(|v| v * v).sum::<f64>().sqrt();
    ratio(diff, norm, "solution error")
}

fn check_len(system: &LinearSystem, x: &[f64]) -> Result<()> {
    if x.len() != system.cols() {
        return Err(Error::DimensionMismatch {
            what: "solution length",
            expected: system.cols(),
            actual: x.len(),
        });
    }
    Ok(())
}
