use serde::{Deserialize, Serialize};

use super::{solution_error, training_error, validation_error, CaseSpec, TestInstance};
use crate::cross_validation::select_lambda;
use crate::error::{Error, Result};
use crate::io::{fmt_f64, fmt_opt, write_csv};
use crate::sampling::RandomStream;
use crate::solvers::SolverConfig;
use crate::stop_sampling::{should_stop, Decision, SamplingHistory, StopParams, StopReason};

/// Substream labels under the sweep's root stream.
pub(crate) const INSTANCE_STREAM: u64 = 1;
pub(crate) const CV_STREAM: u64 = 2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRecord {
    pub m: usize,
    pub cv_error: f64,
    pub training_error: f64,
    pub validation_error: Option<f64>,
    pub solution_error: Option<f64>,
    pub lambda_star: f64,
    /// True on the record where the stop rule first fires.
    pub stop_flag: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceSweep {
    pub records: Vec<ConvergenceRecord>,
    pub history: SamplingHistory,
}

impl ConvergenceSweep {
    pub fn stop(&self) -> Option<(usize, StopReason)> {
        self.history.decision()
    }

    pub fn record_at(&self, m: usize) -> Option<&ConvergenceRecord> {
        self.records.iter().find(|r| r.m == m)
    }

    /// `m,cv_error,validation_error,solution_error,lambda_star,stop_flag`.
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let rows: Vec<Vec<String>> = self
            .records
            .iter()
            .map(|r| {
                vec![
                    r.m.to_string(),
                    fmt_f64(r.cv_error),
                    fmt_opt(r.validation_error),
                    fmt_opt(r.solution_error),
                    fmt_f64(r.lambda_star),
                    u8::from(r.stop_flag).to_string(),
                ]
            })
            .collect();
        write_csv(
            writer,
            &[
                "m",
                "cv_error",
                "validation_error",
                "solution_error",
                "lambda_star",
                "stop_flag",
            ],
            &rows,
        )
    }
}

/// Errors versus sample size on one fixed instance with nested growth.
///
/// The instance is generated once at the largest `m` from
/// `stream.substream(1)`; each schedule point uses its prefix. CV folds at
/// size `m` come from `stream.substream(2).substream(m)`, matching
/// [`crate::stop_sampling::run_adaptive`] run on the same rows. The stop
/// rule is evaluated in observe-only mode: the sweep records where it would
/// stop (absolute tolerance or slope rebound) and keeps going.
#[allow(clippy::too_many_arguments)]
pub fn convergence_sweep(
    case: &CaseSpec,
    schedule: &[usize],
    lambda_grid: &[f64],
    k: usize,
    config: &SolverConfig,
    params: &StopParams,
    m_validation: usize,
    stream: &RandomStream,
) -> Result<ConvergenceSweep> {
    if schedule.is_empty() || schedule.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument(
            "schedule must be non-empty and ascending".into(),
        ));
    }
    let m_top = *schedule.last().expect("non-empty");
    let full = case.generate(m_top, m_validation, &mut stream.substream(INSTANCE_STREAM))?;
    sweep_instance(&full, schedule, lambda_grid, k, config, params, stream)
}

pub(crate) fn sweep_instance(
    full: &TestInstance,
    schedule: &[usize],
    lambda_grid: &[f64],
    k: usize,
    config: &SolverConfig,
    params: &StopParams,
    stream: &RandomStream,
) -> Result<ConvergenceSweep> {
    let observe = StopParams {
        m_max: usize::MAX,
        ..*params
    };
    let cv_root = stream.substream(CV_STREAM);
    let mut history = SamplingHistory::new();
    let mut records = Vec::with_capacity(schedule.len());
    for &m in schedule {
        let inst = full.prefix(m)?;
        let profile = select_lambda(
            &inst.system,
            lambda_grid,
            k,
            config,
            &mut cv_root.substream(m as u64),
        )?;
        let x = &profile.solution_at_star.x;
        history.push(m, profile.cv_error_star(), profile.lambda_star, params.q)?;
        let mut stop_flag = false;
        if history.decision().is_none() {
            if let Decision::Stop(reason) = should_stop(&history, &observe) {
                history.set_decision(m, reason);
                stop_flag = true;
            }
        }
        records.push(ConvergenceRecord {
            m,
            cv_error: profile.cv_error_star(),
            training_error: training_error(&inst.system, x)?,
            validation_error: inst
                .validation
                .as_ref()
                .map(|_| validation_error(&inst, x))
                .transpose()?,
            solution_error: inst
                .x_true
                .as_ref()
                .map(|_| solution_error(&inst, x))
                .transpose()?,
            lambda_star: profile.lambda_star,
            stop_flag,
        });
    }
    Ok(ConvergenceSweep { records, history })
}
