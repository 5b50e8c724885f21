//! When to stop acquiring samples.
//!
//! After each batch the lambda-optimal CV error `e*(m)` is recorded. The
//! slope of `ln e*` against `m` over the last `q` records is estimated by
//! least squares. Sampling stops when
//!
//! 1. `e*` falls below the absolute tolerance `a`, or
//! 2. `e*` is below the activation level `r` and the current slope has
//!    rebounded to at least `eta` times the steepest (most negative) slope
//!    seen so far, or
//! 3. the next batch would exceed the sample budget.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cross_validation::select_lambda;
use crate::error::{Error, Result};
use crate::io::{fmt_f64, fmt_opt, write_csv};
use crate::sampling::RandomStream;
use crate::solvers::{solve_ulasso, LinearSystem, SolverConfig, SolverSolution};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StopParams {
    pub m0: usize,
    pub delta_m: usize,
    /// Slope window length.
    pub q: usize,
    /// Rebound fraction of the steepest slope.
    pub eta: f64,
    /// The slope rule is active only once `e*` is below this.
    pub r: f64,
    /// Absolute CV error tolerance.
    pub a: f64,
    pub m_max: usize,
}

impl StopParams {
    /// Defaults for a dictionary of `n` columns: `m0 = delta_m = ceil(0.05 n)`
    /// and a budget of `n` samples.
    pub fn for_columns(n: usize) -> Self {
        let step = ((0.05 * n as f64).ceil() as usize).max(2);
        Self {
            m0: step,
            delta_m: step,
            q: 4,
            eta: 0.1,
            r: 0.5,
            a: 1e-4,
            m_max: n.max(step),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.m0 < 2 {
            return bad(format!("m0 must be at least 2, got {}", self.m0));
        }
        if self.delta_m == 0 {
            return bad("delta_m must be positive".into());
        }
        if self.q < 2 {
            return bad(format!("slope window q must be at least 2, got {}", self.q));
        }
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return bad(format!("eta must lie in (0, 1), got {}", self.eta));
        }
        if self.r.is_nan() || self.r <= 0.0 || self.a < 0.0 {
            return bad("r must be positive and a non-negative".into());
        }
        if self.m_max < self.m0 {
            return bad(format!("m_max {} is below m0 {}", self.m_max, self.m0));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    AbsoluteTolerance,
    SlopeRebound,
    BudgetExhausted,
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StopReason::AbsoluteTolerance => "absolute-tolerance",
            StopReason::SlopeRebound => "slope-rebound",
            StopReason::BudgetExhausted => "budget-exhausted",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Decision {
    Continue,
    Stop(StopReason),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplingRecord {
    pub m: usize,
    pub e_star: f64,
    pub lambda_star: f64,
    /// Present once at least `q` records exist.
    pub slope_estimate: Option<f64>,
    /// Running minimum of the slope estimates up to this record.
    pub steepest_slope: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SamplingHistory {
    records: Vec<SamplingRecord>,
    steepest_slope: Option<f64>,
    decision: Option<(usize, StopReason)>,
}

/// Least-squares slope of `y` against `x`.
pub fn slope_estimate(window: &[(f64, f64)]) -> Result<f64> {
    if window.len() < 2 {
        return Err(Error::InvalidArgument(
            "slope needs at least two points".into(),
        ));
    }
    for (i, p) in window.iter().enumerate() {
        if window[..i].iter().any(|q| q.0 == p.0) {
            return Err(Error::InvalidArgument(format!(
                "duplicate abscissa {}",
                p.0
            )));
        }
    }
    let n = window.len() as f64;
    let mx = window.iter().map(|p| p.0).sum::<f64>() / n;
    let my = window.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = window.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = window.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

fn ln_error(e: f64) -> f64 {
    e.max(f64::MIN_POSITIVE).ln()
}

impl SamplingHistory {
    pub fn new() -> Self {
        Self::default()
    }

    /// Rebuilds a history from stored records, recomputing the running
    /// steepest slope from their slope estimates.
    pub fn from_records(records: Vec<SamplingRecord>) -> Result<Self> {
        let mut h = Self::new();
        for mut rec in records {
            if let Some(last) = h.records.last() {
                if rec.m <= last.m {
                    return Err(Error::InvalidArgument("sample sizes must increase".into()));
                }
            }
            if let Some(s) = rec.slope_estimate {
                h.steepest_slope = Some(h.steepest_slope.map_or(s, |t| t.min(s)));
            }
            rec.steepest_slope = h.steepest_slope;
            h.records.push(rec);
        }
        Ok(h)
    }

    /// Appends the result for sample size `m` and updates the slope estimate
    /// from the last `q` records.
    pub fn push(&mut self, m: usize, e_star: f64, lambda_star: f64, q: usize) -> Result<()> {
        if let Some(last) = self.records.last() {
            if m <= last.m {
                return Err(Error::InvalidArgument(format!(
                    "sample size {m} does not exceed previous {}",
                    last.m
                )));
            }
        }
        let mut rec = SamplingRecord {
            m,
            e_star,
            lambda_star,
            slope_estimate: None,
            steepest_slope: self.steepest_slope,
        };
        self.records.push(rec.clone());
        if self.records.len() >= q {
            let window: Vec<(f64, f64)> = self.records[self.records.len() - q..]
                .iter()
                .map(|r| (r.m as f64, ln_error(r.e_star)))
                .collect();
            let s = slope_estimate(&window)?;
            self.steepest_slope = Some(self.steepest_slope.map_or(s, |t| t.min(s)));
            rec.slope_estimate = Some(s);
            rec.steepest_slope = self.steepest_slope;
            *self.records.last_mut().expect("just pushed") = rec;
        }
        Ok(())
    }

    pub fn records(&self) -> &[SamplingRecord] {
        &self.records
    }

    pub fn latest(&self) -> Option<&SamplingRecord> {
        self.records.last()
    }

    pub fn steepest_slope(&self) -> Option<f64> {
        self.steepest_slope
    }

    pub fn decision(&self) -> Option<(usize, StopReason)> {
        self.decision
    }

    pub fn set_decision(&mut self, m: usize, reason: StopReason) {
        self.decision = Some((m, reason));
    }

    /// History truncated to the first `len` records, without a decision.
    pub fn prefix(&self, len: usize) -> SamplingHistory {
        let records = self.records[..len.min(self.records.len())].to_vec();
        let steepest_slope = records.last().and_then(|r| r.steepest_slope);
        SamplingHistory {
            records,
            steepest_slope,
            decision: None,
        }
    }

    /// `m,e_star,lambda_star,slope,steepest_slope,decision`.
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let rows: Vec<Vec<String>> = self
            .records
            .iter()
            .map(|r| {
                let decision = match self.decision {
                    Some((m, reason)) if m == r.m => reason.to_string(),
                    _ => "continue".to_string(),
                };
                vec![
                    r.m.to_string(),
                    fmt_f64(r.e_star),
                    fmt_f64(r.lambda_star),
                    fmt_opt(r.slope_estimate),
                    fmt_opt(r.steepest_slope),
                    decision,
                ]
            })
            .collect();
        write_csv(
            writer,
            &[
                "m",
                "e_star",
                "lambda_star",
                "slope",
                "steepest_slope",
                "decision",
            ],
            &rows,
        )
    }
}

pub fn should_stop(history: &SamplingHistory, params: &StopParams) -> Decision {
    let Some(latest) = history.latest() else {
        return Decision::Continue;
    };
    if latest.e_star < params.a {
        return Decision::Stop(StopReason::AbsoluteTolerance);
    }
    if latest.e_star < params.r && history.records().len() >= params.q {
        if let (Some(current), Some(steepest)) = (latest.slope_estimate, history.steepest_slope()) {
            if steepest < 0.0 && current >= params.eta * steepest {
                return Decision::Stop(StopReason::SlopeRebound);
            }
        }
    }
    if latest.m.saturating_add(params.delta_m) > params.m_max {
        return Decision::Stop(StopReason::BudgetExhausted);
    }
    Decision::Continue
}

/// Runs the outer loop over `m = m0, m0 + delta_m, ...`, calling `evaluate`
/// for `(e*, lambda*)` at each size until [`should_stop`] fires.
pub fn drive_sampling<F>(params: &StopParams, mut evaluate: F) -> Result<SamplingHistory>
where
    F: FnMut(usize) -> Result<(f64, f64)>,
{
    params.validate()?;
    let mut history = SamplingHistory::new();
    let mut m = params.m0;
    loop {
        let (e_star, lambda_star) = evaluate(m)?;
        history.push(m, e_star, lambda_star, params.q)?;
        if let Decision::Stop(reason) = should_stop(&history, params) {
            history.set_decision(m, reason);
            return Ok(history);
        }
        m += params.delta_m;
    }
}

/// Supplies new samples on request.
pub trait SampleSource {
    type Sample;

    /// Up to `count` new samples; fewer means the source is exhausted.
    fn draw(&mut self, count: usize) -> Result<Vec<Self::Sample>>;
}

/// Turns the samples gathered so far into a regression system.
pub trait SystemBuilder<S> {
    fn build(&self, samples: &[S]) -> Result<LinearSystem>;
}

impl<S, F> SystemBuilder<S> for F
where
    F: Fn(&[S]) -> Result<LinearSystem>,
{
    fn build(&self, samples: &[S]) -> Result<LinearSystem> {
        self(samples)
    }
}

#[derive(Clone, Debug)]
pub struct AdaptiveOutcome {
    /// Fresh full-system solve at the final `lambda*`.
    pub solution: SolverSolution,
    pub lambda_star: f64,
    pub history: SamplingHistory,
    pub system: LinearSystem,
}

fn draw_exact<O: SampleSource>(
    oracle: &mut O,
    count: usize,
    into: &mut Vec<O::Sample>,
) -> Result<()> {
    let batch = oracle.draw(count)?;
    if batch.len() < count {
        return Err(Error::Exhausted {
            needed: into.len() + count,
            available: into.len() + batch.len(),
        });
    }
    into.extend(batch);
    Ok(())
}

/// Adaptive sparse fit: grow a nested sample set in batches, select lambda
/// by CV at each size, and stop per [`should_stop`]. The CV folds at size
/// `m` come from `stream.substream(m)`.
pub fn run_adaptive<O, B>(
    oracle: &mut O,
    builder: &B,
    lambda_grid: &[f64],
    k: usize,
    params: &StopParams,
    config: &SolverConfig,
    stream: &RandomStream,
) -> Result<AdaptiveOutcome>
where
    O: SampleSource,
    B: SystemBuilder<O::Sample>,
{
    params.validate()?;
    let mut samples = Vec::new();
    draw_exact(oracle, params.m0, &mut samples)?;
    let mut history = SamplingHistory::new();
    loop {
        let m = samples.len();
        let system = builder.build(&samples)?;
        let profile = select_lambda(
            &system,
            lambda_grid,
            k,
            config,
            &mut stream.substream(m as u64),
        )?;
        history.push(m, profile.cv_error_star(), profile.lambda_star, params.q)?;
        if let Decision::Stop(reason) = should_stop(&history, params) {
            history.set_decision(m, reason);
            let solution = solve_ulasso(&system, profile.lambda_star, config)?;
            return Ok(AdaptiveOutcome {
                solution,
                lambda_star: profile.lambda_star,
                history,
                system,
            });
        }
        draw_exact(oracle, params.delta_m, &mut samples)?;
    }
}
