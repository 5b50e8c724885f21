use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{gen_gaussian_instance, gen_random_pce_instance, solution_error, validation_error};
use crate::cross_validation::{default_lambda_grid, select_lambda};
use crate::error::{Error, Result};
use crate::io::{fmt_f64, write_csv};
use crate::sampling::{halton_point, RandomStream};
use crate::solvers::SolverConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhaseMetric {
    #[serde(alias = "cv")]
    CvError,
    #[serde(alias = "validation")]
    ValidationError,
    #[serde(alias = "solution")]
    SolutionError,
}

impl FromStr for PhaseMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cv" | "cv-error" => Ok(PhaseMetric::CvError),
            "validation" | "validation-error" => Ok(PhaseMetric::ValidationError),
            "solution" | "solution-error" => Ok(PhaseMetric::SolutionError),
            other => Err(Error::InvalidArgument(format!("unknown metric '{other}'"))),
        }
    }
}

/// Matrix ensemble sampled at each node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ensemble {
    Gaussian,
    /// Hermite PCE dictionary; the column count comes from `dims`/`degree`.
    RandomPce {
        dims: usize,
        degree: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseDiagramSpec {
    /// Column count (ignored for the PCE ensemble).
    pub n: usize,
    pub node_count: usize,
    pub trials_per_node: usize,
    pub success_threshold: f64,
    pub metric: PhaseMetric,
    pub k: usize,
    pub ensemble: Ensemble,
    pub lambda_grid: Vec<f64>,
    pub m_validation: usize,
}

impl PhaseDiagramSpec {
    /// Gaussian ensemble with 20 folds, threshold 0.1 and a validation set of
    /// `max(1000, 2n)` rows.
    pub fn gaussian(
        n: usize,
        node_count: usize,
        trials_per_node: usize,
        metric: PhaseMetric,
    ) -> Self {
        Self {
            n,
            node_count,
            trials_per_node,
            success_threshold: 0.1,
            metric,
            k: 20,
            ensemble: Ensemble::Gaussian,
            lambda_grid: default_lambda_grid(),
            m_validation: (2 * n).max(1000),
        }
    }

    pub fn columns(&self) -> Result<usize> {
        match self.ensemble {
            Ensemble::Gaussian => Ok(self.n),
            Ensemble::RandomPce { dims, degree } => {
                crate::pce::total_order_cardinality(dims, degree)
                    .map(|c| c - 1)
                    .ok_or(Error::BasisOverflow { dims, degree })
            }
        }
    }

    fn validate(&self) -> Result<()> {
        if self.columns()? < 1 || self.node_count == 0 || self.trials_per_node == 0 {
            return Err(Error::InvalidArgument(
                "phase diagram needs n, nodes and trials all positive".into(),
            ));
        }
        if self.metric == PhaseMetric::ValidationError && self.m_validation == 0 {
            return Err(Error::InvalidArgument(
                "validation metric needs validation rows".into(),
            ));
        }
        Ok(())
    }
}

/// Metrics of one trial at a node.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub cv_error: f64,
    pub validation_error: Option<f64>,
    pub solution_error: f64,
}

impl TrialRecord {
    pub fn metric(&self, metric: PhaseMetric) -> Option<f64> {
        match metric {
            PhaseMetric::CvError => Some(self.cv_error),
            PhaseMetric::ValidationError => self.validation_error,
            PhaseMetric::SolutionError => Some(self.solution_error),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeTrials {
    pub delta: f64,
    pub rho: f64,
    pub m: usize,
    pub s: usize,
    pub trials: Vec<TrialRecord>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseNode {
    pub delta: f64,
    pub rho: f64,
    pub m: usize,
    pub s: usize,
    pub success_rate: f64,
    pub mean_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseDiagramResult {
    pub nodes: Vec<PhaseNode>,
}

impl PhaseDiagramResult {
    /// `delta,rho,m,s,success_rate,mean_error`.
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let rows: Vec<Vec<String>> = self
            .nodes
            .iter()
            .map(|n| {
                vec![
                    fmt_f64(n.delta),
                    fmt_f64(n.rho),
                    n.m.to_string(),
                    n.s.to_string(),
                    fmt_f64(n.success_rate),
                    fmt_f64(n.mean_error),
                ]
            })
            .collect();
        write_csv(
            writer,
            &["delta", "rho", "m", "s", "success_rate", "mean_error"],
            &rows,
        )
    }
}

fn round_half_up(v: f64) -> usize {
    (v + 0.5).floor() as usize
}

/// Node `t` (1-based) sits at the Halton point of bases (2, 3):
/// `m = max(2, round(delta n))`, `s = min(n, max(1, round(rho m)))`.
pub(crate) fn node_geometry(t: u64, n: usize) -> Result<(f64, f64, usize, usize)> {
    let p = halton_point(t, &[2, 3])?;
    let (delta, rho) = (p[0], p[1]);
    let m = round_half_up(delta * n as f64).max(2);
    let s = round_half_up(rho * m as f64).max(1).min(n);
    Ok((delta, rho, m, s))
}

/// Runs every trial at every node. Trial `b` of node `t` draws its instance
/// from `stream.substream(t).substream(b).substream(0)` and its CV folds
/// from `.substream(1)`, so results do not depend on scheduling.
pub fn phase_trials(
    spec: &PhaseDiagramSpec,
    config: &SolverConfig,
    stream: &RandomStream,
) -> Result<Vec<NodeTrials>> {
    spec.validate()?;
    let n = spec.columns()?;
    let geometry = (1..=spec.node_count as u64)
        .map(|t| node_geometry(t, n))
        .collect::<Result<Vec<_>>>()?;
    let work: Vec<(usize, usize)> = (0..spec.node_count)
        .flat_map(|t| (0..spec.trials_per_node).map(move |b| (t, b)))
        .collect();
    let results: Vec<TrialRecord> = work
        .par_iter()
        .map(|&(t, b)| {
            let (_, _, m, s) = geometry[t];
            let trial_stream = stream.substream(t as u64 + 1).substream(b as u64);
            let mut inst_stream = trial_stream.substream(0);
            let inst = match spec.ensemble {
                Ensemble::Gaussian => {
                    gen_gaussian_instance(n, m, s, spec.m_validation, &mut inst_stream)?
                }
                Ensemble::RandomPce { dims, degree } => gen_random_pce_instance(
                    dims,
                    degree,
                    s,
                    m,
                    spec.m_validation,
                    &mut inst_stream,
                )?,
            };
            let profile = select_lambda(
                &inst.system,
                &spec.lambda_grid,
                spec.k,
                config,
                &mut trial_stream.substream(1),
            )?;
            let x = &profile.solution_at_star.x;
            Ok(TrialRecord {
                cv_error: profile.cv_error_star(),
                validation_error: inst
                    .validation
                    .as_ref()
                    .map(|_| validation_error(&inst, x))
                    .transpose()?,
                solution_error: solution_error(&inst, x)?,
            })
        })
        .collect::<Result<_>>()?;
    let mut it = results.into_iter();
    Ok(geometry
        .into_iter()
        .map(|(delta, rho, m, s)| NodeTrials {
            delta,
            rho,
            m,
            s,
            trials: it.by_ref().take(spec.trials_per_node).collect(),
        })
        .collect())
}

/// Success rate (`metric < threshold`) and mean metric per node.
pub fn summarize_phase(
    nodes: &[NodeTrials],
    metric: PhaseMetric,
    threshold: f64,
) -> Result<PhaseDiagramResult> {
    let nodes = nodes
        .iter()
        .map(|node| {
            let values = node
                .trials
                .iter()
                .map(|t| t.metric(metric).ok_or(Error::Missing("validation set")))
                .collect::<Result<Vec<_>>>()?;
            let b = values.len() as f64;
            let successes = values.iter().filter(|&&v| v < threshold).count();
            Ok(PhaseNode {
                delta: node.delta,
                rho: node.rho,
                m: node.m,
                s: node.s,
                success_rate: successes as f64 / b,
                mean_error: values.iter().sum::<f64>() / b,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PhaseDiagramResult { nodes })
}

pub fn phase_diagram(
    spec: &PhaseDiagramSpec,
    config: &SolverConfig,
    stream: &RandomStream,
) -> Result<PhaseDiagramResult> {
    let trials = phase_trials(spec, config, stream)?;
    summarize_phase(&trials, spec.metric, spec.success_threshold)
}
