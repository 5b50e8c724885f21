//! A small phase-transition diagram for Gaussian matrices: success rate of
//! CV-tuned recovery over Halton-sampled (delta, rho) nodes.
//!
//!     cargo run --release --example phase_diagram [nodes] [trials]

use chaosfit::experiments::{phase_trials, summarize_phase, PhaseDiagramSpec, PhaseMetric};
use chaosfit::{RandomStream, SolverConfig};

fn main() -> chaosfit::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>().ok());
    let nodes = args.next().flatten().unwrap_or(24);
    let trials = args.next().flatten().unwrap_or(3);
    let mut spec = PhaseDiagramSpec::gaussian(100, nodes, trials, PhaseMetric::SolutionError);
    spec.m_validation = 0;
    let runs = phase_trials(&spec, &SolverConfig::admm(), &RandomStream::new(1, 0))?;

    let by_solution = summarize_phase(&runs, PhaseMetric::SolutionError, spec.success_threshold)?;
    let by_cv = summarize_phase(&runs, PhaseMetric::CvError, spec.success_threshold)?;
    println!(
        "{:>6} {:>6} {:>5} {:>5} {:>10} {:>10}",
        "delta", "rho", "m", "s", "solution", "cv"
    );
    let mut rows: Vec<_> = by_solution.nodes.iter().zip(&by_cv.nodes).collect();
    rows.sort_by(|a, b| {
        a.0.delta
            .total_cmp(&b.0.delta)
            .then(a.0.rho.total_cmp(&b.0.rho))
    });
    for (s, c) in rows {
        println!(
            "{:>6.3} {:>6.3} {:>5} {:>5} {:>10.2} {:>10.2}",
            s.delta, s.rho, s.m, s.s, s.success_rate, c.success_rate
        );
    }
    Ok(())
}
