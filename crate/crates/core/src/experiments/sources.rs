use nalgebra::{DMatrix, DVector};

use super::TestInstance;
use crate::error::Result;
use crate::pce::{assemble_regression_system, sample_germ, BasisSpec, IndexSet, SampleSet};
use crate::sampling::RandomStream;
use crate::solvers::LinearSystem;
use crate::stop_sampling::{SampleSource, SystemBuilder};

/// Hands out the rows of a pre-generated instance in order. Samples are row
/// indices; building from `k` samples yields the instance's first `k` rows.
pub struct InstanceRows<'a> {
    instance: &'a TestInstance,
    next: usize,
}

impl<'a> InstanceRows<'a> {
    pub fn new(instance: &'a TestInstance) -> Self {
        Self { instance, next: 0 }
    }
}

impl SampleSource for InstanceRows<'_> {
    type Sample = usize;

    fn draw(&mut self, count: usize) -> Result<Vec<usize>> {
        let end = (self.next + count).min(self.instance.rows());
        let rows = (self.next..end).collect();
        self.next = end;
        Ok(rows)
    }
}

impl SystemBuilder<usize> for InstanceRows<'_> {
    fn build(&self, samples: &[usize]) -> Result<LinearSystem> {
        debug_assert!(samples.iter().enumerate().all(|(i, &r)| i == r));
        Ok(self.instance.prefix(samples.len())?.system)
    }
}

/// Draws germ points and evaluates a model on them.
pub struct PceModelSource<F> {
    spec: BasisSpec,
    model: F,
    stream: RandomStream,
}

impl<F> PceModelSource<F>
where
    F: FnMut(&[f64]) -> f64,
{
    pub fn new(spec: BasisSpec, model: F, stream: RandomStream) -> Self {
        Self {
            spec,
            model,
            stream,
        }
    }
}

impl<F> SampleSource for PceModelSource<F>
where
    F: FnMut(&[f64]) -> f64,
{
    type Sample = (Vec<f64>, f64);

    fn draw(&mut self, count: usize) -> Result<Vec<Self::Sample>> {
        let pts = sample_germ(&self.spec, count, &mut self.stream);
        Ok(pts
            .row_iter()
            .map(|r| {
                let xi: Vec<f64> = r.iter().copied().collect();
                let y = (self.model)(&xi);
                (xi, y)
            })
            .collect())
    }
}

/// Assembles the centered, constant-free regression system for a basis.
pub struct PceSystemBuilder {
    spec: BasisSpec,
    idx: IndexSet,
}

impl PceSystemBuilder {
    pub fn new(spec: BasisSpec, idx: IndexSet) -> Self {
        Self { spec, idx }
    }

    pub fn total_order(spec: BasisSpec) -> Result<Self> {
        let idx = spec.total_order_index_set()?;
        Ok(Self { spec, idx })
    }

    pub fn spec(&self) -> &BasisSpec {
        &self.spec
    }

    pub fn index_set(&self) -> &IndexSet {
        &self.idx
    }
}

impl SystemBuilder<(Vec<f64>, f64)> for PceSystemBuilder {
    fn build(&self, samples: &[(Vec<f64>, f64)]) -> Result<LinearSystem> {
        let dims = self.spec.dims();
        if let Some((xi, _)) = samples.iter().find(|(xi, _)| xi.len() != dims) {
            return Err(crate::error::Error::DimensionMismatch {
                what: "germ point length",
                expected: dims,
                actual: xi.len(),
            });
        }
        let flat: Vec<f64> = samples
            .iter()
            .flat_map(|(xi, _)| xi.iter().copied())
            .collect();
        let points = DMatrix::from_row_slice(samples.len(), dims, &flat);
        let obs = DVector::from_iterator(samples.len(), samples.iter().map(|s| s.1));
        assemble_regression_system(&self.spec, &self.idx, &SampleSet::new(points, obs)?, true)
    }
}
