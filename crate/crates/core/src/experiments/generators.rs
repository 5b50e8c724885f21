use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{GeneratorTag, TestInstance, ValidationSet};
use crate::error::{Error, Result};
use crate::pce::{design_matrix, sample_germ, BasisSpec, Family, IndexSet};
use crate::sampling::RandomStream;
use crate::solvers::LinearSystem;

/// Label of the substream that feeds validation rows.
const VALIDATION_STREAM: u64 = 0x7661_6c69;

fn normal_rows(rows: usize, cols: usize, stream: &mut RandomStream) -> DMatrix<f64> {
    let v = stream.standard_normal(rows * cols);
    DMatrix::from_row_slice(rows, cols, &v)
}

fn sparse_vector(
    n: usize,
    s: usize,
    values: impl FnMut() -> f64,
    stream: &mut RandomStream,
) -> Vec<f64> {
    let mut x = vec![0.0; n];
    let support = stream.sample_indices(n, s);
    let mut values = values;
    for i in support {
        x[i] = values();
    }
    x
}

fn check_sparsity(s: usize, n: usize) -> Result<()> {
    if s == 0 || s > n {
        return Err(Error::InvalidArgument(format!(
            "sparsity s = {s} must lie in 1..={n}"
        )));
    }
    Ok(())
}

/// Gaussian random matrix with an `s`-sparse solution whose nonzeros are
/// uniform on (-1, 1). Noiseless `y = A x*`. The solution is drawn before
/// the rows, and rows are drawn one at a time, so a smaller `m` gives a
/// prefix of a larger one under the same stream.
pub fn gen_gaussian_instance(
    n: usize,
    m: usize,
    s: usize,
    m_validation: usize,
    stream: &mut RandomStream,
) -> Result<TestInstance> {
    check_sparsity(s, n)?;
    if m == 0 {
        return Err(Error::InvalidArgument("m must be positive".into()));
    }
    let mut vals = stream.substream(1);
    let x_true = sparse_vector(n, s, || vals.uniform_symmetric_one(), stream);
    let a = normal_rows(m, n, stream);
    let xv = DVector::from_column_slice(&x_true);
    let y = &a * &xv;
    let validation = (m_validation > 0).then(|| {
        let a = normal_rows(m_validation, n, &mut stream.substream(VALIDATION_STREAM));
        let y = &a * &xv;
        ValidationSet { a, y }
    });
    TestInstance::new(
        LinearSystem::new(a, y)?,
        Some(x_true),
        validation,
        GeneratorTag::GaussianRandom,
    )
}

fn hermite_columns(dims: usize, degree: usize) -> Result<(BasisSpec, IndexSet)> {
    let spec = BasisSpec::uniform(Family::HermiteGaussian, dims, degree)?;
    let idx = spec.total_order_index_set()?.without_constant();
    if idx.is_empty() {
        return Err(Error::InvalidArgument(
            "degree 0 leaves no non-constant columns".into(),
        ));
    }
    Ok((spec, idx))
}

fn labels(idx: &IndexSet) -> Vec<String> {
    idx.iter().map(|b| b.to_string()).collect()
}

/// Hermite PCE dictionary (constant dropped) with an `s`-sparse standard
/// normal coefficient vector.
pub fn gen_random_pce_instance(
    dims: usize,
    degree: usize,
    s: usize,
    m: usize,
    m_validation: usize,
    stream: &mut RandomStream,
) -> Result<TestInstance> {
    let (spec, idx) = hermite_columns(dims, degree)?;
    let n = idx.len();
    check_sparsity(s, n)?;
    let mut vals = stream.substream(1);
    let x_true = sparse_vector(n, s, || vals.normal(), stream);
    let xv = DVector::from_column_slice(&x_true);
    let a = design_matrix(&spec, &idx, &sample_germ(&spec, m, stream))?;
    let y = &a * &xv;
    let validation = if m_validation > 0 {
        let pts = sample_germ(
            &spec,
            m_validation,
            &mut stream.substream(VALIDATION_STREAM),
        );
        let a = design_matrix(&spec, &idx, &pts)?;
        let y = &a * &xv;
        Some(ValidationSet { a, y })
    } else {
        None
    };
    let system = LinearSystem::new(a, y)?.with_labels(labels(&idx));
    TestInstance::new(system, Some(x_true), validation, GeneratorTag::RandomPce)
}

/// `exp(sum_j a_j xi_j)`.
pub fn genz_exponential(a: &[f64], xi: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), xi.len());
    a.iter().zip(xi).map(|(c, x)| c * x).sum::<f64>().exp()
}

/// Hermite PCE fit of the Genz exponential. The system drops the constant
/// and is centered; there is no known coefficient vector.
pub fn gen_genz_instance(
    dims: usize,
    degree: usize,
    coefficients: &[f64],
    m: usize,
    m_validation: usize,
    stream: &mut RandomStream,
) -> Result<TestInstance> {
    if coefficients.len() != dims {
        return Err(Error::DimensionMismatch {
            what: "Genz coefficient count",
            expected: dims,
            actual: coefficients.len(),
        });
    }
    let (spec, idx) = hermite_columns(dims, degree)?;
    let eval = |pts: &DMatrix<f64>| {
        DVector::from_iterator(
            pts.nrows(),
            pts.row_iter().map(|r| {
                let xi: Vec<f64> = r.iter().copied().collect();
                genz_exponential(coefficients, &xi)
            }),
        )
    };
    let pts = sample_germ(&spec, m, stream);
    let raw_y = eval(&pts);
    let a = design_matrix(&spec, &idx, &pts)?;
    let validation = if m_validation > 0 {
        let vpts = sample_germ(
            &spec,
            m_validation,
            &mut stream.substream(VALIDATION_STREAM),
        );
        Some(ValidationSet {
            a: design_matrix(&spec, &idx, &vpts)?,
            y: eval(&vpts),
        })
    } else {
        None
    };
    TestInstance::centered_from_raw(
        a,
        raw_y,
        None,
        validation,
        GeneratorTag::GenzExponential,
        Some(labels(&idx)),
    )
}

/// One of the synthetic benchmark families.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "case")]
pub enum CaseSpec {
    Gaussian {
        n: usize,
        s: usize,
    },
    RandomPce {
        dims: usize,
        degree: usize,
        s: usize,
    },
    Genz {
        dims: usize,
        degree: usize,
        coefficients: Vec<f64>,
    },
}

impl CaseSpec {
    /// Genz case with `a_j = 1 / j`.
    pub fn genz_harmonic(dims: usize, degree: usize) -> Self {
        CaseSpec::Genz {
            dims,
            degree,
            coefficients: (1..=dims).map(|j| 1.0 / j as f64).collect(),
        }
    }

    /// Number of regression columns.
    pub fn columns(&self) -> Result<usize> {
        match self {
            CaseSpec::Gaussian { n, .. } => Ok(*n),
            CaseSpec::RandomPce { dims, degree, .. } | CaseSpec::Genz { dims, degree, .. } => {
                crate::pce::total_order_cardinality(*dims, *degree)
                    .map(|c| c - 1)
                    .ok_or(Error::BasisOverflow {
                        dims: *dims,
                        degree: *degree,
                    })
            }
        }
    }

    pub fn generate(
        &self,
        m: usize,
        m_validation: usize,
        stream: &mut RandomStream,
    ) -> Result<TestInstance> {
        match self {
            CaseSpec::Gaussian { n, s } => gen_gaussian_instance(*n, m, *s, m_validation, stream),
            CaseSpec::RandomPce { dims, degree, s } => {
                gen_random_pce_instance(*dims, *degree, *s, m, m_validation, stream)
            }
            CaseSpec::Genz {
                dims,
                degree,
                coefficients,
            } => gen_genz_instance(*dims, *degree, coefficients, m, m_validation, stream),
        }
    }
}
