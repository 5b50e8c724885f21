//! Total-order orthonormal polynomial chaos bases.
//!
//! Univariate families are evaluated by three-term recurrence:
//! probabilists' Hermite `He_k / sqrt(k!)` for a standard normal germ and
//! `sqrt(2k + 1) P_k` for a uniform germ on (-1, 1). Both are orthonormal
//! under their germ density.

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling::RandomStream;
use crate::solvers::LinearSystem;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    #[serde(alias = "hermite")]
    HermiteGaussian,
    #[serde(alias = "legendre")]
    LegendreUniform,
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "hermite" | "hermite-gaussian" | "h" | "gaussian" => Ok(Family::HermiteGaussian),
            "legendre" | "legendre-uniform" | "l" | "uniform" => Ok(Family::LegendreUniform),
            other => Err(Error::InvalidArgument(format!(
                "unknown polynomial family '{other}'"
            ))),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::HermiteGaussian => "hermite-gaussian",
            Family::LegendreUniform => "legendre-uniform",
        })
    }
}

/// Per-dimension polynomial degrees.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Self {
        Self(entries)
    }

    pub fn zeros(dims: usize) -> Self {
        Self(vec![0; dims])
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn dims(&self) -> usize {
        self.0.len()
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_constant(&self) -> bool {
        self.0.iter().all(|&b| b == 0)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, b) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{b}")?;
        }
        f.write_str(")")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisSpec {
    families: Vec<Family>,
    degree: usize,
}

impl BasisSpec {
    pub fn new(families: Vec<Family>, degree: usize) -> Result<Self> {
        if families.is_empty() {
            return Err(Error::InvalidArgument(
                "basis needs at least one dimension".into(),
            ));
        }
        Ok(Self { families, degree })
    }

    pub fn uniform(family: Family, dims: usize, degree: usize) -> Result<Self> {
        Self::new(vec![family; dims], degree)
    }

    pub fn families(&self) -> &[Family] {
        &self.families
    }

    pub fn dims(&self) -> usize {
        self.families.len()
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn total_order_index_set(&self) -> Result<IndexSet> {
        IndexSet::total_order(self.dims(), self.degree)
    }
}

/// Ordered list of multi-indices defining the basis columns.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexSet {
    indices: Vec<MultiIndex>,
    includes_constant: bool,
}

/// `C(n + p, p)`, or `None` on overflow.
pub fn total_order_cardinality(dims: usize, degree: usize) -> Option<usize> {
    let mut c: u128 = 1;
    for i in 1..=degree as u128 {
        c = c.checked_mul(dims as u128 + i)? / i;
    }
    usize::try_from(c).ok()
}

fn push_grade(dims: usize, remaining: u32, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
    if prefix.len() + 1 == dims {
        prefix.push(remaining);
        out.push(MultiIndex(prefix.clone()));
        prefix.pop();
        return;
    }
    for first in 0..=remaining {
        prefix.push(first);
        push_grade(dims, remaining - first, prefix, out);
        prefix.pop();
    }
}

impl IndexSet {
    /// All multi-indices with `|beta|_1 <= degree`, graded by total degree and
    /// lexicographically ascending within a grade. The constant comes first.
    pub fn total_order(dims: usize, degree: usize) -> Result<Self> {
        if dims == 0 {
            return Err(Error::InvalidArgument("n_s must be at least 1".into()));
        }
        let count =
            total_order_cardinality(dims, degree).ok_or(Error::BasisOverflow { dims, degree })?;
        let grade_cap = u32::try_from(degree).map_err(|_| Error::BasisOverflow { dims, degree })?;
        let mut indices = Vec::new();
        indices
            .try_reserve_exact(count)
            .map_err(|_| Error::BasisOverflow { dims, degree })?;
        let mut prefix = Vec::with_capacity(dims);
        for grade in 0..=grade_cap {
            push_grade(dims, grade, &mut prefix, &mut indices);
        }
        debug_assert_eq!(indices.len(), count);
        Ok(Self {
            indices,
            includes_constant: true,
        })
    }

    pub fn from_indices(indices: Vec<MultiIndex>) -> Result<Self> {
        let Some(first) = indices.first() else {
            return Err(Error::InvalidArgument("empty index set".into()));
        };
        let dims = first.dims();
        if let Some(bad) = indices.iter().find(|b| b.dims() != dims) {
            return Err(Error::DimensionMismatch {
                what: "multi-index length",
                expected: dims,
                actual: bad.dims(),
            });
        }
        let mut seen = std::collections::HashSet::new();
        if !indices.iter().all(|b| seen.insert(b)) {
            return Err(Error::InvalidArgument("duplicate multi-index".into()));
        }
        let includes_constant = indices.iter().any(MultiIndex::is_constant);
        Ok(Self {
            indices,
            includes_constant,
        })
    }

    /// Same set with the all-zero index removed.
    pub fn without_constant(&self) -> IndexSet {
        IndexSet {
            indices: self
                .indices
                .iter()
                .filter(|b| !b.is_constant())
                .cloned()
                .collect(),
            includes_constant: false,
        }
    }

    pub fn includes_constant(&self) -> bool {
        self.includes_constant
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn dims(&self) -> usize {
        self.indices.first().map_or(0, MultiIndex::dims)
    }

    pub fn max_degree(&self) -> u32 {
        self.indices
            .iter()
            .flat_map(|b| b.entries().iter().copied())
            .max()
            .unwrap_or(0)
    }

    pub fn iter(&self) -> std::slice::Iter<'_, MultiIndex> {
        self.indices.iter()
    }

    pub fn as_slice(&self) -> &[MultiIndex] {
        &self.indices
    }
}

impl<'a> IntoIterator for &'a IndexSet {
    type Item = &'a MultiIndex;
    type IntoIter = std::slice::Iter<'a, MultiIndex>;

    fn into_iter(self) -> Self::IntoIter {
        self.indices.iter()
    }
}

/// Fills `out[k] = psi_k(xi)` for `k = 0..out.len()`.
pub fn eval_orthonormal_table(family: Family, xi: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    if out.len() == 1 {
        return;
    }
    match family {
        Family::HermiteGaussian => {
            // psi_{k+1} = (x psi_k - sqrt(k) psi_{k-1}) / sqrt(k+1)
            out[1] = xi;
            for k in 1..out.len() - 1 {
                let kf = k as f64;
                out[k + 1] = (xi * out[k] - kf.sqrt() * out[k - 1]) / (kf + 1.0).sqrt();
            }
        }
        Family::LegendreUniform => {
            let mut p_prev = 1.0;
            let mut p = xi;
            out[1] = 3f64.sqrt() * xi;
            for k in 1..out.len() - 1 {
                let kf = k as f64;
                let p_next = ((2.0 * kf + 1.0) * xi * p - kf * p_prev) / (kf + 1.0);
                p_prev = p;
                p = p_next;
                out[k + 1] = (2.0 * kf + 3.0).sqrt() * p;
            }
        }
    }
}

/// Degree-`k` orthonormal polynomial of `family` at `xi`.
pub fn eval_orthonormal_1d(family: Family, k: usize, xi: f64) -> f64 {
    let mut table = vec![0.0; k + 1];
    eval_orthonormal_table(family, xi, &mut table);
    table[k]
}

pub fn eval_multivariate(spec: &BasisSpec, beta: &MultiIndex, xi: &[f64]) -> Result<f64> {
    check_dims("multi-index length", spec.dims(), beta.dims())?;
    check_dims("germ point length", spec.dims(), xi.len())?;
    Ok(spec
        .families()
        .iter()
        .zip(beta.entries())
        .zip(xi)
        .map(|((&fam, &b), &x)| eval_orthonormal_1d(fam, b as usize, x))
        .product())
}

fn check_dims(what: &'static str, expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::DimensionMismatch {
            what,
            expected,
            actual,
        });
    }
    Ok(())
}

/// Evaluates every basis function of `idx` at one point. Shared by system
/// assembly and prediction so both see identical values.
struct RowEvaluator<'a> {
    families: &'a [Family],
    idx: &'a IndexSet,
    tables: Vec<Vec<f64>>,
}

impl<'a> RowEvaluator<'a> {
    fn new(spec: &'a BasisSpec, idx: &'a IndexSet) -> Result<Self> {
        if !idx.is_empty() {
            check_dims("index set dimension", spec.dims(), idx.dims())?;
        }
        let len = idx.max_degree() as usize + 1;
        Ok(Self {
            families: spec.families(),
            idx,
            tables: vec![vec![0.0; len]; spec.dims()],
        })
    }

    fn eval(&mut self, xi: &[f64], mut emit: impl FnMut(usize, f64)) {
        for ((table, &fam), &x) in self.tables.iter_mut().zip(self.families).zip(xi) {
            eval_orthonormal_table(fam, x, table);
        }
        for (k, beta) in self.idx.iter().enumerate() {
            let mut v = 1.0;
            for (table, &b) in self.tables.iter().zip(beta.entries()) {
                v *= table[b as usize];
            }
            emit(k, v);
        }
    }
}

/// Germ draws, `m` rows by `n_s` columns, filled row by row so that a
/// shorter draw from the same stream state is a prefix of a longer one.
pub fn sample_germ(spec: &BasisSpec, m: usize, stream: &mut RandomStream) -> DMatrix<f64> {
    let dims = spec.dims();
    let mut points = DMatrix::zeros(m, dims);
    for i in 0..m {
        for (j, fam) in spec.families().iter().enumerate() {
            points[(i, j)] = match fam {
                Family::HermiteGaussian => stream.normal(),
                Family::LegendreUniform => stream.uniform_symmetric_one(),
            };
        }
    }
    points
}

/// Germ points with observed model outputs.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleSet {
    points: DMatrix<f64>,
    observations: DVector<f64>,
}

impl SampleSet {
    pub fn new(points: DMatrix<f64>, observations: DVector<f64>) -> Result<Self> {
        check_dims("observation count", points.nrows(), observations.len())?;
        Ok(Self {
            points,
            observations,
        })
    }

    pub fn points(&self) -> &DMatrix<f64> {
        &self.points
    }

    pub fn observations(&self) -> &DVector<f64> {
        &self.observations
    }

    pub fn len(&self) -> usize {
        self.points.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.points.nrows() == 0
    }

    pub fn dims(&self) -> usize {
        self.points.ncols()
    }

    /// First `m` samples.
    pub fn prefix(&self, m: usize) -> SampleSet {
        let m = m.min(self.len());
        SampleSet {
            points: self.points.rows(0, m).into_owned(),
            observations: self.observations.rows(0, m).into_owned(),
        }
    }

    /// Reads `xi_1,...,xi_{n_s},y` CSV. Errors carry the file path and line.
    pub fn read_csv(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::Input {
            path: path.to_owned(),
            message: e.to_string(),
        })?;
        Self::from_csv_reader(file, path)
    }

    pub fn from_csv_reader<R: Read>(reader: R, path: &Path) -> Result<Self> {
        let data_err = |line: u64, message: String| Error::Data {
            path: path.to_owned(),
            line,
            message,
        };
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(reader);
        let headers = rdr
            .headers()
            .map_err(|e| data_err(1, e.to_string()))?
            .clone();
        if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
            return Err(Error::Input {
                path: path.to_owned(),
                message: "empty data file".into(),
            });
        }
        let cols = headers.len();
        if cols < 2 {
            return Err(data_err(
                1,
                "need at least one germ column and one y column".into(),
            ));
        }
        for (j, h) in headers.iter().enumerate() {
            let expected = if j + 1 == cols {
                "y".to_string()
            } else {
                format!("xi_{}", j + 1)
            };
            if h != expected {
                return Err(data_err(
                    1,
                    format!("header column {} is '{h}', expected '{expected}'", j + 1),
                ));
            }
        }
        let dims = cols - 1;
        let mut flat = Vec::new();
        let mut ys = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line());
                data_err(line, e.to_string())
            })?;
            let line = rec.position().map_or(0, |p| p.line());
            if rec.len() != cols {
                return Err(data_err(
                    line,
                    format!("expected {cols} columns, found {}", rec.len()),
                ));
            }
            for (j, cell) in rec.iter().enumerate() {
                let v: f64 = cell.parse().map_err(|_| {
                    data_err(line, format!("column {} is not numeric: '{cell}'", j + 1))
                })?;
                if j < dims {
                    flat.push(v);
                } else {
                    ys.push(v);
                }
            }
        }
        if ys.is_empty() {
            return Err(Error::Input {
                path: path.to_owned(),
                message: "no sample rows".into(),
            });
        }
        let points = DMatrix::from_row_slice(ys.len(), dims, &flat);
        Self::new(points, DVector::from_vec(ys))
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.to_csv_writer(std::io::BufWriter::new(file))
    }

    pub fn to_csv_writer<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = (1..=self.dims()).map(|j| format!("xi_{j}")).collect();
        header.push("y".into());
        w.write_record(&header)?;
        for i in 0..self.len() {
            let mut row: Vec<String> = (0..self.dims())
                .map(|j| crate::io::fmt_f64(self.points[(i, j)]))
                .collect();
            row.push(crate::io::fmt_f64(self.observations[i]));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Builds `A[i][k] = Psi_{beta^k}(xi^(i))`. With `drop_constant_and_center`
/// the constant column is removed and `y` is shifted by its sample mean,
/// which is kept as the system's offset.
pub fn assemble_regression_system(
    spec: &BasisSpec,
    idx: &IndexSet,
    samples: &SampleSet,
    drop_constant_and_center: bool,
) -> Result<LinearSystem> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("no samples".into()));
    }
    check_dims("sample dimension", spec.dims(), samples.dims())?;
    let columns = if drop_constant_and_center {
        idx.without_constant()
    } else {
        idx.clone()
    };
    if columns.is_empty() {
        return Err(Error::InvalidArgument("index set has no columns".into()));
    }
    let a = design_matrix(spec, &columns, samples.points())?;
    let mut y = samples.observations().clone();
    let mut offset = 0.0;
    if drop_constant_and_center {
        offset = y.mean();
        y.add_scalar_mut(-offset);
    }
    let labels = columns.iter().map(|b| b.to_string()).collect();
    Ok(LinearSystem::new(a, y)?
        .with_offset(offset)
        .with_labels(labels))
}

/// Basis evaluations at each row of `points`.
pub fn design_matrix(
    spec: &BasisSpec,
    idx: &IndexSet,
    points: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    check_dims("germ point dimension", spec.dims(), points.ncols())?;
    let mut eval = RowEvaluator::new(spec, idx)?;
    let mut a = DMatrix::zeros(points.nrows(), idx.len());
    let mut xi = vec![0.0; spec.dims()];
    for i in 0..points.nrows() {
        for (j, x) in xi.iter_mut().enumerate() {
            *x = points[(i, j)];
        }
        eval.eval(&xi, |k, v| a[(i, k)] = v);
    }
    Ok(a)
}

/// `offset + sum_k c_k Psi_{beta^k}(xi)`. `coefficients` may cover all of
/// `idx`, or every index except the constant.
pub fn predict(
    spec: &BasisSpec,
    idx: &IndexSet,
    coefficients: &[f64],
    offset: f64,
    xi: &[f64],
) -> Result<f64> {
    check_dims("germ point length", spec.dims(), xi.len())?;
    let reduced;
    let columns = if coefficients.len() == idx.len() {
        idx
    } else if idx.includes_constant() && coefficients.len() + 1 == idx.len() {
        reduced = idx.without_constant();
        &reduced
    } else {
        return Err(Error::DimensionMismatch {
            what: "coefficient count",
            expected: idx.len(),
            actual: coefficients.len(),
        });
    };
    let mut eval = RowEvaluator::new(spec, columns)?;
    let mut sum = 0.0;
    eval.eval(xi, |k, v| sum += v * coefficients[k]);
    Ok(sum + offset)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_set_counts() {
        let s = IndexSet::total_order(5, 5).unwrap();
        assert_eq!(s.len(), 252);
        assert_eq!(s.without_constant().len(), 251);
        let s = IndexSet::total_order(24, 3).unwrap();
        assert_eq!(s.len(), 2925);
        assert_eq!(s.without_constant().len(), 2924);
        assert_eq!(IndexSet::total_order(5, 7).unwrap().len(), 792);
    }

    #[test]
    fn one_dimensional_grades() {
        let s = IndexSet::total_order(1, 3).unwrap();
        let got: Vec<Vec<u32>> = s.iter().map(|b| b.entries().to_vec()).collect();
        assert_eq!(got, vec![vec![0], vec![1], vec![2], vec![3]]);
    }

    #[test]
    fn graded_lex_ordering() {
        let s = IndexSet::total_order(2, 2).unwrap();
        let got: Vec<Vec<u32>> = s.iter().map(|b| b.entries().to_vec()).collect();
        assert_eq!(
            got,
            vec![
                vec![0, 0],
                vec![0, 1],
                vec![1, 0],
                vec![0, 2],
                vec![1, 1],
                vec![2, 0]
            ]
        );
        assert!(s.as_slice()[0].is_constant());
    }

    #[test]
    fn overflow_is_reported() {
        assert!(total_order_cardinality(1 << 40, 8).is_none());
        assert!(matches!(
            IndexSet::total_order(1 << 40, 8),
            Err(Error::BasisOverflow { .. })
        ));
    }

    #[test]
    fn univariate_values() {
        assert_eq!(eval_orthonormal_1d(Family::HermiteGaussian, 0, 0.7), 1.0);
        assert!(eval_orthonormal_1d(Family::HermiteGaussian, 2, 1.0).abs() < 1e-15);
        let v = eval_orthonormal_1d(Family::LegendreUniform, 1, 0.5);
        assert!((v - 3f64.sqrt() * 0.5).abs() < 1e-15);
    }

    #[test]
    fn multivariate_values() {
        let h2 = BasisSpec::uniform(Family::HermiteGaussian, 2, 2).unwrap();
        let v = eval_multivariate(&h2, &MultiIndex::new(vec![1, 1]), &[2.0, 3.0]).unwrap();
        assert!((v - 6.0).abs() < 1e-14);
        assert_eq!(
            eval_multivariate(&h2, &MultiIndex::zeros(2), &[-4.0, 8.0]).unwrap(),
            1.0
        );
        let mixed =
            BasisSpec::new(vec![Family::HermiteGaussian, Family::LegendreUniform], 1).unwrap();
        let v = eval_multivariate(&mixed, &MultiIndex::new(vec![0, 1]), &[9.0, 0.5]).unwrap();
        assert!((v - 3f64.sqrt() * 0.5).abs() < 1e-15);
        assert!(eval_multivariate(&mixed, &MultiIndex::new(vec![0]), &[9.0, 0.5]).is_err());
    }

    #[test]
    fn linear_hermite_system_is_raw_germ() {
        let spec = BasisSpec::uniform(Family::HermiteGaussian, 1, 1).unwrap();
        let idx = spec.total_order_index_set().unwrap();
        let pts = DMatrix::from_column_slice(4, 1, &[0.3, -1.2, 2.0, 0.1]);
        let obs = DVector::from_vec(vec![1.0, 2.0, 3.0, 6.0]);
        let sys = assemble_regression_system(
            &spec,
            &idx,
            &SampleSet::new(pts.clone(), obs).unwrap(),
            true,
        )
        .unwrap();
        assert_eq!(sys.cols(), 1);
        assert_eq!(sys.a().column(0).as_slice(), pts.column(0).as_slice());
        assert_eq!(sys.y_offset(), 3.0);
        assert!(sys.y().sum().abs() < 1e-14);
    }

    #[test]
    fn uncentered_shape_includes_constant() {
        let spec = BasisSpec::uniform(Family::HermiteGaussian, 5, 5).unwrap();
        let idx = spec.total_order_index_set().unwrap();
        let mut s = RandomStream::new(3, 0);
        let pts = sample_germ(&spec, 30, &mut s);
        let samples = SampleSet::new(pts, DVector::from_element(30, 1.0)).unwrap();
        let sys = assemble_regression_system(&spec, &idx, &samples, false).unwrap();
        assert_eq!((sys.rows(), sys.cols()), (30, 252));
        assert_eq!(sys.y_offset(), 0.0);
    }

    #[test]
    fn germ_sampling() {
        let spec =
            BasisSpec::new(vec![Family::HermiteGaussian, Family::LegendreUniform], 2).unwrap();
        let m = 20_000;
        let a = sample_germ(&spec, m, &mut RandomStream::new(8, 0));
        let b = sample_germ(&spec, m, &mut RandomStream::new(8, 0));
        assert_eq!(a, b);
        let mean = a.column(0).mean();
        assert!(mean.abs() < 5.0 / (m as f64).sqrt());
        assert!(a.column(1).iter().all(|&x| (-1.0..=1.0).contains(&x)));
        let short = sample_germ(&spec, 10, &mut RandomStream::new(8, 0));
        assert_eq!(short, a.rows(0, 10).into_owned());
    }

    #[test]
    fn predict_edge_cases() {
        let spec = BasisSpec::uniform(Family::LegendreUniform, 2, 2).unwrap();
        let idx = spec.total_order_index_set().unwrap();
        let zeros = vec![0.0; idx.len()];
        assert_eq!(
            predict(&spec, &idx, &zeros, 1.25, &[0.1, 0.2]).unwrap(),
            1.25
        );
        let zeros = vec![0.0; idx.len() - 1];
        assert_eq!(
            predict(&spec, &idx, &zeros, -3.0, &[0.1, 0.2]).unwrap(),
            -3.0
        );
        let constant = IndexSet::from_indices(vec![MultiIndex::zeros(2)]).unwrap();
        assert_eq!(
            predict(&spec, &constant, &[0.0], 2.5, &[0.9, -0.4]).unwrap(),
            2.5
        );
        assert!(predict(&spec, &idx, &[1.0, 2.0], 0.0, &[0.1, 0.2]).is_err());
    }

    #[test]
    fn csv_round_trip_and_errors() {
        let spec = BasisSpec::uniform(Family::HermiteGaussian, 3, 1).unwrap();
        let pts = sample_germ(&spec, 5, &mut RandomStream::new(1, 0));
        let set = SampleSet::new(pts, DVector::from_fn(5, |i, _| i as f64 * 0.1)).unwrap();
        let mut buf = Vec::new();
        set.to_csv_writer(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("xi_1,xi_2,xi_3,y\n"));
        let back = SampleSet::from_csv_reader(&buf[..], Path::new("mem.csv")).unwrap();
        assert_eq!(back, set);

        let bad = "xi_1,y\n0.5,1.0\n0.2,oops\n";
        match SampleSet::from_csv_reader(bad.as_bytes(), Path::new("bad.csv")) {
            Err(Error::Data { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        let ragged = "xi_1,y\n0.5,1.0,2.0\n";
        assert!(matches!(
            SampleSet::from_csv_reader(ragged.as_bytes(), Path::new("r.csv")),
            Err(Error::Data { line: 2, .. })
        ));
        match SampleSet::from_csv_reader("".as_bytes(), Path::new("empty.csv")) {
            Err(e @ Error::Input { .. }) => assert!(e.to_string().contains("empty.csv")),
            other => panic!("unexpected {other:?}"),
        }
    }
}
