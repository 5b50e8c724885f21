use nalgebra::{DMatrix, DVector, Dyn, QR};

use crate::error::{Error, Result};

pub(super) struct OlsFactor {
    qr: QR<f64, Dyn, Dyn>,
    cols: usize,
}

impl OlsFactor {
    pub(super) fn new(a: &DMatrix<f64>) -> Result<Self> {
        let (m, n) = a.shape();
        if m < n {
            return Err(Error::Underdetermined { rows: m, cols: n });
        }
        let qr = a.clone().qr();
        let r = qr.r();
        let diag_max = (0..n).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
        let cutoff = diag_max * f64::EPSILON * m.max(n) as f64;
        let rank = (0..n).filter(|&i| r[(i, i)].abs() > cutoff).count();
        if rank < n || diag_max == 0.0 {
            return Err(Error::RankDeficient { rank, cols: n });
        }
        Ok(Self { qr, cols: n })
    }

    pub(super) fn solve(&self, y: &DVector<f64>) -> Vec<f64> {
        let mut qty = y.clone();
        self.qr.q_tr_mul(&mut qty);
        let rhs = qty.rows(0, self.cols).into_owned();
        let r = self.qr.r();
        r.solve_upper_triangular(&rhs)
            .expect("R has a nonzero diagonal after the rank check")
            .as_slice()
            .to_vec()
    }
}
