//! JSON exchange formats for matrices, channels and realizations.
//!
//! Matrices are stored row-major as `[re, im]` pairs. Square matrices carry a
//! single `dim`; rectangular ones (isometries, Kraus operators between spaces
//! of different size) carry `rows` and `cols`.

use serde::{Deserialize, Serialize};

use crate::channel::KrausChannel;
use crate::error::{HtoError, Result};
use crate::linalg::{C64, Mat};
use crate::operator::{DensityMatrix, HermitianOperator, Isometry, Units};
use crate::realization::DenseRealization;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rows: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cols: Option<usize>,
    pub entries: Vec<[f64; 2]>,
}

impl MatrixJson {
    pub fn from_matrix(m: &Mat) -> Self {
        let (rows, cols) = m.shape();
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                let z = m[(i, j)];
                entries.push([z.re, z.im]);
            }
        }
        if rows == cols {
            Self {
                dim: Some(rows),
                rows: None,
                cols: None,
                entries,
            }
        } else {
            Self {
                dim: None,
                rows: Some(rows),
                cols: Some(cols),
                entries,
            }
        }
    }

    pub fn to_matrix(&self) -> Result<Mat> {
        let (rows, cols) = match (self.dim, self.rows, self.cols) {
            (Some(d), None, None) => (d, d),
            (None, Some(r), Some(c)) => (r, c),
            (Some(d), Some(r), Some(c)) if r == d && c == d => (d, d),
            _ => {
                return Err(HtoError::Format(
                    "matrix needs either `dim` or both `rows` and `cols`".into(),
                ))
            }
        };
        if rows == 0 || cols == 0 {
            return Err(HtoError::Format("matrix dimensions must be positive".into()));
        }
        crate::linalg::check_dim(rows, cols)?;
        if self.entries.len() != rows * cols {
            return Err(HtoError::Format(format!(
                "expected {} entries for a {rows}×{cols} matrix, found {}",
                rows * cols,
                self.entries.len()
            )));
        }
        if self.entries.iter().flatten().any(|x| !x.is_finite()) {
            return Err(HtoError::Format("matrix entries must be finite".into()));
        }
        Ok(Mat::from_fn(rows, cols, |i, j| {
            let [re, im] = self.entries[i * cols + j];
            C64::new(re, im)
        }))
    }

    pub fn to_hermitian(&self, units: Units) -> Result<HermitianOperator> {
        HermitianOperator::new(self.to_matrix()?, units)
    }

    pub fn to_state(&self) -> Result<DensityMatrix> {
        DensityMatrix::new(self.to_matrix()?)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelJson {
    pub dim_in: usize,
    pub dim_out: usize,
    pub kraus: Vec<MatrixJson>,
}

impl ChannelJson {
    pub fn from_channel(ch: &KrausChannel) -> Self {
        Self {
            dim_in: ch.dim_in(),
            dim_out: ch.dim_out(),
            kraus: ch.ops().iter().map(MatrixJson::from_matrix).collect(),
        }
    }

    pub fn to_channel(&self) -> Result<KrausChannel> {
        let ops = self
            .kraus
            .iter()
            .map(MatrixJson::to_matrix)
            .collect::<Result<Vec<_>>>()?;
        if ops.iter().any(|m| m.shape() != (self.dim_out, self.dim_in)) {
            return Err(HtoError::Shape(format!(
                "every Kraus operator must be {}×{}",
                self.dim_out, self.dim_in
            )));
        }
        KrausChannel::new(ops)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RealizationJson {
    #[serde(rename = "dim_A")]
    pub dim_a: usize,
    pub beta: f64,
    pub bath_h: MatrixJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bath_h_out: Option<MatrixJson>,
    pub isometry: MatrixJson,
}

impl RealizationJson {
    pub fn from_realization(r: &DenseRealization) -> Self {
        let same = r.bath_h_out().dim() == r.bath_h().dim()
            && crate::linalg::max_abs(&(r.bath_h_out().matrix() - r.bath_h().matrix())) == 0.0;
        Self {
            dim_a: r.dim_a(),
            beta: r.beta(),
            bath_h: MatrixJson::from_matrix(r.bath_h().matrix()),
            bath_h_out: (!same).then(|| MatrixJson::from_matrix(r.bath_h_out().matrix())),
            isometry: MatrixJson::from_matrix(r.isometry().matrix()),
        }
    }

    pub fn to_realization(&self) -> Result<DenseRealization> {
        let h = self.bath_h.to_hermitian(Units::Energy)?;
        let h_out = match &self.bath_h_out {
            Some(m) => m.to_hermitian(Units::Energy)?,
            None => h.clone(),
        };
        let v = Isometry::new(self.isometry.to_matrix()?)?;
        DenseRealization::with_output_bath(self.dim_a, h, h_out, self.beta, v)
    }
}
