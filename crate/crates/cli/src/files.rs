//! Channel and genie-instance file formats (JSON, one channel per file).

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use genie_mac_core::{ChannelInstance, OrderedSubset};

use crate::AppError;

/// On-disk channel description: either a full gain matrix `H` or a rank-1
/// pair `(a, b)`, plus power `P` and noise variance `N`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelFile {
    #[serde(rename = "H", default, skip_serializing_if = "Option::is_none")]
    pub h: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<f64>>,
    #[serde(rename = "P")]
    pub p: f64,
    #[serde(rename = "N")]
    pub n: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl ChannelFile {
    /// Parses and validates a channel file into a [`ChannelInstance`].
    ///
    /// Exactly one of the H-form and the (a, b)-form must be present; the
    /// (a, b)-form is expanded to the outer product in the order given.
    pub fn load(path: &std::path::Path) -> Result<(ChannelInstance, Option<String>), AppError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| AppError::Usage(format!("cannot read {}: {e}", path.display())))?;
        let file: ChannelFile = serde_json::from_str(&text)
            .map_err(|e| AppError::Usage(format!("cannot parse {}: {e}", path.display())))?;
        let ch = file.to_instance()?;
        Ok((ch, file.label))
    }

    fn to_instance(&self) -> Result<ChannelInstance, AppError> {
        match (&self.h, &self.a, &self.b) {
            (Some(rows), None, None) => {
                let k = rows.len();
                for (i, row) in rows.iter().enumerate() {
                    if row.len() != k {
                        return Err(AppError::Usage(format!(
                            "H row {} has {} entries, expected {k}",
                            i + 1,
                            row.len()
                        )));
                    }
                }
                let h = DMatrix::from_fn(k, k, |i, j| rows[i][j]);
                Ok(ChannelInstance::new(h, self.p, self.n)?)
            }
            (None, Some(a), Some(b)) => {
                if a.len() != b.len() {
                    return Err(AppError::Usage(format!(
                        "a has {} entries but b has {}",
                        a.len(),
                        b.len()
                    )));
                }
                let k = a.len();
                let av = DVector::from_column_slice(a);
                let bv = DVector::from_column_slice(b);
                let h = DMatrix::from_fn(k, k, |i, j| av[i] * bv[j]);
                Ok(ChannelInstance::new(h, self.p, self.n)?)
            }
            _ => Err(AppError::Usage(
                "channel file must contain exactly one of: H, or both a and b".into(),
            )),
        }
    }
}

/// On-disk genie-MAC instance: decoding order (one-based), gains `G`,
/// optional noise covariance `Sigma` (identity when omitted), and combining
/// matrix `T`. Certificate exports add extra fields, which are ignored here.
#[derive(Debug, Clone, Deserialize)]
pub struct InstanceFile {
    pub subset: Vec<usize>,
    #[serde(rename = "G")]
    pub g: Vec<Vec<f64>>,
    #[serde(rename = "Sigma", default)]
    pub sigma: Option<Vec<Vec<f64>>>,
    #[serde(rename = "T")]
    pub t: Vec<Vec<f64>>,
}

impl InstanceFile {
    pub fn load(path: &std::path::Path) -> Result<Self, AppError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| AppError::Usage(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| AppError::Usage(format!("cannot parse {}: {e}", path.display())))
    }

    /// Validates against a K-user channel, returning the decoding order and
    /// the instance matrices.
    pub fn into_parts(
        self,
        k: usize,
    ) -> Result<(OrderedSubset, genie_mac_core::GenieMacInstance), AppError> {
        let subset = OrderedSubset::from_one_based(&self.subset, k)?;
        let m = self.g.len();
        let g = matrix_from_rows("G", &self.g)?;
        let t = matrix_from_rows("T", &self.t)?;
        let sigma = match &self.sigma {
            Some(rows) => matrix_from_rows("Sigma", rows)?,
            None => DMatrix::identity(m, m),
        };
        Ok((subset, genie_mac_core::GenieMacInstance::new(g, sigma, t)?))
    }
}

/// Certificate export: a valid [`InstanceFile`] plus the construction
/// matrices and the evaluated bound.
#[derive(Debug, Clone, Serialize)]
pub struct CertificateFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub subset: Vec<usize>,
    #[serde(rename = "G")]
    pub g: Vec<Vec<f64>>,
    #[serde(rename = "Sigma")]
    pub sigma: Vec<Vec<f64>>,
    #[serde(rename = "T")]
    pub t: Vec<Vec<f64>>,
    pub c: Vec<f64>,
    #[serde(rename = "D")]
    pub d: Vec<Vec<f64>>,
    #[serde(rename = "V")]
    pub v: Vec<Vec<f64>>,
    pub bound_bits: f64,
    pub vf_diag_bits: f64,
}

pub fn matrix_from_rows(name: &str, rows: &[Vec<f64>]) -> Result<DMatrix<f64>, AppError> {
    let m = rows.len();
    if m == 0 {
        return Err(AppError::Usage(format!("{name} must be non-empty")));
    }
    let n = rows[0].len();
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(AppError::Usage(format!(
                "{name} row {} has {} entries, expected {n}",
                i + 1,
                row.len()
            )));
        }
    }
    Ok(DMatrix::from_fn(m, n, |i, j| rows[i][j]))
}

pub fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}
