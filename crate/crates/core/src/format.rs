//! JSON channel files. Matrices are arrays of rows of `[re, im]` pairs.
//!
//! ```json
//! {
//!   "schema_version": "1.0",
//!   "k": 2,
//!   "dims": { "dY": 2, "dZ": 2 },
//!   "sigma": [ [[[0.5, 0], [0, 0]], [[0, 0], [0.5, 0]]], ... ],
//!   "rho":   [ ... ]
//! }
//! ```

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::{
    ChannelMatrices, CqWiretapChannel, Diagnostic, DiagnosticKind, Diagnostics, Side,
};
use crate::error::{Error, Result};
use crate::operator::CMatrix;

pub const SCHEMA_VERSION: &str = "1.0";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dims {
    #[serde(rename = "dY")]
    pub dy: usize,
    #[serde(rename = "dZ")]
    pub dz: usize,
}

pub type RawMatrix = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelFile {
    pub schema_version: String,
    pub k: usize,
    pub dims: Dims,
    pub sigma: Vec<RawMatrix>,
    pub rho: Vec<RawMatrix>,
}

fn to_cmatrix(raw: &RawMatrix) -> Option<CMatrix> {
    let rows = raw.len();
    let cols = raw.first().map_or(0, |r| r.len());
    if raw.iter().any(|r| r.len() != cols) {
        return None;
    }
    Some(CMatrix::from_fn(rows, cols, |i, j| {
        Complex64::new(raw[i][j][0], raw[i][j][1])
    }))
}

fn from_cmatrix(m: &CMatrix) -> RawMatrix {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| [m[(i, j)].re, m[(i, j)].im])
                .collect()
        })
        .collect()
}

impl ChannelFile {
    pub fn parse(text: &str) -> Result<Self> {
        let file: ChannelFile =
            serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        if file.schema_version.split('.').next() != SCHEMA_VERSION.split('.').next() {
            return Err(Error::Format(format!(
                "unsupported schema_version {:?}, expected {SCHEMA_VERSION}",
                file.schema_version
            )));
        }
        Ok(file)
    }

    /// Converts to matrices for validation; ragged rows are reported as shape diagnostics.
    pub fn to_matrices(&self) -> std::result::Result<ChannelMatrices, Diagnostics> {
        let mut issues = Vec::new();
        let mut convert = |side: Side, list: &[RawMatrix]| -> Vec<CMatrix> {
            list.iter()
                .enumerate()
                .filter_map(|(x, raw)| {
                    let m = to_cmatrix(raw);
                    if m.is_none() {
                        issues.push(Diagnostic {
                            kind: DiagnosticKind::Shape,
                            side: Some(side),
                            symbol: Some(x),
                            detail: "rows of unequal length".into(),
                        });
                    }
                    m
                })
                .collect()
        };
        let sigma = convert(Side::Receiver, &self.sigma);
        let rho = convert(Side::Eavesdropper, &self.rho);
        if !issues.is_empty() {
            return Err(Diagnostics {
                pass: false,
                issues,
            });
        }
        Ok(ChannelMatrices {
            k: self.k,
            dy: self.dims.dy,
            dz: self.dims.dz,
            sigma,
            rho,
        })
    }

    /// Parses, checks shapes and validates every state.
    pub fn into_channel(self) -> std::result::Result<CqWiretapChannel, Diagnostics> {
        self.to_matrices()?.into_channel()
    }

    pub fn from_channel(ch: &CqWiretapChannel) -> Self {
        Self::from_matrices(&ChannelMatrices::from(ch))
    }

    pub fn from_matrices(m: &ChannelMatrices) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.into(),
            k: m.k,
            dims: Dims { dy: m.dy, dz: m.dz },
            sigma: m.sigma.iter().map(from_cmatrix).collect(),
            rho: m.rho.iter().map(from_cmatrix).collect(),
        }
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("channel files always serialize")
    }
}
