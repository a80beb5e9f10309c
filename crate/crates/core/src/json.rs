//! JSON encodings of complex matrices and vectors: row-major nested arrays
//! with each complex entry written as `[re, im]`.

use serde::{Deserialize, Serialize};

use crate::{CMatrix, CVector, Error, Result, C64};

/// Serialisable form of a complex matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MatrixJson(pub Vec<Vec<[f64; 2]>>);

/// Serialisable form of a complex vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VectorJson(pub Vec<[f64; 2]>);

impl From<&CMatrix> for MatrixJson {
    fn from(m: &CMatrix) -> Self {
        MatrixJson(
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
                .collect(),
        )
    }
}

/// `serialize_with` adapter for matrix fields.
pub fn serialize_matrix<S: serde::Serializer>(m: &CMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
    serde::Serialize::serialize(&MatrixJson::from(m), s)
}

impl MatrixJson {
    /// Decodes a `rows × cols` matrix, rejecting ragged or non-finite input.
    pub fn to_matrix(&self, rows: usize, cols: usize) -> Result<CMatrix> {
        if self.0.len() != rows {
            return Err(Error::invalid(format!("expected {rows} rows, found {}", self.0.len())));
        }
        let mut m = CMatrix::zeros(rows, cols);
        for (i, row) in self.0.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::invalid(format!(
                    "row {i}: expected {cols} entries, found {}",
                    row.len()
                )));
            }
            for (j, z) in row.iter().enumerate() {
                if !z[0].is_finite() || !z[1].is_finite() {
                    return Err(Error::invalid(format!("entry ({i},{j}) is not finite")));
                }
                m[(i, j)] = C64::new(z[0], z[1]);
            }
        }
        Ok(m)
    }
}

impl From<&CVector> for VectorJson {
    fn from(v: &CVector) -> Self {
        VectorJson(v.iter().map(|z| [z.re, z.im]).collect())
    }
}

impl VectorJson {
    pub fn from_vector(v: &CVector) -> Self {
        VectorJson(v.iter().map(|z| [z.re, z.im]).collect())
    }

    pub fn to_vector(&self, len: usize) -> Result<CVector> {
        if self.0.len() != len {
            return Err(Error::invalid(format!(
                "expected vector of length {len}, found {}",
                self.0.len()
            )));
        }
        if self.0.iter().any(|z| !z[0].is_finite() || !z[1].is_finite()) {
            return Err(Error::invalid("vector entry is not finite"));
        }
        Ok(CVector::from_iterator(len, self.0.iter().map(|z| C64::new(z[0], z[1]))))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}
