//! JSON representation of complex matrices: row-major nested arrays of
//! `[re, im]` pairs. An `n×0` matrix is `n` empty rows.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::linalg::{CMatrix, C64};

pub fn to_rows(m: &CMatrix) -> Vec<Vec<C64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

pub fn from_rows(rows: &[Vec<C64>]) -> Result<CMatrix, String> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|row| row.len() != c) {
        return Err("ragged matrix rows".into());
    }
    if rows.iter().flatten().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err("non-finite matrix entry".into());
    }
    Ok(CMatrix::from_fn(r, c, |i, j| rows[i][j]))
}

pub fn serialize<S: Serializer>(m: &CMatrix, s: S) -> Result<S::Ok, S::Error> {
    to_rows(m).serialize(s)
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CMatrix, D::Error> {
    let rows = Vec::<Vec<C64>>::deserialize(d)?;
    from_rows(&rows).map_err(D::Error::custom)
}

/// Newtype for places where a matrix appears inside generic containers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct JsonMatrix(#[serde(with = "self")] pub CMatrix);
