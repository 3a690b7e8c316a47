//! Serialization helpers: complex numbers are written as `[re, im]` pairs.

use serde::ser::{SerializeSeq, Serializer};
use serde::Serialize;

use crate::linalg::{CMatrix, C64};

pub fn ser_c<S: Serializer>(z: &C64, s: S) -> Result<S::Ok, S::Error> {
    [z.re, z.im].serialize(s)
}

pub fn ser_cvec<S: Serializer>(v: &[C64], s: S) -> Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for z in v {
        seq.serialize_element(&[z.re, z.im])?;
    }
    seq.end()
}

pub fn ser_cpair<S: Serializer>(v: &[C64; 2], s: S) -> Result<S::Ok, S::Error> {
    ser_cvec(v, s)
}

/// Matrix as a list of rows.
pub fn ser_cmat<S: Serializer>(m: &CMatrix, s: S) -> Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(m.rows()))?;
    for i in 0..m.rows() {
        let row: Vec<[f64; 2]> = m.row(i).iter().map(|z| [z.re, z.im]).collect();
        seq.serialize_element(&row)?;
    }
    seq.end()
}
