//! JSON-lines persistence of chain traces.
//!
//! One object per stored draw:
//! `{"chain": 0, "index": 0, "iteration": 209, "energy": 1.2, "accepted": true, "matrix": ...}`
//! where `matrix` is `[[x, ...], ...]` for real draws and `[[[re, im], ...], ...]`
//! for complex draws. `chain` is omitted for single-chain traces.

use std::io::{BufRead, Write};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::field::{Field, Scalar};
use crate::manifold::PdMatrix;
use crate::sampler::ChainTrace;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub chain: Option<usize>,
    pub index: usize,
    pub iteration: usize,
    pub energy: Option<f64>,
    pub accepted: bool,
    pub matrix: Value,
}

pub fn matrix_to_json<T: Scalar>(m: &DMatrix<T>) -> Value {
    let rows = m.row_iter().map(|row| {
        Value::Array(
            row.iter()
                .map(|x| match T::FIELD {
                    Field::Real => Value::from(x.real()),
                    Field::Complex => Value::from(vec![x.real(), x.imaginary()]),
                })
                .collect(),
        )
    });
    Value::Array(rows.collect())
}

pub fn matrix_from_json<T: Scalar>(v: &Value) -> Result<DMatrix<T>> {
    let bad = || Error::structural("matrix must be a square array of rows");
    let rows = v.as_array().ok_or_else(bad)?;
    let d = rows.len();
    let mut m = DMatrix::<T>::zeros(d, d);
    for (i, row) in rows.iter().enumerate() {
        let row = row.as_array().filter(|r| r.len() == d).ok_or_else(bad)?;
        for (j, x) in row.iter().enumerate() {
            m[(i, j)] = match (T::FIELD, x) {
                (Field::Real, Value::Number(n)) => T::from_parts(n.as_f64().ok_or_else(bad)?, 0.0),
                (Field::Complex, Value::Array(p)) if p.len() == 2 => {
                    let re = p[0].as_f64().ok_or_else(bad)?;
                    let im = p[1].as_f64().ok_or_else(bad)?;
                    T::from_parts(re, im)
                }
                _ => return Err(Error::structural(format!("entry ({i}, {j}) does not match the {} field", T::FIELD))),
            };
        }
    }
    Ok(m)
}

pub fn records<T: Scalar>(trace: &ChainTrace<T>, chain: Option<usize>) -> impl Iterator<Item = TraceRecord> + '_ {
    (0..trace.len()).map(move |k| TraceRecord {
        chain,
        index: k,
        iteration: trace.iterations[k],
        energy: Some(trace.energies[k]).filter(|e| e.is_finite()),
        accepted: trace.draw_accepted[k],
        matrix: matrix_to_json(trace.draws[k].matrix()),
    })
}

pub fn write_trace<T: Scalar, W: Write>(out: &mut W, trace: &ChainTrace<T>, chain: Option<usize>) -> Result<()> {
    for rec in records(trace, chain) {
        serde_json::to_writer(&mut *out, &rec).map_err(|e| Error::Io(e.to_string()))?;
        out.write_all(b"\n").map_err(|e| Error::Io(e.to_string()))?;
    }
    Ok(())
}

/// Reads records back, returning each with its parsed matrix.
pub fn read_trace<T: Scalar, R: BufRead>(input: R) -> Result<Vec<(TraceRecord, PdMatrix<T>)>> {
    let mut out = Vec::new();
    for (n, line) in input.lines().enumerate() {
        let line = line.map_err(|e| Error::Io(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: TraceRecord =
            serde_json::from_str(&line).map_err(|e| Error::structural(format!("trace line {}: {e}", n + 1)))?;
        let m = PdMatrix::new(matrix_from_json(&rec.matrix)?)?;
        out.push((rec, m));
    }
    Ok(out)
}
