//! JSON file formats.
//!
//! Decomposition: `{"dims":[n1,…,nd],"rank":r,"factors":[M1,…,Md]}` where
//! `Mk` is a list of `r` columns, each a list of `n_k` numbers.
//! Dense tensor: `{"dims":[…],"values":[…]}` in Kronecker order.
//!
//! Doubles are written with shortest round-trip decimals, so both formats
//! reload bit-identically.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{DenseTensor, Params, Shape};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecompositionFile {
    pub dims: Vec<usize>,
    pub rank: usize,
    pub factors: Vec<Vec<Vec<f64>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensorFile {
    pub dims: Vec<usize>,
    pub values: Vec<f64>,
}

impl From<&Params> for DecompositionFile {
    fn from(p: &Params) -> Self {
        let shape = p.shape();
        let factors = (0..shape.order())
            .map(|k| (0..p.rank()).map(|i| p.factor(i, k).to_vec()).collect())
            .collect();
        DecompositionFile {
            dims: shape.dims().to_vec(),
            rank: shape.rank(),
            factors,
        }
    }
}

impl TryFrom<DecompositionFile> for Params {
    type Error = Error;

    fn try_from(file: DecompositionFile) -> Result<Self> {
        let shape = Shape::new(file.dims, file.rank)?;
        if file.factors.len() != shape.order() {
            return Err(Error::Shape(format!(
                "expected {} factor matrices, got {}",
                shape.order(),
                file.factors.len()
            )));
        }
        for (k, columns) in file.factors.iter().enumerate() {
            if columns.len() != shape.rank() {
                return Err(Error::Shape(format!(
                    "factor {k} has {} columns, expected {}",
                    columns.len(),
                    shape.rank()
                )));
            }
            if let Some(c) = columns.iter().position(|c| c.len() != shape.dims()[k]) {
                return Err(Error::Shape(format!(
                    "column {c} of factor {k} has length {}, expected {}",
                    columns[c].len(),
                    shape.dims()[k]
                )));
            }
        }
        let mut data = Vec::with_capacity(shape.n_params());
        for i in 0..shape.rank() {
            for columns in &file.factors {
                data.extend(&columns[i]);
            }
        }
        Params::new(shape, data)
    }
}

impl From<&DenseTensor> for TensorFile {
    fn from(t: &DenseTensor) -> Self {
        TensorFile {
            dims: t.dims().to_vec(),
            values: t.values().to_vec(),
        }
    }
}

impl TryFrom<TensorFile> for DenseTensor {
    type Error = Error;

    fn try_from(file: TensorFile) -> Result<Self> {
        DenseTensor::new(file.dims, file.values)
    }
}

pub fn params_to_json(p: &Params) -> String {
    serde_json::to_string(&DecompositionFile::from(p)).expect("finite floats serialize")
}

pub fn params_from_json(s: &str) -> Result<Params> {
    let file: DecompositionFile = serde_json::from_str(s)?;
    Params::try_from(file)
}

pub fn tensor_to_json(t: &DenseTensor) -> String {
    serde_json::to_string(&TensorFile::from(t)).expect("finite floats serialize")
}

pub fn tensor_from_json(s: &str) -> Result<DenseTensor> {
    let file: TensorFile = serde_json::from_str(s)?;
    DenseTensor::try_from(file)
}

pub fn read_params(path: impl AsRef<Path>) -> Result<Params> {
    params_from_json(&fs::read_to_string(path)?)
}

pub fn write_params(path: impl AsRef<Path>, p: &Params) -> Result<()> {
    fs::write(path, params_to_json(p) + "\n")?;
    Ok(())
}

pub fn read_tensor(path: impl AsRef<Path>) -> Result<DenseTensor> {
    tensor_from_json(&fs::read_to_string(path)?)
}

pub fn write_tensor(path: impl AsRef<Path>, t: &DenseTensor) -> Result<()> {
    fs::write(path, tensor_to_json(t) + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decomposition_layout() {
        let shape = Shape::new(vec![2, 3], 2).unwrap();
        let p = Params::new(shape, (1..=10).map(f64::from).collect()).unwrap();
        let json = params_to_json(&p);
        assert_eq!(
            json,
            r#"{"dims":[2,3],"rank":2,"factors":[[[1.0,2.0],[6.0,7.0]],[[3.0,4.0,5.0],[8.0,9.0,10.0]]]}"#
        );
        assert_eq!(params_from_json(&json).unwrap(), p);
    }

    #[test]
    fn malformed_json_reports_position() {
        let err = params_from_json("{\"dims\": [2,\n 3,]}").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 2"), "{msg}");
    }

    #[test]
    fn inconsistent_factor_shapes_are_rejected() {
        let bad = r#"{"dims":[2,2],"rank":1,"factors":[[[1,2]],[[1,2,3]]]}"#;
        assert!(matches!(params_from_json(bad), Err(Error::Shape(_))));
    }

    #[test]
    fn awkward_doubles_round_trip() {
        let vals = vec![0.1, 1.0 / 3.0, -2.5e-300, 1.7976931348623157e308, 5e-324, -0.0];
        let t = DenseTensor::new(vec![2, 3], vals).unwrap();
        let back = tensor_from_json(&tensor_to_json(&t)).unwrap();
        for (a, b) in t.values().iter().zip(back.values()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}
