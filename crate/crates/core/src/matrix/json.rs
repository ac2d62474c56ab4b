//! JSON layout: `{"rows": m, "cols": n, "entries": [[[re, im], ...], ...]}`
//! for matrices and `{"dim": n, "entries": [[re, im], ...]}` for vectors.

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{ComplexMatrix, ComplexVector};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixRepr {
    rows: usize,
    cols: usize,
    entries: Vec<Vec<[f64; 2]>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VectorRepr {
    dim: usize,
    entries: Vec<[f64; 2]>,
}

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        MatrixRepr {
            rows: self.rows(),
            cols: self.cols(),
            entries: (0..self.rows())
                .map(|i| self.row(i).iter().map(|z| [z.re, z.im]).collect())
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = MatrixRepr::deserialize(deserializer)?;
        if repr.rows == 0 || repr.cols == 0 {
            return Err(D::Error::custom("rows and cols must be positive"));
        }
        if repr.entries.len() != repr.rows {
            return Err(D::Error::custom(format!(
                "expected {} rows, got {}",
                repr.rows,
                repr.entries.len()
            )));
        }
        let mut data = Vec::with_capacity(repr.rows * repr.cols);
        for (i, row) in repr.entries.iter().enumerate() {
            if row.len() != repr.cols {
                return Err(D::Error::custom(format!(
                    "row {i}: expected {} entries, got {}",
                    repr.cols,
                    row.len()
                )));
            }
            data.extend(row.iter().map(|[re, im]| Complex64::new(*re, *im)));
        }
        ComplexMatrix::from_row_major(repr.rows, repr.cols, data).map_err(D::Error::custom)
    }
}

impl Serialize for ComplexVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        VectorRepr {
            dim: self.dim(),
            entries: self.as_slice().iter().map(|z| [z.re, z.im]).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ComplexVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = VectorRepr::deserialize(deserializer)?;
        if repr.dim == 0 || repr.entries.len() != repr.dim {
            return Err(D::Error::custom(format!(
                "dim {} does not match {} entries",
                repr.dim,
                repr.entries.len()
            )));
        }
        ComplexVector::new(
            repr.entries
                .iter()
                .map(|[re, im]| Complex64::new(*re, *im))
                .collect(),
        )
        .map_err(D::Error::custom)
    }
}
