//! JSON form of operators and states shared by the CLI:
//!
//! ```json
//! {"dims": {"dA": 2, "dB": 2, "copies": 1},
//!  "matrix": [[[re, im], ...], ...]}
//! ```
//!
//! Rows are listed in order; each entry is a `[re, im]` pair.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{
    c, hermitian_defect, BipartiteDims, CMat, DensityMatrix, HermitianOperator, HERMITIAN_TOL,
};
use crate::error::{Error, Result};

pub type JsonRows = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixPayload {
    pub dims: BipartiteDims,
    pub matrix: JsonRows,
}

pub fn rows_from_matrix(m: &CMat) -> JsonRows {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| [m[(i, j)].re, m[(i, j)].im])
                .collect()
        })
        .collect()
}

/// Parses a rectangular row list; `field` names the payload element in
/// error messages.
pub fn matrix_from_rows(rows: &JsonRows, field: &str) -> Result<CMat> {
    let nrows = rows.len();
    if nrows == 0 {
        return Err(Error::schema(field, "matrix has no rows"));
    }
    let ncols = rows[0].len();
    if ncols == 0 {
        return Err(Error::schema(field, "matrix has empty rows"));
    }
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != ncols) {
        return Err(Error::schema(
            format!("{field}[{i}]"),
            format!("row has {} entries, expected {ncols}", r.len()),
        ));
    }
    let mut m = CMat::zeros(nrows, ncols);
    for (i, row) in rows.iter().enumerate() {
        for (j, z) in row.iter().enumerate() {
            if !z[0].is_finite() || !z[1].is_finite() {
                return Err(Error::schema(
                    format!("{field}[{i}][{j}]"),
                    "non-finite entry",
                ));
            }
            m[(i, j)] = c(z[0], z[1]);
        }
    }
    Ok(m)
}

fn parse_payload(text: &str) -> Result<MatrixPayload> {
    let v: Value = serde_json::from_str(text)?;
    let dims_v = v
        .get("dims")
        .ok_or_else(|| Error::schema("dims", "missing"))?;
    let dims: BipartiteDims =
        serde_json::from_value(dims_v.clone()).map_err(|e| Error::schema("dims", e.to_string()))?;
    let dims = BipartiteDims::new(dims.dim_a, dims.dim_b, dims.copies)
        .map_err(|e| Error::schema("dims", e.to_string()))?;
    let matrix_v = v
        .get("matrix")
        .ok_or_else(|| Error::schema("matrix", "missing"))?;
    let matrix: JsonRows = serde_json::from_value(matrix_v.clone())
        .map_err(|e| Error::schema("matrix", e.to_string()))?;
    Ok(MatrixPayload { dims, matrix })
}

/// Square, Hermitian (within `HERMITIAN_TOL`) and sized to match `dims`.
fn checked_matrix(payload: &MatrixPayload) -> Result<CMat> {
    let m = matrix_from_rows(&payload.matrix, "matrix")?;
    if !m.is_square() {
        return Err(Error::schema(
            "matrix",
            format!("not square: {}x{}", m.nrows(), m.ncols()),
        ));
    }
    payload
        .dims
        .require_size(m.nrows(), m.ncols())
        .map_err(|e| Error::schema("matrix", e.to_string()))?;
    let defect = hermitian_defect(&m);
    if defect > HERMITIAN_TOL {
        return Err(Error::schema(
            "matrix",
            format!("not Hermitian: max |m - m†| = {defect:.3e}"),
        ));
    }
    Ok(m)
}

pub fn operator_from_json(text: &str) -> Result<HermitianOperator> {
    let p = parse_payload(text)?;
    let m = checked_matrix(&p)?;
    HermitianOperator::new(p.dims, m)
}

pub fn density_from_json(text: &str) -> Result<DensityMatrix> {
    let p = parse_payload(text)?;
    let m = checked_matrix(&p)?;
    DensityMatrix::new(p.dims, m).map_err(|e| Error::schema("matrix", e.to_string()))
}

pub fn operator_to_json(h: &HermitianOperator) -> Value {
    serde_json::to_value(MatrixPayload {
        dims: h.dims(),
        matrix: rows_from_matrix(h.matrix()),
    })
    .expect("payload serializes")
}

pub fn density_to_json(rho: &DensityMatrix) -> Value {
    serde_json::to_value(MatrixPayload {
        dims: rho.dims(),
        matrix: rows_from_matrix(rho.matrix()),
    })
    .expect("payload serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_square() {
        let text = r#"{"dims":{"dA":1,"dB":2,"copies":1},"matrix":[[[1,0],[0,0]],[[0,0]]]}"#;
        let err = operator_from_json(text).unwrap_err();
        assert!(
            matches!(err, Error::Schema { ref field, .. } if field == "matrix[1]"),
            "{err}"
        );
    }

    #[test]
    fn rejects_non_hermitian() {
        let text =
            r#"{"dims":{"dA":1,"dB":2,"copies":1},"matrix":[[[1,0],[0.1,0]],[[0,0],[0,0]]]}"#;
        let err = operator_from_json(text).unwrap_err();
        assert!(err.to_string().contains("not Hermitian"), "{err}");
    }

    #[test]
    fn accepts_round_off_asymmetry() {
        let text =
            r#"{"dims":{"dA":1,"dB":2,"copies":1},"matrix":[[[0.5,0],[0,1e-12]],[[0,0],[0.5,0]]]}"#;
        let rho = density_from_json(text).unwrap();
        assert!((rho.trace() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn missing_dims_names_field() {
        let err = operator_from_json(r#"{"matrix":[[[1,0]]]}"#).unwrap_err();
        assert!(matches!(err, Error::Schema { ref field, .. } if field == "dims"));
    }

    #[test]
    fn density_round_trip() {
        let rho = DensityMatrix::maximally_mixed(BipartiteDims::single(2, 3));
        let back = density_from_json(&density_to_json(&rho).to_string()).unwrap();
        assert_eq!(back, rho);
    }
}
