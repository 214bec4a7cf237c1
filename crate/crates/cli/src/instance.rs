//! Instance files: `{"field": "Q" | {"Fp": p}, "matrix": [[..]], "gram"?: [[..]]}`.
//!
//! Output of `construct` is also accepted: its `witness.gram`, `symmetry` and
//! `setting` fill in anything missing at the top level.

use serde_json::Value;

use invform::arith::Field;
use invform::certificate::{Setting, Symmetry};
use invform::error::Error;
use invform::linalg::Matrix;

#[derive(Debug)]
pub struct Instance {
    pub field: Field,
    pub matrix: Matrix,
    pub gram: Option<Matrix>,
    pub symmetry: Option<Symmetry>,
    pub setting: Option<Setting>,
}

fn parse_error(detail: impl Into<String>) -> Error {
    Error::Parse(detail.into())
}

fn scalar_text(v: &Value) -> Result<String, Error> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) if n.is_i64() || n.is_u64() => Ok(n.to_string()),
        other => Err(parse_error(format!("expected scalar string or integer, got {other}"))),
    }
}

fn parse_matrix(field: Field, v: &Value, name: &str) -> Result<Matrix, Error> {
    let rows = v.as_array().ok_or_else(|| parse_error(format!("{name} must be an array of rows")))?;
    let rows = rows
        .iter()
        .map(|row| {
            row.as_array()
                .ok_or_else(|| parse_error(format!("{name} rows must be arrays")))?
                .iter()
                .map(|e| field.parse(&scalar_text(e)?))
                .collect::<Result<Vec<_>, Error>>()
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let m = Matrix::from_rows(field, rows)?;
    m.require_square()?;
    Ok(m)
}

fn parse_enum<T: serde::de::DeserializeOwned>(v: Option<&Value>, name: &str) -> Result<Option<T>, Error> {
    v.map(|v| serde_json::from_value(v.clone()).map_err(|e| parse_error(format!("{name}: {e}"))))
        .transpose()
}

pub fn parse_instance(text: &str) -> Result<Instance, Error> {
    let v: Value = serde_json::from_str(text).map_err(|e| parse_error(format!("invalid JSON: {e}")))?;
    let field_value = v.get("field").ok_or_else(|| parse_error("missing field"))?;
    let field: Field = serde_json::from_value(field_value.clone()).map_err(|e| parse_error(format!("field: {e}")))?;
    let matrix = parse_matrix(field, v.get("matrix").ok_or_else(|| parse_error("missing matrix"))?, "matrix")?;
    let witness = v.get("witness").filter(|w| !w.is_null());
    let gram = match v.get("gram").or_else(|| witness.and_then(|w| w.get("gram"))) {
        Some(g) => {
            let g = parse_matrix(field, g, "gram")?;
            if g.rows() != matrix.rows() {
                return Err(Error::DimensionMismatch(format!(
                    "gram is {}x{}, matrix is {}x{}",
                    g.rows(),
                    g.cols(),
                    matrix.rows(),
                    matrix.cols()
                )));
            }
            Some(g)
        }
        None => None,
    };
    let symmetry = parse_enum(v.get("symmetry").or_else(|| witness.and_then(|w| w.get("symmetry"))), "symmetry")?;
    let setting = parse_enum(v.get("setting").or_else(|| witness.and_then(|w| w.get("setting"))), "setting")?;
    Ok(Instance {
        field,
        matrix,
        gram,
        symmetry,
        setting,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_rationals_and_primes() {
        let i = parse_instance(r#"{"field":"Q","matrix":[["1/2",1],[0,"-3"]]}"#).unwrap();
        assert_eq!(i.field, Field::Rationals);
        assert_eq!(i.matrix.get(0, 0).to_string(), "1/2");
        let i = parse_instance(r#"{"field":{"Fp":7},"matrix":[[8]],"gram":[[1]],"symmetry":"skew"}"#).unwrap();
        assert_eq!(i.matrix.get(0, 0).to_string(), "1");
        assert!(i.gram.is_some());
        assert_eq!(i.symmetry, Some(Symmetry::Skew));
    }

    #[test]
    fn rejects_bad_input() {
        for bad in [
            r#"{"matrix":[[1]]}"#,
            r#"{"field":"R","matrix":[[1]]}"#,
            r#"{"field":{"Fp":9},"matrix":[[1]]}"#,
            r#"{"field":"Q","matrix":[[1,2]]}"#,
            r#"{"field":"Q","matrix":[["x"]]}"#,
            r#"{"field":"Q","matrix":[[1]],"gram":[[1,0],[0,1]]}"#,
            "not json",
        ] {
            assert!(parse_instance(bad).is_err(), "{bad}");
        }
    }
}
