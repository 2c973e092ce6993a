//! Number formatting shared by every emitted artifact.
//!
//! Floating-point values are written with 17 significant digits so that
//! every file round-trips bit-exactly.

use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

/// Format a float with 17 significant digits (`null`-free; non-finite
/// values are spelled `NaN`, `inf`, `-inf`).
pub fn fmt17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

/// JSON float wrapper serialized with 17 significant digits.
/// Non-finite values become `null`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct F17(pub f64);

impl Serialize for F17 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            let raw = RawValue::from_string(fmt17(self.0)).map_err(serde::ser::Error::custom)?;
            raw.serialize(s)
        } else {
            s.serialize_none()
        }
    }
}

/// `serialize_with` helper for plain `f64` fields.
pub fn ser_f17<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    F17(*x).serialize(s)
}

/// `serialize_with` helper for `Option<f64>` fields.
pub fn ser_opt_f17<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) => F17(*v).serialize(s),
        None => s.serialize_none(),
    }
}

/// `serialize_with` helper for `Vec<f64>` fields.
pub fn ser_vec_f17<S: Serializer>(xs: &[f64], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(xs.len()))?;
    for &x in xs {
        seq.serialize_element(&F17(x))?;
    }
    seq.end()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0] {
            let s = fmt17(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            let mantissa = s.split('e').next().unwrap().replace(['-', '.'], "");
            assert_eq!(mantissa.len(), 17);
        }
    }

    #[test]
    fn json_numbers_parse_back() {
        #[derive(Serialize)]
        struct S {
            #[serde(serialize_with = "ser_f17")]
            a: f64,
            b: F17,
        }
        let txt = serde_json::to_string(&S { a: 0.1, b: F17(f64::NAN) }).unwrap();
        let v: serde_json::Value = serde_json::from_str(&txt).unwrap();
        assert_eq!(v["a"].as_f64().unwrap(), 0.1);
        assert!(v["b"].is_null());
    }
}
