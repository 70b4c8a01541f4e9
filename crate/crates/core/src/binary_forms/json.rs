use num_complex::Complex64;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{BinaryForm, PointP1};
use crate::error::{Error, Result};
use crate::scalar::{format_rational, parse_rational, FieldKind, Scalar};

/// Scalars with a JSON encoding: rationals as `"p/q"`, complex as `[re, im]`.
pub trait JsonScalar: Scalar {
    fn to_json(&self) -> Value;
    fn from_json(v: &Value) -> Result<Self>;
}

impl JsonScalar for BigRational {
    fn to_json(&self) -> Value {
        Value::String(format_rational(self))
    }

    fn from_json(v: &Value) -> Result<Self> {
        match v {
            Value::String(s) => {
                parse_rational(s).ok_or_else(|| Error::Parse(format!("bad rational {s:?}")))
            }
            Value::Number(n) if n.is_i64() => Ok(<BigRational as Scalar>::from_i64(n.as_i64().unwrap())),
            other => Err(Error::Parse(format!("expected a \"p/q\" string, got {other}"))),
        }
    }
}

impl JsonScalar for Complex64 {
    fn to_json(&self) -> Value {
        serde_json::json!([self.re, self.im])
    }

    fn from_json(v: &Value) -> Result<Self> {
        match v {
            Value::Array(a) if a.len() == 2 => {
                let re = a[0].as_f64();
                let im = a[1].as_f64();
                match (re, im) {
                    (Some(re), Some(im)) => Ok(Complex64::new(re, im)),
                    _ => Err(Error::Parse(format!("bad complex {v}"))),
                }
            }
            Value::Number(n) => Ok(Complex64::new(n.as_f64().unwrap_or(f64::NAN), 0.0)),
            other => Err(Error::Parse(format!("expected [re, im], got {other}"))),
        }
    }
}

impl JsonScalar for f64 {
    fn to_json(&self) -> Value {
        serde_json::json!(self)
    }

    fn from_json(v: &Value) -> Result<Self> {
        v.as_f64().ok_or_else(|| Error::Parse(format!("expected a number, got {v}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormJson {
    pub degree: usize,
    pub field: FieldKind,
    pub coeffs: Vec<Value>,
}

impl<T: JsonScalar> BinaryForm<T> {
    pub fn to_json(&self) -> FormJson {
        FormJson {
            degree: self.degree(),
            field: T::KIND,
            coeffs: self.coeffs().iter().map(|c| c.to_json()).collect(),
        }
    }

    pub fn from_json(j: &FormJson) -> Result<Self> {
        if j.field != T::KIND {
            return Err(Error::FieldMismatch {
                left: T::KIND,
                right: j.field,
            });
        }
        if j.coeffs.len() != j.degree + 1 {
            return Err(Error::Parse(format!(
                "degree {} needs {} coefficients, got {}",
                j.degree,
                j.degree + 1,
                j.coeffs.len()
            )));
        }
        let coeffs = j.coeffs.iter().map(T::from_json).collect::<Result<Vec<T>>>()?;
        Ok(BinaryForm::new(coeffs))
    }
}

/// A scalar whose field is only known at runtime.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyScalar {
    Rational(BigRational),
    Complex(Complex64),
}

#[derive(Clone, Debug, PartialEq)]
pub enum AnyPoint {
    Rational(PointP1<BigRational>),
    Complex(PointP1<Complex64>),
}

/// A form whose field is only known at runtime (as read from JSON).
#[derive(Clone, Debug, PartialEq)]
pub enum AnyForm {
    Rational(BinaryForm<BigRational>),
    Complex(BinaryForm<Complex64>),
}

impl AnyPoint {
    pub fn field(&self) -> FieldKind {
        match self {
            AnyPoint::Rational(_) => FieldKind::Rational,
            AnyPoint::Complex(_) => FieldKind::Complex,
        }
    }
}

impl AnyForm {
    pub fn field(&self) -> FieldKind {
        match self {
            AnyForm::Rational(_) => FieldKind::Rational,
            AnyForm::Complex(_) => FieldKind::Complex,
        }
    }

    pub fn from_json(j: &FormJson) -> Result<Self> {
        match j.field {
            FieldKind::Rational => Ok(AnyForm::Rational(BinaryForm::from_json(j)?)),
            FieldKind::Complex => Ok(AnyForm::Complex(BinaryForm::from_json(j)?)),
            FieldKind::Real => Err(Error::Parse("forms are rational or complex".into())),
        }
    }

    pub fn to_json(&self) -> FormJson {
        match self {
            AnyForm::Rational(f) => f.to_json(),
            AnyForm::Complex(f) => f.to_json(),
        }
    }

    /// Evaluation that rejects a point from a different field.
    pub fn eval(&self, p: &AnyPoint) -> Result<AnyScalar> {
        match (self, p) {
            (AnyForm::Rational(f), AnyPoint::Rational(p)) => Ok(AnyScalar::Rational(f.eval(p))),
            (AnyForm::Complex(f), AnyPoint::Complex(p)) => Ok(AnyScalar::Complex(f.eval(p))),
            _ => Err(Error::FieldMismatch {
                left: self.field(),
                right: p.field(),
            }),
        }
    }

    /// Gcd degree of two runtime-typed forms; mixed fields are rejected.
    pub fn gcd_degree(&self, other: &AnyForm) -> Result<usize> {
        match (self, other) {
            (AnyForm::Rational(f), AnyForm::Rational(g)) => super::gcd_degree(f, g),
            (AnyForm::Complex(f), AnyForm::Complex(g)) => super::gcd_degree(f, g),
            _ => Err(Error::FieldMismatch {
                left: self.field(),
                right: other.field(),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    #[test]
    fn rational_round_trip() {
        let f = BinaryForm::new(vec![rat(1, 2), rat(-3, 1), rat(0, 1)]);
        let j = f.to_json();
        let text = serde_json::to_string(&j).unwrap();
        assert_eq!(text, r#"{"degree":2,"field":"rational","coeffs":["1/2","-3/1","0/1"]}"#);
        let back: FormJson = serde_json::from_str(&text).unwrap();
        assert_eq!(BinaryForm::<BigRational>::from_json(&back).unwrap(), f);
    }

    #[test]
    fn complex_round_trip_and_mismatch() {
        let f = BinaryForm::new(vec![Complex64::new(1.0, -0.5), Complex64::new(0.0, 2.0)]);
        let j = f.to_json();
        assert_eq!(BinaryForm::<Complex64>::from_json(&j).unwrap(), f);
        assert!(matches!(
            BinaryForm::<BigRational>::from_json(&j),
            Err(Error::FieldMismatch { .. })
        ));
        let any = AnyForm::from_json(&j).unwrap();
        let p = AnyPoint::Rational(PointP1::infinity());
        assert!(matches!(any.eval(&p), Err(Error::FieldMismatch { .. })));
        let q = AnyForm::Rational(BinaryForm::new(vec![rat(1, 1), rat(1, 1)]));
        assert!(matches!(any.gcd_degree(&q), Err(Error::FieldMismatch { .. })));
    }

    #[test]
    fn rejects_unknown_fields_and_bad_lengths() {
        let bad = r#"{"degree":1,"field":"rational","coeffs":["1"],"extra":0}"#;
        assert!(serde_json::from_str::<FormJson>(bad).is_err());
        let short: FormJson =
            serde_json::from_str(r#"{"degree":2,"field":"rational","coeffs":["1","2"]}"#).unwrap();
        assert!(BinaryForm::<BigRational>::from_json(&short).is_err());
    }
}
