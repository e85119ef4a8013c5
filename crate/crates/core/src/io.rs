//! Representation files: `{"k", "d", "u", "v", "mats"}` with entries given
//! as JSON numbers or `"p/q"` strings.

use std::fmt::Write as _;

use serde::{Deserialize, Deserializer, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::linrep::LinearRepresentation;
use crate::matrix::Matrix;
use crate::scalar::{format_rational, parse_rational, Scalar, Q};

/// Which backend a parsed file is loaded into.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NumericMode {
    /// Exact unless some entry is written as a decimal or exponent literal.
    #[default]
    Auto,
    Rational,
    Float,
}

/// A representation in whichever backend the input selected.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyRep {
    Exact(LinearRepresentation<Q>),
    Float(LinearRepresentation<f64>),
}

impl AnyRep {
    pub fn mode_name(&self) -> &'static str {
        match self {
            AnyRep::Exact(_) => "rational",
            AnyRep::Float(_) => "float",
        }
    }

    pub fn k(&self) -> usize {
        match self {
            AnyRep::Exact(r) => r.k(),
            AnyRep::Float(r) => r.k(),
        }
    }

    pub fn to_f64(&self) -> LinearRepresentation<f64> {
        match self {
            AnyRep::Exact(r) => r.to_f64(),
            AnyRep::Float(r) => r.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        match self {
            AnyRep::Exact(r) => to_json(r),
            AnyRep::Float(r) => to_json(r),
        }
    }
}

#[derive(Clone, Debug)]
struct Entry {
    exact: Q,
    /// Written as a decimal or exponent literal rather than an integer or `"p/q"`.
    decimal: bool,
}

impl<'de> Deserialize<'de> for Entry {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        match Value::deserialize(d)? {
            Value::Number(n) => {
                let text = n.to_string();
                let exact =
                    parse_rational(&text).ok_or_else(|| D::Error::custom(format!("unreadable number {text}")))?;
                Ok(Entry { exact, decimal: text.contains(['.', 'e', 'E']) })
            }
            Value::String(s) => match parse_rational(&s) {
                Some(exact) => Ok(Entry { decimal: !s.contains('/') && s.contains(['.', 'e', 'E']), exact }),
                None => Err(D::Error::custom(format!("expected a number or \"p/q\", found \"{s}\""))),
            },
            other => Err(D::Error::custom(format!("expected a number or \"p/q\", found {other}"))),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    k: usize,
    d: usize,
    u: Vec<Entry>,
    v: Vec<Entry>,
    mats: Vec<Vec<Vec<Entry>>>,
}

#[derive(Deserialize)]
#[serde(try_from = "RawFile")]
struct RepFile(RawFile);

impl TryFrom<RawFile> for RepFile {
    type Error = String;

    fn try_from(raw: RawFile) -> std::result::Result<Self, String> {
        if raw.k < 2 {
            return Err(format!("k must be at least 2, got {}", raw.k));
        }
        if raw.d == 0 {
            return Err("d must be at least 1".into());
        }
        if raw.mats.len() != raw.k {
            return Err(format!("k = {} but {} matrices were given", raw.k, raw.mats.len()));
        }
        if raw.u.len() != raw.d || raw.v.len() != raw.d {
            return Err(format!("d = {} but u has {} and v has {} entries", raw.d, raw.u.len(), raw.v.len()));
        }
        for (j, m) in raw.mats.iter().enumerate() {
            if m.len() != raw.d || m.iter().any(|row| row.len() != raw.d) {
                return Err(format!("matrix {j} is not {0}×{0}", raw.d));
            }
        }
        Ok(RepFile(raw))
    }
}

fn build<T: Scalar>(raw: &RawFile, conv: impl Fn(&Q) -> T) -> Result<LinearRepresentation<T>> {
    let vec = |xs: &[Entry]| xs.iter().map(|e| conv(&e.exact)).collect::<Vec<T>>();
    let mats = raw.mats.iter().map(|m| Matrix::from_rows(m.iter().map(|row| vec(row)).collect())).collect();
    LinearRepresentation::new(vec(&raw.u), mats, vec(&raw.v))
}

/// Parses a representation file. Errors carry the line and column reported
/// by the JSON reader.
pub fn parse_representation(text: &str, mode: NumericMode) -> Result<AnyRep> {
    let RepFile(raw) = serde_json::from_str::<RepFile>(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: strip_position(&e.to_string()),
    })?;
    let has_decimal = raw.u.iter().chain(&raw.v).chain(raw.mats.iter().flatten().flatten()).any(|e| e.decimal);
    let float = match mode {
        NumericMode::Auto => has_decimal,
        NumericMode::Rational => false,
        NumericMode::Float => true,
    };
    if float {
        build(&raw, Scalar::to_f64).map(AnyRep::Float)
    } else {
        build(&raw, Q::clone).map(AnyRep::Exact)
    }
}

fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}

fn entry_text<T: Scalar>(x: &T) -> String {
    match x.to_rational() {
        Some(q) if q.is_integer() => q.numer().to_string(),
        Some(q) => format!("\"{}\"", format_rational(&q)),
        None => {
            let f = x.to_f64();
            // serde_json renders the shortest round-tripping form.
            serde_json::to_string(&f).unwrap_or_else(|_| "null".into())
        }
    }
}

fn row_text<T: Scalar>(xs: &[T]) -> String {
    let parts: Vec<String> = xs.iter().map(entry_text).collect();
    format!("[{}]", parts.join(", "))
}

/// Serialises a representation; exact entries are written as integers or
/// `"p/q"` strings, float entries as JSON numbers.
pub fn to_json<T: Scalar>(rep: &LinearRepresentation<T>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{{");
    let _ = writeln!(out, "  \"k\": {},", rep.k());
    let _ = writeln!(out, "  \"d\": {},", rep.dim());
    let _ = writeln!(out, "  \"u\": {},", row_text(rep.u()));
    let _ = writeln!(out, "  \"v\": {},", row_text(rep.v()));
    let _ = writeln!(out, "  \"mats\": [");
    for (j, m) in rep.mats().iter().enumerate() {
        let rows: Vec<String> = m.to_rows().iter().map(|r| row_text(r)).collect();
        let sep = if j + 1 < rep.k() { "," } else { "" };
        let _ = writeln!(out, "    [{}]{sep}", rows.join(", "));
    }
    let _ = writeln!(out, "  ]");
    out.push('}');
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    #[test]
    fn exact_round_trip() {
        for (name, rep) in corpus::named() {
            let text = to_json(&rep);
            let back = parse_representation(&text, NumericMode::Auto).unwrap();
            assert_eq!(back, AnyRep::Exact(rep), "{name}");
        }
    }

    #[test]
    fn float_round_trip() {
        let rep = corpus::rotation(0.3, 0.1, 0.2);
        let back = parse_representation(&to_json(&rep), NumericMode::Auto).unwrap();
        assert_eq!(back, AnyRep::Float(rep));
    }

    #[test]
    fn modes() {
        let text = r#"{"k": 2, "d": 1, "u": [1], "v": [0.5], "mats": [[[1]], [["1/2"]]]}"#;
        assert_eq!(parse_representation(text, NumericMode::Auto).unwrap().mode_name(), "float");
        match parse_representation(text, NumericMode::Rational).unwrap() {
            AnyRep::Exact(r) => assert_eq!(r.v()[0], Q::from_ratio(1, 2)),
            _ => panic!(),
        }
        let ints = r#"{"k": 2, "d": 1, "u": [1], "v": [1], "mats": [[[1]], [["1/2"]]]}"#;
        assert_eq!(parse_representation(ints, NumericMode::Auto).unwrap().mode_name(), "rational");
        assert_eq!(parse_representation(ints, NumericMode::Float).unwrap().mode_name(), "float");
    }

    #[test]
    fn errors_carry_positions() {
        let text = "{\"k\": 2, \"d\": 1,\n \"u\": [\"x/y\"], \"v\": [1], \"mats\": [[[1]], [[1]]]}";
        match parse_representation(text, NumericMode::Auto) {
            Err(Error::Parse { line, message, .. }) => {
                assert_eq!(line, 2);
                assert!(message.contains("x/y"), "{message}");
            }
            other => panic!("{other:?}"),
        }
        let short = r#"{"k": 3, "d": 1, "u": [1], "v": [1], "mats": [[[1]], [[1]]]}"#;
        assert!(matches!(parse_representation(short, NumericMode::Auto), Err(Error::Parse { .. })));
        assert!(matches!(parse_representation("{\"k\": 2", NumericMode::Auto), Err(Error::Parse { .. })));
    }
}
