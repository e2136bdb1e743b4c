//! The hand-written input document, a small TOML file:
//!
//! ```toml
//! p = "3"
//! orientation = "+1"
//! exception = "none"
//!
//! [[spheres]]
//! euler = "1"
//! sign = "+1"
//! ```
//!
//! Integers are decimal strings so they can be arbitrarily large; plain
//! TOML integers are accepted too. `reduce` also takes a bare
//! `form = [["2", "1"], ["1", "0"]]`. [`emit`] writes the canonical layout,
//! which parses back to the same document.

use std::fmt;
use std::ops::Range;

use num_bigint::BigInt;
use serde::Deserialize;
use toml::Spanned;

use crate::forms::SymmetricForm;
use crate::plumbing::{ExceptionFlag, Sign, SingularSetData, Sphere};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Document {
    pub data: Option<SingularSetData>,
    pub form: Option<SymmetricForm>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DocumentError {
    pub line: Option<usize>,
    pub field: String,
    pub message: String,
}

impl fmt::Display for DocumentError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}, field `{}`: {}", self.field, self.message),
            None => write!(f, "field `{}`: {}", self.field, self.message),
        }
    }
}

impl std::error::Error for DocumentError {}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawInt {
    Text(String),
    Int(i64),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSphere {
    euler: Spanned<RawInt>,
    sign: Spanned<RawInt>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDocument {
    p: Option<Spanned<RawInt>>,
    orientation: Option<Spanned<RawInt>>,
    exception: Option<Spanned<String>>,
    spheres: Option<Spanned<Vec<RawSphere>>>,
    form: Option<Spanned<Vec<Vec<RawInt>>>>,
}

struct Source<'a> {
    text: &'a str,
}

impl Source<'_> {
    fn line_of(&self, span: &Range<usize>) -> usize {
        let end = span.start.min(self.text.len());
        self.text[..end].matches('\n').count() + 1
    }

    fn err(&self, span: &Range<usize>, field: &str, message: impl Into<String>) -> DocumentError {
        DocumentError { line: Some(self.line_of(span)), field: field.to_string(), message: message.into() }
    }

    fn integer(&self, v: &Spanned<RawInt>, field: &str) -> Result<BigInt, DocumentError> {
        match v.get_ref() {
            RawInt::Int(i) => Ok(BigInt::from(*i)),
            RawInt::Text(s) => {
                let trimmed = s.strip_prefix('+').unwrap_or(s);
                let well_formed = !trimmed.is_empty()
                    && trimmed.trim_start_matches('-').chars().all(|c| c.is_ascii_digit())
                    && trimmed.matches('-').count() <= 1;
                if !well_formed {
                    return Err(self.err(&v.span(), field, format!("{s:?} is not a decimal integer")));
                }
                trimmed
                    .parse()
                    .map_err(|_| self.err(&v.span(), field, format!("{s:?} is not a decimal integer")))
            }
        }
    }

    fn sign(&self, v: &Spanned<RawInt>, field: &str) -> Result<Sign, DocumentError> {
        let n = self.integer(v, field)?;
        if n == BigInt::from(1) {
            Ok(Sign::Plus)
        } else if n == BigInt::from(-1) {
            Ok(Sign::Minus)
        } else {
            Err(self.err(&v.span(), field, format!("sign must be +1 or -1, got {n}")))
        }
    }
}

fn exception_name(flag: ExceptionFlag) -> &'static str {
    match flag {
        ExceptionFlag::None => "none",
        ExceptionFlag::PseudofreeP3B1 => "pseudofree_p3_b1",
        ExceptionFlag::PseudofreeP3Chern => "pseudofree_p3_chern",
        ExceptionFlag::FixedPointFreeP2Hyperbolic => "fixed_point_free_p2_hyperbolic",
    }
}

fn parse_exception(name: &str) -> Option<ExceptionFlag> {
    [
        ExceptionFlag::None,
        ExceptionFlag::PseudofreeP3B1,
        ExceptionFlag::PseudofreeP3Chern,
        ExceptionFlag::FixedPointFreeP2Hyperbolic,
    ]
    .into_iter()
    .find(|f| exception_name(*f) == name)
}

pub fn parse(text: &str) -> Result<Document, DocumentError> {
    let src = Source { text };
    let raw: RawDocument = toml::from_str(text).map_err(|e| {
        let line = e.span().map(|s| src.line_of(&s));
        let message = e.message().to_string();
        let field = message
            .split('`')
            .nth(1)
            .filter(|_| message.contains("field"))
            .unwrap_or("document")
            .to_string();
        DocumentError { line, field, message }
    })?;

    let form = match &raw.form {
        None => None,
        Some(rows) => {
            let mut parsed = Vec::new();
            for row in rows.get_ref() {
                let mut r = Vec::new();
                for x in row {
                    let v = match x {
                        RawInt::Int(i) => BigInt::from(*i),
                        RawInt::Text(s) => s.strip_prefix('+').unwrap_or(s).parse().map_err(|_| {
                            src.err(&rows.span(), "form", format!("{s:?} is not a decimal integer"))
                        })?,
                    };
                    r.push(v);
                }
                parsed.push(r);
            }
            Some(
                SymmetricForm::from_rows(&parsed)
                    .map_err(|e| src.err(&rows.span(), "form", e.to_string()))?,
            )
        }
    };

    let has_loop_fields =
        raw.p.is_some() || raw.spheres.is_some() || raw.exception.is_some() || raw.orientation.is_some();
    let data = if has_loop_fields {
        let p_field = raw.p.as_ref().ok_or_else(|| DocumentError {
            line: None,
            field: "p".into(),
            message: "missing".into(),
        })?;
        let p_big = src.integer(p_field, "p")?;
        let p: u64 = p_big
            .try_into()
            .map_err(|_| src.err(&p_field.span(), "p", "must be a positive machine-size integer"))?;
        let orientation = match &raw.orientation {
            Some(o) => src.sign(o, "orientation")?,
            None => Sign::Plus,
        };
        let exception = match &raw.exception {
            Some(e) => parse_exception(e.get_ref()).ok_or_else(|| {
                src.err(&e.span(), "exception", format!("unknown exception {:?}", e.get_ref()))
            })?,
            None => ExceptionFlag::None,
        };
        let mut spheres = Vec::new();
        if let Some(list) = &raw.spheres {
            for (k, s) in list.get_ref().iter().enumerate() {
                let euler = src.integer(&s.euler, &format!("spheres[{k}].euler"))?;
                let sign = src.sign(&s.sign, &format!("spheres[{k}].sign"))?;
                spheres.push(Sphere { euler, sign });
            }
        }
        Some(SingularSetData { p, spheres, orientation, exception })
    } else {
        None
    };

    if data.is_none() && form.is_none() {
        return Err(DocumentError {
            line: None,
            field: "document".into(),
            message: "expected `p` and `spheres`, an `exception`, or a `form`".into(),
        });
    }
    Ok(Document { data, form })
}

fn quoted(x: &BigInt) -> String {
    format!("\"{x}\"")
}

/// Canonical text of a document.
pub fn emit(doc: &Document) -> String {
    let mut out = String::new();
    if let Some(d) = &doc.data {
        out.push_str(&format!("p = \"{}\"\n", d.p));
        out.push_str(&format!("orientation = \"{}\"\n", d.orientation));
        out.push_str(&format!("exception = \"{}\"\n", exception_name(d.exception)));
    }
    if let Some(f) = &doc.form {
        let rows: Vec<String> = f
            .matrix()
            .to_rows()
            .iter()
            .map(|r| format!("[{}]", r.iter().map(quoted).collect::<Vec<_>>().join(", ")))
            .collect();
        out.push_str(&format!("form = [{}]\n", rows.join(", ")));
    }
    if let Some(d) = &doc.data {
        for s in &d.spheres {
            out.push_str(&format!("\n[[spheres]]\neuler = {}\nsign = \"{}\"\n", quoted(&s.euler), s.sign));
        }
    }
    out
}

pub fn emit_data(data: &SingularSetData) -> String {
    emit(&Document { data: Some(data.clone()), form: None })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_round_trips() {
        let doc = Document { data: Some(SingularSetData::cp2_triangle(3)), form: None };
        let text = emit(&doc);
        assert_eq!(parse(&text).unwrap(), doc);
        assert_eq!(emit(&parse(&text).unwrap()), text);
    }

    #[test]
    fn big_integers_survive() {
        let text = "p = \"2\"\n\n[[spheres]]\neuler = \"123456789012345678901234567890\"\nsign = \"-1\"\n";
        let doc = parse(text).unwrap();
        let e = &doc.data.unwrap().spheres[0].euler;
        assert_eq!(e.to_string(), "123456789012345678901234567890");
    }

    #[test]
    fn plain_integers_are_accepted() {
        let text = "p = 3\n[[spheres]]\neuler = -2\nsign = 1\n";
        let data = parse(text).unwrap().data.unwrap();
        assert_eq!(data.spheres[0].euler, BigInt::from(-2));
    }

    #[test]
    fn errors_name_line_and_field() {
        let text = "p = \"3\"\n\n[[spheres]]\neuler = \"1\"\nsign = \"+1\"\n\n[[spheres]]\neuler = \"x\"\nsign = \"+1\"\n";
        let err = parse(text).unwrap_err();
        assert_eq!(err.line, Some(8));
        assert_eq!(err.field, "spheres[1].euler");

        let err = parse("p = \"3\"\nsign = 2\n").unwrap_err();
        assert_eq!(err.line, Some(2));

        let err = parse("p = \"3\"\n[[spheres]]\neuler = \"1\"\nsign = \"2\"\n").unwrap_err();
        assert_eq!(err.field, "spheres[0].sign");
        assert_eq!(err.line, Some(4));

        assert!(parse("").is_err());
    }

    #[test]
    fn form_documents() {
        let doc = parse("form = [[\"2\", \"1\"], [\"1\", \"0\"]]\n").unwrap();
        assert!(doc.data.is_none());
        assert_eq!(doc.form, Some(SymmetricForm::from_rows(&[vec![2, 1], vec![1, 0]]).unwrap()));
        assert_eq!(parse(&emit(&doc)).unwrap(), doc);
        assert!(parse("form = [[\"1\", \"2\"], [\"3\", \"4\"]]\n").is_err());
    }
}
