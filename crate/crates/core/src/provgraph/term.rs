use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dcat::turtle::{self, RdfLiteral};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("invalid IRI '{0}'")]
    InvalidIri(String),
    #[error("unresolvable prefix in '{0}'")]
    UnresolvablePrefix(String),
    #[error("invalid {datatype} literal '{lexical}'")]
    InvalidLiteral { lexical: String, datatype: Datatype },
    #[error("language tag only allowed on string literals")]
    LangOnNonString,
    #[error("unsupported literal datatype <{0}>")]
    UnsupportedDatatype(String),
}

/// Either an absolute IRI (`scheme://...`) or a prefixed name `prefix:local`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Iri(String);

const FORBIDDEN: &str = "<>\"{}|^`\\";

impl Iri {
    pub fn new(value: impl Into<String>) -> Result<Self, TermError> {
        let value = value.into();
        let bad = || TermError::InvalidIri(value.clone());
        if value.is_empty()
            || value
                .chars()
                .any(|c| c.is_whitespace() || FORBIDDEN.contains(c))
        {
            return Err(bad());
        }
        if !value.contains("://") {
            let (prefix, local) = value.split_once(':').ok_or_else(bad)?;
            let prefix_ok = prefix
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == '.');
            if !prefix_ok || local.is_empty() {
                return Err(bad());
            }
        }
        Ok(Iri(value))
    }

    /// Mint a project IRI `aimp:<workspace>/<kind>/<n>`.
    pub fn mint(workspace: &str, kind: &str, n: usize) -> Self {
        Iri(format!("aimp:{workspace}/{kind}/{n}"))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_absolute(&self) -> bool {
        self.0.contains("://")
    }

    /// `(prefix, local)` for prefixed names.
    pub fn prefixed_parts(&self) -> Option<(&str, &str)> {
        if self.is_absolute() {
            None
        } else {
            self.0.split_once(':')
        }
    }

    pub fn expand(&self, prefixes: &BTreeMap<String, String>) -> Result<String, TermError> {
        match self.prefixed_parts() {
            None => Ok(self.0.clone()),
            Some((p, local)) => prefixes
                .get(p)
                .map(|ns| format!("{ns}{local}"))
                .ok_or_else(|| TermError::UnresolvablePrefix(self.0.clone())),
        }
    }
}

impl TryFrom<String> for Iri {
    type Error = TermError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        Iri::new(s)
    }
}

impl TryFrom<&str> for Iri {
    type Error = TermError;
    fn try_from(s: &str) -> Result<Self, Self::Error> {
        Iri::new(s)
    }
}

impl From<Iri> for String {
    fn from(i: Iri) -> String {
        i.0
    }
}

impl fmt::Display for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Datatype {
    String,
    Integer,
    Decimal,
    Boolean,
    DateTime,
}

impl Datatype {
    pub fn xsd_iri(self) -> &'static str {
        match self {
            Datatype::String => turtle::XSD_STRING,
            Datatype::Integer => turtle::XSD_INTEGER,
            Datatype::Decimal => turtle::XSD_DECIMAL,
            Datatype::Boolean => turtle::XSD_BOOLEAN,
            Datatype::DateTime => turtle::XSD_DATETIME,
        }
    }

    pub fn from_xsd_iri(iri: &str) -> Option<Self> {
        [
            Datatype::String,
            Datatype::Integer,
            Datatype::Decimal,
            Datatype::Boolean,
            Datatype::DateTime,
        ]
        .into_iter()
        .find(|d| d.xsd_iri() == iri)
    }
}

impl fmt::Display for Datatype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Datatype::String => "string",
            Datatype::Integer => "integer",
            Datatype::Decimal => "decimal",
            Datatype::Boolean => "boolean",
            Datatype::DateTime => "dateTime",
        })
    }
}

/// Attribute value. The lexical form always parses under its datatype.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawLiteral", into = "RawLiteral")]
pub struct Literal {
    lexical: String,
    datatype: Datatype,
    lang: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct RawLiteral {
    lexical: String,
    datatype: Datatype,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lang: Option<String>,
}

impl TryFrom<RawLiteral> for Literal {
    type Error = TermError;
    fn try_from(r: RawLiteral) -> Result<Self, Self::Error> {
        Literal::new(r.lexical, r.datatype, r.lang)
    }
}

impl From<Literal> for RawLiteral {
    fn from(l: Literal) -> Self {
        RawLiteral {
            lexical: l.lexical,
            datatype: l.datatype,
            lang: l.lang,
        }
    }
}

impl Literal {
    pub fn new(
        lexical: impl Into<String>,
        datatype: Datatype,
        lang: Option<String>,
    ) -> Result<Self, TermError> {
        let lexical = lexical.into();
        if lang.is_some() && datatype != Datatype::String {
            return Err(TermError::LangOnNonString);
        }
        if !lexical_is_valid(&lexical, datatype) {
            return Err(TermError::InvalidLiteral { lexical, datatype });
        }
        Ok(Literal {
            lexical,
            datatype,
            lang,
        })
    }

    pub fn string(s: impl Into<String>) -> Self {
        Literal {
            lexical: s.into(),
            datatype: Datatype::String,
            lang: None,
        }
    }

    pub fn integer(v: i64) -> Self {
        Literal {
            lexical: v.to_string(),
            datatype: Datatype::Integer,
            lang: None,
        }
    }

    /// Shortest round-trip decimal form. Non-finite values are rejected.
    pub fn decimal(v: f64) -> Result<Self, TermError> {
        if !v.is_finite() {
            return Err(TermError::InvalidLiteral {
                lexical: v.to_string(),
                datatype: Datatype::Decimal,
            });
        }
        let mut lexical = v.to_string();
        if !lexical.contains('.') {
            lexical.push_str(".0");
        }
        Ok(Literal {
            lexical,
            datatype: Datatype::Decimal,
            lang: None,
        })
    }

    pub fn boolean(v: bool) -> Self {
        Literal {
            lexical: v.to_string(),
            datatype: Datatype::Boolean,
            lang: None,
        }
    }

    pub fn date_time(t: chrono::DateTime<chrono::Utc>) -> Self {
        Literal {
            lexical: t.to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
            datatype: Datatype::DateTime,
            lang: None,
        }
    }

    pub fn lexical(&self) -> &str {
        &self.lexical
    }

    pub fn datatype(&self) -> Datatype {
        self.datatype
    }

    pub fn lang(&self) -> Option<&str> {
        self.lang.as_deref()
    }

    pub fn as_i64(&self) -> Option<i64> {
        match self.datatype {
            Datatype::Integer => self.lexical.parse().ok(),
            _ => None,
        }
    }

    pub fn to_rdf(&self) -> RdfLiteral {
        match &self.lang {
            Some(lang) => RdfLiteral::lang(self.lexical.clone(), lang.clone()),
            None => RdfLiteral::typed(self.lexical.clone(), self.datatype.xsd_iri()),
        }
    }

    pub fn from_rdf(l: &RdfLiteral) -> Result<Self, TermError> {
        if let Some(lang) = &l.lang {
            return Literal::new(l.lexical.clone(), Datatype::String, Some(lang.clone()));
        }
        let dt = Datatype::from_xsd_iri(&l.datatype)
            .ok_or_else(|| TermError::UnsupportedDatatype(l.datatype.clone()))?;
        Literal::new(l.lexical.clone(), dt, None)
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.lexical)
    }
}

fn lexical_is_valid(lex: &str, dt: Datatype) -> bool {
    fn digits(s: &str) -> bool {
        !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit())
    }
    let unsigned = |s: &str| s.strip_prefix(['+', '-']).unwrap_or(s).to_string();
    match dt {
        Datatype::String => true,
        Datatype::Integer => digits(&unsigned(lex)),
        Datatype::Decimal => {
            let u = unsigned(lex);
            match u.split_once('.') {
                Some((i, f)) => {
                    (i.is_empty() || digits(i))
                        && (f.is_empty() || digits(f))
                        && !(i.is_empty() && f.is_empty())
                }
                None => digits(&u),
            }
        }
        Datatype::Boolean => matches!(lex, "true" | "false" | "1" | "0"),
        Datatype::DateTime => {
            chrono::DateTime::parse_from_rfc3339(lex).is_ok()
                || chrono::NaiveDateTime::parse_from_str(lex, "%Y-%m-%dT%H:%M:%S%.f").is_ok()
        }
    }
}
