//! A Turtle subset: enough to read and write dataset descriptors and
//! provenance graphs.
//!
//! Supported: `@prefix` (and SPARQL-style `PREFIX`) directives, `<iri>` and
//! `prefix:local` terms, the keyword `a`, string literals with `@lang` or
//! `^^datatype`, the escapes `\" \\ \n \t \r`, bare integer/decimal/boolean
//! literals, `;` predicate lists, `,` object lists, labeled blank nodes and
//! `#` comments. Bracketed blank nodes, collections and long (`"""`) strings
//! are rejected with a syntax error.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use thiserror::Error;

pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
pub const RDF_LANG_STRING: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#langString";
pub const XSD: &str = "http://www.w3.org/2001/XMLSchema#";
pub const XSD_STRING: &str = "http://www.w3.org/2001/XMLSchema#string";
pub const XSD_INTEGER: &str = "http://www.w3.org/2001/XMLSchema#integer";
pub const XSD_DECIMAL: &str = "http://www.w3.org/2001/XMLSchema#decimal";
pub const XSD_DOUBLE: &str = "http://www.w3.org/2001/XMLSchema#double";
pub const XSD_BOOLEAN: &str = "http://www.w3.org/2001/XMLSchema#boolean";
pub const XSD_DATETIME: &str = "http://www.w3.org/2001/XMLSchema#dateTime";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TurtleError {
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("unknown prefix '{name}' on line {line}")]
    UnknownPrefix { name: String, line: usize },
}

/// An RDF literal. Plain strings carry `xsd:string`, language-tagged strings
/// carry `rdf:langString`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RdfLiteral {
    pub lexical: String,
    pub datatype: String,
    pub lang: Option<String>,
}

impl RdfLiteral {
    pub fn string(lexical: impl Into<String>) -> Self {
        Self {
            lexical: lexical.into(),
            datatype: XSD_STRING.to_string(),
            lang: None,
        }
    }

    pub fn typed(lexical: impl Into<String>, datatype: impl Into<String>) -> Self {
        Self {
            lexical: lexical.into(),
            datatype: datatype.into(),
            lang: None,
        }
    }

    pub fn lang(lexical: impl Into<String>, lang: impl Into<String>) -> Self {
        Self {
            lexical: lexical.into(),
            datatype: RDF_LANG_STRING.to_string(),
            lang: Some(lang.into()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    /// Absolute IRI.
    Iri(String),
    /// Blank node label, without the `_:`.
    Blank(String),
    Literal(RdfLiteral),
}

impl Term {
    pub fn iri(s: impl Into<String>) -> Self {
        Term::Iri(s.into())
    }

    pub fn as_iri(&self) -> Option<&str> {
        match self {
            Term::Iri(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_literal(&self) -> Option<&RdfLiteral> {
        match self {
            Term::Literal(l) => Some(l),
            _ => None,
        }
    }

    fn sort_key(&self) -> String {
        match self {
            Term::Iri(s) => s.clone(),
            Term::Blank(b) => format!("_:{b}"),
            Term::Literal(l) => l.lexical.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triple {
    pub subject: Term,
    pub predicate: String,
    pub object: Term,
}

impl Triple {
    pub fn new(subject: Term, predicate: impl Into<String>, object: Term) -> Self {
        Self {
            subject,
            predicate: predicate.into(),
            object,
        }
    }
}

/// Prefix table plus triples, all names resolved.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TurtleDoc {
    pub prefixes: BTreeMap<String, String>,
    pub triples: Vec<Triple>,
}

impl TurtleDoc {
    pub fn triple_set(&self) -> BTreeSet<Triple> {
        self.triples.iter().cloned().collect()
    }

    /// Objects of `(subject, predicate, _)`.
    pub fn objects<'a>(
        &'a self,
        subject: &'a Term,
        predicate: &'a str,
    ) -> impl Iterator<Item = &'a Term> + 'a {
        self.triples
            .iter()
            .filter(move |t| &t.subject == subject && t.predicate == predicate)
            .map(|t| &t.object)
    }

    /// Subjects having `rdf:type class`.
    pub fn subjects_of_type(&self, class: &str) -> Vec<Term> {
        let mut out: Vec<Term> = self
            .triples
            .iter()
            .filter(|t| t.predicate == RDF_TYPE && t.object.as_iri() == Some(class))
            .map(|t| t.subject.clone())
            .collect();
        out.sort();
        out.dedup();
        out
    }
}

pub fn parse_turtle(text: &str) -> Result<TurtleDoc, TurtleError> {
    let mut p = Parser {
        chars: text.chars().collect(),
        pos: 0,
        doc: TurtleDoc::default(),
    };
    p.document()?;
    Ok(p.doc)
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
    doc: TurtleDoc,
}

impl Parser {
    fn document(&mut self) -> Result<(), TurtleError> {
        loop {
            self.skip_ws();
            if self.eof() {
                return Ok(());
            }
            if self.peek() == Some('@') {
                self.prefix_directive(true)?;
            } else if self.looking_at_keyword("PREFIX") {
                self.prefix_directive(false)?;
            } else {
                self.triples()?;
                self.skip_ws();
                self.expect('.')?;
            }
        }
    }

    fn prefix_directive(&mut self, at_form: bool) -> Result<(), TurtleError> {
        let start = self.pos;
        let word = if at_form {
            self.bump();
            self.take_while(|c| c.is_ascii_alphabetic())
        } else {
            self.take_while(|c| c.is_ascii_alphabetic())
        };
        if !word.eq_ignore_ascii_case("prefix") || (at_form && word != "prefix") {
            return Err(self.error_at(start, format!("unsupported directive '{word}'")));
        }
        self.skip_ws();
        let name = self.take_while(is_pn_char);
        if name.starts_with('.') || name.ends_with('.') {
            return Err(self.error(format!("invalid prefix name '{name}'")));
        }
        self.expect(':')?;
        self.skip_ws();
        let iri = self.iriref()?;
        if at_form {
            self.skip_ws();
            self.expect('.')?;
        }
        self.doc.prefixes.insert(name, iri);
        Ok(())
    }

    fn triples(&mut self) -> Result<(), TurtleError> {
        let subject = match self.peek() {
            Some('_') => self.blank()?,
            Some('[') => return Err(self.error("bracketed blank nodes are not supported")),
            Some('(') => return Err(self.error("collections are not supported")),
            Some('"') => return Err(self.error("a literal cannot be a subject")),
            _ => Term::Iri(self.iri()?),
        };
        loop {
            self.skip_ws();
            let predicate = if self.peek() == Some('a') && self.delimited_after(1) {
                self.bump();
                RDF_TYPE.to_string()
            } else {
                self.iri()?
            };
            loop {
                self.skip_ws();
                let object = self.object()?;
                self.doc.triples.push(Triple {
                    subject: subject.clone(),
                    predicate: predicate.clone(),
                    object,
                });
                self.skip_ws();
                if self.peek() == Some(',') {
                    self.bump();
                } else {
                    break;
                }
            }
            self.skip_ws();
            if self.peek() != Some(';') {
                return Ok(());
            }
            // one or more ';', optionally followed by the terminating '.'
            while self.peek() == Some(';') {
                self.bump();
                self.skip_ws();
            }
            if matches!(self.peek(), Some('.') | None) {
                return Ok(());
            }
        }
    }

    fn object(&mut self) -> Result<Term, TurtleError> {
        match self.peek() {
            Some('"') => self.literal(),
            Some('\'') => Err(self.error("single-quoted literals are not supported")),
            Some('_') => self.blank(),
            Some('[') => Err(self.error("bracketed blank nodes are not supported")),
            Some('(') => Err(self.error("collections are not supported")),
            Some(c) if c.is_ascii_digit() || c == '+' || c == '-' => self.number(),
            Some('.') if self.peek_at(1).is_some_and(|c| c.is_ascii_digit()) => self.number(),
            _ if self.looking_at_keyword("true") => {
                self.pos += 4;
                Ok(Term::Literal(RdfLiteral::typed("true", XSD_BOOLEAN)))
            }
            _ if self.looking_at_keyword("false") => {
                self.pos += 5;
                Ok(Term::Literal(RdfLiteral::typed("false", XSD_BOOLEAN)))
            }
            _ => Ok(Term::Iri(self.iri()?)),
        }
    }

    fn iri(&mut self) -> Result<String, TurtleError> {
        match self.peek() {
            Some('<') => self.iriref(),
            Some(c) if is_pn_char(c) || c == ':' => self.prefixed_name(),
            Some(c) => Err(self.error(format!("unexpected character '{c}'"))),
            None => Err(self.error("unexpected end of input")),
        }
    }

    fn iriref(&mut self) -> Result<String, TurtleError> {
        self.expect('<')?;
        let mut s = String::new();
        loop {
            match self.bump() {
                Some('>') => break,
                Some(c) if c.is_whitespace() || "<\"{}|^`\\".contains(c) => {
                    self.pos -= 1;
                    return Err(self.error(format!("invalid character {c:?} in IRI")));
                }
                Some(c) => s.push(c),
                None => return Err(self.error("unterminated IRI")),
            }
        }
        if !s.contains(':') {
            return Err(self.error(format!("relative IRI <{s}> is not supported")));
        }
        Ok(s)
    }

    fn prefixed_name(&mut self) -> Result<String, TurtleError> {
        let start = self.pos;
        let prefix = self.take_while(is_pn_char);
        if self.peek() != Some(':') {
            return Err(self.error_at(start, format!("expected prefixed name, found '{prefix}'")));
        }
        self.bump();
        let mut local = String::new();
        while let Some(c) = self.peek() {
            if is_pn_char(c) || c == ':' || c == '%' {
                local.push(c);
                self.bump();
            } else if c == '\\' {
                // PN_LOCAL_ESC
                match self.peek_at(1) {
                    Some(e) if "_~.-!$&'()*+,;=/?#@%".contains(e) => {
                        local.push(e);
                        self.pos += 2;
                    }
                    _ => return Err(self.error("invalid escape in local name")),
                }
            } else {
                break;
            }
        }
        // a trailing '.' terminates the statement
        while local.ends_with('.') {
            local.pop();
            self.pos -= 1;
        }
        let line = self.line_col(start).0;
        match self.doc.prefixes.get(&prefix) {
            Some(ns) => Ok(format!("{ns}{local}")),
            None => Err(TurtleError::UnknownPrefix { name: prefix, line }),
        }
    }

    fn blank(&mut self) -> Result<Term, TurtleError> {
        self.expect('_')?;
        self.expect(':')?;
        let mut label = self.take_while(is_pn_char);
        while label.ends_with('.') {
            label.pop();
            self.pos -= 1;
        }
        if label.is_empty() {
            return Err(self.error("empty blank node label"));
        }
        Ok(Term::Blank(label))
    }

    fn literal(&mut self) -> Result<Term, TurtleError> {
        if self.peek_at(1) == Some('"') && self.peek_at(2) == Some('"') {
            return Err(self.error("long string literals are not supported"));
        }
        self.expect('"')?;
        let mut lexical = String::new();
        loop {
            match self.bump() {
                Some('"') => break,
                Some('\\') => {
                    let c = match self.bump() {
                        Some('"') => '"',
                        Some('\\') => '\\',
                        Some('n') => '\n',
                        Some('t') => '\t',
                        Some('r') => '\r',
                        Some('\'') => '\'',
                        Some(other) => {
                            self.pos -= 1;
                            return Err(self.error(format!("unsupported escape '\\{other}'")));
                        }
                        None => return Err(self.error("unterminated string")),
                    };
                    lexical.push(c);
                }
                Some('\n') | Some('\r') => {
                    self.pos -= 1;
                    return Err(self.error("line break inside string literal"));
                }
                Some(c) => lexical.push(c),
                None => return Err(self.error("unterminated string")),
            }
        }
        match self.peek() {
            Some('@') => {
                self.bump();
                let tag = self.take_while(|c| c.is_ascii_alphanumeric() || c == '-');
                if tag.is_empty() || !tag.chars().next().unwrap().is_ascii_alphabetic() {
                    return Err(self.error("invalid language tag"));
                }
                Ok(Term::Literal(RdfLiteral::lang(lexical, tag)))
            }
            Some('^') => {
                self.expect('^')?;
                self.expect('^')?;
                let dt = self.iri()?;
                Ok(Term::Literal(RdfLiteral::typed(lexical, dt)))
            }
            _ => Ok(Term::Literal(RdfLiteral::string(lexical))),
        }
    }

    fn number(&mut self) -> Result<Term, TurtleError> {
        let start = self.pos;
        let mut s = String::new();
        if let Some(c @ ('+' | '-')) = self.peek() {
            s.push(c);
            self.bump();
        }
        s.push_str(&self.take_while(|c| c.is_ascii_digit()));
        let mut datatype = XSD_INTEGER;
        if self.peek() == Some('.') && self.peek_at(1).is_some_and(|c| c.is_ascii_digit()) {
            self.bump();
            s.push('.');
            s.push_str(&self.take_while(|c| c.is_ascii_digit()));
            datatype = XSD_DECIMAL;
        }
        if let Some(e @ ('e' | 'E')) = self.peek() {
            self.bump();
            s.push(e);
            if let Some(c @ ('+' | '-')) = self.peek() {
                s.push(c);
                self.bump();
            }
            let exp = self.take_while(|c| c.is_ascii_digit());
            if exp.is_empty() {
                return Err(self.error_at(start, "malformed number"));
            }
            s.push_str(&exp);
            datatype = XSD_DOUBLE;
        }
        if !s.chars().any(|c| c.is_ascii_digit()) {
            return Err(self.error_at(start, "malformed number"));
        }
        Ok(Term::Literal(RdfLiteral::typed(s, datatype)))
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == '#' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn looking_at_keyword(&self, kw: &str) -> bool {
        let n = kw.chars().count();
        self.chars.len() >= self.pos + n
            && self.chars[self.pos..self.pos + n]
                .iter()
                .copied()
                .eq(kw.chars())
            && self.delimited_after(n)
    }

    /// True when the char `offset` ahead cannot continue a name.
    fn delimited_after(&self, offset: usize) -> bool {
        match self.peek_at(offset) {
            None => true,
            Some(c) => !(is_pn_char(c) || c == ':'),
        }
    }

    fn take_while(&mut self, f: impl Fn(char) -> bool) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek() {
            if !f(c) {
                break;
            }
            s.push(c);
            self.pos += 1;
        }
        s
    }

    fn expect(&mut self, c: char) -> Result<(), TurtleError> {
        match self.peek() {
            Some(x) if x == c => {
                self.pos += 1;
                Ok(())
            }
            Some(x) => Err(self.error(format!("expected '{c}', found '{x}'"))),
            None => Err(self.error(format!("expected '{c}', found end of input"))),
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, offset: usize) -> Option<char> {
        self.chars.get(self.pos + offset).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek();
        if c.is_some() {
            self.pos += 1;
        }
        c
    }

    fn eof(&self) -> bool {
        self.pos >= self.chars.len()
    }

    fn line_col(&self, pos: usize) -> (usize, usize) {
        let mut line = 1;
        let mut col = 1;
        for &c in &self.chars[..pos.min(self.chars.len())] {
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
        }
        (line, col)
    }

    fn error(&self, message: impl Into<String>) -> TurtleError {
        self.error_at(self.pos, message)
    }

    fn error_at(&self, pos: usize, message: impl Into<String>) -> TurtleError {
        let (line, col) = self.line_col(pos);
        TurtleError::Syntax {
            line,
            col,
            message: message.into(),
        }
    }
}

fn is_pn_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '-' || c == '.' || (!c.is_ascii() && !c.is_whitespace())
}

fn is_safe_local(local: &str) -> bool {
    let mut chars = local.chars();
    let Some(first) = chars.next() else {
        return false;
    };
    (first.is_ascii_alphanumeric() || first == '_')
        && local
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == '.')
        && !local.ends_with('.')
}

/// Shorten `iri` to `prefix:local` when a namespace matches and the
/// remainder is a plain local name; longest namespace wins.
pub fn compact_iri(prefixes: &BTreeMap<String, String>, iri: &str) -> String {
    let best = prefixes
        .iter()
        .filter(|(_, ns)| !ns.is_empty() && iri.starts_with(ns.as_str()))
        .filter(|(_, ns)| is_safe_local(&iri[ns.len()..]))
        .max_by(|a, b| a.1.len().cmp(&b.1.len()).then_with(|| b.0.cmp(a.0)));
    match best {
        Some((p, ns)) => format!("{p}:{}", &iri[ns.len()..]),
        None => format!("<{iri}>"),
    }
}

fn escape_lexical(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

fn write_term(out: &mut String, prefixes: &BTreeMap<String, String>, term: &Term) {
    match term {
        Term::Iri(i) => out.push_str(&compact_iri(prefixes, i)),
        Term::Blank(b) => {
            out.push_str("_:");
            out.push_str(b);
        }
        Term::Literal(l) => {
            out.push('"');
            out.push_str(&escape_lexical(&l.lexical));
            out.push('"');
            if let Some(lang) = &l.lang {
                out.push('@');
                out.push_str(lang);
            } else if l.datatype != XSD_STRING {
                out.push_str("^^");
                out.push_str(&compact_iri(prefixes, &l.datatype));
            }
        }
    }
}

/// Deterministic Turtle: prefixes sorted by name, subjects sorted by expanded
/// IRI, `a` first then predicates sorted, one `;`-continued group per subject.
pub fn emit_turtle(doc: &TurtleDoc) -> String {
    let mut out = String::new();
    for (p, ns) in &doc.prefixes {
        let _ = writeln!(out, "@prefix {p}: <{ns}> .");
    }

    // (is not rdf:type, predicate) -> objects
    type Predicates = BTreeMap<(bool, String), BTreeSet<Term>>;
    let mut grouped: BTreeMap<String, (Term, Predicates)> = BTreeMap::new();
    for t in &doc.triples {
        let entry = grouped
            .entry(t.subject.sort_key())
            .or_insert_with(|| (t.subject.clone(), BTreeMap::new()));
        // rdf:type sorts before everything else
        let key = (t.predicate != RDF_TYPE, t.predicate.clone());
        entry.1.entry(key).or_default().insert(t.object.clone());
    }

    for (subject, preds) in grouped.values() {
        out.push('\n');
        write_term(&mut out, &doc.prefixes, subject);
        let npreds = preds.len();
        for (i, ((not_type, pred), objects)) in preds.iter().enumerate() {
            if i == 0 {
                out.push(' ');
            } else {
                out.push_str("    ");
            }
            if *not_type {
                out.push_str(&compact_iri(&doc.prefixes, pred));
            } else {
                out.push('a');
            }
            let mut objects: Vec<&Term> = objects.iter().collect();
            objects.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()).then_with(|| a.cmp(b)));
            for (j, o) in objects.into_iter().enumerate() {
                out.push_str(if j == 0 { " " } else { ", " });
                write_term(&mut out, &doc.prefixes, o);
            }
            out.push_str(if i + 1 == npreds { " .\n" } else { " ;\n" });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_document() {
        let doc = parse_turtle(
            "@prefix dcat: <http://www.w3.org/ns/dcat#> . <http://ex/d1> a dcat:Dataset .",
        )
        .unwrap();
        assert_eq!(doc.triples.len(), 1);
        assert_eq!(
            doc.triples[0].object,
            Term::iri("http://www.w3.org/ns/dcat#Dataset")
        );
        assert_eq!(doc.triples[0].predicate, RDF_TYPE);
    }

    #[test]
    fn unknown_prefix_reports_line() {
        let err = parse_turtle("ex:x ex:y ex:z .").unwrap_err();
        assert_eq!(
            err,
            TurtleError::UnknownPrefix {
                name: "ex".into(),
                line: 1
            }
        );
    }

    #[test]
    fn lists_literals_and_comments() {
        let text = r#"
@prefix ex: <http://ex.org/> .
@prefix xsd: <http://www.w3.org/2001/XMLSchema#> .
# comment
ex:s ex:p "a \"q\"\n", "b"@en ; # trailing
     ex:q "5"^^xsd:integer, 7, 1.5, true ;
     ex:r _:b1 .
_:b1 ex:p ex:o.
"#;
        let doc = parse_turtle(text).unwrap();
        assert_eq!(doc.triples.len(), 8);
        let s = Term::iri("http://ex.org/s");
        let p: Vec<_> = doc.objects(&s, "http://ex.org/p").collect();
        assert_eq!(p[0], &Term::Literal(RdfLiteral::string("a \"q\"\n")));
        assert_eq!(p[1], &Term::Literal(RdfLiteral::lang("b", "en")));
        let q: Vec<_> = doc.objects(&s, "http://ex.org/q").collect();
        assert_eq!(q[1], &Term::Literal(RdfLiteral::typed("7", XSD_INTEGER)));
        assert_eq!(q[2], &Term::Literal(RdfLiteral::typed("1.5", XSD_DECIMAL)));
        assert_eq!(doc.triples[7].subject, Term::Blank("b1".into()));
        assert_eq!(doc.triples[7].object, Term::iri("http://ex.org/o"));
    }

    #[test]
    fn html_body_is_a_positioned_syntax_error() {
        let err = parse_turtle("<!DOCTYPE html>\n<html><body>nope</body></html>").unwrap_err();
        match err {
            TurtleError::Syntax { line, col, .. } => assert_eq!((line, col), (1, 10)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unsupported_constructs_rejected() {
        for text in [
            "<http://a/s> <http://a/p> [ <http://a/q> 1 ] .",
            "<http://a/s> <http://a/p> ( 1 2 ) .",
            "<http://a/s> <http://a/p> \"\"\"long\"\"\" .",
            "<http://a/s> <http://a/p> <rel> .",
        ] {
            assert!(
                matches!(parse_turtle(text), Err(TurtleError::Syntax { .. })),
                "{text}"
            );
        }
    }

    #[test]
    fn emit_empty_doc_is_prefix_only() {
        let mut doc = TurtleDoc::default();
        doc.prefixes.insert("ex".into(), "http://ex.org/".into());
        assert_eq!(emit_turtle(&doc), "@prefix ex: <http://ex.org/> .\n");
    }

    #[test]
    fn emit_groups_and_orders() {
        let mut doc = TurtleDoc::default();
        doc.prefixes.insert("ex".into(), "http://ex.org/".into());
        let s = Term::iri("http://ex.org/s");
        doc.triples.push(Triple::new(
            s.clone(),
            "http://ex.org/z",
            Term::iri("http://ex.org/o"),
        ));
        doc.triples.push(Triple::new(
            s.clone(),
            RDF_TYPE,
            Term::iri("http://ex.org/C"),
        ));
        doc.triples.push(Triple::new(
            s.clone(),
            "http://ex.org/b",
            Term::Literal(RdfLiteral::typed("1", XSD_INTEGER)),
        ));
        let text = emit_turtle(&doc);
        assert_eq!(
            text,
            "@prefix ex: <http://ex.org/> .\n\nex:s a ex:C ;\n    ex:b \"1\"^^<http://www.w3.org/2001/XMLSchema#integer> ;\n    ex:z ex:o .\n"
        );
        assert_eq!(parse_turtle(&text).unwrap().triple_set(), doc.triple_set());
    }

    #[test]
    fn compaction_falls_back_for_unsafe_locals() {
        let mut p = BTreeMap::new();
        p.insert("aimp".to_string(), "https://w3id.org/aimp/".to_string());
        assert_eq!(compact_iri(&p, "https://w3id.org/aimp/Model"), "aimp:Model");
        assert_eq!(
            compact_iri(&p, "https://w3id.org/aimp/ws/stage/1"),
            "<https://w3id.org/aimp/ws/stage/1>"
        );
    }
}
