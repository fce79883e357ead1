//! Line parsers for the input file formats.
//!
//! * key-value: `key<TAB>value`
//! * wide-column: `row<TAB>family<TAB>qualifier<TAB>timestamp<TAB>value`
//! * document: one flat JSON object per line with a string `_id`; fields
//!   named `@name` are dispatchers to other documents
//! * RDF: the N-Triples subset `<s> <p> <o> .` / `<s> <p> "literal" .`
//! * graph: N-Triples arc lines, `node<TAB>value` lines, and `@root<TAB>node`

use std::fmt;

use serde::de::{Deserialize, Deserializer, MapAccess, Visitor};
use serde_json::Value;
use thiserror::Error;

use crate::carriers::{Document, GraphArc, GraphElement, KvPair, RdfObject, RdfTriple, WideCell};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("expected {expected} tab-separated fields, found {found}")]
    FieldCount { expected: usize, found: usize },
    #[error("empty key")]
    EmptyKey,
    #[error("timestamp {0:?} is not a decimal 64-bit integer")]
    BadTimestamp(String),
    #[error("invalid JSON: {0}")]
    Json(String),
    #[error("missing \"_id\"")]
    MissingId,
    #[error("\"_id\" must be a non-empty string")]
    BadId,
    #[error("\"_id\" appears more than once")]
    RepeatedId,
    #[error("field {0:?} holds a nested value")]
    Nested(String),
    #[error("field {0:?} is null")]
    Null(String),
    #[error("dispatcher {0:?} must hold a non-empty document id string")]
    BadDispatcher(String),
    #[error("expected {0}")]
    Expected(&'static str),
    #[error("unterminated {0}")]
    Unterminated(&'static str),
    #[error("invalid escape in literal")]
    BadEscape,
    #[error("language tags and datatypes are not supported")]
    TaggedLiteral,
    #[error("missing terminating '.'")]
    MissingDot,
    #[error("unexpected trailing content {0:?}")]
    Trailing(String),
    #[error("graph arcs must point at nodes, not literals")]
    LiteralArc,
    #[error("empty node identifier")]
    EmptyNode,
}

fn tab_fields(line: &str, expected: usize) -> Result<Vec<&str>, ParseError> {
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() != expected {
        return Err(ParseError::FieldCount {
            expected,
            found: fields.len(),
        });
    }
    Ok(fields)
}

pub fn parse_kv(line: &str) -> Result<KvPair, ParseError> {
    let f = tab_fields(line, 2)?;
    if f[0].is_empty() {
        return Err(ParseError::EmptyKey);
    }
    Ok(KvPair::new(f[0], f[1]))
}

pub fn parse_wide(line: &str) -> Result<WideCell, ParseError> {
    let f = tab_fields(line, 5)?;
    let timestamp = f[3]
        .parse::<i64>()
        .map_err(|_| ParseError::BadTimestamp(f[3].to_string()))?;
    Ok(WideCell {
        row: f[0].to_string(),
        family: f[1].to_string(),
        qualifier: f[2].to_string(),
        timestamp,
        value: f[4].to_string(),
    })
}

/// A JSON object read as an ordered list of fields, keeping duplicates.
struct FieldList(Vec<(String, Value)>);

impl<'de> Deserialize<'de> for FieldList {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct FieldVisitor;

        impl<'de> Visitor<'de> for FieldVisitor {
            type Value = FieldList;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a JSON object")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<FieldList, A::Error> {
                let mut fields = Vec::with_capacity(map.size_hint().unwrap_or(4));
                while let Some(entry) = map.next_entry::<String, Value>()? {
                    fields.push(entry);
                }
                Ok(FieldList(fields))
            }
        }

        deserializer.deserialize_map(FieldVisitor)
    }
}

fn atomic_text(name: &str, value: Value) -> Result<String, ParseError> {
    match value {
        Value::String(s) => Ok(s),
        Value::Number(n) => Ok(n.to_string()),
        Value::Bool(b) => Ok(b.to_string()),
        Value::Null => Err(ParseError::Null(name.to_string())),
        Value::Array(_) | Value::Object(_) => Err(ParseError::Nested(name.to_string())),
    }
}

pub fn parse_doc(line: &str) -> Result<Document, ParseError> {
    let FieldList(fields) =
        serde_json::from_str(line).map_err(|e| ParseError::Json(e.to_string()))?;
    let mut id = None;
    let mut doc = Document::default();
    for (name, value) in fields {
        if name == "_id" {
            if id.is_some() {
                return Err(ParseError::RepeatedId);
            }
            match value {
                Value::String(s) if !s.is_empty() => id = Some(s),
                _ => return Err(ParseError::BadId),
            }
        } else if let Some(link) = name.strip_prefix('@') {
            match value {
                Value::String(s) if !s.is_empty() => doc.dispatchers.push((link.to_string(), s)),
                _ => return Err(ParseError::BadDispatcher(name)),
            }
        } else {
            let text = atomic_text(&name, value)?;
            doc.attrs.push((name, text));
        }
    }
    doc.id = id.ok_or(ParseError::MissingId)?;
    Ok(doc)
}

struct Cursor<'a> {
    rest: &'a str,
}

impl<'a> Cursor<'a> {
    fn skip_ws(&mut self) {
        self.rest = self.rest.trim_start_matches([' ', '\t']);
    }

    fn eat(&mut self, c: char) -> bool {
        match self.rest.strip_prefix(c) {
            Some(r) => {
                self.rest = r;
                true
            }
            None => false,
        }
    }

    fn iri(&mut self) -> Result<Option<String>, ParseError> {
        if !self.eat('<') {
            return Ok(None);
        }
        let end = self.rest.find('>').ok_or(ParseError::Unterminated("IRI"))?;
        let iri = &self.rest[..end];
        if iri.is_empty() || iri.contains([' ', '\t', '<', '"']) {
            return Err(ParseError::Expected("IRI without spaces, quotes or '<'"));
        }
        self.rest = &self.rest[end + 1..];
        Ok(Some(iri.to_string()))
    }

    fn blank_node(&mut self) -> Option<String> {
        let body = self.rest.strip_prefix("_:")?;
        let mut len = body
            .find(|c: char| !(c.is_alphanumeric() || matches!(c, '_' | '-' | '.')))
            .unwrap_or(body.len());
        // a label may not end with '.', which is the statement terminator
        while len > 0 && body[..len].ends_with('.') {
            len -= 1;
        }
        if len == 0 {
            return None;
        }
        let label = format!("_:{}", &body[..len]);
        self.rest = &body[len..];
        Some(label)
    }

    fn resource(&mut self, what: &'static str) -> Result<String, ParseError> {
        if let Some(iri) = self.iri()? {
            return Ok(iri);
        }
        self.blank_node().ok_or(ParseError::Expected(what))
    }

    fn literal(&mut self) -> Result<String, ParseError> {
        let mut out = String::new();
        let mut chars = self.rest.char_indices();
        while let Some((i, c)) = chars.next() {
            match c {
                '"' => {
                    self.rest = &self.rest[i + 1..];
                    if self.rest.starts_with(['@', '^']) {
                        return Err(ParseError::TaggedLiteral);
                    }
                    return Ok(out);
                }
                '\\' => {
                    let (_, e) = chars.next().ok_or(ParseError::BadEscape)?;
                    match e {
                        't' => out.push('\t'),
                        'b' => out.push('\u{8}'),
                        'n' => out.push('\n'),
                        'r' => out.push('\r'),
                        'f' => out.push('\u{c}'),
                        '"' => out.push('"'),
                        '\'' => out.push('\''),
                        '\\' => out.push('\\'),
                        'u' | 'U' => {
                            let width = if e == 'u' { 4 } else { 8 };
                            let hex: String = chars.by_ref().take(width).map(|(_, h)| h).collect();
                            if hex.len() != width {
                                return Err(ParseError::BadEscape);
                            }
                            let code =
                                u32::from_str_radix(&hex, 16).map_err(|_| ParseError::BadEscape)?;
                            out.push(char::from_u32(code).ok_or(ParseError::BadEscape)?);
                        }
                        _ => return Err(ParseError::BadEscape),
                    }
                }
                c => out.push(c),
            }
        }
        Err(ParseError::Unterminated("literal"))
    }

    fn object(&mut self) -> Result<RdfObject, ParseError> {
        if self.eat('"') {
            return Ok(RdfObject::Literal(self.literal()?));
        }
        Ok(RdfObject::Resource(self.resource("object")?))
    }
}

pub fn parse_ntriples(line: &str) -> Result<RdfTriple, ParseError> {
    let mut cur = Cursor { rest: line };
    cur.skip_ws();
    let subject = cur.resource("subject IRI or blank node")?;
    cur.skip_ws();
    let predicate = cur.iri()?.ok_or(ParseError::Expected("predicate IRI"))?;
    cur.skip_ws();
    let object = cur.object()?;
    cur.skip_ws();
    if !cur.eat('.') {
        return Err(ParseError::MissingDot);
    }
    cur.skip_ws();
    if !cur.rest.is_empty() && !cur.rest.starts_with('#') {
        return Err(ParseError::Trailing(cur.rest.to_string()));
    }
    Ok(RdfTriple {
        subject,
        predicate,
        object,
    })
}

pub fn parse_graph_line(line: &str) -> Result<GraphElement, ParseError> {
    let head = line.trim_start_matches([' ', '\t']);
    if head.starts_with('<') || head.starts_with("_:") {
        let t = parse_ntriples(line)?;
        return match t.object {
            RdfObject::Resource(to) => {
                Ok(GraphElement::Arc(GraphArc::new(t.subject, t.predicate, to)))
            }
            RdfObject::Literal(_) => Err(ParseError::LiteralArc),
        };
    }
    let f = tab_fields(line, 2)?;
    if f[0] == "@root" {
        if f[1].is_empty() {
            return Err(ParseError::EmptyNode);
        }
        return Ok(GraphElement::Root(f[1].to_string()));
    }
    if f[0].is_empty() {
        return Err(ParseError::EmptyNode);
    }
    Ok(GraphElement::Value {
        node: f[0].to_string(),
        value: f[1].to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kv_lines() {
        assert_eq!(parse_kv("color\tred"), Ok(KvPair::new("color", "red")));
        assert_eq!(
            parse_kv("a\tb\tc"),
            Err(ParseError::FieldCount {
                expected: 2,
                found: 3
            })
        );
        assert_eq!(parse_kv("\tred"), Err(ParseError::EmptyKey));
        assert_eq!(parse_kv(" k \t v "), Ok(KvPair::new(" k ", " v ")));
    }

    #[test]
    fn wide_lines() {
        let cell = parse_wide("com.cnn.www\tContents\thtml\t1699\t<html>").unwrap();
        assert_eq!(
            cell,
            WideCell {
                row: "com.cnn.www".into(),
                family: "Contents".into(),
                qualifier: "html".into(),
                timestamp: 1699,
                value: "<html>".into(),
            }
        );
        assert_eq!(
            parse_wide("r\tf\tq\tabc\tv"),
            Err(ParseError::BadTimestamp("abc".into()))
        );
        assert_eq!(
            parse_wide("r\tf\tq\t1"),
            Err(ParseError::FieldCount {
                expected: 5,
                found: 4
            })
        );
        assert!(parse_wide("r\tf\tq\t99999999999999999999\tv").is_err());
    }

    #[test]
    fn doc_lines() {
        let doc = parse_doc(r#"{"_id":"d1","author":"Shakespeare","@cites":"d2"}"#).unwrap();
        assert_eq!(
            doc,
            Document::new("d1")
                .attr("author", "Shakespeare")
                .dispatcher("cites", "d2")
        );
        assert_eq!(parse_doc(r#"{"author":"x"}"#), Err(ParseError::MissingId));
        assert_eq!(
            parse_doc(r#"{"_id":"d1","a":{"b":1}}"#),
            Err(ParseError::Nested("a".into()))
        );
    }

    #[test]
    fn doc_atomic_values_and_order() {
        let doc =
            parse_doc(r#"{"year":1603,"_id":"h","tag":"x","ok":true,"tag":"y","w":2.5}"#).unwrap();
        assert_eq!(doc.id, "h");
        assert_eq!(
            doc.attrs,
            [
                ("year".to_string(), "1603".to_string()),
                ("tag".into(), "x".into()),
                ("ok".into(), "true".into()),
                ("tag".into(), "y".into()),
                ("w".into(), "2.5".into()),
            ]
        );
    }

    #[test]
    fn doc_errors() {
        assert_eq!(parse_doc(r#"{"_id":7}"#), Err(ParseError::BadId));
        assert_eq!(
            parse_doc(r#"{"_id":"a","_id":"b"}"#),
            Err(ParseError::RepeatedId)
        );
        assert_eq!(
            parse_doc(r#"{"_id":"a","x":[1]}"#),
            Err(ParseError::Nested("x".into()))
        );
        assert_eq!(
            parse_doc(r#"{"_id":"a","x":null}"#),
            Err(ParseError::Null("x".into()))
        );
        assert_eq!(
            parse_doc(r#"{"_id":"a","@next":3}"#),
            Err(ParseError::BadDispatcher("@next".into()))
        );
        assert!(matches!(parse_doc("[1,2]"), Err(ParseError::Json(_))));
        assert!(matches!(parse_doc("{\"_id\":"), Err(ParseError::Json(_))));
    }

    #[test]
    fn ntriples_resource_and_literal() {
        assert_eq!(
            parse_ntriples("<s> <p> <o> ."),
            Ok(RdfTriple::resource("s", "p", "o"))
        );
        assert_eq!(
            parse_ntriples("<s> <p> \"lit\" ."),
            Ok(RdfTriple::literal("s", "p", "lit"))
        );
        assert_eq!(parse_ntriples("<s> <p> <o>"), Err(ParseError::MissingDot));
    }

    #[test]
    fn ntriples_escapes_and_blank_nodes() {
        let t = parse_ntriples(r#"_:b1 <http://x/p> "say \"hi\"\n\u00e9" . # note"#).unwrap();
        assert_eq!(t, RdfTriple::literal("_:b1", "http://x/p", "say \"hi\"\né"));
        let t = parse_ntriples("<a><p>_:n.").unwrap();
        assert_eq!(t, RdfTriple::resource("a", "p", "_:n"));
    }

    #[test]
    fn ntriples_errors() {
        assert_eq!(
            parse_ntriples("<s> <p> \"x\"@en ."),
            Err(ParseError::TaggedLiteral)
        );
        assert_eq!(
            parse_ntriples("<s> <p> \"x\"^^<t> ."),
            Err(ParseError::TaggedLiteral)
        );
        assert_eq!(
            parse_ntriples("<s> <p> \"open ."),
            Err(ParseError::Unterminated("literal"))
        );
        assert_eq!(
            parse_ntriples("<s> \"p\" <o> ."),
            Err(ParseError::Expected("predicate IRI"))
        );
        assert_eq!(
            parse_ntriples("<s <p> <o> ."),
            Err(ParseError::Expected("IRI without spaces, quotes or '<'"))
        );
        assert_eq!(
            parse_ntriples("<s> <p> <o> . extra"),
            Err(ParseError::Trailing("extra".into()))
        );
        assert_eq!(
            parse_ntriples("<s> <p> \"\\q\" ."),
            Err(ParseError::BadEscape)
        );
    }

    #[test]
    fn graph_lines() {
        assert_eq!(
            parse_graph_line("<a> <child> <b> ."),
            Ok(GraphElement::Arc(GraphArc::new("a", "child", "b")))
        );
        assert_eq!(
            parse_graph_line("b\t42"),
            Ok(GraphElement::Value {
                node: "b".into(),
                value: "42".into()
            })
        );
        assert_eq!(
            parse_graph_line("@root\ta"),
            Ok(GraphElement::Root("a".into()))
        );
        assert_eq!(
            parse_graph_line("<a> <p> \"x\" ."),
            Err(ParseError::LiteralArc)
        );
        assert_eq!(parse_graph_line("\tv"), Err(ParseError::EmptyNode));
        assert!(matches!(
            parse_graph_line("lonely"),
            Err(ParseError::FieldCount { .. })
        ));
    }
}
