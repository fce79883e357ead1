//! Registered data sources.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown carrier kind {0:?} (expected kv, wide, doc, rdf or graph)")]
pub struct UnknownKind(pub String);

/// The carrier model a source is read through.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SourceKind {
    Kv,
    Wide,
    Doc,
    Rdf,
    Graph,
}

impl SourceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SourceKind::Kv => "kv",
            SourceKind::Wide => "wide",
            SourceKind::Doc => "doc",
            SourceKind::Rdf => "rdf",
            SourceKind::Graph => "graph",
        }
    }
}

impl FromStr for SourceKind {
    type Err = UnknownKind;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "kv" => SourceKind::Kv,
            "wide" => SourceKind::Wide,
            "doc" => SourceKind::Doc,
            "rdf" => SourceKind::Rdf,
            "graph" => SourceKind::Graph,
            other => return Err(UnknownKind(other.to_string())),
        })
    }
}

impl fmt::Display for SourceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A named source of records and its ingestion counters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceDescriptor {
    pub name: String,
    pub kind: SourceKind,
    pub records_ingested: u64,
    /// Sum of association counts contributed by this source.
    pub associations_added: u64,
}

impl SourceDescriptor {
    pub fn new(name: impl Into<String>, kind: SourceKind) -> Self {
        SourceDescriptor {
            name: name.into(),
            kind,
            records_ingested: 0,
            associations_added: 0,
        }
    }
}
