//! Entity and feature identifiers.
//!
//! Both identifiers carry a canonical string form which is what they are
//! ordered, hashed and persisted by. The canonical form escapes backslash,
//! TAB, CR and LF so that it never contains a raw field or line separator;
//! feature keys additionally escape `=` so the `kind:key=value` layout can
//! be split unambiguously.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use thiserror::Error;

/// Namespace used for entities that are not bound to a single source.
pub const GLOBAL_NAMESPACE: &str = "global";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IdError {
    #[error("entity namespace must be non-empty")]
    EmptyNamespace,
    #[error("entity namespace {0:?} may not contain '/', '\\\\' or control characters")]
    BadNamespace(String),
    #[error("entity local name must be non-empty")]
    EmptyLocal,
    #[error("entity {0:?} is not of the form namespace/local")]
    MissingSeparator(String),
    #[error("feature {0:?} is not of the form kind:key=value")]
    MalformedFeature(String),
    #[error("unknown feature kind {0:?}")]
    UnknownKind(String),
    #[error("invalid escape sequence in {0:?}")]
    BadEscape(String),
}

fn escape_into(out: &mut String, raw: &str, escape_eq: bool) {
    for c in raw.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '=' if escape_eq => out.push_str("\\="),
            c => out.push(c),
        }
    }
}

/// Reverses [`escape_into`]. `\=` is accepted everywhere.
fn unescape(s: &str) -> Result<String, IdError> {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('\\') => out.push('\\'),
            Some('t') => out.push('\t'),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            Some('=') => out.push('='),
            _ => return Err(IdError::BadEscape(s.to_string())),
        }
    }
    Ok(out)
}

/// Checks a namespace (also used for source names).
pub fn validate_namespace(ns: &str) -> Result<(), IdError> {
    if ns.is_empty() {
        return Err(IdError::EmptyNamespace);
    }
    if ns.contains(['/', '\\']) || ns.chars().any(char::is_control) {
        return Err(IdError::BadNamespace(ns.to_string()));
    }
    Ok(())
}

/// An entity `e`, identified by `namespace/local`.
#[derive(Clone)]
pub struct EntityId {
    canonical: String,
    namespace_len: usize,
    local: String,
}

impl EntityId {
    pub fn new(namespace: &str, local: &str) -> Result<Self, IdError> {
        validate_namespace(namespace)?;
        if local.is_empty() {
            return Err(IdError::EmptyLocal);
        }
        let mut canonical = String::with_capacity(namespace.len() + local.len() + 1);
        canonical.push_str(namespace);
        canonical.push('/');
        escape_into(&mut canonical, local, false);
        Ok(EntityId {
            canonical,
            namespace_len: namespace.len(),
            local: local.to_string(),
        })
    }

    pub fn global(local: &str) -> Result<Self, IdError> {
        Self::new(GLOBAL_NAMESPACE, local)
    }

    pub fn namespace(&self) -> &str {
        &self.canonical[..self.namespace_len]
    }

    pub fn local(&self) -> &str {
        &self.local
    }

    /// Escaped `namespace/local` form.
    pub fn canonical(&self) -> &str {
        &self.canonical
    }
}

impl FromStr for EntityId {
    type Err = IdError;

    /// Parses the canonical (escaped) form.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (ns, local) = s
            .split_once('/')
            .ok_or_else(|| IdError::MissingSeparator(s.to_string()))?;
        EntityId::new(ns, &unescape(local)?)
    }
}

impl PartialEq for EntityId {
    fn eq(&self, other: &Self) -> bool {
        self.canonical == other.canonical
    }
}

impl Eq for EntityId {}

impl Hash for EntityId {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.canonical.hash(state)
    }
}

impl PartialOrd for EntityId {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for EntityId {
    fn cmp(&self, other: &Self) -> Ordering {
        self.canonical.cmp(&other.canonical)
    }
}

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical)
    }
}

impl fmt::Debug for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "EntityId({})", self.canonical)
    }
}

/// What kind of observation a feature records.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FeatureKind {
    /// Attribute with an atomic value (documents, composite-key KV, RDF literals).
    Attr,
    /// Outgoing document dispatcher.
    Ref,
    /// Incoming document dispatcher.
    RefIn,
    /// Wide-column cell `family:qualifier`.
    Cell,
    /// Outgoing graph arc / RDF predicate.
    Arc,
    /// Incoming graph arc / RDF predicate.
    ArcIn,
    /// Node value (`z`) or the root marker.
    Value,
    /// Plain key-value key.
    Kv,
}

impl FeatureKind {
    pub const ALL: [FeatureKind; 8] = [
        FeatureKind::Attr,
        FeatureKind::Ref,
        FeatureKind::RefIn,
        FeatureKind::Cell,
        FeatureKind::Arc,
        FeatureKind::ArcIn,
        FeatureKind::Value,
        FeatureKind::Kv,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureKind::Attr => "attr",
            FeatureKind::Ref => "ref",
            FeatureKind::RefIn => "ref-in",
            FeatureKind::Cell => "cell",
            FeatureKind::Arc => "arc",
            FeatureKind::ArcIn => "arc-in",
            FeatureKind::Value => "value",
            FeatureKind::Kv => "kv",
        }
    }
}

impl FromStr for FeatureKind {
    type Err = IdError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FeatureKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| IdError::UnknownKind(s.to_string()))
    }
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A feature `f`, identified by `kind:key=value`.
///
/// Feature identity is global: the same canonical form coming from two
/// different sources is the same feature.
#[derive(Clone)]
pub struct FeatureId {
    canonical: String,
    kind: FeatureKind,
    key: String,
    value: String,
}

impl FeatureId {
    pub fn new(kind: FeatureKind, key: &str, value: &str) -> Self {
        let mut canonical =
            String::with_capacity(kind.as_str().len() + key.len() + value.len() + 2);
        canonical.push_str(kind.as_str());
        canonical.push(':');
        escape_into(&mut canonical, key, true);
        canonical.push('=');
        escape_into(&mut canonical, value, false);
        FeatureId {
            canonical,
            kind,
            key: key.to_string(),
            value: value.to_string(),
        }
    }

    pub fn kind(&self) -> FeatureKind {
        self.kind
    }

    pub fn key(&self) -> &str {
        &self.key
    }

    pub fn value(&self) -> &str {
        &self.value
    }

    /// Escaped `kind:key=value` form.
    pub fn canonical(&self) -> &str {
        &self.canonical
    }
}

impl FromStr for FeatureId {
    type Err = IdError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let malformed = || IdError::MalformedFeature(s.to_string());
        let (kind, rest) = s.split_once(':').ok_or_else(malformed)?;
        let kind: FeatureKind = kind.parse()?;
        // first '=' not preceded by an escaping backslash
        let mut escaped = false;
        let mut split = None;
        for (i, c) in rest.char_indices() {
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == '=' {
                split = Some(i);
                break;
            }
        }
        let at = split.ok_or_else(malformed)?;
        let key = unescape(&rest[..at])?;
        let value = unescape(&rest[at + 1..])?;
        Ok(FeatureId::new(kind, &key, &value))
    }
}

impl PartialEq for FeatureId {
    fn eq(&self, other: &Self) -> bool {
        self.canonical == other.canonical
    }
}

impl Eq for FeatureId {}

impl Hash for FeatureId {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.canonical.hash(state)
    }
}

impl PartialOrd for FeatureId {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for FeatureId {
    fn cmp(&self, other: &Self) -> Ordering {
        self.canonical.cmp(&other.canonical)
    }
}

impl fmt::Display for FeatureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical)
    }
}

impl fmt::Debug for FeatureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FeatureId({})", self.canonical)
    }
}
