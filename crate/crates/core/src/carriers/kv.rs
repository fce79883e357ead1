//! Key-value carrier: a set of `<key, value>` pairs with projection and
//! selection.

/// One key-value pair. The key plays the role of the feature, the value
/// that of the entity.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct KvPair {
    pub key: String,
    pub value: String,
}

impl KvPair {
    pub fn new(key: impl Into<String>, value: impl Into<String>) -> Self {
        KvPair {
            key: key.into(),
            value: value.into(),
        }
    }
}

/// Projection axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Keys,
    Values,
}

/// Which side of a pair a selection matches against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectBy {
    Key,
    Value,
}

/// Distinct keys or values in first-occurrence order.
pub fn kv_project(pairs: &[KvPair], axis: Axis) -> Vec<&str> {
    let mut seen = std::collections::HashSet::new();
    pairs
        .iter()
        .map(|p| match axis {
            Axis::Keys => p.key.as_str(),
            Axis::Values => p.value.as_str(),
        })
        .filter(|s| seen.insert(*s))
        .collect()
}

/// Pairs whose chosen side equals `needle`, in input order.
pub fn kv_select<'a>(pairs: &'a [KvPair], by: SelectBy, needle: &str) -> Vec<&'a KvPair> {
    pairs
        .iter()
        .filter(|p| match by {
            SelectBy::Key => p.key == needle,
            SelectBy::Value => p.value == needle,
        })
        .collect()
}
