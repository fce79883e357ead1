//! Labelled directed graph carrier `<ID, A, z, root>`.

use std::collections::{BTreeMap, BTreeSet};

/// Arc `(from, label, to)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GraphArc {
    pub from: String,
    pub label: String,
    pub to: String,
}

impl GraphArc {
    pub fn new(from: impl Into<String>, label: impl Into<String>, to: impl Into<String>) -> Self {
        GraphArc {
            from: from.into(),
            label: label.into(),
            to: to.into(),
        }
    }
}

/// A whole graph: nodes, arcs, node values and the root node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphData {
    pub nodes: BTreeSet<String>,
    pub arcs: Vec<GraphArc>,
    pub values: BTreeMap<String, String>,
    pub root: String,
}

impl GraphData {
    /// A graph holding only its root.
    pub fn with_root(root: impl Into<String>) -> Self {
        let root = root.into();
        GraphData {
            nodes: BTreeSet::from([root.clone()]),
            arcs: Vec::new(),
            values: BTreeMap::new(),
            root,
        }
    }

    /// Adds an arc, registering both endpoints as nodes.
    pub fn arc(mut self, from: &str, label: &str, to: &str) -> Self {
        self.nodes.insert(from.to_string());
        self.nodes.insert(to.to_string());
        self.arcs.push(GraphArc::new(from, label, to));
        self
    }

    /// Sets `z(node) = value`, registering the node.
    pub fn value(mut self, node: &str, value: &str) -> Self {
        self.nodes.insert(node.to_string());
        self.values.insert(node.to_string(), value.to_string());
        self
    }

    /// The graph as independent elements: root marker, arcs, then values.
    pub fn elements(&self) -> Vec<GraphElement> {
        let mut out = Vec::with_capacity(1 + self.arcs.len() + self.values.len());
        out.push(GraphElement::Root(self.root.clone()));
        out.extend(self.arcs.iter().cloned().map(GraphElement::Arc));
        out.extend(self.values.iter().map(|(n, v)| GraphElement::Value {
            node: n.clone(),
            value: v.clone(),
        }));
        out
    }
}

/// One piece of a graph; a graph file is read as a stream of these.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraphElement {
    Arc(GraphArc),
    Value { node: String, value: String },
    Root(String),
}
