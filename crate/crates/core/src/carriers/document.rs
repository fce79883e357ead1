//! Document carrier.
//!
//! A document is an identifier, a list of attributes with atomic values, and
//! a list of dispatchers (named links to other documents by identifier).

/// A single document of a collection.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Document {
    pub id: String,
    /// `(name, atomic value)` in document order; names may repeat.
    pub attrs: Vec<(String, String)>,
    /// `(name, target document id)` in document order.
    pub dispatchers: Vec<(String, String)>,
}

impl Document {
    pub fn new(id: impl Into<String>) -> Self {
        Document {
            id: id.into(),
            ..Default::default()
        }
    }

    pub fn attr(mut self, name: impl Into<String>, value: impl Into<String>) -> Self {
        self.attrs.push((name.into(), value.into()));
        self
    }

    pub fn dispatcher(mut self, name: impl Into<String>, target: impl Into<String>) -> Self {
        self.dispatchers.push((name.into(), target.into()));
        self
    }
}

/// A node of the document's element tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ElementNode {
    Collection(String),
    Document(String),
    Attribute(String),
    Dispatcher(String),
}

/// Collection node, document node, then one node per attribute and per
/// dispatcher occurrence.
pub fn doc_element_nodes(doc: &Document, collection: &str) -> Vec<ElementNode> {
    let mut nodes = Vec::with_capacity(2 + doc.attrs.len() + doc.dispatchers.len());
    nodes.push(ElementNode::Collection(collection.to_string()));
    nodes.push(ElementNode::Document(doc.id.clone()));
    nodes.extend(
        doc.attrs
            .iter()
            .map(|(n, _)| ElementNode::Attribute(n.clone())),
    );
    nodes.extend(
        doc.dispatchers
            .iter()
            .map(|(n, _)| ElementNode::Dispatcher(n.clone())),
    );
    nodes
}

/// Values held under attributes named `name`, in document order.
pub fn doc_node_values<'a>(doc: &'a Document, name: &str) -> Vec<&'a str> {
    doc.attrs
        .iter()
        .filter(|(n, _)| n == name)
        .map(|(_, v)| v.as_str())
        .collect()
}

/// Relations between the elements of a document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Relation {
    /// element-element: document belongs to collection.
    ElementElement {
        document: String,
        collection: String,
    },
    /// element-attribute: attribute belongs to document.
    ElementAttribute { attribute: String, document: String },
    /// element-tag: dispatcher points at a target document.
    ElementTag { name: String, target: String },
    /// element-data: attribute holds a value.
    ElementData { attribute: String, value: String },
}

/// The EE tuple first, then EA per attribute, ER per dispatcher and ED per
/// attribute.
pub fn doc_relations(doc: &Document, collection: &str) -> Vec<Relation> {
    let mut out = vec![Relation::ElementElement {
        document: doc.id.clone(),
        collection: collection.to_string(),
    }];
    out.extend(doc.attrs.iter().map(|(n, _)| Relation::ElementAttribute {
        attribute: n.clone(),
        document: doc.id.clone(),
    }));
    out.extend(doc.dispatchers.iter().map(|(n, t)| Relation::ElementTag {
        name: n.clone(),
        target: t.clone(),
    }));
    out.extend(doc.attrs.iter().map(|(n, v)| Relation::ElementData {
        attribute: n.clone(),
        value: v.clone(),
    }));
    out
}
