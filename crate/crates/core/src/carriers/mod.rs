//! The four carrier models and their mapping into entity-feature
//! associations.
//!
//! Mapping rules, per record:
//!
//! | carrier | entity | feature(s) |
//! |---|---|---|
//! | key-value | value | `kv:key=` |
//! | key-value, composite `E/a` key | `E` | `attr:a=value` |
//! | wide-column | row | `cell:family:qualifier=` (one per version) |
//! | document | id | `attr:name=value`, `ref:name=target`; target gets `ref-in:name=id` |
//! | graph | node | `arc:label=to`, `arc-in:label=from`, `value:=v`, `value:root=` |
//! | RDF | subject / object | `arc:p=o` and `arc-in:p=s`, or `attr:p=literal` |

pub mod document;
pub mod graph;
pub mod kv;
pub mod rdf;
pub mod wide;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::id::{EntityId, FeatureId, FeatureKind, IdError};

pub use document::{
    doc_element_nodes, doc_node_values, doc_relations, Document, ElementNode, Relation,
};
pub use graph::{GraphArc, GraphData, GraphElement};
pub use kv::{kv_project, kv_select, Axis, KvPair, SelectBy};
pub use rdf::{RdfObject, RdfTriple};
pub use wide::{family_of, latest_versions, ColumnFamily, WideCell};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CarrierError {
    #[error("key-value pair has an empty key")]
    EmptyKey,
    #[error("key-value pair has an empty value")]
    EmptyValue,
    #[error("composite key {0:?} is not of the form entity/attribute")]
    NotComposite(String),
    #[error("wide-column cell has an empty row key")]
    EmptyRow,
    #[error("wide-column family {0:?} may not be empty or contain ':'")]
    BadFamily(String),
    #[error("wide-column timestamp {0} is negative")]
    NegativeTimestamp(i64),
    #[error("document has an empty id")]
    EmptyDocumentId,
    #[error("dispatcher {0:?} has an empty target")]
    EmptyDispatcherTarget(String),
    #[error("graph node identifiers must be non-empty")]
    EmptyNode,
    #[error("graph arc endpoint {0:?} is not a node")]
    DanglingArc(String),
    #[error("graph root {0:?} is not a node")]
    RootNotANode(String),
    #[error("graph value assigned to unknown node {0:?}")]
    ValueOnUnknownNode(String),
    #[error("RDF {0} is empty")]
    EmptyTerm(&'static str),
    #[error(transparent)]
    Id(#[from] IdError),
}

/// A record from any carrier.
#[derive(Debug, Clone, PartialEq)]
pub enum Record {
    Kv(KvPair),
    Wide(WideCell),
    Doc(Document),
    Graph(GraphData),
    GraphElement(GraphElement),
    Rdf(RdfTriple),
}

/// How key-value pairs are read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KvMode {
    /// Value is the entity, key the feature.
    #[default]
    Literal,
    /// Key `E/a` with value `v` describes entity `E` as `attr:a=v`.
    Composite,
}

/// Where mapped entities live and how ambiguous carriers are read.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MappingContext {
    pub namespace: String,
    pub kv_mode: KvMode,
}

impl MappingContext {
    pub fn new(namespace: impl Into<String>) -> Self {
        MappingContext {
            namespace: namespace.into(),
            kv_mode: KvMode::default(),
        }
    }

    pub fn with_kv_mode(mut self, mode: KvMode) -> Self {
        self.kv_mode = mode;
        self
    }

    fn entity(&self, local: &str) -> Result<EntityId, CarrierError> {
        Ok(EntityId::new(&self.namespace, local)?)
    }
}

/// One `n(e, f)` increment.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Association {
    pub entity: EntityId,
    pub feature: FeatureId,
    pub count: u64,
}

impl Association {
    fn one(entity: EntityId, feature: FeatureId) -> Self {
        Association {
            entity,
            feature,
            count: 1,
        }
    }
}

/// Maps one record to its associations. Duplicate `(e, f)` pairs within the
/// record are merged; output is sorted.
pub fn map_to_associations(
    record: &Record,
    ctx: &MappingContext,
) -> Result<Vec<Association>, CarrierError> {
    let raw = match record {
        Record::Kv(pair) => map_kv(pair, ctx)?,
        Record::Wide(cell) => map_wide(cell, ctx)?,
        Record::Doc(doc) => map_doc(doc, ctx)?,
        Record::Graph(graph) => map_graph(graph, ctx)?,
        Record::GraphElement(el) => map_graph_element(el, ctx)?,
        Record::Rdf(triple) => map_rdf(triple, ctx)?,
    };
    Ok(aggregate(raw))
}

/// Merges associations with the same `(entity, feature)`, summing counts,
/// and sorts the result.
pub fn aggregate(associations: impl IntoIterator<Item = Association>) -> Vec<Association> {
    let mut merged: BTreeMap<(EntityId, FeatureId), u64> = BTreeMap::new();
    for a in associations {
        *merged.entry((a.entity, a.feature)).or_insert(0) += a.count;
    }
    merged
        .into_iter()
        .map(|((entity, feature), count)| Association {
            entity,
            feature,
            count,
        })
        .collect()
}

/// Maps and merges a batch of records.
pub fn map_records<'a>(
    records: impl IntoIterator<Item = &'a Record>,
    ctx: &MappingContext,
) -> Result<Vec<Association>, CarrierError> {
    let mut all = Vec::new();
    for r in records {
        all.extend(map_to_associations(r, ctx)?);
    }
    Ok(aggregate(all))
}

fn map_kv(pair: &KvPair, ctx: &MappingContext) -> Result<Vec<Association>, CarrierError> {
    if pair.key.is_empty() {
        return Err(CarrierError::EmptyKey);
    }
    match ctx.kv_mode {
        KvMode::Literal => {
            if pair.value.is_empty() {
                return Err(CarrierError::EmptyValue);
            }
            Ok(vec![Association::one(
                ctx.entity(&pair.value)?,
                FeatureId::new(FeatureKind::Kv, &pair.key, ""),
            )])
        }
        KvMode::Composite => {
            let (entity, attr) = pair
                .key
                .rsplit_once('/')
                .filter(|(e, a)| !e.is_empty() && !a.is_empty())
                .ok_or_else(|| CarrierError::NotComposite(pair.key.clone()))?;
            Ok(vec![Association::one(
                ctx.entity(entity)?,
                FeatureId::new(FeatureKind::Attr, attr, &pair.value),
            )])
        }
    }
}

pub(crate) fn validate_cell(cell: &WideCell) -> Result<(), CarrierError> {
    if cell.row.is_empty() {
        return Err(CarrierError::EmptyRow);
    }
    if cell.family.is_empty() || cell.family.contains(':') {
        return Err(CarrierError::BadFamily(cell.family.clone()));
    }
    if cell.timestamp < 0 {
        return Err(CarrierError::NegativeTimestamp(cell.timestamp));
    }
    Ok(())
}

fn map_wide(cell: &WideCell, ctx: &MappingContext) -> Result<Vec<Association>, CarrierError> {
    validate_cell(cell)?;
    Ok(vec![Association::one(
        ctx.entity(&cell.row)?,
        FeatureId::new(FeatureKind::Cell, &cell.column(), ""),
    )])
}

fn map_doc(doc: &Document, ctx: &MappingContext) -> Result<Vec<Association>, CarrierError> {
    if doc.id.is_empty() {
        return Err(CarrierError::EmptyDocumentId);
    }
    let me = ctx.entity(&doc.id)?;
    let mut out = Vec::with_capacity(doc.attrs.len() + 2 * doc.dispatchers.len());
    for (name, value) in &doc.attrs {
        out.push(Association::one(
            me.clone(),
            FeatureId::new(FeatureKind::Attr, name, value),
        ));
    }
    for (name, target) in &doc.dispatchers {
        if target.is_empty() {
            return Err(CarrierError::EmptyDispatcherTarget(name.clone()));
        }
        out.push(Association::one(
            me.clone(),
            FeatureId::new(FeatureKind::Ref, name, target),
        ));
        out.push(Association::one(
            ctx.entity(target)?,
            FeatureId::new(FeatureKind::RefIn, name, &doc.id),
        ));
    }
    Ok(out)
}

fn map_graph(graph: &GraphData, ctx: &MappingContext) -> Result<Vec<Association>, CarrierError> {
    if graph.nodes.iter().any(String::is_empty) {
        return Err(CarrierError::EmptyNode);
    }
    if !graph.nodes.contains(&graph.root) {
        return Err(CarrierError::RootNotANode(graph.root.clone()));
    }
    for arc in &graph.arcs {
        for end in [&arc.from, &arc.to] {
            if !graph.nodes.contains(end) {
                return Err(CarrierError::DanglingArc(end.clone()));
            }
        }
    }
    if let Some(node) = graph.values.keys().find(|n| !graph.nodes.contains(*n)) {
        return Err(CarrierError::ValueOnUnknownNode(node.clone()));
    }
    let mut out = Vec::new();
    for el in graph.elements() {
        out.extend(map_graph_element(&el, ctx)?);
    }
    Ok(out)
}

fn map_graph_element(
    el: &GraphElement,
    ctx: &MappingContext,
) -> Result<Vec<Association>, CarrierError> {
    let node = |n: &str| {
        if n.is_empty() {
            Err(CarrierError::EmptyNode)
        } else {
            ctx.entity(n)
        }
    };
    Ok(match el {
        GraphElement::Arc(arc) => vec![
            Association::one(
                node(&arc.from)?,
                FeatureId::new(FeatureKind::Arc, &arc.label, &arc.to),
            ),
            Association::one(
                node(&arc.to)?,
                FeatureId::new(FeatureKind::ArcIn, &arc.label, &arc.from),
            ),
        ],
        GraphElement::Value { node: n, value } => vec![Association::one(
            node(n)?,
            FeatureId::new(FeatureKind::Value, "", value),
        )],
        GraphElement::Root(n) => vec![Association::one(
            node(n)?,
            FeatureId::new(FeatureKind::Value, "root", ""),
        )],
    })
}

fn map_rdf(t: &RdfTriple, ctx: &MappingContext) -> Result<Vec<Association>, CarrierError> {
    if t.subject.is_empty() {
        return Err(CarrierError::EmptyTerm("subject"));
    }
    if t.predicate.is_empty() {
        return Err(CarrierError::EmptyTerm("predicate"));
    }
    if t.object.as_str().is_empty() {
        return Err(CarrierError::EmptyTerm("object"));
    }
    let subject = ctx.entity(&t.subject)?;
    Ok(match &t.object {
        RdfObject::Resource(o) => vec![
            Association::one(subject, FeatureId::new(FeatureKind::Arc, &t.predicate, o)),
            Association::one(
                ctx.entity(o)?,
                FeatureId::new(FeatureKind::ArcIn, &t.predicate, &t.subject),
            ),
        ],
        RdfObject::Literal(lit) => vec![Association::one(
            subject,
            FeatureId::new(FeatureKind::Attr, &t.predicate, lit),
        )],
    })
}
