//! Entity-feature indexing across heterogeneous data sources.
//!
//! Records from key-value, wide-column, document and graph/RDF sources are
//! mapped into one sparse matrix of association counts between entities and
//! features. From those counts the crate derives the information content of
//! each association, unit-normalized entity vectors, and normalized L1
//! distances between entities and between whole sources.
//!
//! The usual flow is [`ingest`] → [`AssociationStore::freeze`] → the query
//! functions in [`metrics`], with [`snapshot`] for persistence.

pub mod carriers;
pub mod id;
pub mod ingest;
pub mod metrics;
pub mod snapshot;
pub mod source;
pub mod store;

pub use id::{EntityId, FeatureId, FeatureKind, IdError, GLOBAL_NAMESPACE};
pub use ingest::{
    ingest, ingest_reader, ingest_with, IngestError, IngestOptions, IngestReport, LineError,
};
pub use metrics::{
    distance, entity_vector, importance, info_bits, max_diff_bound, neighbors, source_distance,
    unit_normalize, DistanceMatrix, DistanceResult, EntityVector, Importance, Measure, MetricError,
    VectorTable,
};
pub use snapshot::SnapshotError;
pub use source::{SourceDescriptor, SourceKind};
pub use store::{AssociationStore, Cardinalities, StoreError};
