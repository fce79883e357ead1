//! The sparse entity-feature association matrix.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::id::{validate_namespace, EntityId, FeatureId, IdError};
use crate::source::{SourceDescriptor, SourceKind};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StoreError {
    #[error("store is frozen; no further associations can be added")]
    Frozen,
    #[error("association delta must be at least 1")]
    ZeroDelta,
    #[error("source {name:?} is registered as {existing}, not {requested}")]
    SourceKindMismatch {
        name: String,
        existing: SourceKind,
        requested: SourceKind,
    },
    #[error("unknown source {0:?}")]
    UnknownSource(String),
    #[error("invalid source name: {0}")]
    BadSourceName(IdError),
    #[error("entity {0} already has associations and cannot be aliased")]
    AliasAfterUse(EntityId),
    #[error("aliasing {from} to {to} would create a cycle")]
    AliasCycle { from: EntityId, to: EntityId },
}

/// `(|E|, |F|, number of stored pairs)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Cardinalities {
    pub entities: usize,
    pub features: usize,
    pub pairs: usize,
}

static NO_ENTITIES: BTreeSet<EntityId> = BTreeSet::new();
static NO_FEATURES: BTreeMap<FeatureId, u64> = BTreeMap::new();

/// Append-only store of association counts `n(e, f)`.
///
/// Keeps both inverted indexes: `by_feature` is `e(f)` and `by_entity` is
/// `f(e)` together with the counts. Only positive counts are stored.
/// After [`freeze`](Self::freeze) the store rejects writes and can be shared
/// freely between readers.
#[derive(Debug, Clone, Default)]
pub struct AssociationStore {
    by_entity: BTreeMap<EntityId, BTreeMap<FeatureId, u64>>,
    by_feature: BTreeMap<FeatureId, BTreeSet<EntityId>>,
    pairs: usize,
    sources: BTreeMap<String, SourceDescriptor>,
    /// Per source: how many associations it contributed to each entity.
    coverage: BTreeMap<String, BTreeMap<EntityId, u64>>,
    aliases: BTreeMap<EntityId, EntityId>,
    frozen: bool,
}

/// Aliases are an ingestion-time concern and are not part of equality.
impl PartialEq for AssociationStore {
    fn eq(&self, other: &Self) -> bool {
        self.frozen == other.frozen
            && self.pairs == other.pairs
            && self.by_entity == other.by_entity
            && self.by_feature == other.by_feature
            && self.sources == other.sources
            && self.coverage == other.coverage
    }
}

impl Eq for AssociationStore {}

impl AssociationStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen
    }

    /// Makes the store immutable. Freezing twice is a no-op.
    pub fn freeze(&mut self) {
        self.frozen = true;
    }

    fn check_writable(&self) -> Result<(), StoreError> {
        if self.frozen {
            Err(StoreError::Frozen)
        } else {
            Ok(())
        }
    }

    /// Adds `delta` to `n(e, f)` and returns the new count.
    pub fn add_association(
        &mut self,
        entity: EntityId,
        feature: FeatureId,
        delta: u64,
    ) -> Result<u64, StoreError> {
        self.check_writable()?;
        if delta == 0 {
            return Err(StoreError::ZeroDelta);
        }
        let entity = self.resolve(&entity).clone();
        Ok(self.insert(entity, feature, delta))
    }

    /// Like [`add_association`](Self::add_association), additionally
    /// crediting the association to a registered source.
    pub fn add_from_source(
        &mut self,
        source: &str,
        entity: EntityId,
        feature: FeatureId,
        delta: u64,
    ) -> Result<u64, StoreError> {
        self.check_writable()?;
        if delta == 0 {
            return Err(StoreError::ZeroDelta);
        }
        let descriptor = self
            .sources
            .get_mut(source)
            .ok_or_else(|| StoreError::UnknownSource(source.to_string()))?;
        descriptor.associations_added += delta;
        let entity = self.resolve(&entity).clone();
        *self
            .coverage
            .entry(source.to_string())
            .or_default()
            .entry(entity.clone())
            .or_insert(0) += delta;
        Ok(self.insert(entity, feature, delta))
    }

    fn insert(&mut self, entity: EntityId, feature: FeatureId, delta: u64) -> u64 {
        let row = self.by_entity.entry(entity.clone()).or_default();
        let count = match row.get_mut(&feature) {
            Some(n) => {
                *n += delta;
                *n
            }
            None => {
                row.insert(feature.clone(), delta);
                self.by_feature.entry(feature).or_default().insert(entity);
                self.pairs += 1;
                delta
            }
        };
        count
    }

    /// Registers `name` as a source of the given kind, or returns the
    /// existing registration if the kinds agree.
    pub fn register_source(
        &mut self,
        name: &str,
        kind: SourceKind,
    ) -> Result<&SourceDescriptor, StoreError> {
        self.check_writable()?;
        validate_namespace(name).map_err(StoreError::BadSourceName)?;
        let descriptor = self
            .sources
            .entry(name.to_string())
            .or_insert_with(|| SourceDescriptor::new(name, kind));
        if descriptor.kind != kind {
            return Err(StoreError::SourceKindMismatch {
                name: name.to_string(),
                existing: descriptor.kind,
                requested: kind,
            });
        }
        Ok(descriptor)
    }

    pub fn note_record(&mut self, source: &str) -> Result<(), StoreError> {
        self.check_writable()?;
        let descriptor = self
            .sources
            .get_mut(source)
            .ok_or_else(|| StoreError::UnknownSource(source.to_string()))?;
        descriptor.records_ingested += 1;
        Ok(())
    }

    /// Routes all future associations for `from` to `to`.
    pub fn alias(&mut self, from: EntityId, to: EntityId) -> Result<(), StoreError> {
        self.check_writable()?;
        if self.by_entity.contains_key(&from) {
            return Err(StoreError::AliasAfterUse(from));
        }
        let target = self.resolve(&to).clone();
        if target == from {
            return Err(StoreError::AliasCycle { from, to });
        }
        // keep every chain one hop long
        for t in self.aliases.values_mut() {
            if *t == from {
                *t = target.clone();
            }
        }
        self.aliases.insert(from, target);
        Ok(())
    }

    /// The entity that associations for `entity` are recorded under.
    pub fn resolve<'a>(&'a self, entity: &'a EntityId) -> &'a EntityId {
        self.aliases.get(entity).unwrap_or(entity)
    }

    pub fn count(&self, entity: &EntityId, feature: &FeatureId) -> u64 {
        self.by_entity
            .get(entity)
            .and_then(|row| row.get(feature))
            .copied()
            .unwrap_or(0)
    }

    /// `e(f)`: entities with a positive count for `feature`.
    pub fn entities_of(&self, feature: &FeatureId) -> &BTreeSet<EntityId> {
        self.by_feature.get(feature).unwrap_or(&NO_ENTITIES)
    }

    /// `f(e)`: features with a positive count for `entity`.
    pub fn features_of(&self, entity: &EntityId) -> impl ExactSizeIterator<Item = &FeatureId> + '_ {
        self.feature_counts(entity).keys()
    }

    /// `f(e)` with the counts `n(e, f)`.
    pub fn feature_counts(&self, entity: &EntityId) -> &BTreeMap<FeatureId, u64> {
        self.by_entity.get(entity).unwrap_or(&NO_FEATURES)
    }

    /// `|e(f)|`.
    pub fn entity_frequency(&self, feature: &FeatureId) -> usize {
        self.entities_of(feature).len()
    }

    pub fn contains_entity(&self, entity: &EntityId) -> bool {
        self.by_entity.contains_key(entity)
    }

    pub fn cardinalities(&self) -> Cardinalities {
        Cardinalities {
            entities: self.by_entity.len(),
            features: self.by_feature.len(),
            pairs: self.pairs,
        }
    }

    /// Entities in canonical order.
    pub fn entities(&self) -> impl ExactSizeIterator<Item = &EntityId> + '_ {
        self.by_entity.keys()
    }

    /// Features in canonical order.
    pub fn features(&self) -> impl ExactSizeIterator<Item = &FeatureId> + '_ {
        self.by_feature.keys()
    }

    /// Every stored `(e, f, n)`, sorted by entity then feature.
    pub fn associations(&self) -> impl Iterator<Item = (&EntityId, &FeatureId, u64)> + '_ {
        self.by_entity
            .iter()
            .flat_map(|(e, row)| row.iter().map(move |(f, n)| (e, f, *n)))
    }

    /// Sources in name order.
    pub fn sources(&self) -> impl ExactSizeIterator<Item = &SourceDescriptor> + '_ {
        self.sources.values()
    }

    pub fn source(&self, name: &str) -> Option<&SourceDescriptor> {
        self.sources.get(name)
    }

    /// Entities mentioned by `source`, with that source's association count
    /// for each.
    pub fn coverage(&self, source: &str) -> Option<&BTreeMap<EntityId, u64>> {
        if !self.sources.contains_key(source) {
            return None;
        }
        Some(self.coverage.get(source).unwrap_or(&NO_COVERAGE))
    }

    pub(crate) fn restore_source(&mut self, descriptor: SourceDescriptor) {
        self.sources.insert(descriptor.name.clone(), descriptor);
    }

    pub(crate) fn restore_coverage(&mut self, source: &str, entity: EntityId, count: u64) {
        self.coverage
            .entry(source.to_string())
            .or_default()
            .insert(entity, count);
    }

    pub(crate) fn restore_association(&mut self, entity: EntityId, feature: FeatureId, count: u64) {
        self.insert(entity, feature, count);
    }
}

static NO_COVERAGE: BTreeMap<EntityId, u64> = BTreeMap::new();
