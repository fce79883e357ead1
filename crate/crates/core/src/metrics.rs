//! Information content, feature importance, entity vectors and distances.
//!
//! An association between entity `e` and feature `f` is worth
//! `(1 + log2 n(e,f)) * log2(|E| / |e(f)|)` bits: the second factor is the
//! number of yes/no questions saved by knowing the entity carries `f`, the
//! first rewards repeated associations. Entity vectors are these values
//! scaled to unit L2 norm, and entities are compared with the L1 distance
//! between vectors, normalized by the per-coordinate bound
//! `|a - b| <= max(a, b)` into `[0, 1]`.
//!
//! Absent associations are never passed through the importance formula;
//! they simply contribute weight 0.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use thiserror::Error;

use crate::id::{EntityId, FeatureId};
use crate::store::AssociationStore;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetricError {
    #[error("information content is undefined for an empty set")]
    EmptySet,
    #[error("association count must be at least 1")]
    ZeroCount,
    #[error("|e(f)| = {ef_size} is outside 1..={e_size}")]
    FrequencyOutOfRange { ef_size: u64, e_size: u64 },
    #[error("unknown entity {0}")]
    UnknownEntity(EntityId),
    #[error("unknown source {0:?}")]
    UnknownSource(String),
    #[error("store must be frozen before this query")]
    NotFrozen,
}

/// Number of binary questions needed to single out one of `n` alternatives.
pub fn info_bits(n: u64) -> Result<f64, MetricError> {
    if n == 0 {
        return Err(MetricError::EmptySet);
    }
    Ok((n as f64).log2())
}

/// Importance `I(e, f)` in bits.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Importance(f64);

impl Importance {
    pub fn bits(self) -> f64 {
        self.0
    }
}

/// `(1 + log2 n_ef) * log2(e_size / ef_size)`.
pub fn importance(n_ef: u64, e_size: u64, ef_size: u64) -> Result<Importance, MetricError> {
    if n_ef == 0 {
        return Err(MetricError::ZeroCount);
    }
    if ef_size == 0 || ef_size > e_size {
        return Err(MetricError::FrequencyOutOfRange { ef_size, e_size });
    }
    let repeat = 1.0 + (n_ef as f64).log2();
    let rarity = (e_size as f64 / ef_size as f64).log2();
    Ok(Importance(repeat * rarity))
}

/// The per-coordinate upper bound on `|a - b|` for nonnegative `a <= a_max`,
/// `b <= b_max`.
pub fn max_diff_bound(a_max: f64, b_max: f64) -> f64 {
    a_max.max(b_max)
}

/// Raw and normalized distance between two weight vectors.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DistanceResult {
    pub raw: f64,
    pub normalized: f64,
}

impl DistanceResult {
    pub fn get(&self, measure: Measure) -> f64 {
        match measure {
            Measure::Raw => self.raw,
            Measure::Normalized => self.normalized,
        }
    }
}

/// Which distance to rank by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Measure {
    Raw,
    #[default]
    Normalized,
}

/// Normalized importance weights `V(e, ·)` over the entity's support.
///
/// Either the weights have unit L2 norm or they are all zero (every feature
/// of the entity is carried by every entity).
#[derive(Debug, Clone, PartialEq)]
pub struct EntityVector {
    owner: EntityId,
    weights: Vec<(FeatureId, f64)>,
}

impl EntityVector {
    pub fn owner(&self) -> &EntityId {
        &self.owner
    }

    /// `(feature, weight)` pairs in canonical feature order.
    pub fn weights(&self) -> &[(FeatureId, f64)] {
        &self.weights
    }

    pub fn weight(&self, feature: &FeatureId) -> f64 {
        self.weights
            .binary_search_by(|(f, _)| f.cmp(feature))
            .map(|i| self.weights[i].1)
            .unwrap_or(0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.weights.iter().all(|(_, w)| *w == 0.0)
    }
}

/// Scales `(key, importance)` pairs to unit norm; all-zero input stays zero.
pub fn unit_normalize<K>(mut raw: Vec<(K, f64)>) -> Vec<(K, f64)> {
    let norm = raw.iter().map(|(_, i)| i * i).sum::<f64>().sqrt();
    if norm > 0.0 {
        for (_, w) in &mut raw {
            *w /= norm;
        }
    }
    raw
}

/// L1 distance and max-bound normalization over two sparse vectors sorted
/// by key. Both sums run in the same order, so `raw <= bound` holds exactly.
fn sparse_distance<K: Ord>(a: &[(K, f64)], b: &[(K, f64)]) -> DistanceResult {
    let mut raw = 0.0;
    let mut bound = 0.0;
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let order = match (a.get(i), b.get(j)) {
            (Some((ka, _)), Some((kb, _))) => ka.cmp(kb),
            (Some(_), None) => Ordering::Less,
            (None, _) => Ordering::Greater,
        };
        let (x, y) = match order {
            Ordering::Less => {
                i += 1;
                (a[i - 1].1, 0.0)
            }
            Ordering::Greater => {
                j += 1;
                (0.0, b[j - 1].1)
            }
            Ordering::Equal => {
                i += 1;
                j += 1;
                (a[i - 1].1, b[j - 1].1)
            }
        };
        raw += (x - y).abs();
        bound += max_diff_bound(x, y);
    }
    let normalized = if bound > 0.0 { raw / bound } else { 0.0 };
    DistanceResult { raw, normalized }
}

fn importances(store: &AssociationStore, entity: &EntityId) -> Vec<(FeatureId, f64)> {
    let e_size = store.cardinalities().entities as u64;
    store
        .feature_counts(entity)
        .iter()
        .map(|(f, &n)| {
            let ef = store.entity_frequency(f) as u64;
            let bits = importance(n, e_size, ef)
                .expect("store invariants keep importance inputs in range");
            (f.clone(), bits.bits())
        })
        .collect()
}

/// `(feature, I(e, f))` for every feature of `entity`, in canonical order.
pub fn importance_profile(
    store: &AssociationStore,
    entity: &EntityId,
) -> Result<Vec<(FeatureId, Importance)>, MetricError> {
    if !store.contains_entity(entity) {
        return Err(MetricError::UnknownEntity(entity.clone()));
    }
    Ok(importances(store, entity)
        .into_iter()
        .map(|(f, b)| (f, Importance(b)))
        .collect())
}

/// The `top` most important features of `entity`, highest first, ties by
/// canonical feature order.
pub fn ranked_importance(
    store: &AssociationStore,
    entity: &EntityId,
    top: usize,
) -> Result<Vec<(FeatureId, Importance)>, MetricError> {
    let mut profile = importance_profile(store, entity)?;
    // the profile is already in feature order, and the sort is stable
    profile.sort_by(|a, b| b.1.bits().total_cmp(&a.1.bits()));
    profile.truncate(top);
    Ok(profile)
}

pub fn entity_vector(
    store: &AssociationStore,
    entity: &EntityId,
) -> Result<EntityVector, MetricError> {
    if !store.contains_entity(entity) {
        return Err(MetricError::UnknownEntity(entity.clone()));
    }
    Ok(EntityVector {
        owner: entity.clone(),
        weights: unit_normalize(importances(store, entity)),
    })
}

pub fn vector_distance(a: &EntityVector, b: &EntityVector) -> DistanceResult {
    sparse_distance(&a.weights, &b.weights)
}

pub fn distance(
    store: &AssociationStore,
    e1: &EntityId,
    e2: &EntityId,
) -> Result<DistanceResult, MetricError> {
    let a = entity_vector(store, e1)?;
    let b = entity_vector(store, e2)?;
    Ok(vector_distance(&a, &b))
}

fn require_frozen(store: &AssociationStore) -> Result<(), MetricError> {
    if store.is_frozen() {
        Ok(())
    } else {
        Err(MetricError::NotFrozen)
    }
}

/// Entity vectors for a whole store with features interned to dense ids,
/// for repeated or all-pairs distance queries.
#[derive(Debug, Clone)]
pub struct VectorTable {
    entities: Vec<EntityId>,
    vectors: Vec<Vec<(u32, f64)>>,
}

impl VectorTable {
    pub fn build(store: &AssociationStore) -> Result<Self, MetricError> {
        require_frozen(store)?;
        // canonical feature order gives ascending ids, so rows stay sorted
        let feature_ids: BTreeMap<&FeatureId, u32> = store
            .features()
            .enumerate()
            .map(|(i, f)| (f, i as u32))
            .collect();
        let mut entities = Vec::with_capacity(store.cardinalities().entities);
        let mut vectors = Vec::with_capacity(entities.capacity());
        for entity in store.entities() {
            let row = importances(store, entity)
                .into_iter()
                .map(|(f, w)| (feature_ids[&f], w))
                .collect();
            entities.push(entity.clone());
            vectors.push(unit_normalize(row));
        }
        Ok(VectorTable { entities, vectors })
    }

    /// Entities in canonical order.
    pub fn entities(&self) -> &[EntityId] {
        &self.entities
    }

    pub fn len(&self) -> usize {
        self.entities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entities.is_empty()
    }

    pub fn index_of(&self, entity: &EntityId) -> Option<usize> {
        self.entities.binary_search(entity).ok()
    }

    pub fn distance_at(&self, i: usize, j: usize) -> DistanceResult {
        sparse_distance(&self.vectors[i], &self.vectors[j])
    }

    /// The `k` entities closest to `entity`, nearest first, ties broken by
    /// canonical entity order.
    pub fn neighbors(
        &self,
        entity: &EntityId,
        k: usize,
        measure: Measure,
    ) -> Result<Vec<(EntityId, DistanceResult)>, MetricError> {
        let me = self
            .index_of(entity)
            .ok_or_else(|| MetricError::UnknownEntity(entity.clone()))?;
        let mut scored: Vec<(usize, DistanceResult)> = (0..self.len())
            .filter(|&j| j != me)
            .map(|j| (j, self.distance_at(me, j)))
            .collect();
        // indexes follow canonical order, so a stable sort settles ties
        scored.sort_by(|a, b| a.1.get(measure).total_cmp(&b.1.get(measure)));
        scored.truncate(k);
        Ok(scored
            .into_iter()
            .map(|(j, d)| (self.entities[j].clone(), d))
            .collect())
    }

    /// Every pairwise distance, upper triangle in row-major order.
    pub fn all_pairs(&self, measure: Measure) -> DistanceMatrix {
        let n = self.len();
        let mut values = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                values.push(self.distance_at(i, j).get(measure));
            }
        }
        DistanceMatrix {
            entities: self.entities.clone(),
            values,
        }
    }
}

/// Condensed symmetric distance matrix with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    entities: Vec<EntityId>,
    values: Vec<f64>,
}

impl DistanceMatrix {
    pub fn entities(&self) -> &[EntityId] {
        &self.entities
    }

    /// Upper-triangle values, `(0,1), (0,2), …, (1,2), …`.
    pub fn condensed(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let n = self.entities.len();
        match i.cmp(&j) {
            Ordering::Equal => 0.0,
            Ordering::Greater => self.get(j, i),
            Ordering::Less => self.values[i * n - i * (i + 1) / 2 + (j - i - 1)],
        }
    }
}

/// See [`VectorTable::neighbors`].
pub fn neighbors(
    store: &AssociationStore,
    entity: &EntityId,
    k: usize,
    measure: Measure,
) -> Result<Vec<(EntityId, DistanceResult)>, MetricError> {
    require_frozen(store)?;
    if !store.contains_entity(entity) {
        return Err(MetricError::UnknownEntity(entity.clone()));
    }
    VectorTable::build(store)?.neighbors(entity, k, measure)
}

/// Distance between two sources, each treated as a meta-entity whose
/// features are the entities it mentions, counted by the associations it
/// contributed to them. The meta-level `|E|` is the number of registered
/// sources.
pub fn source_distance(
    store: &AssociationStore,
    s1: &str,
    s2: &str,
) -> Result<DistanceResult, MetricError> {
    require_frozen(store)?;
    let a = meta_vector(store, s1)?;
    let b = meta_vector(store, s2)?;
    Ok(sparse_distance(&a, &b))
}

fn meta_vector<'a>(
    store: &'a AssociationStore,
    source: &str,
) -> Result<Vec<(&'a EntityId, f64)>, MetricError> {
    let coverage = store
        .coverage(source)
        .ok_or_else(|| MetricError::UnknownSource(source.to_string()))?;
    let meta_size = store.sources().len() as u64;
    let raw = coverage
        .iter()
        .map(|(entity, &n)| {
            let ef = store
                .sources()
                .filter(|s| {
                    store
                        .coverage(&s.name)
                        .is_some_and(|c| c.contains_key(entity))
                })
                .count() as u64;
            importance(n, meta_size, ef).map(|i| (entity, i.bits()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(unit_normalize(raw))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::id::FeatureKind;
    use crate::source::SourceKind;

    const TOL: f64 = 1e-9;

    fn e(s: &str) -> EntityId {
        EntityId::new("t", s).unwrap()
    }

    fn f(s: &str) -> FeatureId {
        FeatureId::new(FeatureKind::Attr, s, "")
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= TOL * 1f64.max(a.abs()).max(b.abs())
    }

    #[test]
    fn info_bits_examples() {
        assert_eq!(info_bits(8), Ok(3.0));
        assert_eq!(info_bits(1), Ok(0.0));
        assert_eq!(info_bits(1024), Ok(10.0));
        assert_eq!(info_bits(0), Err(MetricError::EmptySet));
    }

    #[test]
    fn importance_examples() {
        assert_eq!(importance(5, 16, 16).unwrap().bits(), 0.0);
        assert_eq!(importance(1, 2, 1).unwrap().bits(), 1.0);
        assert_eq!(importance(4, 16, 2).unwrap().bits(), 9.0);
    }

    #[test]
    fn importance_rejects_bad_inputs() {
        assert_eq!(importance(0, 4, 1), Err(MetricError::ZeroCount));
        assert!(matches!(
            importance(1, 4, 0),
            Err(MetricError::FrequencyOutOfRange { .. })
        ));
        assert!(matches!(
            importance(1, 4, 5),
            Err(MetricError::FrequencyOutOfRange { .. })
        ));
    }

    #[test]
    fn max_diff_bound_examples() {
        assert_eq!(max_diff_bound(3.0, 5.0), 5.0);
        assert_eq!(max_diff_bound(0.0, 0.0), 0.0);
        assert_eq!(max_diff_bound(7.0, 7.0), 7.0);
    }

    #[test]
    fn sparse_distance_worked_example() {
        let a = [("f1", 0.6), ("f2", 0.8)];
        let b = [("f1", 1.0)];
        let d = sparse_distance(&a, &b);
        assert!(close(d.raw, 1.2));
        assert!(close(d.normalized, 0.6666666667));
    }

    #[test]
    fn disjoint_units_are_maximally_far() {
        let d = sparse_distance(&[("x", 1.0)], &[("y", 1.0)]);
        assert_eq!(d.raw, 2.0);
        assert_eq!(d.normalized, 1.0);
    }

    #[test]
    fn zero_vectors_are_at_distance_zero() {
        let d = sparse_distance::<&str>(&[("x", 0.0)], &[]);
        assert_eq!(
            d,
            DistanceResult {
                raw: 0.0,
                normalized: 0.0
            }
        );
    }

    fn two_entity_store() -> AssociationStore {
        let mut store = AssociationStore::new();
        store.add_association(e("a"), f("only-a"), 1).unwrap();
        store.add_association(e("a"), f("shared"), 1).unwrap();
        store.add_association(e("b"), f("shared"), 1).unwrap();
        store.add_association(e("b"), f("only-b1"), 1).unwrap();
        store.add_association(e("b"), f("only-b2"), 1).unwrap();
        store.freeze();
        store
    }

    #[test]
    fn single_informative_feature_gets_unit_weight() {
        let store = two_entity_store();
        let v = entity_vector(&store, &e("a")).unwrap();
        assert_eq!(v.weight(&f("only-a")), 1.0);
        assert_eq!(v.weight(&f("shared")), 0.0);
        assert_eq!(v.weight(&f("absent")), 0.0);
    }

    #[test]
    fn equal_importances_split_evenly() {
        let store = two_entity_store();
        let v = entity_vector(&store, &e("b")).unwrap();
        assert!(close(
            v.weight(&f("only-b1")),
            std::f64::consts::FRAC_1_SQRT_2
        ));
        assert!(close(
            v.weight(&f("only-b2")),
            std::f64::consts::FRAC_1_SQRT_2
        ));
    }

    #[test]
    fn ubiquitous_features_give_zero_vector() {
        let mut store = AssociationStore::new();
        store.add_association(e("a"), f("x"), 3).unwrap();
        store.add_association(e("b"), f("x"), 1).unwrap();
        let v = entity_vector(&store, &e("a")).unwrap();
        assert!(v.is_zero());
        assert_eq!(v.weights().len(), 1);
        let d = distance(&store, &e("a"), &e("b")).unwrap();
        assert_eq!(d, DistanceResult::default());
    }

    #[test]
    fn unknown_entity_is_an_error() {
        let store = two_entity_store();
        assert_eq!(
            entity_vector(&store, &e("zz")),
            Err(MetricError::UnknownEntity(e("zz")))
        );
        assert!(distance(&store, &e("a"), &e("zz")).is_err());
        assert!(neighbors(&store, &e("zz"), 3, Measure::Raw).is_err());
    }

    #[test]
    fn self_distance_is_zero() {
        let store = two_entity_store();
        let d = distance(&store, &e("b"), &e("b")).unwrap();
        assert_eq!(
            d,
            DistanceResult {
                raw: 0.0,
                normalized: 0.0
            }
        );
    }

    #[test]
    fn neighbors_need_a_frozen_store() {
        let mut store = AssociationStore::new();
        store.add_association(e("a"), f("x"), 1).unwrap();
        assert_eq!(
            neighbors(&store, &e("a"), 1, Measure::Raw),
            Err(MetricError::NotFrozen)
        );
    }

    #[test]
    fn duplicate_entity_is_first_neighbor() {
        let mut store = AssociationStore::new();
        for who in ["e", "x"] {
            store.add_association(e(who), f("p"), 2).unwrap();
            store.add_association(e(who), f("q"), 1).unwrap();
        }
        store.add_association(e("other"), f("r"), 1).unwrap();
        store.freeze();
        let got = neighbors(&store, &e("e"), 1, Measure::Normalized).unwrap();
        assert_eq!(got[0].0, e("x"));
        assert_eq!(got[0].1.normalized, 0.0);
    }

    #[test]
    fn k_beyond_population_returns_everyone_else() {
        let store = two_entity_store();
        let got = neighbors(&store, &e("a"), 10, Measure::Raw).unwrap();
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].0, e("b"));
    }

    #[test]
    fn neighbor_ties_break_on_entity_order() {
        let mut store = AssociationStore::new();
        store.add_association(e("q"), f("x"), 1).unwrap();
        store.add_association(e("c"), f("y"), 1).unwrap();
        store.add_association(e("b"), f("z"), 1).unwrap();
        store.freeze();
        let got = neighbors(&store, &e("q"), 2, Measure::Normalized).unwrap();
        let names: Vec<_> = got.iter().map(|(id, _)| id.local().to_string()).collect();
        assert_eq!(names, ["b", "c"]);
    }

    #[test]
    fn distance_matrix_indexing() {
        let mut store = AssociationStore::new();
        for (who, feat) in [("a", "x"), ("b", "y"), ("c", "x"), ("c", "z")] {
            store.add_association(e(who), f(feat), 1).unwrap();
        }
        store.freeze();
        let table = VectorTable::build(&store).unwrap();
        let m = table.all_pairs(Measure::Raw);
        assert_eq!(m.condensed().len(), 3);
        for i in 0..3 {
            assert_eq!(m.get(i, i), 0.0);
            for j in 0..3 {
                if i != j {
                    assert_eq!(m.get(i, j), table.distance_at(i, j).raw);
                    assert_eq!(m.get(i, j), m.get(j, i));
                }
            }
        }
    }

    #[test]
    fn ranked_importance_orders_by_bits_then_feature() {
        let mut store = AssociationStore::new();
        store.add_association(e("a"), f("b-rare"), 1).unwrap();
        store.add_association(e("a"), f("a-rare"), 1).unwrap();
        store.add_association(e("a"), f("common"), 4).unwrap();
        store.add_association(e("b"), f("common"), 1).unwrap();
        let got = ranked_importance(&store, &e("a"), 2).unwrap();
        let names: Vec<_> = got.iter().map(|(f, _)| f.key().to_string()).collect();
        assert_eq!(names, ["a-rare", "b-rare"]);
        assert_eq!(got[0].1.bits(), 1.0);
    }

    fn sourced_store(sources: &[(&str, &[(&str, u64)])]) -> AssociationStore {
        let mut store = AssociationStore::new();
        for (name, cover) in sources {
            store.register_source(name, SourceKind::Kv).unwrap();
            for (ent, n) in cover.iter() {
                let id = EntityId::global(ent).unwrap();
                store.add_from_source(name, id, f(name), *n).unwrap();
            }
        }
        store.freeze();
        store
    }

    #[test]
    fn identical_sources_are_at_zero() {
        let store = sourced_store(&[("s1", &[("a", 1), ("b", 2)]), ("s2", &[("a", 1), ("b", 2)])]);
        assert_eq!(source_distance(&store, "s1", "s2").unwrap().normalized, 0.0);
    }

    #[test]
    fn disjoint_sources_are_at_one() {
        let store = sourced_store(&[("s1", &[("a", 1)]), ("s2", &[("b", 3)])]);
        assert_eq!(source_distance(&store, "s1", "s2").unwrap().normalized, 1.0);
    }

    #[test]
    fn two_source_meta_example() {
        // meta |E| = 2: "a" is covered by both sources and carries no
        // information, leaving each source with one unit coordinate
        let store = sourced_store(&[("s1", &[("a", 2), ("b", 1)]), ("s2", &[("a", 1), ("c", 1)])]);
        let d = source_distance(&store, "s1", "s2").unwrap();
        assert_eq!(
            d,
            DistanceResult {
                raw: 2.0,
                normalized: 1.0
            }
        );
        assert_eq!(
            source_distance(&store, "s1", "nope"),
            Err(MetricError::UnknownSource("nope".into()))
        );
    }
}
