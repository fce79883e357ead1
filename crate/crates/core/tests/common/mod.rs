//! Brute-force reference evaluation on a dense count matrix.
//!
//! Deliberately shares no code with the library: counts are aggregated into
//! a dense `entities × features` table, logarithms go through `ln`, and
//! distances run over every feature column.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::f64::consts::LN_2;

use efgrid::{AssociationStore, EntityId, FeatureId, FeatureKind};
use rand::Rng;

pub const TOL: f64 = 1e-9;

/// `|a - b| <= 1e-9` absolute or relative, whichever is larger.
pub fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= TOL * 1f64.max(a.abs()).max(b.abs())
}

pub fn oracle_importance(n: u64, e_size: u64, ef_size: u64) -> f64 {
    (1.0 + (n as f64).ln() / LN_2) * (((e_size as f64).ln() - (ef_size as f64).ln()) / LN_2)
}

pub struct Dense {
    pub entities: Vec<String>,
    pub features: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

impl Dense {
    /// Aggregates `(entity, feature, delta)` triples.
    pub fn from_triples<'a>(triples: impl IntoIterator<Item = (&'a str, &'a str, u64)>) -> Self {
        let mut agg: BTreeMap<(String, String), u64> = BTreeMap::new();
        for (e, f, n) in triples {
            *agg.entry((e.to_string(), f.to_string())).or_insert(0) += n;
        }
        let mut entities: Vec<String> = agg.keys().map(|(e, _)| e.clone()).collect();
        entities.sort();
        entities.dedup();
        let mut features: Vec<String> = agg.keys().map(|(_, f)| f.clone()).collect();
        features.sort();
        features.dedup();
        let mut counts = vec![vec![0; features.len()]; entities.len()];
        for ((e, f), n) in agg {
            let i = entities.binary_search(&e).unwrap();
            let j = features.binary_search(&f).unwrap();
            counts[i][j] = n;
        }
        Dense {
            entities,
            features,
            counts,
        }
    }

    pub fn entity(&self, name: &str) -> usize {
        self.entities
            .iter()
            .position(|e| e == name)
            .expect("entity in oracle")
    }

    pub fn feature(&self, name: &str) -> usize {
        self.features
            .iter()
            .position(|f| f == name)
            .expect("feature in oracle")
    }

    pub fn frequency(&self, j: usize) -> u64 {
        self.counts.iter().filter(|row| row[j] > 0).count() as u64
    }

    pub fn importance(&self, i: usize, j: usize) -> f64 {
        let n = self.counts[i][j];
        if n == 0 {
            return 0.0;
        }
        oracle_importance(n, self.entities.len() as u64, self.frequency(j))
    }

    pub fn vector(&self, i: usize) -> Vec<f64> {
        let imp: Vec<f64> = (0..self.features.len())
            .map(|j| self.importance(i, j))
            .collect();
        let norm = imp.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            imp
        } else {
            imp.iter().map(|x| x / norm).collect()
        }
    }

    /// `(raw, normalized)`.
    pub fn distance(&self, a: usize, b: usize) -> (f64, f64) {
        dense_distance(&self.vector(a), &self.vector(b))
    }
}

pub fn dense_distance(va: &[f64], vb: &[f64]) -> (f64, f64) {
    let raw: f64 = va.iter().zip(vb).map(|(x, y)| (x - y).abs()).sum();
    let bound: f64 = va.iter().zip(vb).map(|(x, y)| x.max(*y)).sum();
    (raw, if bound == 0.0 { 0.0 } else { raw / bound })
}

/// Random `(entity, feature, delta)` triples over small name pools.
pub fn random_triples(
    rng: &mut impl Rng,
    max_entities: usize,
    max_features: usize,
) -> Vec<(String, String, u64)> {
    let ne = rng.gen_range(1..=max_entities);
    let nf = rng.gen_range(1..=max_features);
    let density = rng.gen_range(0.05..0.6);
    let mut out = Vec::new();
    for e in 0..ne {
        let mut any = false;
        for f in 0..nf {
            if rng.gen_bool(density) {
                out.push((format!("e{e:02}"), format!("f{f:02}"), rng.gen_range(1..=8)));
                any = true;
            }
        }
        if !any {
            out.push((
                format!("e{e:02}"),
                format!("f{:02}", rng.gen_range(0..nf)),
                1,
            ));
        }
    }
    out
}

pub fn eid(name: &str) -> EntityId {
    EntityId::new("t", name).unwrap()
}

pub fn fid(name: &str) -> FeatureId {
    FeatureId::new(FeatureKind::Attr, name, "")
}

/// The same triples loaded into a frozen store.
pub fn store_from(triples: &[(String, String, u64)]) -> AssociationStore {
    let mut store = AssociationStore::new();
    for (e, f, n) in triples {
        store.add_association(eid(e), fid(f), *n).unwrap();
    }
    store.freeze();
    store
}

pub fn dense_from(triples: &[(String, String, u64)]) -> Dense {
    Dense::from_triples(triples.iter().map(|(e, f, n)| (e.as_str(), f.as_str(), *n)))
}
