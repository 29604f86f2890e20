//! Sparse feature maps and the insertion-ordered dictionaries that index them.

use std::collections::HashMap;
use std::hash::Hash;

use indexmap::IndexMap;

/// Sparse non-negative vector: sorted `(dimension, value)` pairs without
/// explicit zeros.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeatureMap {
    entries: Vec<(usize, f64)>,
}

impl FeatureMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a map from unordered `(dimension, value)` pairs, summing
    /// duplicates and dropping zeros.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, f64)>) -> Self {
        let mut entries: Vec<(usize, f64)> = pairs.into_iter().collect();
        entries.sort_by_key(|&(d, _)| d);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(entries.len());
        for (d, x) in entries {
            match merged.last_mut() {
                Some((last, acc)) if *last == d => *acc += x,
                _ => merged.push((d, x)),
            }
        }
        merged.retain(|&(_, x)| x != 0.0);
        FeatureMap { entries: merged }
    }

    /// Counts occurrences of each dimension.
    pub fn from_counts(dims: impl IntoIterator<Item = usize>) -> Self {
        Self::from_pairs(dims.into_iter().map(|d| (d, 1.0)))
    }

    pub fn get(&self, dim: usize) -> f64 {
        self.entries
            .binary_search_by_key(&dim, |&(d, _)| d)
            .map_or(0.0, |i| self.entries[i].1)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.entries.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().map(|&(_, x)| x).sum()
    }

    pub fn scaled(mut self, factor: f64) -> Self {
        for (_, x) in &mut self.entries {
            *x *= factor;
        }
        self.entries.retain(|&(_, x)| x != 0.0);
        self
    }

    /// Merge-join dot product.
    pub fn dot(&self, other: &FeatureMap) -> f64 {
        let (a, b) = (&self.entries, &other.entries);
        let (mut i, mut j, mut acc) = (0, 0, 0.0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc += a[i].1 * b[j].1;
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }

    pub fn squared_norm(&self) -> f64 {
        self.entries.iter().map(|&(_, x)| x * x).sum()
    }
}

/// Assigns dense ids to keys.
pub trait KeyIndex<K> {
    fn index(&mut self, key: &K) -> usize;
}

/// Insertion-ordered dictionary built during fit. Ids are `0..len` in
/// first-seen order.
#[derive(Debug, Clone)]
pub struct Dictionary<K: Hash + Eq> {
    ids: IndexMap<K, usize>,
}

impl<K: Hash + Eq> Default for Dictionary<K> {
    fn default() -> Self {
        Dictionary {
            ids: IndexMap::new(),
        }
    }
}

impl<K: Hash + Eq + Clone> Dictionary<K> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, key: &K) -> Option<usize> {
        self.ids.get(key).copied()
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Keys in id order.
    pub fn keys(&self) -> impl Iterator<Item = &K> {
        self.ids.keys()
    }

    /// Read-only view for the transform path.
    pub fn frozen(&self) -> Frozen<'_, K> {
        Frozen {
            dict: self,
            fresh: HashMap::new(),
        }
    }
}

impl<K: Hash + Eq + Clone> KeyIndex<K> for Dictionary<K> {
    fn index(&mut self, key: &K) -> usize {
        let next = self.ids.len();
        *self.ids.entry(key.clone()).or_insert(next)
    }
}

/// Frozen dictionary view. Keys unseen at fit time receive fresh ids at or
/// beyond the fit range, so they never collide with a fitted dimension.
#[derive(Debug)]
pub struct Frozen<'a, K: Hash + Eq> {
    dict: &'a Dictionary<K>,
    fresh: HashMap<K, usize>,
}

impl<K: Hash + Eq + Clone> Frozen<'_, K> {
    pub fn unseen(&self) -> usize {
        self.fresh.len()
    }
}

impl<K: Hash + Eq + Clone> KeyIndex<K> for Frozen<'_, K> {
    fn index(&mut self, key: &K) -> usize {
        if let Some(id) = self.dict.get(key) {
            return id;
        }
        let next = self.dict.len() + self.fresh.len();
        *self.fresh.entry(key.clone()).or_insert(next)
    }
}
