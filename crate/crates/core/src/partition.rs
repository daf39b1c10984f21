//! Item-to-community assignments.

use std::collections::HashMap;

use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Community labels (1-based) for an ordered list of items.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    item_ids: Vec<String>,
    labels: Vec<u32>,
}

impl Partition {
    pub fn new(item_ids: Vec<String>, labels: Vec<u32>) -> Result<Self> {
        if item_ids.len() != labels.len() {
            return Err(Error::Input(format!(
                "partition has {} ids but {} labels",
                item_ids.len(),
                labels.len()
            )));
        }
        if labels.contains(&0) {
            return Err(Error::Input("community labels must be >= 1".into()));
        }
        Ok(Self { item_ids, labels })
    }

    /// Partition from arbitrary string labels, numbered by first appearance.
    pub fn from_labels<S: AsRef<str>>(item_ids: Vec<String>, labels: &[S]) -> Result<Self> {
        let mut index: HashMap<&str, u32> = HashMap::new();
        let numeric = labels
            .iter()
            .map(|l| {
                let next = index.len() as u32 + 1;
                *index.entry(l.as_ref()).or_insert(next)
            })
            .collect();
        Self::new(item_ids, numeric)
    }

    /// Relabel communities by first appearance in item order.
    pub fn canonical(item_ids: Vec<String>, raw: &[usize]) -> Self {
        let mut index: HashMap<usize, u32> = HashMap::new();
        let labels = raw
            .iter()
            .map(|r| {
                let next = index.len() as u32 + 1;
                *index.entry(*r).or_insert(next)
            })
            .collect();
        Self { item_ids, labels }
    }

    pub fn item_ids(&self) -> &[String] {
        &self.item_ids
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<u32> {
        self.item_ids
            .iter()
            .position(|x| x == id)
            .map(|i| self.labels[i])
    }

    pub fn n_communities(&self) -> usize {
        let mut seen: Vec<u32> = self.labels.clone();
        seen.sort_unstable();
        seen.dedup();
        seen.len()
    }

    /// Sub-partition over `ids` (in that order), keeping the original labels.
    pub fn restrict(&self, ids: &[String]) -> Result<Partition> {
        let index: HashMap<&str, u32> = self
            .item_ids
            .iter()
            .map(String::as_str)
            .zip(self.labels.iter().copied())
            .collect();
        let labels = ids
            .iter()
            .map(|id| {
                index
                    .get(id.as_str())
                    .copied()
                    .ok_or_else(|| Error::Input(format!("item `{id}` has no community label")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Partition {
            item_ids: ids.to_vec(),
            labels,
        })
    }

    /// Labels of `self` reordered to follow `ids`; error if the id sets differ.
    pub fn labels_for(&self, ids: &[String]) -> Result<Vec<u32>> {
        if ids.len() != self.item_ids.len() {
            return Err(Error::Input(format!(
                "partitions cover different item sets ({} vs {} items)",
                ids.len(),
                self.item_ids.len()
            )));
        }
        let index: HashMap<&str, u32> = self
            .item_ids
            .iter()
            .map(String::as_str)
            .zip(self.labels.iter().copied())
            .collect();
        ids.iter()
            .map(|id| {
                index.get(id.as_str()).copied().ok_or_else(|| {
                    Error::Input(format!("item `{id}` is missing from one of the partitions"))
                })
            })
            .collect()
    }
}

impl Serialize for Partition {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.labels.len()))?;
        for (id, label) in self.item_ids.iter().zip(&self.labels) {
            map.serialize_entry(id, label)?;
        }
        map.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(n: usize) -> Vec<String> {
        (1..=n).map(|i| i.to_string()).collect()
    }

    #[test]
    fn canonical_numbers_by_first_appearance() {
        let p = Partition::canonical(ids(5), &[7, 3, 7, 9, 3]);
        assert_eq!(p.labels(), &[1, 2, 1, 3, 2]);
        assert_eq!(p.n_communities(), 3);
    }

    #[test]
    fn labels_for_detects_mismatch() {
        let p = Partition::canonical(ids(3), &[0, 0, 1]);
        let q = vec!["3".to_string(), "1".into(), "2".into()];
        assert_eq!(p.labels_for(&q).unwrap(), vec![2, 1, 1]);
        assert!(p.labels_for(&ids(2)).is_err());
        assert!(p.labels_for(&["1".into(), "2".into(), "x".into()]).is_err());
    }
}
