use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::Interaction;
use crate::{Error, Result};

/// Dense index bijections for users and items.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Catalog {
    pub users: Vec<String>,
    pub items: Vec<String>,
    user_lookup: HashMap<String, usize>,
    item_lookup: HashMap<String, usize>,
}

impl Catalog {
    pub fn new(users: Vec<String>, items: Vec<String>) -> Self {
        let user_lookup = users.iter().enumerate().map(|(i, u)| (u.clone(), i)).collect();
        let item_lookup = items.iter().enumerate().map(|(i, u)| (u.clone(), i)).collect();
        Catalog {
            users,
            items,
            user_lookup,
            item_lookup,
        }
    }

    pub fn n_users(&self) -> usize {
        self.users.len()
    }

    pub fn n_items(&self) -> usize {
        self.items.len()
    }

    pub fn user_index(&self, id: &str) -> Option<usize> {
        self.user_lookup.get(id).copied()
    }

    pub fn item_index(&self, id: &str) -> Option<usize> {
        self.item_lookup.get(id).copied()
    }

    /// Two-column `id,index` CSV rows.
    pub fn write_csv(ids: &[String], path: &std::path::Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["id", "index"])?;
        for (i, id) in ids.iter().enumerate() {
            w.write_record([id.as_str(), &i.to_string()])?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: &std::path::Path) -> Result<Vec<String>> {
        let mut r = csv::Reader::from_path(path)?;
        let mut ids = Vec::new();
        for (expected, rec) in r.records().enumerate() {
            let rec = rec?;
            let idx: usize = rec
                .get(1)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::format(path, "bad index column"))?;
            if idx != expected {
                return Err(Error::format(path, "indices must be contiguous from 0"));
            }
            ids.push(rec.get(0).unwrap_or_default().to_string());
        }
        Ok(ids)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub item: usize,
    pub rating: f64,
    pub timestamp: i64,
}

/// Per-user interaction rows, each sorted by item index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingMatrix {
    pub rows: Vec<Vec<Entry>>,
    pub n_users: usize,
    pub n_items: usize,
}

impl RatingMatrix {
    pub fn from_rows(mut rows: Vec<Vec<Entry>>, n_items: usize) -> Self {
        for row in &mut rows {
            row.sort_by_key(|e| e.item);
        }
        RatingMatrix {
            n_users: rows.len(),
            rows,
            n_items,
        }
    }

    pub fn row(&self, user: usize) -> &[Entry] {
        &self.rows[user]
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn contains(&self, user: usize, item: usize) -> bool {
        self.rows[user].binary_search_by_key(&item, |e| e.item).is_ok()
    }

    pub fn rating(&self, user: usize, item: usize) -> Option<f64> {
        let row = &self.rows[user];
        row.binary_search_by_key(&item, |e| e.item).ok().map(|i| row[i].rating)
    }
}

/// Result of [`filter_min_interactions`].
#[derive(Debug, Clone)]
pub struct Filtered {
    pub matrix: RatingMatrix,
    pub catalog: Catalog,
    /// Surviving interactions after de-duplication, ordered by (user, item) index.
    pub retained: Vec<Interaction>,
    pub removed_users: usize,
    pub duplicates_resolved: usize,
}

/// Keeps users with at least `k` distinct items; items are never thresholded.
///
/// Duplicate (user, item) pairs keep the most recent record (ties keep the
/// later record in input order). Index order follows sorted ids.
pub fn filter_min_interactions(interactions: &[Interaction], k: usize) -> Result<Filtered> {
    if k == 0 {
        return Err(Error::InvalidArgument("min_interactions must be >= 1".into()));
    }
    let mut latest: BTreeMap<(&str, &str), &Interaction> = BTreeMap::new();
    let mut duplicates = 0;
    for it in interactions.iter().filter(|it| it.is_valid()) {
        let key = (it.user_id.as_str(), it.item_id.as_str());
        match latest.get(&key) {
            Some(prev) => {
                duplicates += 1;
                if it.timestamp >= prev.timestamp {
                    latest.insert(key, it);
                }
            }
            None => {
                latest.insert(key, it);
            }
        }
    }

    let mut by_user: BTreeMap<&str, Vec<&Interaction>> = BTreeMap::new();
    for (&(u, _), &it) in &latest {
        by_user.entry(u).or_default().push(it);
    }
    let n_before = by_user.len();
    // Dropping a user never changes another user's count since items are not
    // thresholded, so the fixpoint is reached after one sweep; loop anyway.
    loop {
        let before = by_user.len();
        by_user.retain(|_, rows| rows.len() >= k);
        if by_user.len() == before {
            break;
        }
    }
    if by_user.is_empty() {
        return Err(Error::EmptyCorpus);
    }

    let users: Vec<String> = by_user.keys().map(|s| s.to_string()).collect();
    let items: Vec<String> = by_user
        .values()
        .flatten()
        .map(|it| it.item_id.as_str())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .map(str::to_string)
        .collect();
    let catalog = Catalog::new(users, items);

    let mut rows = Vec::with_capacity(catalog.n_users());
    let mut retained = Vec::new();
    for its in by_user.values() {
        let mut row: Vec<Entry> = its
            .iter()
            .map(|it| Entry {
                item: catalog.item_index(&it.item_id).expect("item indexed"),
                rating: it.rating,
                timestamp: it.timestamp,
            })
            .collect();
        row.sort_by_key(|e| e.item);
        let mut sorted: Vec<&Interaction> = its.clone();
        sorted.sort_by_key(|it| catalog.item_index(&it.item_id));
        retained.extend(sorted.into_iter().cloned());
        rows.push(row);
    }
    let matrix = RatingMatrix::from_rows(rows, catalog.n_items());
    Ok(Filtered {
        removed_users: n_before - catalog.n_users(),
        matrix,
        catalog,
        retained,
        duplicates_resolved: duplicates,
    })
}
