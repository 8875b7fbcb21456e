//! Per-category scores and top-K ranking.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::ontology::{CategoryId, Guideline};

/// Default number of suggestions returned per document.
pub const DEFAULT_K: usize = 20;

/// Non-negative score per rateable category. Missing entries score 0.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScoreVector {
    scores: HashMap<CategoryId, f64>,
}

impl ScoreVector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, id: &CategoryId) -> f64 {
        self.scores.get(id).copied().unwrap_or(0.0)
    }

    pub fn add(&mut self, id: &CategoryId, amount: f64) {
        debug_assert!(amount >= 0.0);
        *self.scores.entry(id.clone()).or_insert(0.0) += amount;
    }

    pub fn set(&mut self, id: CategoryId, score: f64) {
        debug_assert!(score >= 0.0);
        self.scores.insert(id, score);
    }

    pub fn iter(&self) -> impl Iterator<Item = (&CategoryId, f64)> {
        self.scores.iter().map(|(k, v)| (k, *v))
    }

    pub fn is_zero(&self) -> bool {
        self.scores.values().all(|&v| v == 0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedEntry {
    pub category_id: CategoryId,
    pub score: f64,
    /// 1-based.
    pub rank: usize,
}

/// Top-K categories for one document under one method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedClassification {
    pub document_id: String,
    pub method: String,
    pub k: usize,
    pub entries: Vec<RankedEntry>,
}

impl RankedClassification {
    pub fn empty(document_id: impl Into<String>, method: impl Into<String>, k: usize) -> Self {
        Self { document_id: document_id.into(), method: method.into(), k, entries: Vec::new() }
    }

    pub fn category_ids(&self) -> impl Iterator<Item = &CategoryId> {
        self.entries.iter().map(|e| &e.category_id)
    }
}

/// Sorts positive-score categories by descending score, breaking ties by
/// guideline order, and keeps the first `k`. Zero scores are dropped.
pub fn rank_top_k(scores: &ScoreVector, guideline: &Guideline, k: usize) -> Vec<RankedEntry> {
    assert!(k >= 1, "k must be positive");
    let mut scored: Vec<(CategoryId, f64)> =
        guideline.rateable_categories().map(|c| (c.id.clone(), scores.get(&c.id))).filter(|&(_, s)| s > 0.0).collect();
    // Stable sort keeps guideline order among equal scores.
    scored.sort_by(|a, b| b.1.total_cmp(&a.1));
    scored
        .into_iter()
        .take(k)
        .enumerate()
        .map(|(i, (category_id, score))| RankedEntry { category_id, score, rank: i + 1 })
        .collect()
}

pub fn rank(
    document_id: &str,
    method: &str,
    scores: &ScoreVector,
    guideline: &Guideline,
    k: usize,
) -> RankedClassification {
    RankedClassification {
        document_id: document_id.to_owned(),
        method: method.to_owned(),
        k,
        entries: rank_top_k(scores, guideline, k),
    }
}
