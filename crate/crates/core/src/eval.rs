//! Recall@K against instructor labels, corpus-level aggregation, recall
//! difference distributions and gold-set size histograms.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ontology::{CategoryId, Guideline};
use crate::rank::RankedClassification;
use crate::results::ResultRecord;

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("gold label set is empty; recall is undefined")]
    EmptyGold,
    #[error("no gold labels for document `{0}`")]
    MissingGold(String),
    #[error("no results to evaluate")]
    EmptyCorpus,
    #[error("results mix methods `{0}` and `{1}`")]
    MixedMethods(String, String),
    #[error("document `{0}` appears more than once")]
    DuplicateDocument(String),
    #[error("document sets differ: `{0}` is only in one report")]
    MismatchedDocuments(String),
    #[error("gold labels for `{document}` reference unknown category `{category}`")]
    UnknownCategory { document: String, category: CategoryId },
    #[error("malformed gold file: {0}")]
    Malformed(String),
}

/// Instructor labels per document.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GoldClassification(pub BTreeMap<String, BTreeSet<CategoryId>>);

impl GoldClassification {
    pub fn parse(bytes: &[u8]) -> Result<Self, EvalError> {
        serde_json::from_slice(bytes).map_err(|e| EvalError::Malformed(e.to_string()))
    }

    pub fn get(&self, document_id: &str) -> Option<&BTreeSet<CategoryId>> {
        self.0.get(document_id)
    }

    /// Every label must name a category of `guideline`.
    pub fn validate(&self, guideline: &Guideline) -> Result<(), EvalError> {
        for (doc, labels) in &self.0 {
            if let Some(bad) = labels.iter().find(|c| !guideline.contains(c)) {
                return Err(EvalError::UnknownCategory { document: doc.clone(), category: bad.clone() });
            }
        }
        Ok(())
    }
}

/// Fraction of `gold` found among the first `k` ranked entries.
pub fn recall_at_k(ranked: &RankedClassification, gold: &BTreeSet<CategoryId>, k: usize) -> Result<f64, EvalError> {
    if gold.is_empty() {
        return Err(EvalError::EmptyGold);
    }
    let hits = hits_at_k(ranked, gold, k);
    Ok(hits as f64 / gold.len() as f64)
}

fn hits_at_k(ranked: &RankedClassification, gold: &BTreeSet<CategoryId>, k: usize) -> usize {
    let top: HashSet<&CategoryId> = ranked.category_ids().take(k).collect();
    top.iter().filter(|c| gold.contains(*c)).count()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lo: usize,
    pub hi: usize,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bin_width: usize,
    pub bins: Vec<HistogramBin>,
    pub mean: f64,
}

impl Histogram {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,y\n");
        for b in &self.bins {
            let _ = writeln!(s, "{},{}", b.lo, b.count);
        }
        s
    }
}

/// Counts of gold-set sizes in bins `[0, w-1]`, `[w, 2w-1]`, ... up to the
/// largest size, plus the mean size.
pub fn gold_size_histogram(gold: &GoldClassification, bin_width: usize) -> Histogram {
    assert!(bin_width >= 1, "bin width must be positive");
    let sizes: Vec<usize> = gold.0.values().map(BTreeSet::len).collect();
    let n_bins = sizes.iter().max().map_or(0, |m| m / bin_width + 1);
    let mut bins: Vec<HistogramBin> =
        (0..n_bins).map(|i| HistogramBin { lo: i * bin_width, hi: (i + 1) * bin_width - 1, count: 0 }).collect();
    for &s in &sizes {
        bins[s / bin_width].count += 1;
    }
    let mean = if sizes.is_empty() { 0.0 } else { sizes.iter().sum::<usize>() as f64 / sizes.len() as f64 };
    Histogram { bin_width, bins, mean }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct QueryStats {
    pub documents_with_logs: usize,
    pub total_queries: usize,
    pub mean_queries_per_document: f64,
    pub total_retries: usize,
    pub max_observed_in_flight: usize,
    pub total_duration_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub method: String,
    pub k: usize,
    pub per_document_recall: BTreeMap<String, f64>,
    /// Documents whose run failed; they are scored 0.
    pub failed_documents: Vec<String>,
    /// Unweighted mean of `per_document_recall`.
    pub mean_recall: f64,
    /// Total hits over total gold labels.
    pub micro_recall: f64,
    pub gold_size_histogram: Histogram,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub query_stats: Option<QueryStats>,
}

impl EvaluationReport {
    /// Per-document recall as `x,y` rows sorted by recall, for plotting.
    pub fn recall_distribution_csv(&self) -> String {
        let mut values: Vec<f64> = self.per_document_recall.values().copied().collect();
        values.sort_by(f64::total_cmp);
        let mut s = String::from("x,y\n");
        for (i, v) in values.iter().enumerate() {
            let _ = writeln!(s, "{},{}", i + 1, v);
        }
        s
    }
}

/// Macro-averaged recall@k over one method's results.
pub fn evaluate_corpus(
    results: &[ResultRecord],
    gold: &GoldClassification,
    k: usize,
) -> Result<EvaluationReport, EvalError> {
    let first = results.first().ok_or(EvalError::EmptyCorpus)?;
    let mut per_document = BTreeMap::new();
    let mut failed = Vec::new();
    let (mut hits, mut labels) = (0usize, 0usize);
    let mut evaluated_gold = GoldClassification::default();
    let mut stats = QueryStats::default();

    for r in results {
        if r.method != first.method {
            return Err(EvalError::MixedMethods(first.method.clone(), r.method.clone()));
        }
        let g = gold.get(&r.document_id).ok_or_else(|| EvalError::MissingGold(r.document_id.clone()))?;
        if g.is_empty() {
            return Err(EvalError::EmptyGold);
        }
        let recall = if r.is_failed() {
            failed.push(r.document_id.clone());
            0.0
        } else {
            let h = hits_at_k(&r.ranked(), g, k);
            hits += h;
            h as f64 / g.len() as f64
        };
        labels += g.len();
        if per_document.insert(r.document_id.clone(), recall).is_some() {
            return Err(EvalError::DuplicateDocument(r.document_id.clone()));
        }
        evaluated_gold.0.insert(r.document_id.clone(), g.clone());
        if let Some(log) = &r.query_log {
            stats.documents_with_logs += 1;
            stats.total_queries += log.queries_issued;
            stats.total_retries += log.retries;
            stats.max_observed_in_flight = stats.max_observed_in_flight.max(log.max_observed_in_flight);
            stats.total_duration_ms += log.duration_ms;
        }
    }
    let query_stats = (stats.documents_with_logs > 0).then(|| QueryStats {
        mean_queries_per_document: stats.total_queries as f64 / stats.documents_with_logs as f64,
        ..stats
    });
    let mean_recall = per_document.values().sum::<f64>() / per_document.len() as f64;
    Ok(EvaluationReport {
        method: first.method.clone(),
        k,
        mean_recall,
        micro_recall: hits as f64 / labels as f64,
        per_document_recall: per_document,
        failed_documents: failed,
        gold_size_histogram: gold_size_histogram(&evaluated_gold, 5),
        query_stats,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecallDifference {
    pub method_a: String,
    pub method_b: String,
    /// recall(a) - recall(b) per document, ascending.
    pub differences: Vec<f64>,
    pub share_negative: f64,
    pub share_zero: f64,
    pub share_positive: f64,
}

impl RecallDifference {
    /// Empirical CDF as `x,y` rows.
    pub fn cdf_csv(&self) -> String {
        let n = self.differences.len() as f64;
        let mut s = String::from("x,y\n");
        for (i, d) in self.differences.iter().enumerate() {
            let _ = writeln!(s, "{},{}", d, (i + 1) as f64 / n);
        }
        s
    }
}

/// Per-document `recall(a) - recall(b)`; both reports must cover the same documents.
pub fn recall_difference_distribution(
    a: &EvaluationReport,
    b: &EvaluationReport,
) -> Result<RecallDifference, EvalError> {
    if let Some(extra) = a
        .per_document_recall
        .keys()
        .find(|d| !b.per_document_recall.contains_key(*d))
        .or_else(|| b.per_document_recall.keys().find(|d| !a.per_document_recall.contains_key(*d)))
    {
        return Err(EvalError::MismatchedDocuments(extra.clone()));
    }
    if a.per_document_recall.is_empty() {
        return Err(EvalError::EmptyCorpus);
    }
    let mut differences: Vec<f64> = a.per_document_recall.iter().map(|(d, ra)| ra - b.per_document_recall[d]).collect();
    differences.sort_by(f64::total_cmp);
    let n = differences.len() as f64;
    let count = |pred: fn(f64) -> bool| differences.iter().filter(|&&d| pred(d)).count() as f64 / n;
    Ok(RecallDifference {
        method_a: a.method.clone(),
        method_b: b.method.clone(),
        share_negative: count(|d| d < 0.0),
        share_zero: count(|d| d == 0.0),
        share_positive: count(|d| d > 0.0),
        differences,
    })
}
