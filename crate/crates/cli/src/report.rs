//! The `evaluate` and `compare` commands.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use log::warn;
use serde::Serialize;

use guidemap::eval::{gold_size_histogram, recall_difference_distribution, RecallDifference};
use guidemap::results::load_results;
use guidemap::{evaluate_corpus, EvaluationReport, GoldClassification, ResultRecord};

use crate::cli::{CompareArgs, EvaluateArgs};

pub fn load_gold(path: &Path) -> Result<GoldClassification> {
    let bytes = fs::read(path).with_context(|| format!("reading gold labels {}", path.display()))?;
    GoldClassification::parse(&bytes).with_context(|| format!("parsing gold labels {}", path.display()))
}

fn results_by_method(dir: &Path) -> Result<BTreeMap<String, Vec<ResultRecord>>> {
    let mut by_method: BTreeMap<String, Vec<ResultRecord>> = BTreeMap::new();
    for r in load_results(dir).with_context(|| format!("reading results under {}", dir.display()))? {
        by_method.entry(r.method.clone()).or_default().push(r);
    }
    if by_method.is_empty() {
        bail!("no results found under {}", dir.display());
    }
    Ok(by_method)
}

fn evaluate_method(records: &[ResultRecord], gold: &GoldClassification, k: usize) -> Result<EvaluationReport> {
    if let Some(r) = records.iter().find(|r| r.k < k) {
        warn!("{} results were stored with k = {}; recall@{k} only sees those entries", r.method, r.k);
    }
    Ok(evaluate_corpus(records, gold, k)?)
}

#[derive(Debug, Serialize)]
pub struct SummaryRow {
    pub method: String,
    pub documents: usize,
    pub failed: usize,
    pub mean_recall: f64,
    pub micro_recall: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_queries_per_document: Option<f64>,
}

fn write(path: PathBuf, contents: String) -> Result<()> {
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
}

fn to_json(value: &impl Serialize) -> String {
    serde_json::to_string_pretty(value).expect("report serializes") + "\n"
}

/// Writes `<method>.report.json` and `<method>.recall.csv` per method, plus
/// `summary.json`. Returns the summary rows.
pub fn run_evaluate(args: &EvaluateArgs) -> Result<Vec<SummaryRow>> {
    let gold = load_gold(&args.gold)?;
    let mut by_method = results_by_method(&args.results)?;
    if !args.methods.is_empty() {
        for m in &args.methods {
            if !by_method.contains_key(m) {
                bail!("no results for method `{m}` under {}", args.results.display());
            }
        }
        by_method.retain(|m, _| args.methods.contains(m));
    }
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;

    let mut rows = Vec::new();
    for (method, records) in &by_method {
        let mut report = evaluate_method(records, &gold, args.k)?;
        let evaluated = GoldClassification(
            report.per_document_recall.keys().map(|d| (d.clone(), gold.get(d).cloned().unwrap_or_default())).collect(),
        );
        report.gold_size_histogram = gold_size_histogram(&evaluated, args.bin_width.max(1));
        write(args.out.join(format!("{method}.report.json")), to_json(&report))?;
        write(args.out.join(format!("{method}.recall.csv")), report.recall_distribution_csv())?;
        rows.push(SummaryRow {
            method: method.clone(),
            documents: report.per_document_recall.len(),
            failed: report.failed_documents.len(),
            mean_recall: report.mean_recall,
            micro_recall: report.micro_recall,
            mean_queries_per_document: report.query_stats.as_ref().map(|q| q.mean_queries_per_document),
        });
    }
    let all_docs: BTreeSet<&String> = by_method.values().flatten().map(|r| &r.document_id).collect();
    let evaluated = GoldClassification(
        gold.0.iter().filter(|(d, _)| all_docs.contains(d)).map(|(d, g)| (d.clone(), g.clone())).collect(),
    );
    write(args.out.join("gold-sizes.csv"), gold_size_histogram(&evaluated, args.bin_width.max(1)).to_csv())?;
    write(args.out.join("summary.json"), to_json(&rows))?;
    Ok(rows)
}

/// Writes `<a>-vs-<b>.json` and `<a>-vs-<b>.cdf.csv`.
pub fn run_compare(args: &CompareArgs) -> Result<RecallDifference> {
    let gold = load_gold(&args.gold)?;
    let by_method = results_by_method(&args.results)?;
    let report = |m: &str| -> Result<EvaluationReport> {
        let records = by_method.get(m).with_context(|| format!("no results for method `{m}`"))?;
        evaluate_method(records, &gold, args.k)
    };
    let diff = recall_difference_distribution(&report(&args.a)?, &report(&args.b)?)?;
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let stem = format!("{}-vs-{}", args.a, args.b);
    write(args.out.join(format!("{stem}.json")), to_json(&diff))?;
    write(args.out.join(format!("{stem}.cdf.csv")), diff.cdf_csv())?;
    Ok(diff)
}
