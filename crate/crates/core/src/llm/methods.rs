use std::collections::{HashMap, HashSet};
use std::time::Instant;

use futures::future::try_join_all;
use log::{info, warn};

use super::prompt::{self, fill, truncate_document};
use super::{LlmClient, LlmError, LlmMethod, QueryLog, BATCH_SIZE};
use crate::ingest::Document;
use crate::ontology::{Category, CategoryId, Guideline};
use crate::rank::{rank, RankedClassification, ScoreVector};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MethodOptions {
    /// Rate the categories of units that pass the pruning gate in groups of
    /// five instead of one at a time.
    pub batch_prune_survivors: bool,
}

/// Runs one LLM method over one document and ranks the result.
///
/// All queries for the document go through a single [`super::QueryScope`],
/// so at most `max_in_flight` requests are outstanding at any time. Any
/// unrecovered query error fails the whole document.
pub async fn run_method(
    doc: &Document,
    guideline: &Guideline,
    method: LlmMethod,
    client: &LlmClient,
    k: usize,
    options: MethodOptions,
) -> Result<(RankedClassification, QueryLog), LlmError> {
    let started = Instant::now();
    let scope = client.scope();
    let (text, truncated) = truncate_document(&doc.normalized_text, client.endpoint().doc_char_budget);
    if truncated {
        warn!("document `{}` truncated to {} characters for prompting", doc.id, client.endpoint().doc_char_budget);
    }
    let text = text.as_ref();
    let mut scores = ScoreVector::new();
    let mut pruned = 0;

    if text.trim().is_empty() {
        warn!("document `{}` has no text; skipping LLM queries", doc.id);
    } else {
        let categories: Vec<&Category> = guideline.rateable_categories().collect();
        match method {
            LlmMethod::Binary => {
                let verdicts = try_join_all(categories.iter().map(|c| scope.classify_binary(text, c))).await?;
                for (c, yes) in categories.iter().zip(verdicts) {
                    if yes {
                        scores.set(c.id.clone(), 1.0);
                    }
                }
            }
            LlmMethod::FivePoint => {
                let ratings =
                    try_join_all(categories.iter().map(|c| scope.rate_categories(text, std::slice::from_ref(c), None)))
                        .await?;
                record(&mut scores, ratings.into_iter().flatten());
            }
            LlmMethod::FivePointBatch => {
                let ratings =
                    try_join_all(categories.chunks(BATCH_SIZE).map(|chunk| scope.rate_categories(text, chunk, None)))
                        .await?;
                record(&mut scores, ratings.into_iter().flatten());
            }
            LlmMethod::FivePointContext => {
                let contexts = categories.iter().map(|c| guideline.context_of(&c.id)).collect::<Result<Vec<_>, _>>()?;
                let ratings = try_join_all(
                    categories
                        .iter()
                        .zip(&contexts)
                        .map(|(c, ctx)| scope.rate_categories(text, std::slice::from_ref(c), Some(ctx))),
                )
                .await?;
                record(&mut scores, ratings.into_iter().flatten());
            }
            LlmMethod::PruneFivePointContext => {
                if let Some((_, unit)) = guideline.units().find(|(_, u)| u.summary.is_none()) {
                    return Err(LlmError::MissingSummary(unit.id.clone()));
                }
                let per_unit = try_join_all(guideline.units().map(|(area, unit)| {
                    let scope = &scope;
                    async move {
                        if !scope.prune_gate(text, &area.title, unit).await? {
                            return Ok::<_, LlmError>(None);
                        }
                        let ctx = guideline.context_of(&unit.id)?;
                        let members: Vec<&Category> = unit.categories.iter().collect();
                        let group = if options.batch_prune_survivors { BATCH_SIZE } else { 1 };
                        let ratings =
                            try_join_all(members.chunks(group).map(|g| scope.rate_categories(text, g, Some(&ctx))))
                                .await?;
                        Ok(Some(ratings))
                    }
                }))
                .await?;
                for unit in per_unit {
                    match unit {
                        Some(r) => record(&mut scores, r.into_iter().flatten()),
                        None => pruned += 1,
                    }
                }
            }
        }
    }

    let mut log = scope.log();
    log.pruned_unit_count = pruned;
    log.document_truncated = truncated;
    log.duration_ms = started.elapsed().as_millis() as u64;
    Ok((rank(&doc.id, method.name(), &scores, guideline, k), log))
}

fn record(scores: &mut ScoreVector, ratings: impl IntoIterator<Item = super::CategoryRating>) {
    for r in ratings {
        if r.score > 0 {
            scores.set(r.category_id, f64::from(r.score));
        }
    }
}

/// Generates a summary for every knowledge unit that lacks one, one unit at
/// a time. Returns the number of summaries written.
pub async fn summarize_units(guideline: &mut Guideline, client: &LlmClient) -> Result<usize, LlmError> {
    let pending: Vec<_> =
        guideline.units().filter(|(_, u)| u.summary.is_none()).map(|(a, u)| (a.title.clone(), u.clone())).collect();
    let scope = client.scope();
    for (area_title, unit) in &pending {
        let summary = scope.summarize_unit(area_title, unit).await?;
        info!("summarized knowledge unit `{}`", unit.id);
        guideline.set_summary(&unit.id, summary)?;
    }
    Ok(pending.len())
}

/// Experimental: sends the whole document and the whole guideline in one
/// prompt and asks for matching category ids. Refuses up front when the
/// prompt would exceed `max_prompt_chars`.
pub async fn classify_whole_ontology(
    doc: &Document,
    guideline: &Guideline,
    client: &LlmClient,
    k: usize,
    max_prompt_chars: usize,
) -> Result<(RankedClassification, QueryLog), LlmError> {
    let started = Instant::now();
    let listing =
        guideline.rateable_categories().map(|c| format!("{}: {}", c.id, c.text)).collect::<Vec<_>>().join("\n");
    let p = fill(prompt::WHOLE_ONTOLOGY, &[("document", &doc.normalized_text), ("numbered_category_list", &listing)]);
    let estimated = prompt::SYSTEM.chars().count() + p.chars().count();
    if estimated > max_prompt_chars {
        return Err(LlmError::PromptTooLarge { estimated, budget: max_prompt_chars });
    }
    let scope = client.scope();
    let response = scope.raw(p).await?;

    let known: HashMap<&str, &CategoryId> = guideline.rateable_categories().map(|c| (c.id.as_str(), &c.id)).collect();
    let mut seen = HashSet::new();
    let ids: Vec<_> = response
        .split(|c: char| c.is_whitespace() || matches!(c, ',' | ';' | '"' | '`' | '*'))
        .map(|t| t.trim_end_matches([':', '.']))
        .filter_map(|t| known.get(t).copied())
        .filter(|id| seen.insert(*id))
        .collect();
    let mut scores = ScoreVector::new();
    let n = ids.len();
    for (i, id) in ids.into_iter().enumerate() {
        scores.set(id.clone(), (n - i) as f64);
    }
    let mut log = scope.log();
    log.duration_ms = started.elapsed().as_millis() as u64;
    Ok((rank(&doc.id, "llm-whole-ontology", &scores, guideline, k), log))
}
