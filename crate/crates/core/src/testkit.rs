//! Synthetic guidelines and documents for tests and benchmarks.
//!
//! Category texts are pairs of made-up words that the bundled tagger reads as
//! nouns, so each category has exactly one base noun phrase and that phrase
//! occurs in no other category.

use rand::seq::index::sample;
use rand::Rng;

use crate::ingest::Document;
use crate::ontology::{Category, CategoryId, CategoryKind, Guideline, KnowledgeArea, KnowledgeUnit};

const SYLLABLES: [&str; 10] = ["ba", "ko", "ri", "tu", "me", "za", "fi", "no", "pe", "gu"];

/// A distinct pronounceable non-word for every `i`.
pub fn pseudo_word(i: usize) -> String {
    let mut w = String::from("q");
    let mut n = i;
    loop {
        w.push_str(SYLLABLES[n % SYLLABLES.len()]);
        n /= SYLLABLES.len();
        if n == 0 {
            break;
        }
    }
    w
}

/// The text (and single base noun phrase) of the `i`-th synthetic category.
pub fn category_phrase(i: usize) -> String {
    format!("{} {}", pseudo_word(2 * i), pseudo_word(2 * i + 1))
}

/// `areas` x `units_per_area` x `categories_per_unit` topics. Ids are
/// `A3`, `A3-U1`, `A3-U1-C4`; units carry summaries.
pub fn synthetic_guideline(areas: usize, units_per_area: usize, categories_per_unit: usize) -> Guideline {
    let mut next = 0;
    let areas = (0..areas)
        .map(|a| KnowledgeArea {
            id: CategoryId(format!("A{a}")),
            title: format!("Area {a}"),
            units: (0..units_per_area)
                .map(|u| KnowledgeUnit {
                    id: CategoryId(format!("A{a}-U{u}")),
                    title: format!("Unit {a}.{u}"),
                    summary: Some(format!("Summary of unit {a}.{u}.")),
                    categories: (0..categories_per_unit)
                        .map(|c| {
                            let text = category_phrase(next);
                            next += 1;
                            Category {
                                id: CategoryId(format!("A{a}-U{u}-C{c}")),
                                kind: CategoryKind::Topic,
                                text,
                                outcome_level: None,
                            }
                        })
                        .collect(),
                })
                .collect(),
        })
        .collect();
    Guideline::new("synthetic", areas).expect("synthetic guideline is valid")
}

/// A document stating each phrase `repeats` times, one sentence each.
pub fn planted_document(id: &str, phrases: &[String], repeats: usize) -> Document {
    let mut text = String::new();
    for p in phrases {
        for _ in 0..repeats {
            text.push_str(p);
            text.push_str(". ");
        }
    }
    Document::from_text(id, text.trim_end())
}

/// `n` documents, each planting `per_doc` distinct random categories of
/// `guideline` `repeats` times. Returns the documents with their gold ids.
pub fn planted_corpus(
    guideline: &Guideline,
    n: usize,
    per_doc: usize,
    repeats: usize,
    rng: &mut impl Rng,
) -> Vec<(Document, Vec<CategoryId>)> {
    let cats: Vec<&Category> = guideline.rateable_categories().collect();
    (0..n)
        .map(|d| {
            let chosen: Vec<&Category> = sample(rng, cats.len(), per_doc).into_iter().map(|i| cats[i]).collect();
            let phrases: Vec<String> = chosen.iter().map(|c| c.text.clone()).collect();
            let doc = planted_document(&format!("doc{d:03}"), &phrases, repeats);
            (doc, chosen.into_iter().map(|c| c.id.clone()).collect())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phrase::{text_phrases, RuleTagger};

    #[test]
    fn words_are_distinct_and_single_nouns() {
        let words: std::collections::HashSet<String> = (0..5000).map(pseudo_word).collect();
        assert_eq!(words.len(), 5000);
        let g = synthetic_guideline(2, 3, 4);
        assert_eq!(g.rateable_count(), 24);
        for c in g.rateable_categories() {
            let keys: Vec<String> = text_phrases(&c.text, &RuleTagger).keys().map(str::to_owned).collect();
            assert_eq!(keys, std::slice::from_ref(&c.text));
        }
    }
}
