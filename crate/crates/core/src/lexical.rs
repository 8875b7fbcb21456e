//! Exact base-noun-phrase matching between documents and categories.

use std::collections::{BTreeMap, HashMap};

use crate::ontology::{CategoryId, Guideline};
use crate::phrase::{distinct_phrases, PhraseMultiset, Tagger};
use crate::rank::ScoreVector;

/// Base noun phrases of each rateable category, plus how many categories
/// each phrase appears in.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CategoryPhraseIndex {
    /// Guideline order; phrases deduplicated in first-occurrence order.
    entries: Vec<(CategoryId, Vec<String>)>,
    df: BTreeMap<String, u32>,
    /// Phrase key -> indices into `entries`.
    postings: HashMap<String, Vec<usize>>,
}

impl CategoryPhraseIndex {
    pub fn build(guideline: &Guideline, tagger: &dyn Tagger) -> Self {
        Self::from_phrases(guideline.rateable_categories().map(|c| (c.id.clone(), distinct_phrases(&c.text, tagger))))
    }

    /// Builds from precomputed phrase lists. Duplicate phrases within one
    /// category are collapsed.
    pub fn from_phrases(items: impl IntoIterator<Item = (CategoryId, Vec<String>)>) -> Self {
        let mut entries = Vec::new();
        let mut df: BTreeMap<String, u32> = BTreeMap::new();
        let mut postings: HashMap<String, Vec<usize>> = HashMap::new();
        for (id, phrases) in items {
            let mut unique: Vec<String> = Vec::with_capacity(phrases.len());
            for p in phrases {
                if !unique.contains(&p) {
                    unique.push(p);
                }
            }
            let idx = entries.len();
            for p in &unique {
                *df.entry(p.clone()).or_insert(0) += 1;
                postings.entry(p.clone()).or_default().push(idx);
            }
            entries.push((id, unique));
        }
        Self { entries, df, postings }
    }

    pub fn categories(&self) -> impl Iterator<Item = (&CategoryId, &[String])> {
        self.entries.iter().map(|(id, p)| (id, p.as_slice()))
    }

    pub fn phrases(&self, id: &CategoryId) -> Option<&[String]> {
        self.entries.iter().find(|(c, _)| c == id).map(|(_, p)| p.as_slice())
    }

    /// Number of categories whose phrase set contains `phrase`; 0 if none.
    pub fn df(&self, phrase: &str) -> u32 {
        self.df.get(phrase).copied().unwrap_or(0)
    }

    pub fn df_table(&self) -> &BTreeMap<String, u32> {
        &self.df
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// Weight of a category phrase: 1 unweighted, 1/df weighted.
    pub fn weight(&self, phrase: &str, weighted: bool) -> f64 {
        if weighted {
            1.0 / f64::from(self.df(phrase).max(1))
        } else {
            1.0
        }
    }
}

/// Sums document occurrence counts of each category's phrases, optionally
/// dividing each phrase's contribution by its document frequency.
pub fn score_count(doc: &PhraseMultiset, index: &CategoryPhraseIndex, weighted: bool) -> ScoreVector {
    let mut scores = ScoreVector::new();
    for (phrase, count) in doc.iter() {
        let Some(cats) = index.postings.get(phrase) else {
            continue;
        };
        let w = index.weight(phrase, weighted);
        for &i in cats {
            scores.add(&index.entries[i].0, f64::from(count) * w);
        }
    }
    scores
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phrase::RuleTagger;
    use proptest::prelude::*;

    fn idx(items: &[(&str, &[&str])]) -> CategoryPhraseIndex {
        CategoryPhraseIndex::from_phrases(
            items.iter().map(|(id, ps)| (CategoryId::from(*id), ps.iter().map(|s| s.to_string()).collect())),
        )
    }

    /// Independent recomputation of df by scanning every category.
    fn df_oracle(index: &CategoryPhraseIndex, phrase: &str) -> u32 {
        index.categories().filter(|(_, ps)| ps.iter().any(|p| p == phrase)).count() as u32
    }

    #[test]
    fn builds_from_guideline() {
        let g = crate::ontology::parse_guideline(
            br#"{"name": "g", "areas": [{"id": "A", "title": "A", "units": [{"id": "U", "title": "U", "items": [
                {"id": "c1", "kind": "topic", "text": "Graph algorithms"},
                {"id": "c2", "kind": "topic", "text": "Functions in mathematics"},
                {"id": "c3", "kind": "topic", "text": "Functions and functions"}
            ]}]}]}"#,
        )
        .unwrap();
        let index = CategoryPhraseIndex::build(&g, &RuleTagger);
        assert_eq!(index.phrases(&"c1".into()).unwrap(), ["graph algorithms"]);
        assert_eq!(index.phrases(&"c3".into()).unwrap(), ["functions"]);
        assert_eq!(index.phrases(&"c2".into()).unwrap(), ["functions", "mathematics"]);
        assert_eq!(index.df("functions"), 2);
        let empty = crate::ontology::parse_guideline(br#"{"name": "e", "areas": []}"#).unwrap();
        assert!(CategoryPhraseIndex::build(&empty, &RuleTagger).is_empty());
    }

    #[test]
    fn df_counts_categories_not_occurrences() {
        let index = idx(&[("a", &["functions", "functions"]), ("b", &["functions"]), ("c", &["loops"])]);
        assert_eq!(index.df("functions"), 2);
        assert_eq!(index.df("loops"), 1);
        assert_eq!(index.df("absent"), 0);
    }

    #[test]
    fn count_scores() {
        let doc: PhraseMultiset = [("linked list", 2)].into_iter().collect();
        let one = idx(&[("c", &["linked list"])]);
        assert_eq!(score_count(&doc, &one, false).get(&"c".into()), 2.0);
        assert_eq!(score_count(&doc, &one, true).get(&"c".into()), 2.0);
        let two = idx(&[("c", &["linked list"]), ("d", &["linked list"])]);
        assert_eq!(score_count(&doc, &two, true).get(&"c".into()), 1.0);
        let other: PhraseMultiset = [("hash table", 4)].into_iter().collect();
        assert!(score_count(&other, &two, false).is_zero());
    }

    fn index_strategy() -> impl Strategy<Value = CategoryPhraseIndex> {
        let vocab = proptest::sample::select(vec!["p0", "p1", "p2", "p3", "p4", "p5", "p6", "p7"]);
        proptest::collection::vec(proptest::collection::vec(vocab, 0..4), 1..12).prop_map(|cats| {
            CategoryPhraseIndex::from_phrases(
                cats.into_iter()
                    .enumerate()
                    .map(|(i, ps)| (CategoryId(format!("c{i}")), ps.into_iter().map(String::from).collect())),
            )
        })
    }

    fn doc_strategy() -> impl Strategy<Value = PhraseMultiset> {
        proptest::collection::vec((proptest::sample::select(vec!["p0", "p1", "p2", "p3", "p4", "p9"]), 1u32..5), 0..8)
            .prop_map(|v| v.into_iter().collect())
    }

    proptest! {
        #[test]
        fn df_matches_recount(index in index_strategy()) {
            for (p, &d) in index.df_table() {
                prop_assert!(d >= 1);
                prop_assert_eq!(d, df_oracle(&index, p));
            }
        }

        #[test]
        fn weighted_never_exceeds_unweighted(index in index_strategy(), doc in doc_strategy()) {
            let u = score_count(&doc, &index, false);
            let w = score_count(&doc, &index, true);
            for (id, _) in index.categories() {
                prop_assert!(w.get(id) <= u.get(id) + 1e-12);
            }
        }

        #[test]
        fn planted_phrase_lower_bound(index in index_strategy(), n in 1u32..10) {
            for (id, phrases) in index.categories() {
                if let Some(p) = phrases.first() {
                    let doc: PhraseMultiset = [(p.clone(), n)].into_iter().collect();
                    prop_assert!(score_count(&doc, &index, false).get(id) >= f64::from(n));
                }
            }
        }
    }

    #[test]
    fn unit_df_makes_weighting_irrelevant() {
        let index = idx(&[("a", &["x", "y"]), ("b", &["z"]), ("c", &["w"])]);
        let doc: PhraseMultiset = [("x", 3), ("z", 1), ("w", 2)].into_iter().collect();
        assert_eq!(score_count(&doc, &index, true), score_count(&doc, &index, false));
    }
}
