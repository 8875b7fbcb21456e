//! Semantic phrase matching with a pretrained word-embedding table.
//!
//! A phrase is embedded as the mean of its in-vocabulary word vectors.
//! Two phrases match when `1 - |cos|` is at most the threshold.

use std::collections::HashMap;
use std::io::BufRead;

use thiserror::Error;

use crate::lexical::CategoryPhraseIndex;
use crate::ontology::CategoryId;
use crate::phrase::PhraseMultiset;
use crate::rank::ScoreVector;

pub const DEFAULT_THRESHOLD: f64 = 0.3;

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("embedding table is empty; cannot infer dimension")]
    Empty,
    #[error("line {line}: expected {expected} components, found {found}")]
    Dimension { line: usize, expected: usize, found: usize },
    #[error("line {line}: component `{value}` is not a number")]
    NotNumeric { line: usize, value: String },
    #[error("reading embedding table: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MatchMode {
    /// Every category phrase within the threshold contributes.
    All,
    /// Only the closest category phrase of each category contributes.
    Best,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dimension: usize,
    vectors: HashMap<String, Vec<f32>>,
}

impl EmbeddingTable {
    pub fn from_words<I, S>(dimension: usize, words: I) -> Self
    where
        I: IntoIterator<Item = (S, Vec<f32>)>,
        S: Into<String>,
    {
        let vectors = words
            .into_iter()
            .map(|(w, v)| {
                assert_eq!(v.len(), dimension, "vector length must equal the table dimension");
                (w.into().to_lowercase(), v)
            })
            .collect();
        Self { dimension, vectors }
    }

    /// Reads `word v1 ... vD` lines. The dimension is taken from the first
    /// entry and enforced for the rest. Blank lines are skipped.
    pub fn load(reader: impl BufRead) -> Result<Self, EmbeddingError> {
        let mut dimension = None;
        let mut vectors = HashMap::new();
        for (n, line) in reader.lines().enumerate() {
            let line = line?;
            let mut parts = line.split_whitespace();
            let Some(word) = parts.next() else { continue };
            let values = parts
                .map(|v| v.parse::<f32>().map_err(|_| EmbeddingError::NotNumeric { line: n + 1, value: v.to_owned() }))
                .collect::<Result<Vec<_>, _>>()?;
            let expected = *dimension.get_or_insert(values.len());
            if values.len() != expected || expected == 0 {
                return Err(EmbeddingError::Dimension { line: n + 1, expected, found: values.len() });
            }
            vectors.insert(word.to_lowercase(), values);
        }
        Ok(Self { dimension: dimension.ok_or(EmbeddingError::Empty)?, vectors })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<&[f32]> {
        self.vectors.get(word).map(Vec::as_slice)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhraseVector {
    pub vector: Vec<f64>,
    pub covered_words: usize,
}

impl PhraseVector {
    pub fn new(vector: Vec<f64>) -> Self {
        Self { vector, covered_words: 1 }
    }

    fn norm(&self) -> f64 {
        self.vector.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

/// Mean of the in-vocabulary word vectors of `phrase`; `None` when no word
/// is in the table or the mean is the zero vector.
pub fn embed_phrase(phrase: &str, table: &EmbeddingTable) -> Option<PhraseVector> {
    let mut sum = vec![0.0f64; table.dimension];
    let mut covered = 0usize;
    for word in phrase.split_whitespace() {
        if let Some(v) = table.get(word) {
            for (s, x) in sum.iter_mut().zip(v) {
                *s += f64::from(*x);
            }
            covered += 1;
        }
    }
    if covered == 0 {
        return None;
    }
    let n = covered as f64;
    sum.iter_mut().for_each(|s| *s /= n);
    if sum.iter().all(|&x| x == 0.0) {
        return None;
    }
    Some(PhraseVector { vector: sum, covered_words: covered })
}

/// `1 - |cos(a, b)|`, clamped to `[0, 1]`.
///
/// Panics if the dimensions differ.
pub fn phrase_distance(a: &PhraseVector, b: &PhraseVector) -> f64 {
    assert_eq!(a.vector.len(), b.vector.len(), "phrase vectors must share a dimension");
    distance_with_norms(&a.vector, a.norm(), &b.vector, b.norm())
}

fn distance_with_norms(a: &[f64], norm_a: f64, b: &[f64], norm_b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let cos = dot / (norm_a * norm_b);
    (1.0 - cos.abs()).clamp(0.0, 1.0)
}

struct EmbeddedPhrase<'a> {
    key: &'a str,
    vector: Vec<f64>,
    norm: f64,
}

/// Category phrases embedded once and reused across documents. Each
/// distinct phrase is embedded (and compared) once, however many
/// categories share it.
pub struct EmbeddedIndex<'a> {
    table: &'a EmbeddingTable,
    phrases: Vec<EmbeddedPhrase<'a>>,
    /// Per category: (index into `phrases`, weight), in category-phrase order.
    categories: Vec<(&'a CategoryId, Vec<(usize, f64)>)>,
}

impl<'a> EmbeddedIndex<'a> {
    pub fn new(index: &'a CategoryPhraseIndex, table: &'a EmbeddingTable, weighted: bool) -> Self {
        let mut phrases = Vec::new();
        let mut slot: HashMap<&str, Option<usize>> = HashMap::new();
        let categories = index
            .categories()
            .map(|(id, keys)| {
                let members = keys
                    .iter()
                    .filter_map(|key| {
                        let i = *slot.entry(key.as_str()).or_insert_with(|| {
                            embed_phrase(key, table).map(|v| {
                                let norm = v.norm();
                                phrases.push(EmbeddedPhrase { key, vector: v.vector, norm });
                                phrases.len() - 1
                            })
                        });
                        i.map(|i| (i, index.weight(key, weighted)))
                    })
                    .collect();
                (id, members)
            })
            .collect();
        Self { table, phrases, categories }
    }

    pub fn score(&self, doc: &PhraseMultiset, mode: MatchMode, threshold: f64) -> ScoreVector {
        let mut scores = ScoreVector::new();
        let mut distances = vec![0.0; self.phrases.len()];
        for (key, count) in doc.iter() {
            let Some(dv) = embed_phrase(key, self.table) else { continue };
            let dn = dv.norm();
            for (d, p) in distances.iter_mut().zip(&self.phrases) {
                *d = if p.key == key { 0.0 } else { distance_with_norms(&dv.vector, dn, &p.vector, p.norm) };
            }
            let count = f64::from(count);
            for (id, members) in &self.categories {
                let contribution = match mode {
                    MatchMode::All => members.iter().filter(|(i, _)| distances[*i] <= threshold).map(|(_, w)| w).sum(),
                    MatchMode::Best => {
                        let mut best: Option<(f64, f64)> = None;
                        for &(i, w) in members {
                            let d = distances[i];
                            // Strict `<` keeps the earliest phrase on ties.
                            if d <= threshold && best.is_none_or(|(bd, _)| d < bd) {
                                best = Some((d, w));
                            }
                        }
                        best.map_or(0.0, |(_, w)| w)
                    }
                };
                if contribution > 0.0 {
                    scores.add(id, count * contribution);
                }
            }
        }
        scores
    }
}

/// Scores every category of `index` against `doc` by embedding similarity.
pub fn score_embedding(
    doc: &PhraseMultiset,
    index: &CategoryPhraseIndex,
    table: &EmbeddingTable,
    weighted: bool,
    mode: MatchMode,
    threshold: f64,
) -> ScoreVector {
    EmbeddedIndex::new(index, table, weighted).score(doc, mode, threshold)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pv(v: &[f64]) -> PhraseVector {
        PhraseVector::new(v.to_vec())
    }

    fn table() -> EmbeddingTable {
        EmbeddingTable::from_words(
            3,
            [
                ("graph", vec![1.0, 0.0, 0.0]),
                ("network", vec![0.95, 0.1, 0.0]),
                ("tree", vec![0.0, 1.0, 0.0]),
                ("heap", vec![0.0, 0.0, 1.0]),
                ("web", vec![0.9, 0.0, 0.2]),
            ],
        )
    }

    #[test]
    fn load_small_table() {
        let t = EmbeddingTable::load("graph 1 0 0\nnetwork 0.9 0.1 0\n".as_bytes()).unwrap();
        assert_eq!((t.len(), t.dimension()), (2, 3));
        assert_eq!(t.get("network").unwrap(), [0.9, 0.1, 0.0]);
    }

    #[test]
    fn load_errors() {
        assert!(matches!(EmbeddingTable::load("".as_bytes()), Err(EmbeddingError::Empty)));
        let first = format!("a {}\n", vec!["0.5"; 300].join(" "));
        let second = format!("b {}\n", vec!["0.5"; 299].join(" "));
        match EmbeddingTable::load(format!("{first}{second}").as_bytes()) {
            Err(EmbeddingError::Dimension { line: 2, expected: 300, found: 299 }) => {}
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(EmbeddingTable::load("a 1 x\n".as_bytes()), Err(EmbeddingError::NotNumeric { line: 1, .. })));
    }

    #[test]
    fn embed_rules() {
        let t = table();
        assert_eq!(embed_phrase("tree", &t).unwrap().vector, [0.0, 1.0, 0.0]);
        let v = embed_phrase("graph zorplex", &t).unwrap();
        assert_eq!(v.vector, [1.0, 0.0, 0.0]);
        assert_eq!(v.covered_words, 1);
        assert!(embed_phrase("zorplex quux", &t).is_none());
        assert_eq!(embed_phrase("graph tree", &t).unwrap().vector, [0.5, 0.5, 0.0]);
    }

    #[test]
    fn distance_cases() {
        let a = pv(&[1.0, 2.0, 3.0]);
        assert_eq!(phrase_distance(&a, &a), 0.0);
        assert!((phrase_distance(&pv(&[1.0, 0.0]), &pv(&[0.0, 3.0])) - 1.0).abs() < 1e-12);
        assert!(phrase_distance(&a, &pv(&[-1.0, -2.0, -3.0])) < 1e-12);
    }

    #[test]
    #[should_panic(expected = "share a dimension")]
    fn dimension_mismatch_panics() {
        phrase_distance(&pv(&[1.0]), &pv(&[1.0, 0.0]));
    }

    fn single(id: &str, phrases: &[&str]) -> CategoryPhraseIndex {
        CategoryPhraseIndex::from_phrases([(CategoryId::from(id), phrases.iter().map(|s| s.to_string()).collect())])
    }

    #[test]
    fn synonym_matches_in_both_modes() {
        let t = table();
        let d = phrase_distance(&embed_phrase("graph", &t).unwrap(), &embed_phrase("network", &t).unwrap());
        assert!(d <= DEFAULT_THRESHOLD, "{d}");
        let idx = single("g", &["graph"]);
        let doc: PhraseMultiset = [("network", 1)].into_iter().collect();
        for mode in [MatchMode::All, MatchMode::Best] {
            assert_eq!(score_embedding(&doc, &idx, &t, false, mode, DEFAULT_THRESHOLD).get(&"g".into()), 1.0);
        }
    }

    #[test]
    fn all_versus_best() {
        let t = table();
        let idx = single("g", &["graph", "web", "tree"]);
        let doc: PhraseMultiset = [("network", 1)].into_iter().collect();
        let all = score_embedding(&doc, &idx, &t, false, MatchMode::All, DEFAULT_THRESHOLD);
        let best = score_embedding(&doc, &idx, &t, false, MatchMode::Best, DEFAULT_THRESHOLD);
        assert_eq!(all.get(&"g".into()), 2.0);
        assert_eq!(best.get(&"g".into()), 1.0);
    }

    #[test]
    fn identical_phrase_always_matches() {
        let t = table();
        let idx = single("h", &["heap"]);
        let doc: PhraseMultiset = [("heap", 3)].into_iter().collect();
        assert_eq!(score_embedding(&doc, &idx, &t, false, MatchMode::All, 0.0).get(&"h".into()), 3.0);
    }

    #[test]
    fn oov_never_matches() {
        let t = table();
        let idx = single("z", &["zorplex"]);
        let doc: PhraseMultiset = [("zorplex", 3)].into_iter().collect();
        assert!(score_embedding(&doc, &idx, &t, false, MatchMode::All, 1.0).is_zero());
    }

    #[test]
    fn weighted_uses_exact_df() {
        let t = table();
        let idx = CategoryPhraseIndex::from_phrases([
            (CategoryId::from("a"), vec!["graph".to_string()]),
            (CategoryId::from("b"), vec!["graph".to_string()]),
        ]);
        let doc: PhraseMultiset = [("network", 2)].into_iter().collect();
        let s = score_embedding(&doc, &idx, &t, true, MatchMode::All, DEFAULT_THRESHOLD);
        assert_eq!(s.get(&"a".into()), 1.0);
        assert_eq!(s.get(&"b".into()), 1.0);
    }

    fn vector(dim: usize) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(-10.0f64..10.0, dim).prop_filter("non-zero", |v| v.iter().any(|x| x.abs() > 1e-3))
    }

    proptest! {
        #[test]
        fn best_bounded_by_all(
            words in proptest::collection::vec(vector(4), 6),
            cats in proptest::collection::vec(proptest::collection::vec(0usize..6, 1..4), 1..5),
            doc in proptest::collection::vec((0usize..6, 1u32..4), 1..6),
            threshold in 0.0f64..1.0,
            weighted in any::<bool>(),
        ) {
            let table = EmbeddingTable::from_words(
                4,
                words.iter().enumerate().map(|(i, v)| (format!("w{i}"), v.iter().map(|&x| x as f32).collect())),
            );
            let idx = CategoryPhraseIndex::from_phrases(cats.iter().enumerate().map(|(i, ws)| {
                (CategoryId(format!("c{i}")), ws.iter().map(|w| format!("w{w}")).collect())
            }));
            let doc: PhraseMultiset = doc.into_iter().map(|(w, n)| (format!("w{w}"), n)).collect();
            let all = score_embedding(&doc, &idx, &table, weighted, MatchMode::All, threshold);
            let best = score_embedding(&doc, &idx, &table, weighted, MatchMode::Best, threshold);
            for (id, _) in idx.categories() {
                prop_assert!(best.get(id) <= all.get(id) + 1e-12);
            }
        }

        #[test]
        fn zero_threshold_reduces_to_exact_counting(
            words in proptest::collection::vec(vector(5), 8),
            cats in proptest::collection::vec(proptest::collection::vec(0usize..8, 1..3), 1..6),
            doc in proptest::collection::vec((0usize..10, 1u32..4), 0..8),
        ) {
            let table = EmbeddingTable::from_words(
                5,
                words.iter().enumerate().map(|(i, v)| (format!("w{i}"), v.iter().map(|&x| x as f32).collect())),
            );
            let idx = CategoryPhraseIndex::from_phrases(cats.iter().enumerate().map(|(i, ws)| {
                (CategoryId(format!("c{i}")), ws.iter().map(|w| format!("w{w}")).collect())
            }));
            // w8 and w9 are out of vocabulary.
            let doc: PhraseMultiset = doc.into_iter().map(|(w, n)| (format!("w{w}"), n)).collect();
            let emb = score_embedding(&doc, &idx, &table, false, MatchMode::All, 0.0);
            let exact = crate::lexical::score_count(&doc, &idx, false);
            for (id, _) in idx.categories() {
                prop_assert_eq!(emb.get(id), exact.get(id));
            }
        }

        #[test]
        fn embedding_ignores_word_order(ws in proptest::collection::vec(0usize..5, 1..5)) {
            let t = table();
            let names = ["graph", "network", "tree", "heap", "web"];
            let fwd: Vec<_> = ws.iter().map(|&i| names[i]).collect();
            let rev: Vec<_> = fwd.iter().rev().copied().collect();
            let a = embed_phrase(&fwd.join(" "), &t);
            let b = embed_phrase(&rev.join(" "), &t);
            match (a, b) {
                (Some(a), Some(b)) => {
                    for (x, y) in a.vector.iter().zip(&b.vector) {
                        prop_assert!((x - y).abs() < 1e-12);
                    }
                }
                (a, b) => prop_assert_eq!(a.is_none(), b.is_none()),
            }
        }
    }
}
