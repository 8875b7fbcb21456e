//! Shared workloads for the benchmarks: a guideline of realistic size, a
//! planted corpus over it and a word-vector table covering its vocabulary.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use guidemap::testkit::{planted_corpus, pseudo_word, synthetic_guideline};
use guidemap::{CategoryPhraseIndex, Document, EmbeddingTable, Guideline, RuleTagger};

pub const SEED: u64 = 17;
pub const DIMENSION: usize = 50;

pub struct Workload {
    pub guideline: Guideline,
    pub index: CategoryPhraseIndex,
    pub documents: Vec<Document>,
    pub table: EmbeddingTable,
}

/// 2700 categories in 270 units, `n_docs` documents planting 20 categories
/// each, and a deterministic vector for every category word.
pub fn workload(n_docs: usize) -> Workload {
    let guideline = synthetic_guideline(30, 9, 10);
    let index = CategoryPhraseIndex::build(&guideline, &RuleTagger);
    let mut rng = StdRng::seed_from_u64(SEED);
    let documents = planted_corpus(&guideline, n_docs, 20, 3, &mut rng).into_iter().map(|(d, _)| d).collect();
    let words = 2 * guideline.rateable_count();
    let table = EmbeddingTable::from_words(
        DIMENSION,
        (0..words).map(|i| (pseudo_word(i), (0..DIMENSION).map(|_| rng.random_range(-1.0f32..1.0)).collect())),
    );
    Workload { guideline, index, documents, table }
}
