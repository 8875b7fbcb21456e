//! Ranks the categories of a hierarchical curriculum guideline by how well
//! they describe a course document.
//!
//! Three families of matchers share one pipeline: lexical counting over base
//! noun phrases, word-embedding similarity between phrases, and LLM rating.
//! Every matcher yields a [`RankedClassification`]; [`eval`] scores rankings
//! against instructor labels with recall@K.

pub mod embedding;
pub mod eval;
pub mod ingest;
pub mod lexical;
pub mod llm;
pub mod ontology;
pub mod phrase;
pub mod rank;
pub mod results;
pub mod review;
pub mod testkit;

pub use embedding::{score_embedding, EmbeddedIndex, EmbeddingTable, MatchMode, DEFAULT_THRESHOLD};
pub use eval::{evaluate_corpus, recall_at_k, EvaluationReport, GoldClassification};
pub use ingest::{Document, Extractor};
pub use lexical::{score_count, CategoryPhraseIndex};
pub use llm::{LlmClient, LlmEndpoint, LlmMethod, QueryLog};
pub use ontology::{parse_guideline, Category, CategoryId, CategoryKind, Guideline, KnowledgeArea, KnowledgeUnit};
pub use phrase::{PhraseMultiset, RuleTagger, Tagger};
pub use rank::{rank, rank_top_k, RankedClassification, RankedEntry, ScoreVector, DEFAULT_K};
pub use results::{Method, ResultRecord};
pub use review::{DecisionLog, ReviewDecision, Verdict};
