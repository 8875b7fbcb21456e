//! LLM-based classification: prompts, response parsing, bounded-concurrency
//! querying with retries, and the five rating methods.

mod methods;
pub mod mock;
pub mod parse;
pub mod prompt;
mod query;
pub mod transport;

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ontology::{CategoryId, OntologyError};

pub use methods::{classify_whole_ontology, run_method, summarize_units, MethodOptions};
pub use query::{LlmClient, QueryScope};
pub use transport::{ChatMessage, ChatRequest, ChatTransport, HttpTransport, TransportError};

pub const DEFAULT_MAX_IN_FLIGHT: usize = 40;
pub const DEFAULT_MAX_RETRIES: u32 = 2;
pub const DEFAULT_DOC_CHAR_BUDGET: usize = 24_000;
/// Rough ceiling for the whole-ontology prompt: 128K tokens at ~4 chars each.
pub const DEFAULT_MAX_PROMPT_CHARS: usize = 512_000;
pub const BATCH_SIZE: usize = 5;

/// Where and how to query the model.
#[derive(Debug, Clone)]
pub struct LlmEndpoint {
    pub base_url: String,
    pub model_name: String,
    pub auth_token: Option<String>,
    pub max_in_flight: usize,
    pub timeout: Duration,
    pub max_retries: u32,
    /// Characters of document text inserted into a prompt.
    pub doc_char_budget: usize,
}

impl Default for LlmEndpoint {
    fn default() -> Self {
        Self {
            base_url: "http://localhost:8000/v1".into(),
            model_name: "default".into(),
            auth_token: None,
            max_in_flight: DEFAULT_MAX_IN_FLIGHT,
            timeout: Duration::from_secs(120),
            max_retries: DEFAULT_MAX_RETRIES,
            doc_char_budget: DEFAULT_DOC_CHAR_BUDGET,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LlmMethod {
    #[serde(rename = "llm-binary")]
    Binary,
    #[serde(rename = "llm-5point")]
    FivePoint,
    #[serde(rename = "llm-5pointbatch")]
    FivePointBatch,
    #[serde(rename = "llm-5pointcontext")]
    FivePointContext,
    #[serde(rename = "llm-prune-5pointcontext")]
    PruneFivePointContext,
}

impl LlmMethod {
    pub const ALL: [LlmMethod; 5] = [
        LlmMethod::Binary,
        LlmMethod::FivePoint,
        LlmMethod::FivePointBatch,
        LlmMethod::FivePointContext,
        LlmMethod::PruneFivePointContext,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LlmMethod::Binary => "llm-binary",
            LlmMethod::FivePoint => "llm-5point",
            LlmMethod::FivePointBatch => "llm-5pointbatch",
            LlmMethod::FivePointContext => "llm-5pointcontext",
            LlmMethod::PruneFivePointContext => "llm-prune-5pointcontext",
        }
    }
}

impl fmt::Display for LlmMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LlmMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL.into_iter().find(|m| m.name() == s).ok_or_else(|| format!("unknown LLM method `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryRating {
    pub category_id: CategoryId,
    /// 0 (not a match) to 5 (definitely a match).
    pub score: u8,
    pub raw_response: String,
}

/// Per-document query accounting.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryLog {
    /// Logical queries; retries are counted separately.
    pub queries_issued: usize,
    pub retries: usize,
    /// Queries whose responses never parsed and fell back to a default.
    pub fallbacks: usize,
    pub max_observed_in_flight: usize,
    pub pruned_unit_count: usize,
    pub document_truncated: bool,
    pub duration_ms: u64,
}

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("LLM transport failed after {attempts} attempt(s): {source}")]
    Transport {
        attempts: u32,
        #[source]
        source: TransportError,
    },
    #[error("document text is empty")]
    EmptyDocument,
    #[error("a rating query takes 1 to {BATCH_SIZE} categories, got {0}")]
    BatchSize(usize),
    #[error("knowledge unit `{0}` has no summary; run summarize-units first")]
    MissingSummary(CategoryId),
    #[error("summarizing knowledge unit `{unit}` failed: {reason}")]
    Initialization { unit: CategoryId, reason: String },
    #[error("estimated prompt of {estimated} characters exceeds the budget of {budget}")]
    PromptTooLarge { estimated: usize, budget: usize },
    #[error(transparent)]
    Ontology(#[from] OntologyError),
}
