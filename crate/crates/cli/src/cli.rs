use std::path::PathBuf;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use guidemap::llm::{
    LlmEndpoint, DEFAULT_DOC_CHAR_BUDGET, DEFAULT_MAX_IN_FLIGHT, DEFAULT_MAX_PROMPT_CHARS, DEFAULT_MAX_RETRIES,
};
use guidemap::{Extractor, MatchMode, DEFAULT_K, DEFAULT_THRESHOLD};

#[derive(Debug, Parser)]
#[command(name = "guidemap", version, about = "Map course documents onto curriculum guideline categories")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rank guideline categories for every document of a corpus.
    Classify(ClassifyArgs),
    /// Recall@K of stored results against gold labels, one report per method.
    Evaluate(EvaluateArgs),
    /// Per-document recall differences between two methods.
    Compare(CompareArgs),
    /// Generate knowledge-unit summaries needed by llm-prune-5pointcontext.
    SummarizeUnits(SummarizeArgs),
    /// Serve results and record review decisions over HTTP.
    Serve(ServeArgs),
    /// Experimental: one prompt carrying the whole guideline per document.
    WholeOntology(WholeOntologyArgs),
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub guideline: PathBuf,
    /// Directory of .pdf and .txt files.
    #[arg(long)]
    pub corpus: PathBuf,
    /// Method name; repeat for several. `embedding` uses --match and --weighted.
    #[arg(long = "method", required = true)]
    pub methods: Vec<String>,
    #[arg(long, default_value_t = DEFAULT_K)]
    pub k: usize,
    #[command(flatten)]
    pub extract: ExtractArgs,
    #[command(flatten)]
    pub embedding: EmbeddingArgs,
    #[command(flatten)]
    pub llm: LlmArgs,
    /// Rate surviving units of the prune method in batches of five.
    #[arg(long)]
    pub prune_batch: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    /// PDF text extractor.
    #[arg(long, default_value = "a", value_parser = parse_extractor)]
    pub extractor: Extractor,
}

fn parse_extractor(s: &str) -> Result<Extractor, String> {
    s.parse().map_err(|e| format!("{e}"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MatchArg {
    All,
    Best,
}

impl From<MatchArg> for MatchMode {
    fn from(m: MatchArg) -> Self {
        match m {
            MatchArg::All => MatchMode::All,
            MatchArg::Best => MatchMode::Best,
        }
    }
}

#[derive(Debug, Args)]
pub struct EmbeddingArgs {
    /// Word vectors, one `word v1 ... vD` per line.
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    pub threshold: f64,
    #[arg(long = "match", value_enum, default_value_t = MatchArg::All)]
    pub match_mode: MatchArg,
    #[arg(long, default_value_t = false, action = clap::ArgAction::Set)]
    pub weighted: bool,
}

#[derive(Debug, Args)]
pub struct LlmArgs {
    /// Base URL of an OpenAI-compatible endpoint, e.g. http://host:8000/v1.
    #[arg(long, env = "LLM_BASE_URL")]
    pub llm_url: Option<String>,
    #[arg(long, env = "LLM_API_KEY", hide_env_values = true)]
    pub llm_api_key: Option<String>,
    #[arg(long, default_value = "default")]
    pub model: String,
    #[arg(long, default_value_t = DEFAULT_MAX_IN_FLIGHT)]
    pub max_in_flight: usize,
    #[arg(long, default_value_t = DEFAULT_MAX_RETRIES)]
    pub max_retries: u32,
    /// Per-request timeout in seconds.
    #[arg(long, default_value_t = 120)]
    pub timeout: u64,
    /// Characters of document text placed in each prompt.
    #[arg(long, default_value_t = DEFAULT_DOC_CHAR_BUDGET)]
    pub doc_char_budget: usize,
}

impl LlmArgs {
    /// Endpoint settings, or `None` when no base URL was given.
    pub fn endpoint(&self) -> Option<LlmEndpoint> {
        let base_url = self.llm_url.clone().filter(|u| !u.is_empty())?;
        Some(LlmEndpoint {
            base_url,
            model_name: self.model.clone(),
            auth_token: self.llm_api_key.clone(),
            max_in_flight: self.max_in_flight,
            timeout: Duration::from_secs(self.timeout),
            max_retries: self.max_retries,
            doc_char_budget: self.doc_char_budget,
        })
    }
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub results: PathBuf,
    /// JSON map of document id to category ids.
    #[arg(long)]
    pub gold: PathBuf,
    #[arg(long, default_value_t = DEFAULT_K)]
    pub k: usize,
    /// Restrict to these methods; default is every method found.
    #[arg(long = "method")]
    pub methods: Vec<String>,
    /// Width of the gold-size histogram bins.
    #[arg(long, default_value_t = 5)]
    pub bin_width: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub results: PathBuf,
    #[arg(long)]
    pub gold: PathBuf,
    #[arg(long, default_value_t = DEFAULT_K)]
    pub k: usize,
    /// Minuend method.
    #[arg(long)]
    pub a: String,
    /// Subtrahend method.
    #[arg(long)]
    pub b: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SummarizeArgs {
    #[arg(long)]
    pub guideline: PathBuf,
    #[command(flatten)]
    pub llm: LlmArgs,
    /// Guideline file with summaries filled in.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub results: PathBuf,
    #[arg(long)]
    pub guideline: PathBuf,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub bind: String,
    /// Decision log; defaults to `<results>/decisions.jsonl`.
    #[arg(long)]
    pub decisions: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct WholeOntologyArgs {
    #[arg(long)]
    pub guideline: PathBuf,
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long, default_value_t = DEFAULT_K)]
    pub k: usize,
    #[command(flatten)]
    pub extract: ExtractArgs,
    #[command(flatten)]
    pub llm: LlmArgs,
    #[arg(long, default_value_t = DEFAULT_MAX_PROMPT_CHARS)]
    pub max_prompt_chars: usize,
    #[arg(long)]
    pub out: PathBuf,
}
