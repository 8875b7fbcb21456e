//! The `classify` and `whole-ontology` commands.

use std::collections::HashMap;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use log::{info, warn};
use rayon::prelude::*;

use guidemap::embedding::EmbeddedIndex;
use guidemap::llm::{classify_whole_ontology, run_method, LlmClient, LlmEndpoint, LlmMethod, MethodOptions};
use guidemap::phrase::text_phrases;
use guidemap::results::write_record;
use guidemap::{
    parse_guideline, rank, score_count, CategoryPhraseIndex, Document, EmbeddingTable, Extractor, Guideline, Method,
    PhraseMultiset, ResultRecord, RuleTagger,
};

use crate::cli::{ClassifyArgs, WholeOntologyArgs};

/// A validated `classify` invocation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub guideline: PathBuf,
    pub corpus: PathBuf,
    pub methods: Vec<Method>,
    pub k: usize,
    pub extractor: Extractor,
    pub embeddings: Option<PathBuf>,
    pub threshold: f64,
    pub llm: Option<LlmEndpoint>,
    pub options: MethodOptions,
    pub out: PathBuf,
}

impl RunConfig {
    /// Resolves method names and checks every setting the chosen methods
    /// need, before any document is read.
    pub fn from_args(args: &ClassifyArgs) -> Result<Self> {
        let mut methods = Vec::new();
        for name in &args.methods {
            let m = if name == "embedding" {
                Method::Embedding { weighted: args.embedding.weighted, mode: args.embedding.match_mode.into() }
            } else {
                name.parse::<Method>().map_err(anyhow::Error::msg)?
            };
            if !methods.contains(&m) {
                methods.push(m);
            }
        }
        let cfg = Self {
            guideline: args.guideline.clone(),
            corpus: args.corpus.clone(),
            methods,
            k: args.k,
            extractor: args.extract.extractor,
            embeddings: args.embedding.embeddings.clone(),
            threshold: args.embedding.threshold,
            llm: args.llm.endpoint(),
            options: MethodOptions { batch_prune_survivors: args.prune_batch },
            out: args.out.clone(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            bail!("--k must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            bail!("--threshold must lie in [0, 1], got {}", self.threshold);
        }
        if self.methods.iter().any(Method::needs_embeddings) {
            match &self.embeddings {
                None => bail!("embedding methods need --embeddings <path>"),
                Some(p) if !p.is_file() => bail!("embedding table {} does not exist", p.display()),
                Some(_) => {}
            }
        }
        if self.methods.iter().any(Method::is_llm) {
            match &self.llm {
                None => bail!("LLM methods need --llm-url or LLM_BASE_URL"),
                Some(e) if e.max_in_flight == 0 => bail!("--max-in-flight must be at least 1"),
                Some(_) => {}
            }
        }
        if !self.extractor.is_available() {
            bail!("extractor `{}` was not compiled into this build", self.extractor);
        }
        if !self.corpus.is_dir() {
            bail!("corpus directory {} does not exist", self.corpus.display());
        }
        Ok(())
    }
}

#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct RunSummary {
    pub documents: usize,
    pub records: usize,
    pub failed: usize,
}

pub fn load_guideline(path: &Path) -> Result<Guideline> {
    let bytes = std::fs::read(path).with_context(|| format!("reading guideline {}", path.display()))?;
    parse_guideline(&bytes).with_context(|| format!("parsing guideline {}", path.display()))
}

/// `.pdf` and `.txt` files of `dir`, sorted by name. Two files with the same
/// stem would collide on document id and are rejected.
pub fn list_corpus(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir).with_context(|| format!("reading corpus {}", dir.display()))? {
        let path = entry?.path();
        let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
        if path.is_file() && matches!(ext.as_deref(), Some("pdf" | "txt")) {
            files.push(path);
        }
    }
    files.sort();
    let mut seen = HashMap::new();
    for f in &files {
        let stem = f.file_stem().unwrap_or_default().to_string_lossy().into_owned();
        if let Some(prev) = seen.insert(stem.clone(), f) {
            bail!("{} and {} both map to document id `{stem}`", prev.display(), f.display());
        }
    }
    Ok(files)
}

fn stem(path: &Path) -> String {
    path.file_stem().unwrap_or_default().to_string_lossy().into_owned()
}

fn load_corpus(files: &[PathBuf], extractor: Extractor) -> Vec<Result<Document, (String, String)>> {
    files.par_iter().map(|f| Document::load(f, extractor).map_err(|e| (stem(f), e.to_string()))).collect()
}

pub fn run_classify(cfg: &RunConfig) -> Result<RunSummary> {
    let client = cfg.llm.clone().map(LlmClient::http);
    run_classify_with(cfg, client)
}

/// As [`run_classify`], with the LLM client supplied by the caller.
pub fn run_classify_with(cfg: &RunConfig, client: Option<LlmClient>) -> Result<RunSummary> {
    let guideline = load_guideline(&cfg.guideline)?;
    if cfg.methods.contains(&Method::Llm(LlmMethod::PruneFivePointContext)) {
        if let Some((_, u)) = guideline.units().find(|(_, u)| u.summary.is_none()) {
            bail!("knowledge unit `{}` has no summary; run summarize-units first", u.id);
        }
    }
    let table = match (&cfg.embeddings, cfg.methods.iter().any(Method::needs_embeddings)) {
        (Some(p), true) => Some(load_embeddings(p)?),
        _ => None,
    };
    let files = list_corpus(&cfg.corpus)?;
    info!("loading {} documents", files.len());
    let loaded = load_corpus(&files, cfg.extractor);

    let mut summary = RunSummary { documents: loaded.len(), ..RunSummary::default() };
    let mut docs = Vec::new();
    for item in loaded {
        match item {
            Ok(d) => docs.push(d),
            Err((id, err)) => {
                warn!("document `{id}` failed to load: {err}");
                for m in &cfg.methods {
                    persist(cfg, &ResultRecord::failed(&id, &m.name(), cfg.k, &err), &mut summary)?;
                }
            }
        }
    }

    let tagger = RuleTagger;
    let index = CategoryPhraseIndex::build(&guideline, &tagger);
    let phrases: Vec<PhraseMultiset> = docs.par_iter().map(|d| text_phrases(&d.normalized_text, &tagger)).collect();

    for method in &cfg.methods {
        info!("running {method}");
        let records: Vec<ResultRecord> = match *method {
            Method::Count { weighted } => docs
                .par_iter()
                .zip(&phrases)
                .map(|(d, p)| rank(&d.id, &method.name(), &score_count(p, &index, weighted), &guideline, cfg.k).into())
                .collect(),
            Method::Embedding { weighted, mode } => {
                let table = table.as_ref().expect("validated");
                let embedded = EmbeddedIndex::new(&index, table, weighted);
                docs.par_iter()
                    .zip(&phrases)
                    .map(|(d, p)| {
                        let scores = embedded.score(p, mode, cfg.threshold);
                        rank(&d.id, &method.name(), &scores, &guideline, cfg.k).into()
                    })
                    .collect()
            }
            Method::Llm(llm) => {
                let client = client.as_ref().context("LLM methods need an endpoint")?;
                run_llm(&docs, &guideline, llm, client, cfg.k, cfg.options)?
            }
        };
        for r in &records {
            persist(cfg, r, &mut summary)?;
        }
    }
    Ok(summary)
}

fn persist(cfg: &RunConfig, record: &ResultRecord, summary: &mut RunSummary) -> Result<()> {
    write_record(&cfg.out, record).with_context(|| format!("writing results under {}", cfg.out.display()))?;
    summary.records += 1;
    if record.is_failed() {
        summary.failed += 1;
    }
    Ok(())
}

pub fn load_embeddings(path: &Path) -> Result<EmbeddingTable> {
    let f = File::open(path).with_context(|| format!("opening embedding table {}", path.display()))?;
    let table = EmbeddingTable::load(BufReader::new(f))
        .with_context(|| format!("loading embedding table {}", path.display()))?;
    info!("loaded {} word vectors of dimension {}", table.len(), table.dimension());
    Ok(table)
}

fn runtime() -> Result<tokio::runtime::Runtime> {
    tokio::runtime::Builder::new_multi_thread().enable_all().build().context("starting async runtime")
}

/// Documents run one after another; queries within a document run
/// concurrently up to the endpoint's cap.
fn run_llm(
    docs: &[Document],
    guideline: &Guideline,
    method: LlmMethod,
    client: &LlmClient,
    k: usize,
    options: MethodOptions,
) -> Result<Vec<ResultRecord>> {
    let rt = runtime()?;
    Ok(docs
        .iter()
        .map(|d| match rt.block_on(run_method(d, guideline, method, client, k, options)) {
            Ok((ranked, log)) => {
                info!("{method} {}: {} queries in {} ms", d.id, log.queries_issued, log.duration_ms);
                ResultRecord { query_log: Some(log), ..ranked.into() }
            }
            Err(e) => {
                warn!("{method} failed for `{}`: {e}", d.id);
                ResultRecord::failed(&d.id, method.name(), k, e)
            }
        })
        .collect())
}

pub fn run_summarize(guideline: &Path, out: &Path, client: &LlmClient) -> Result<usize> {
    let mut g = load_guideline(guideline)?;
    let n = runtime()?.block_on(guidemap::llm::summarize_units(&mut g, client))?;
    std::fs::write(out, g.to_json() + "\n").with_context(|| format!("writing {}", out.display()))?;
    Ok(n)
}

pub fn run_whole_ontology(args: &WholeOntologyArgs, client: Option<LlmClient>) -> Result<RunSummary> {
    let client = match client {
        Some(c) => c,
        None => LlmClient::http(args.llm.endpoint().context("whole-ontology needs --llm-url or LLM_BASE_URL")?),
    };
    let guideline = load_guideline(&args.guideline)?;
    let files = list_corpus(&args.corpus)?;
    let rt = runtime()?;
    let mut summary = RunSummary { documents: files.len(), ..RunSummary::default() };
    const METHOD: &str = "llm-whole-ontology";
    for item in load_corpus(&files, args.extract.extractor) {
        let record = match item {
            Err((id, err)) => ResultRecord::failed(&id, METHOD, args.k, err),
            Ok(d) => match rt.block_on(classify_whole_ontology(&d, &guideline, &client, args.k, args.max_prompt_chars))
            {
                Ok((ranked, log)) => ResultRecord { query_log: Some(log), ..ranked.into() },
                Err(e) => {
                    warn!("whole-ontology failed for `{}`: {e}", d.id);
                    ResultRecord::failed(&d.id, METHOD, args.k, e)
                }
            },
        };
        write_record(&args.out, &record)?;
        summary.records += 1;
        summary.failed += usize::from(record.is_failed());
    }
    Ok(summary)
}
