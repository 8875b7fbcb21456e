use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use log::warn;
use tokio::sync::Semaphore;

use super::parse::{parse_ratings, parse_summary, parse_yes_no};
use super::prompt::{self, fill, numbered_list, truncate_document};
use super::transport::{ChatMessage, ChatRequest, ChatTransport, HttpTransport, TransportError};
use super::{CategoryRating, LlmEndpoint, LlmError, QueryLog, BATCH_SIZE};
use crate::ontology::{Category, CategoryContext, KnowledgeUnit};

/// A transport plus the endpoint settings used to drive it.
#[derive(Clone)]
pub struct LlmClient {
    transport: Arc<dyn ChatTransport>,
    endpoint: LlmEndpoint,
}

impl LlmClient {
    pub fn new(transport: Arc<dyn ChatTransport>, endpoint: LlmEndpoint) -> Self {
        assert!(endpoint.max_in_flight >= 1, "max_in_flight must be at least 1");
        Self { transport, endpoint }
    }

    pub fn http(endpoint: LlmEndpoint) -> Self {
        let transport = HttpTransport::new(&endpoint.base_url, endpoint.auth_token.clone());
        Self::new(Arc::new(transport), endpoint)
    }

    pub fn endpoint(&self) -> &LlmEndpoint {
        &self.endpoint
    }

    /// A fresh accounting scope with its own in-flight cap.
    pub fn scope(&self) -> QueryScope<'_> {
        QueryScope {
            client: self,
            gate: Semaphore::new(self.endpoint.max_in_flight),
            in_flight: AtomicUsize::new(0),
            max_seen: AtomicUsize::new(0),
            queries: AtomicUsize::new(0),
            retries: AtomicUsize::new(0),
            fallbacks: AtomicUsize::new(0),
        }
    }
}

enum Answer<T> {
    Parsed(T, String),
    Unparsed(String),
}

struct InFlight<'a>(&'a AtomicUsize);

impl Drop for InFlight<'_> {
    fn drop(&mut self) {
        self.0.fetch_sub(1, Ordering::SeqCst);
    }
}

/// Issues queries for one unit of work (typically one document), capping
/// concurrent requests at `max_in_flight` and counting what was sent.
pub struct QueryScope<'c> {
    client: &'c LlmClient,
    gate: Semaphore,
    in_flight: AtomicUsize,
    max_seen: AtomicUsize,
    queries: AtomicUsize,
    retries: AtomicUsize,
    fallbacks: AtomicUsize,
}

impl QueryScope<'_> {
    pub fn log(&self) -> QueryLog {
        QueryLog {
            queries_issued: self.queries.load(Ordering::SeqCst),
            retries: self.retries.load(Ordering::SeqCst),
            fallbacks: self.fallbacks.load(Ordering::SeqCst),
            max_observed_in_flight: self.max_seen.load(Ordering::SeqCst),
            ..QueryLog::default()
        }
    }

    async fn send(&self, request: &ChatRequest) -> Result<String, TransportError> {
        let _permit = self.gate.acquire().await.expect("query gate is never closed");
        let now = self.in_flight.fetch_add(1, Ordering::SeqCst) + 1;
        let _guard = InFlight(&self.in_flight);
        self.max_seen.fetch_max(now, Ordering::SeqCst);
        tokio::time::timeout(self.client.endpoint.timeout, self.client.transport.complete(request))
            .await
            .unwrap_or(Err(TransportError::Timeout))
    }

    /// Sends `prompt`, retrying with the identical prompt on transport or
    /// parse failure. Fails only when the last attempt was a transport error.
    async fn ask<T>(&self, prompt: String, parse: impl Fn(&str) -> Option<T>) -> Result<Answer<T>, LlmError> {
        self.queries.fetch_add(1, Ordering::SeqCst);
        let endpoint = &self.client.endpoint;
        let request = ChatRequest {
            model: endpoint.model_name.clone(),
            messages: vec![ChatMessage::system(prompt::SYSTEM.trim_end()), ChatMessage::user(prompt)],
            temperature: 0.0,
        };
        let attempts = endpoint.max_retries + 1;
        let mut last = Err(TransportError::Request("no attempt made".into()));
        for attempt in 0..attempts {
            if attempt > 0 {
                self.retries.fetch_add(1, Ordering::SeqCst);
            }
            match self.send(&request).await {
                Ok(raw) => match parse(&raw) {
                    Some(v) => return Ok(Answer::Parsed(v, raw)),
                    None => {
                        warn!("unparseable LLM response (attempt {}/{attempts}): {raw:?}", attempt + 1);
                        last = Ok(raw);
                    }
                },
                Err(e) => {
                    warn!("LLM request failed (attempt {}/{attempts}): {e}", attempt + 1);
                    last = Err(e);
                }
            }
        }
        match last {
            Ok(raw) => {
                self.fallbacks.fetch_add(1, Ordering::SeqCst);
                Ok(Answer::Unparsed(raw))
            }
            Err(source) => Err(LlmError::Transport { attempts, source }),
        }
    }

    fn document<'t>(&self, text: &'t str) -> Result<std::borrow::Cow<'t, str>, LlmError> {
        if text.trim().is_empty() {
            return Err(LlmError::EmptyDocument);
        }
        Ok(truncate_document(text, self.client.endpoint.doc_char_budget).0)
    }

    /// Yes/no judgement for one category. Unparseable answers count as "no".
    pub async fn classify_binary(&self, doc_text: &str, category: &Category) -> Result<bool, LlmError> {
        let doc = self.document(doc_text)?;
        let p = fill(prompt::BINARY, &[("document", &doc), ("category_text", &category.text)]);
        Ok(match self.ask(p, parse_yes_no).await? {
            Answer::Parsed(v, _) => v,
            Answer::Unparsed(raw) => {
                warn!("treating unparseable answer for `{}` as no: {raw:?}", category.id);
                false
            }
        })
    }

    /// 0-5 ratings for one to five categories in one query. An answer with
    /// the wrong shape scores every listed category 0.
    pub async fn rate_categories(
        &self,
        doc_text: &str,
        categories: &[&Category],
        context: Option<&CategoryContext>,
    ) -> Result<Vec<CategoryRating>, LlmError> {
        let n = categories.len();
        if n == 0 || n > BATCH_SIZE {
            return Err(LlmError::BatchSize(n));
        }
        let doc = self.document(doc_text)?;
        let list = numbered_list(categories.iter().map(|c| c.text.as_str()));
        let (ka, ku) = context.map_or(("", ""), |c| (c.area_title.as_str(), c.unit_title.as_str()));
        let template = match (n, context.is_some()) {
            (1, false) => prompt::RATE,
            (1, true) => prompt::RATE_CONTEXT,
            (_, false) => prompt::RATE_BATCH,
            (_, true) => prompt::RATE_CONTEXT_BATCH,
        };
        let p = fill(
            template,
            &[
                ("document", &doc),
                ("category_text", &categories[0].text),
                ("numbered_category_list", &list),
                ("ka_title", ka),
                ("ku_title", ku),
            ],
        );
        let (scores, raw) = match self.ask(p, |r| parse_ratings(r, n)).await? {
            Answer::Parsed(s, raw) => (s, raw),
            Answer::Unparsed(raw) => {
                warn!("scoring {n} categories 0 after unparseable rating: {raw:?}");
                (vec![0; n], raw)
            }
        };
        Ok(categories
            .iter()
            .zip(scores)
            .map(|(c, score)| CategoryRating { category_id: c.id.clone(), score, raw_response: raw.clone() })
            .collect())
    }

    /// A few-sentence description of a knowledge unit.
    pub async fn summarize_unit(&self, area_title: &str, unit: &KnowledgeUnit) -> Result<String, LlmError> {
        let init_error = |reason: String| LlmError::Initialization { unit: unit.id.clone(), reason };
        if unit.categories.is_empty() {
            return Err(init_error("unit has no topics or outcomes".into()));
        }
        let list = numbered_list(unit.categories.iter().map(|c| c.text.as_str()));
        let p = fill(
            prompt::SUMMARIZE,
            &[("ka_title", area_title), ("ku_title", &unit.title), ("numbered_category_list", &list)],
        );
        match self.ask(p, parse_summary).await {
            Ok(Answer::Parsed(s, _)) => Ok(s),
            Ok(Answer::Unparsed(_)) => Err(init_error("model returned an empty summary".into())),
            Err(e) => Err(init_error(e.to_string())),
        }
    }

    /// Whether any category of `unit` could match the document. Fails open:
    /// an unparseable answer keeps the unit.
    pub async fn prune_gate(&self, doc_text: &str, area_title: &str, unit: &KnowledgeUnit) -> Result<bool, LlmError> {
        let summary = unit.summary.as_deref().ok_or_else(|| LlmError::MissingSummary(unit.id.clone()))?;
        let doc = self.document(doc_text)?;
        let p = fill(
            prompt::PRUNE_GATE,
            &[("document", &doc), ("ka_title", area_title), ("ku_title", &unit.title), ("summary", summary)],
        );
        Ok(match self.ask(p, parse_yes_no).await? {
            Answer::Parsed(v, _) => v,
            Answer::Unparsed(_) => true,
        })
    }

    /// Free-form query used by the whole-ontology command.
    pub(super) async fn raw(&self, prompt: String) -> Result<String, LlmError> {
        Ok(match self.ask(prompt, |r| Some(r.to_owned())).await? {
            Answer::Parsed(r, _) | Answer::Unparsed(r) => r,
        })
    }
}
