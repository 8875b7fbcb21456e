//! In-process transport that answers from scripted rules keyed on prompt
//! content. It records every prompt and the peak number of concurrent
//! requests so tests can account for queries exactly.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use async_trait::async_trait;

use super::transport::{ChatRequest, ChatTransport, TransportError};

/// One scripted reply.
#[derive(Debug, Clone, PartialEq)]
pub enum Reply {
    Text(String),
    Fail(TransportError),
}

impl From<&str> for Reply {
    fn from(s: &str) -> Self {
        Reply::Text(s.to_owned())
    }
}

type ReplyFn = dyn Fn(&str) -> Reply + Send + Sync;

pub enum Responder {
    Fixed(Reply),
    /// Replies in order; the last one repeats once exhausted.
    Script(Vec<Reply>, AtomicUsize),
    /// Computes the reply from the full prompt content.
    Func(Box<ReplyFn>),
}

impl Responder {
    pub fn text(s: impl Into<String>) -> Self {
        Responder::Fixed(Reply::Text(s.into()))
    }

    pub fn fail() -> Self {
        Responder::Fixed(Reply::Fail(TransportError::Request("mock transport down".into())))
    }

    pub fn script<I, R>(replies: I) -> Self
    where
        I: IntoIterator<Item = R>,
        R: Into<Reply>,
    {
        let replies: Vec<Reply> = replies.into_iter().map(Into::into).collect();
        assert!(!replies.is_empty(), "script needs at least one reply");
        Responder::Script(replies, AtomicUsize::new(0))
    }

    pub fn func(f: impl Fn(&str) -> String + Send + Sync + 'static) -> Self {
        Responder::Func(Box::new(move |p| Reply::Text(f(p))))
    }

    fn reply(&self, prompt: &str) -> Reply {
        match self {
            Responder::Fixed(r) => r.clone(),
            Responder::Script(replies, next) => {
                let i = next.fetch_add(1, Ordering::SeqCst);
                replies[i.min(replies.len() - 1)].clone()
            }
            Responder::Func(f) => f(prompt),
        }
    }
}

struct Rule {
    pattern: String,
    responder: Responder,
}

/// Scripted [`ChatTransport`]. Rules are tried in insertion order; the
/// first whose pattern occurs in the prompt answers.
pub struct MockTransport {
    rules: Vec<Rule>,
    fallback: Responder,
    latency: Duration,
    prompts: Mutex<Vec<String>>,
    in_flight: AtomicUsize,
    max_in_flight: AtomicUsize,
}

impl Default for MockTransport {
    fn default() -> Self {
        Self::new()
    }
}

impl MockTransport {
    /// Answers "0" to anything not matched by a rule.
    pub fn new() -> Self {
        Self {
            rules: Vec::new(),
            fallback: Responder::text("0"),
            latency: Duration::ZERO,
            prompts: Mutex::new(Vec::new()),
            in_flight: AtomicUsize::new(0),
            max_in_flight: AtomicUsize::new(0),
        }
    }

    pub fn on(mut self, pattern: impl Into<String>, responder: Responder) -> Self {
        self.rules.push(Rule { pattern: pattern.into(), responder });
        self
    }

    pub fn otherwise(mut self, responder: Responder) -> Self {
        self.fallback = responder;
        self
    }

    pub fn with_latency(mut self, latency: Duration) -> Self {
        self.latency = latency;
        self
    }

    pub fn into_arc(self) -> Arc<Self> {
        Arc::new(self)
    }

    pub fn call_count(&self) -> usize {
        self.prompts.lock().unwrap().len()
    }

    pub fn prompts(&self) -> Vec<String> {
        self.prompts.lock().unwrap().clone()
    }

    pub fn max_observed_in_flight(&self) -> usize {
        self.max_in_flight.load(Ordering::SeqCst)
    }
}

struct InFlight<'a>(&'a AtomicUsize);

impl Drop for InFlight<'_> {
    fn drop(&mut self) {
        self.0.fetch_sub(1, Ordering::SeqCst);
    }
}

#[async_trait]
impl ChatTransport for MockTransport {
    async fn complete(&self, request: &ChatRequest) -> Result<String, TransportError> {
        let now = self.in_flight.fetch_add(1, Ordering::SeqCst) + 1;
        let _guard = InFlight(&self.in_flight);
        self.max_in_flight.fetch_max(now, Ordering::SeqCst);
        let prompt = request.content();
        self.prompts.lock().unwrap().push(prompt.clone());
        if !self.latency.is_zero() {
            tokio::time::sleep(self.latency).await;
        }
        let responder =
            self.rules.iter().find(|r| prompt.contains(&r.pattern)).map_or(&self.fallback, |r| &r.responder);
        match responder.reply(&prompt) {
            Reply::Text(t) => Ok(t),
            Reply::Fail(e) => Err(e),
        }
    }
}
