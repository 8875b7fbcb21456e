//! Tokenization, part-of-speech tagging and base noun phrase chunking.
//!
//! A base noun phrase is a maximal run of tokens whose tags match
//! `(J.*)* (N.*)+` over Penn-Treebank-style tags.

use std::collections::{BTreeMap, HashSet};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Byte span into the source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    pub tag: String,
    pub span: Span,
}

impl Token {
    pub fn new(text: impl Into<String>, tag: impl Into<String>, span: Span) -> Self {
        Self { text: text.into(), tag: tag.into(), span }
    }
}

/// `JJ`, `JJR`, `JJS`.
pub fn is_adjective_tag(tag: &str) -> bool {
    matches!(tag, "JJ" | "JJR" | "JJS")
}

/// `NN`, `NNS`, `NNP`, `NNPS`.
pub fn is_noun_tag(tag: &str) -> bool {
    matches!(tag, "NN" | "NNS" | "NNP" | "NNPS")
}

const PUNCT: &[char] = &['.', ',', ';', ':', '!', '?', '(', ')', '[', ']', '{', '}', '"', '\''];

/// Splits on whitespace and detaches leading/trailing punctuation marks as
/// single-character tokens. Inner hyphens and punctuation stay in the word.
pub fn tokenize(text: &str) -> Vec<(String, Span)> {
    let mut out = Vec::new();
    let mut offset = 0;
    for chunk in text.split_inclusive(char::is_whitespace) {
        let word = chunk.trim_end_matches(char::is_whitespace);
        let base = offset;
        offset += chunk.len();
        if word.is_empty() {
            continue;
        }
        let core_start = word.len() - word.trim_start_matches(PUNCT).len();
        let core_end = word.trim_end_matches(PUNCT).len().max(core_start);
        for (i, c) in word[..core_start].char_indices() {
            out.push((c.to_string(), Span { start: base + i, end: base + i + c.len_utf8() }));
        }
        if core_end > core_start {
            out.push((word[core_start..core_end].to_owned(), Span { start: base + core_start, end: base + core_end }));
        }
        for (i, c) in word[core_end..].char_indices() {
            let at = base + core_end + i;
            out.push((c.to_string(), Span { start: at, end: at + c.len_utf8() }));
        }
    }
    out
}

/// Assigns one part-of-speech tag per token.
pub trait Tagger: Send + Sync {
    fn tag(&self, tokens: &[(String, Span)]) -> Vec<Token>;
}

/// Deterministic rule tagger: closed-class lexicon, a small open-class
/// lexicon, capitalization, suffix rules, and a noun fallback.
#[derive(Debug, Default, Clone, Copy)]
pub struct RuleTagger;

struct Lexicon {
    closed: BTreeMap<&'static str, &'static str>,
    nouns: HashSet<&'static str>,
    adjectives: HashSet<&'static str>,
    verbs: BTreeMap<&'static str, &'static str>,
}

fn lexicon() -> &'static Lexicon {
    static LEX: OnceLock<Lexicon> = OnceLock::new();
    LEX.get_or_init(|| {
        let mut closed = BTreeMap::new();
        for w in [
            "the", "a", "an", "this", "that", "these", "those", "each", "every", "some", "any", "no", "all", "both",
            "either", "neither", "another",
        ] {
            closed.insert(w, "DT");
        }
        for w in ["and", "or", "but", "nor", "yet", "so"] {
            closed.insert(w, "CC");
        }
        for w in [
            "of", "in", "on", "at", "by", "for", "with", "from", "into", "onto", "about", "over", "under", "between",
            "among", "through", "during", "before", "after", "without", "within", "against", "via", "per", "as",
            "than", "like", "if", "because", "while", "whether", "upon", "across", "behind", "beyond", "toward",
            "towards",
        ] {
            closed.insert(w, "IN");
        }
        for w in ["i", "you", "he", "she", "it", "we", "they", "me", "him", "her", "us", "them", "one"] {
            closed.insert(w, "PRP");
        }
        for w in ["my", "your", "his", "its", "our", "their"] {
            closed.insert(w, "PRP$");
        }
        for w in ["who", "whom", "which", "what", "whose"] {
            closed.insert(w, "WP");
        }
        for w in ["when", "where", "why", "how"] {
            closed.insert(w, "WRB");
        }
        for w in ["can", "could", "may", "might", "must", "shall", "should", "will", "would"] {
            closed.insert(w, "MD");
        }
        for w in
            ["not", "very", "also", "too", "then", "there", "here", "often", "always", "never", "just", "only", "now"]
        {
            closed.insert(w, "RB");
        }
        closed.insert("to", "TO");

        let verbs = BTreeMap::from([
            ("is", "VBZ"),
            ("are", "VBP"),
            ("was", "VBD"),
            ("were", "VBD"),
            ("be", "VB"),
            ("been", "VBN"),
            ("being", "VBG"),
            ("am", "VBP"),
            ("has", "VBZ"),
            ("have", "VBP"),
            ("had", "VBD"),
            ("do", "VBP"),
            ("does", "VBZ"),
            ("did", "VBD"),
            ("use", "VB"),
            ("uses", "VBZ"),
            ("make", "VB"),
            ("makes", "VBZ"),
            ("explain", "VB"),
            ("describe", "VB"),
            ("implement", "VB"),
            ("apply", "VB"),
            ("compare", "VB"),
            ("define", "VB"),
            ("discuss", "VB"),
            ("write", "VB"),
            ("identify", "VB"),
            ("design", "VB"),
            ("analyze", "VB"),
            ("evaluate", "VB"),
            ("create", "VB"),
            ("contrast", "VB"),
            ("illustrate", "VB"),
            ("demonstrate", "VB"),
            ("develop", "VB"),
            ("construct", "VB"),
            ("determine", "VB"),
            ("perform", "VB"),
            ("returns", "VBZ"),
            ("takes", "VBZ"),
            ("gives", "VBZ"),
            ("shows", "VBZ"),
            ("contains", "VBZ"),
        ]);

        let nouns = HashSet::from([
            "programming",
            "computing",
            "string",
            "thing",
            "sorting",
            "hashing",
            "scheduling",
            "networking",
            "encoding",
            "parsing",
            "testing",
            "debugging",
            "modeling",
            "engineering",
            "learning",
            "processing",
            "threading",
            "caching",
            "paging",
            "routing",
            "indexing",
            "searching",
            "matching",
            "reasoning",
            "rendering",
            "logging",
            "mapping",
            "padding",
            "ring",
            "spring",
            "king",
            "building",
            "meaning",
            "reading",
            "writing",
            "naming",
            "timing",
            "thread",
            "need",
            "seed",
            "speed",
            "feed",
            "bed",
            "red",
            "shed",
            "class",
            "process",
            "access",
            "address",
            "analysis",
            "axis",
            "basis",
            "bus",
            "status",
            "virus",
            "thesis",
            "hypothesis",
            "syntax",
            "data",
            "series",
            "apparatus",
            "corpus",
            "calculus",
            "consensus",
            "campus",
            "radius",
            "bonus",
            "focus",
            "signal",
            "terminal",
            "interval",
            "protocol",
            "symbol",
            "tool",
            "pool",
            "loop",
            "goal",
            "portal",
            "proposal",
            "approval",
            "arrival",
            "removal",
            "retrieval",
            "traversal",
            "trial",
            "tutorial",
            "material",
            "manual",
            "initiative",
            "derivative",
            "primitive",
            "directive",
            "objective",
            "alternative",
            "archive",
            "drive",
            "hive",
            "capital",
            "potential",
            "literal",
            "ordinal",
            "cardinal",
            "journal",
            "denial",
            "rival",
            "total",
            "deal",
            "hospital",
            "fan",
        ]);

        let adjectives = HashSet::from([
            "efficient",
            "dynamic",
            "static",
            "basic",
            "abstract",
            "linear",
            "binary",
            "recursive",
            "iterative",
            "parallel",
            "concurrent",
            "distributed",
            "discrete",
            "formal",
            "logical",
            "numerical",
            "generic",
            "simple",
            "complex",
            "main",
            "common",
            "different",
            "same",
            "other",
            "new",
            "old",
            "good",
            "bad",
            "high",
            "low",
            "large",
            "small",
            "big",
            "fast",
            "slow",
            "first",
            "last",
            "next",
            "previous",
            "many",
            "few",
            "several",
            "various",
            "important",
            "key",
            "major",
            "minor",
            "general",
            "specific",
            "public",
            "private",
            "secure",
            "safe",
            "random",
            "optimal",
            "greedy",
            "deterministic",
            "nondeterministic",
            "asymptotic",
            "exponential",
            "polynomial",
            "logarithmic",
            "quadratic",
            "constant",
            "virtual",
            "physical",
            "digital",
            "analog",
            "sequential",
            "relational",
            "functional",
            "procedural",
            "imperative",
            "declarative",
            "visual",
            "graphical",
            "lexical",
            "semantic",
            "syntactic",
            "computational",
            "theoretical",
            "practical",
            "empirical",
            "social",
            "ethical",
            "legal",
            "professional",
            "multiple",
            "single",
            "double",
            "open",
            "closed",
            "shared",
            "local",
            "global",
            "remote",
            "internal",
            "external",
            "primary",
            "secondary",
            "fundamental",
            "elementary",
            "advanced",
            "modern",
            "classic",
            "classical",
            "standard",
            "typical",
            "normal",
            "regular",
            "real",
            "true",
            "false",
            "full",
            "empty",
            "best",
            "worst",
            "average",
            "better",
            "worse",
            "higher",
            "lower",
            "larger",
            "smaller",
            "greater",
            "linked",
            "directed",
            "undirected",
            "weighted",
            "unweighted",
            "balanced",
            "sorted",
            "unsorted",
            "nested",
            "embedded",
            "connected",
            "spanning",
            "minimum",
            "maximum",
            "shortest",
            "longest",
            "object-oriented",
        ]);

        Lexicon { closed, nouns, adjectives, verbs }
    })
}

const ADJ_SUFFIXES: [&str; 4] = ["ous", "ful", "ive", "al"];

/// Tokens after which capitalization says nothing about proper nouns.
fn is_sentence_end(tok: &str) -> bool {
    matches!(tok, "." | "!" | "?" | ":")
}

impl RuleTagger {
    fn tag_word(&self, word: &str, sentence_start: bool) -> &'static str {
        if word.chars().all(|c| PUNCT.contains(&c)) {
            return match word {
                "." | "!" | "?" => ".",
                "," => ",",
                ":" | ";" => ":",
                "(" | "[" | "{" => "(",
                ")" | "]" | "}" => ")",
                _ => "''",
            };
        }
        if !word.chars().any(char::is_alphanumeric) {
            return "SYM";
        }
        if word.chars().all(|c| c.is_ascii_digit() || c == '.' || c == ',') {
            return "CD";
        }
        let lex = lexicon();
        let lower = word.to_lowercase();
        if let Some(tag) = lex.closed.get(lower.as_str()) {
            return tag;
        }
        if !sentence_start && word.chars().next().is_some_and(char::is_uppercase) {
            return "NNP";
        }
        let w = lower.as_str();
        if lex.nouns.contains(w) {
            return "NN";
        }
        if lex.adjectives.contains(w) {
            return "JJ";
        }
        if let Some(tag) = lex.verbs.get(w) {
            return tag;
        }
        if w.len() > 4 && w.ends_with("ing") {
            return "VBG";
        }
        if w.len() > 3 && w.ends_with("ed") {
            return "VBN";
        }
        if w.len() > 3 && w.ends_with("ly") {
            return "RB";
        }
        if w.len() > 4 && ADJ_SUFFIXES.iter().any(|s| w.ends_with(s)) {
            return "JJ";
        }
        if w.len() > 3 && w.ends_with('s') && !w.ends_with("ss") && !w.ends_with("us") && !w.ends_with("is") {
            return "NNS";
        }
        "NN"
    }
}

impl Tagger for RuleTagger {
    fn tag(&self, tokens: &[(String, Span)]) -> Vec<Token> {
        let mut sentence_start = true;
        tokens
            .iter()
            .map(|(text, span)| {
                let tag = self.tag_word(text, sentence_start);
                sentence_start = is_sentence_end(text);
                Token::new(text.clone(), tag, *span)
            })
            .collect()
    }
}

/// Occurrence counts of phrase keys. Keys are lowercase.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhraseMultiset {
    counts: BTreeMap<String, u32>,
}

impl PhraseMultiset {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, key: impl Into<String>, n: u32) {
        if n > 0 {
            *self.counts.entry(key.into()).or_insert(0) += n;
        }
    }

    pub fn count(&self, key: &str) -> u32 {
        self.counts.get(key).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u32)> {
        self.counts.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.counts.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.counts.values().map(|&v| u64::from(v)).sum()
    }
}

impl<K: Into<String>> FromIterator<(K, u32)> for PhraseMultiset {
    fn from_iter<I: IntoIterator<Item = (K, u32)>>(iter: I) -> Self {
        let mut m = Self::new();
        for (k, n) in iter {
            m.add(k, n);
        }
        m
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasePhrase {
    pub tokens: Vec<Token>,
    pub key: String,
}

/// Token index ranges `[start, end)` of base noun phrases, leftmost-longest
/// and non-overlapping.
pub fn bnp_ranges<S: AsRef<str>>(tags: &[S]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < tags.len() {
        let mut j = i;
        while j < tags.len() && is_adjective_tag(tags[j].as_ref()) {
            j += 1;
        }
        let mut k = j;
        while k < tags.len() && is_noun_tag(tags[k].as_ref()) {
            k += 1;
        }
        if k > j {
            out.push((i, k));
            i = k;
        } else {
            // No noun after this adjective run; nothing can start inside it either.
            i = j.max(i + 1);
        }
    }
    out
}

pub fn phrase_key(tokens: &[Token]) -> String {
    tokens.iter().map(|t| t.text.to_lowercase()).collect::<Vec<_>>().join(" ")
}

/// Base noun phrases of one tagged sentence, in order.
pub fn base_phrases(tagged: &[Token]) -> Vec<BasePhrase> {
    let tags: Vec<&str> = tagged.iter().map(|t| t.tag.as_str()).collect();
    bnp_ranges(&tags)
        .into_iter()
        .map(|(s, e)| {
            let tokens = tagged[s..e].to_vec();
            BasePhrase { key: phrase_key(&tokens), tokens }
        })
        .collect()
}

pub fn extract_bnps(tagged: &[Token]) -> PhraseMultiset {
    base_phrases(tagged).into_iter().map(|p| (p.key, 1)).collect()
}

/// Tokenizes, tags and chunks `text`.
pub fn text_phrases(text: &str, tagger: &dyn Tagger) -> PhraseMultiset {
    extract_bnps(&tagger.tag(&tokenize(text)))
}

/// Distinct phrase keys of `text` in first-occurrence order.
pub fn distinct_phrases(text: &str, tagger: &dyn Tagger) -> Vec<String> {
    let mut seen = HashSet::new();
    base_phrases(&tagger.tag(&tokenize(text)))
        .into_iter()
        .filter_map(|p| seen.insert(p.key.clone()).then_some(p.key))
        .collect()
}

#[derive(Debug, Error)]
#[error("pre-tagged input line {line}: expected `text<TAB>tag`")]
pub struct PretaggedError {
    pub line: usize,
}

/// Parses the pre-tagged format: one `text<TAB>tag` per line, blank line
/// between sentences. Spans index into the tokens joined by single spaces.
pub fn parse_pretagged(input: &str) -> Result<Vec<Vec<Token>>, PretaggedError> {
    let mut sentences = Vec::new();
    let mut current = Vec::new();
    let mut offset = 0;
    for (n, line) in input.lines().enumerate() {
        if line.trim().is_empty() {
            if !current.is_empty() {
                sentences.push(std::mem::take(&mut current));
            }
            continue;
        }
        let (text, tag) = line
            .split_once('\t')
            .filter(|(t, g)| !t.is_empty() && !g.trim().is_empty())
            .ok_or(PretaggedError { line: n + 1 })?;
        current.push(Token::new(text, tag.trim(), Span { start: offset, end: offset + text.len() }));
        offset += text.len() + 1;
    }
    if !current.is_empty() {
        sentences.push(current);
    }
    Ok(sentences)
}

/// Phrase multiset of pre-tagged input; phrases never cross sentence breaks.
pub fn pretagged_phrases(sentences: &[Vec<Token>]) -> PhraseMultiset {
    let mut m = PhraseMultiset::new();
    for s in sentences {
        for (k, n) in extract_bnps(s).iter() {
            m.add(k, n);
        }
    }
    m
}
