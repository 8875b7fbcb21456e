//! Document ingestion: text extraction from PDF or plain text, then
//! ligature normalization.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read `{path}`: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("text extraction failed for `{path}`: {message}")]
    Extraction { path: PathBuf, message: String },
    #[error("extractor `{0}` is not available in this build")]
    Unavailable(Extractor),
    #[error("unknown extractor `{0}` (expected a, b or text)")]
    UnknownExtractor(String),
}

/// Text extraction backend.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Extractor {
    /// pdf-extract: font-aware layout of text runs.
    PdfBackendA,
    /// lopdf: per-page content-stream text.
    PdfBackendB,
    PlainText,
}

impl Extractor {
    pub fn is_available(self) -> bool {
        match self {
            Extractor::PdfBackendA => cfg!(feature = "pdf-a"),
            Extractor::PdfBackendB => cfg!(feature = "pdf-b"),
            Extractor::PlainText => true,
        }
    }
}

impl FromStr for Extractor {
    type Err = IngestError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "a" => Ok(Extractor::PdfBackendA),
            "b" => Ok(Extractor::PdfBackendB),
            "text" => Ok(Extractor::PlainText),
            other => Err(IngestError::UnknownExtractor(other.to_owned())),
        }
    }
}

impl fmt::Display for Extractor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Extractor::PdfBackendA => "a",
            Extractor::PdfBackendB => "b",
            Extractor::PlainText => "text",
        })
    }
}

/// An ingested document. `raw_text` is kept exactly as extracted.
#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub id: String,
    pub source_path: String,
    pub raw_text: String,
    pub normalized_text: String,
    pub extractor: Extractor,
}

impl Document {
    pub fn from_text(id: impl Into<String>, text: impl Into<String>) -> Self {
        let raw_text = text.into();
        Self {
            id: id.into(),
            source_path: String::new(),
            normalized_text: normalize_ligatures(&raw_text),
            raw_text,
            extractor: Extractor::PlainText,
        }
    }

    /// Loads a `.txt` or `.pdf` file. Plain-text files ignore `pdf_extractor`.
    /// The document id is the file stem.
    pub fn load(path: &Path, pdf_extractor: Extractor) -> Result<Self, IngestError> {
        let is_pdf = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("pdf"));
        let extractor = if is_pdf { pdf_extractor } else { Extractor::PlainText };
        let raw_text = extract_text(path, extractor)?;
        Ok(Self {
            id: path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
            source_path: path.display().to_string(),
            normalized_text: normalize_ligatures(&raw_text),
            raw_text,
            extractor,
        })
    }
}

const LIGATURES: [(char, &str); 7] = [
    ('\u{FB00}', "ff"),
    ('\u{FB01}', "fi"),
    ('\u{FB02}', "fl"),
    ('\u{FB03}', "ffi"),
    ('\u{FB04}', "ffl"),
    ('\u{FB05}', "ft"),
    ('\u{FB06}', "st"),
];

fn ligature_expansion(c: char) -> Option<&'static str> {
    LIGATURES.iter().find(|(l, _)| *l == c).map(|(_, s)| *s)
}

/// Replaces the Latin typographic ligatures U+FB00..=U+FB06 with their
/// ASCII letter sequences. All other characters pass through.
pub fn normalize_ligatures(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match ligature_expansion(c) {
            Some(s) => out.push_str(s),
            None => out.push(c),
        }
    }
    out
}

/// Extracts linear text. An empty string is a valid result (for example an
/// image-only PDF).
pub fn extract_text(path: &Path, extractor: Extractor) -> Result<String, IngestError> {
    if !extractor.is_available() {
        return Err(IngestError::Unavailable(extractor));
    }
    let bytes = std::fs::read(path).map_err(|source| IngestError::Io { path: path.to_owned(), source })?;
    let extraction = |message: String| IngestError::Extraction { path: path.to_owned(), message };
    match extractor {
        Extractor::PlainText => {
            let text = String::from_utf8(bytes).map_err(|e| extraction(e.to_string()))?;
            Ok(normalize_line_endings(&text))
        }
        Extractor::PdfBackendA => pdf_a(&bytes).map_err(extraction),
        Extractor::PdfBackendB => pdf_b(&bytes).map_err(extraction),
    }
}

fn normalize_line_endings(text: &str) -> String {
    text.replace("\r\n", "\n").replace('\r', "\n")
}

#[cfg(feature = "pdf-a")]
fn pdf_a(bytes: &[u8]) -> Result<String, String> {
    // pdf-extract panics on some malformed inputs.
    std::panic::catch_unwind(|| pdf_extract::extract_text_from_mem(bytes))
        .map_err(|_| "pdf-extract panicked on this input".to_owned())?
        .map(|t| t.trim().to_owned())
        .map_err(|e| e.to_string())
}

#[cfg(not(feature = "pdf-a"))]
fn pdf_a(_: &[u8]) -> Result<String, String> {
    unreachable!("availability checked by caller")
}

#[cfg(feature = "pdf-b")]
fn pdf_b(bytes: &[u8]) -> Result<String, String> {
    let doc = lopdf::Document::load_mem(bytes).map_err(|e| e.to_string())?;
    let pages: Vec<u32> = doc.get_pages().keys().copied().collect();
    if pages.is_empty() {
        return Ok(String::new());
    }
    let mut out = String::new();
    for page in pages {
        // Pages without a text layer produce an error or nothing; both mean "no text".
        if let Ok(text) = doc.extract_text(&[page]) {
            out.push_str(&text);
        }
    }
    Ok(out.trim().to_owned())
}

#[cfg(not(feature = "pdf-b"))]
fn pdf_b(_: &[u8]) -> Result<String, String> {
    unreachable!("availability checked by caller")
}
