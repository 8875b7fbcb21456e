//! Method roster and the on-disk results schema shared by every method.

use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::embedding::MatchMode;
use crate::llm::{LlmMethod, QueryLog};
use crate::rank::{RankedClassification, RankedEntry};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Count { weighted: bool },
    Embedding { weighted: bool, mode: MatchMode },
    Llm(LlmMethod),
}

impl Method {
    pub fn all() -> Vec<Method> {
        let mut v = vec![Method::Count { weighted: false }, Method::Count { weighted: true }];
        for weighted in [false, true] {
            for mode in [MatchMode::All, MatchMode::Best] {
                v.push(Method::Embedding { weighted, mode });
            }
        }
        v.extend(LlmMethod::ALL.map(Method::Llm));
        v
    }

    pub fn name(&self) -> String {
        let w = |weighted: bool| if weighted { "weighted" } else { "unweighted" };
        match *self {
            Method::Count { weighted } => format!("count-{}", w(weighted)),
            Method::Embedding { weighted, mode } => format!(
                "embedding-{}-{}",
                w(weighted),
                match mode {
                    MatchMode::All => "all",
                    MatchMode::Best => "best",
                }
            ),
            Method::Llm(m) => m.name().to_owned(),
        }
    }

    pub fn needs_embeddings(&self) -> bool {
        matches!(self, Method::Embedding { .. })
    }

    pub fn is_llm(&self) -> bool {
        matches!(self, Method::Llm(_))
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::all().into_iter().find(|m| m.name() == s).ok_or_else(|| format!("unknown method `{s}`"))
    }
}

/// One persisted classification. `error` is set when the run failed for
/// this document, in which case `entries` is empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub document_id: String,
    pub method: String,
    pub k: usize,
    pub entries: Vec<RankedEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub query_log: Option<QueryLog>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl ResultRecord {
    pub fn failed(document_id: &str, method: &str, k: usize, error: impl fmt::Display) -> Self {
        Self {
            document_id: document_id.to_owned(),
            method: method.to_owned(),
            k,
            entries: Vec::new(),
            query_log: None,
            error: Some(error.to_string()),
        }
    }

    pub fn is_failed(&self) -> bool {
        self.error.is_some()
    }

    pub fn ranked(&self) -> RankedClassification {
        RankedClassification {
            document_id: self.document_id.clone(),
            method: self.method.clone(),
            k: self.k,
            entries: self.entries.clone(),
        }
    }
}

impl From<RankedClassification> for ResultRecord {
    fn from(r: RankedClassification) -> Self {
        Self { document_id: r.document_id, method: r.method, k: r.k, entries: r.entries, query_log: None, error: None }
    }
}

/// `<dir>/<method>/<document_id>.json`
pub fn record_path(dir: &Path, method: &str, document_id: &str) -> PathBuf {
    dir.join(method).join(format!("{document_id}.json"))
}

pub fn write_record(dir: &Path, record: &ResultRecord) -> io::Result<PathBuf> {
    let path = record_path(dir, &record.method, &record.document_id);
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut json = serde_json::to_string_pretty(record).map_err(io::Error::other)?;
    json.push('\n');
    fs::write(&path, json)?;
    Ok(path)
}

/// Reads every `*.json` record under `dir/<method>/`, sorted by method then
/// document id.
pub fn load_results(dir: &Path) -> io::Result<Vec<ResultRecord>> {
    let mut out = Vec::new();
    for method_dir in fs::read_dir(dir)? {
        let method_dir = method_dir?.path();
        if !method_dir.is_dir() {
            continue;
        }
        for file in fs::read_dir(&method_dir)? {
            let file = file?.path();
            if file.extension().is_some_and(|e| e == "json") {
                let bytes = fs::read(&file)?;
                let rec: ResultRecord = serde_json::from_slice(&bytes)
                    .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, format!("{}: {e}", file.display())))?;
                out.push(rec);
            }
        }
    }
    out.sort_by(|a, b| (&a.method, &a.document_id).cmp(&(&b.method, &b.document_id)));
    Ok(out)
}
