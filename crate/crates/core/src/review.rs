//! Instructor review decisions: an append-only JSON-lines log and the
//! export of a final classification per document.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::ontology::CategoryId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Accepted,
    Rejected,
    Added,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReviewDecision {
    pub document_id: String,
    pub category_id: CategoryId,
    pub verdict: Verdict,
    pub timestamp: DateTime<Utc>,
}

impl ReviewDecision {
    pub fn now(document_id: &str, category_id: CategoryId, verdict: Verdict) -> Self {
        Self { document_id: document_id.to_owned(), category_id, verdict, timestamp: Utc::now() }
    }
}

/// Decisions stored one JSON object per line. Earlier lines are never rewritten.
#[derive(Debug)]
pub struct DecisionLog {
    path: PathBuf,
    decisions: Vec<ReviewDecision>,
}

impl DecisionLog {
    /// Opens `path`, replaying any existing decisions. A missing file is an empty log.
    pub fn open(path: impl Into<PathBuf>) -> io::Result<Self> {
        let path = path.into();
        let mut decisions = Vec::new();
        match File::open(&path) {
            Ok(f) => {
                for (i, line) in BufReader::new(f).lines().enumerate() {
                    let line = line?;
                    if line.trim().is_empty() {
                        continue;
                    }
                    let d = serde_json::from_str(&line).map_err(|e| {
                        io::Error::new(io::ErrorKind::InvalidData, format!("{}:{}: {e}", path.display(), i + 1))
                    })?;
                    decisions.push(d);
                }
            }
            Err(e) if e.kind() == io::ErrorKind::NotFound => {}
            Err(e) => return Err(e),
        }
        Ok(Self { path, decisions })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn decisions(&self) -> &[ReviewDecision] {
        &self.decisions
    }

    pub fn append(&mut self, decision: ReviewDecision) -> io::Result<()> {
        if let Some(dir) = self.path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        let mut line = serde_json::to_string(&decision).map_err(io::Error::other)?;
        line.push('\n');
        let mut f = OpenOptions::new().create(true).append(true).open(&self.path)?;
        f.write_all(line.as_bytes())?;
        f.flush()?;
        self.decisions.push(decision);
        Ok(())
    }

    /// Final labels per document: the latest verdict for each pair wins and
    /// only accepted or added categories are kept.
    pub fn export(&self) -> BTreeMap<String, Vec<ExportedLabel>> {
        export_decisions(&self.decisions)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExportedLabel {
    pub category_id: CategoryId,
    pub verdict: Verdict,
}

/// Every reviewed document appears, possibly with no labels.
pub fn export_decisions(decisions: &[ReviewDecision]) -> BTreeMap<String, Vec<ExportedLabel>> {
    let mut latest: BTreeMap<(&str, &CategoryId), Verdict> = BTreeMap::new();
    for d in decisions {
        latest.insert((&d.document_id, &d.category_id), d.verdict);
    }
    let mut out: BTreeMap<String, Vec<ExportedLabel>> = BTreeMap::new();
    for ((doc, cat), verdict) in latest {
        let labels = out.entry(doc.to_owned()).or_default();
        if verdict != Verdict::Rejected {
            labels.push(ExportedLabel { category_id: cat.clone(), verdict });
        }
    }
    out
}

/// Drops verdicts, leaving the gold-label shape used by evaluation.
pub fn export_as_gold(export: &BTreeMap<String, Vec<ExportedLabel>>) -> BTreeMap<String, BTreeSet<CategoryId>> {
    export.iter().map(|(doc, labels)| (doc.clone(), labels.iter().map(|l| l.category_id.clone()).collect())).collect()
}
