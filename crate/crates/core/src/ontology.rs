//! Curriculum guideline tree: knowledge areas, knowledge units and the
//! topics / learning outcomes inside them.
//!
//! The on-disk format is a JSON tree:
//!
//! ```json
//! {"name": "...", "areas": [{"id": "AL", "title": "Algorithms",
//!   "units": [{"id": "AL-1", "title": "Sorting", "items": [
//!     {"id": "AL-1-t1", "kind": "topic", "text": "Quicksort"},
//!     {"id": "AL-1-o1", "kind": "outcome", "text": "...", "level": "usage"}]}]}]}
//! ```
//!
//! Knowledge-area and knowledge-unit title rows are exposed as
//! [`CategoryKind::Heading`] categories. They count toward
//! [`Guideline::total_category_count`] but are never rated.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Identifier of any node in the guideline (area, unit or item).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CategoryId(pub String);

impl CategoryId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for CategoryId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for CategoryId {
    fn from(s: &str) -> Self {
        Self(s.to_owned())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CategoryKind {
    Topic,
    Outcome,
    Heading,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutcomeLevel {
    Familiarity,
    Usage,
    Assessment,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Category {
    pub id: CategoryId,
    pub kind: CategoryKind,
    pub text: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outcome_level: Option<OutcomeLevel>,
}

impl Category {
    pub fn is_rateable(&self) -> bool {
        self.kind != CategoryKind::Heading
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KnowledgeUnit {
    pub id: CategoryId,
    pub title: String,
    pub categories: Vec<Category>,
    /// Short description generated by an LLM; only used by the pruning method.
    pub summary: Option<String>,
}

impl KnowledgeUnit {
    pub fn heading(&self) -> Category {
        heading(&self.id, &self.title)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KnowledgeArea {
    pub id: CategoryId,
    pub title: String,
    pub units: Vec<KnowledgeUnit>,
}

impl KnowledgeArea {
    pub fn heading(&self) -> Category {
        heading(&self.id, &self.title)
    }
}

fn heading(id: &CategoryId, title: &str) -> Category {
    Category { id: id.clone(), kind: CategoryKind::Heading, text: title.to_owned(), outcome_level: None }
}

/// Enclosing titles of a category, interpolated verbatim into context prompts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CategoryContext {
    pub area_title: String,
    pub unit_title: String,
}

#[derive(Debug, Error)]
pub enum OntologyError {
    #[error("malformed guideline at `{path}`: {message}")]
    Parse { path: String, message: String },
    #[error("duplicate identifier `{0}` in guideline")]
    DuplicateId(CategoryId),
    #[error("invalid guideline entry `{id}`: {reason}")]
    Invalid { id: CategoryId, reason: String },
    #[error("unknown category `{0}`")]
    UnknownId(CategoryId),
    #[error("`{0}` is a knowledge area and has no enclosing context")]
    AreaHasNoContext(CategoryId),
}

#[derive(Debug, Clone, Copy)]
enum NodeRef {
    Area(usize),
    Unit(usize, usize),
    Item(usize, usize, usize),
}

/// A parsed guideline. Immutable once built, apart from [`Guideline::set_summary`]
/// which is meant for a setup phase before the guideline is shared.
#[derive(Debug, Clone)]
pub struct Guideline {
    pub name: String,
    areas: Vec<KnowledgeArea>,
    lookup: HashMap<CategoryId, NodeRef>,
}

impl PartialEq for Guideline {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.areas == other.areas
    }
}

impl Guideline {
    /// Builds a guideline from already-constructed areas, validating ids.
    pub fn new(name: impl Into<String>, areas: Vec<KnowledgeArea>) -> Result<Self, OntologyError> {
        let mut lookup = HashMap::new();
        let mut insert = |id: &CategoryId, node: NodeRef| {
            if lookup.insert(id.clone(), node).is_some() {
                Err(OntologyError::DuplicateId(id.clone()))
            } else {
                Ok(())
            }
        };
        for (a, area) in areas.iter().enumerate() {
            if area.title.trim().is_empty() {
                return Err(OntologyError::Invalid {
                    id: area.id.clone(),
                    reason: "knowledge area title is empty".into(),
                });
            }
            insert(&area.id, NodeRef::Area(a))?;
            for (u, unit) in area.units.iter().enumerate() {
                insert(&unit.id, NodeRef::Unit(a, u))?;
                for (i, cat) in unit.categories.iter().enumerate() {
                    let level_ok = match cat.kind {
                        CategoryKind::Outcome => cat.outcome_level.is_some(),
                        CategoryKind::Topic => cat.outcome_level.is_none(),
                        CategoryKind::Heading => false,
                    };
                    if !level_ok {
                        return Err(OntologyError::Invalid {
                            id: cat.id.clone(),
                            reason: "outcome level must be given exactly for outcomes, and items cannot be headings"
                                .into(),
                        });
                    }
                    insert(&cat.id, NodeRef::Item(a, u, i))?;
                }
            }
        }
        Ok(Self { name: name.into(), areas, lookup })
    }

    pub fn areas(&self) -> &[KnowledgeArea] {
        &self.areas
    }

    /// Knowledge units in traversal order, with their enclosing area.
    pub fn units(&self) -> impl Iterator<Item = (&KnowledgeArea, &KnowledgeUnit)> {
        self.areas.iter().flat_map(|a| a.units.iter().map(move |u| (a, u)))
    }

    /// All topics and outcomes in traversal order. This order is the global
    /// tie-break order used when ranking.
    pub fn rateable_categories(&self) -> impl Iterator<Item = &Category> {
        self.units().flat_map(|(_, u)| u.categories.iter())
    }

    pub fn rateable_count(&self) -> usize {
        self.rateable_categories().count()
    }

    pub fn heading_count(&self) -> usize {
        self.areas.iter().map(|a| 1 + a.units.len()).sum()
    }

    /// Headings plus rateable categories.
    pub fn total_category_count(&self) -> usize {
        self.heading_count() + self.rateable_count()
    }

    pub fn unit_count(&self) -> usize {
        self.areas.iter().map(|a| a.units.len()).sum()
    }

    pub fn contains(&self, id: &CategoryId) -> bool {
        self.lookup.contains_key(id)
    }

    /// Returns any category (including headings) by id.
    pub fn category(&self, id: &CategoryId) -> Option<Category> {
        match *self.lookup.get(id)? {
            NodeRef::Area(a) => Some(self.areas[a].heading()),
            NodeRef::Unit(a, u) => Some(self.areas[a].units[u].heading()),
            NodeRef::Item(a, u, i) => Some(self.areas[a].units[u].categories[i].clone()),
        }
    }

    /// Position of a rateable category in traversal order.
    pub fn rateable_index(&self) -> HashMap<&CategoryId, usize> {
        self.rateable_categories().enumerate().map(|(i, c)| (&c.id, i)).collect()
    }

    /// Titles of the knowledge area and unit enclosing `id`. A unit id resolves
    /// to its own title and its parent area.
    pub fn context_of(&self, id: &CategoryId) -> Result<CategoryContext, OntologyError> {
        let (a, u) = match self.lookup.get(id) {
            None => return Err(OntologyError::UnknownId(id.clone())),
            Some(NodeRef::Area(_)) => return Err(OntologyError::AreaHasNoContext(id.clone())),
            Some(&NodeRef::Unit(a, u)) | Some(&NodeRef::Item(a, u, _)) => (a, u),
        };
        Ok(CategoryContext {
            area_title: self.areas[a].title.clone(),
            unit_title: self.areas[a].units[u].title.clone(),
        })
    }

    pub fn unit(&self, id: &CategoryId) -> Option<&KnowledgeUnit> {
        match *self.lookup.get(id)? {
            NodeRef::Unit(a, u) => Some(&self.areas[a].units[u]),
            _ => None,
        }
    }

    pub fn set_summary(&mut self, unit: &CategoryId, summary: String) -> Result<(), OntologyError> {
        match self.lookup.get(unit) {
            Some(&NodeRef::Unit(a, u)) => {
                self.areas[a].units[u].summary = Some(summary);
                Ok(())
            }
            Some(_) => Err(OntologyError::Invalid { id: unit.clone(), reason: "not a knowledge unit".into() }),
            None => Err(OntologyError::UnknownId(unit.clone())),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&RawGuideline::from(self)).expect("guideline serializes")
    }
}

/// Parses a guideline file.
pub fn parse_guideline(bytes: &[u8]) -> Result<Guideline, OntologyError> {
    let de = &mut serde_json::Deserializer::from_slice(bytes);
    let raw: RawGuideline = serde_path_to_error::deserialize(de)
        .map_err(|e| OntologyError::Parse { path: e.path().to_string(), message: e.inner().to_string() })?;
    raw.try_into()
}

// Wire format.

#[derive(Serialize, Deserialize)]
struct RawGuideline {
    name: String,
    #[serde(default)]
    areas: Vec<RawArea>,
}

#[derive(Serialize, Deserialize)]
struct RawArea {
    id: CategoryId,
    title: String,
    #[serde(default)]
    units: Vec<RawUnit>,
}

#[derive(Serialize, Deserialize)]
struct RawUnit {
    id: CategoryId,
    title: String,
    #[serde(default)]
    items: Vec<RawItem>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    summary: Option<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum RawKind {
    Topic,
    Outcome,
}

#[derive(Serialize, Deserialize)]
struct RawItem {
    id: CategoryId,
    kind: RawKind,
    text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    level: Option<OutcomeLevel>,
}

impl TryFrom<RawGuideline> for Guideline {
    type Error = OntologyError;

    fn try_from(raw: RawGuideline) -> Result<Self, Self::Error> {
        let areas = raw
            .areas
            .into_iter()
            .map(|a| KnowledgeArea {
                id: a.id,
                title: a.title,
                units: a
                    .units
                    .into_iter()
                    .map(|u| KnowledgeUnit {
                        id: u.id,
                        title: u.title,
                        summary: u.summary,
                        categories: u
                            .items
                            .into_iter()
                            .map(|i| Category {
                                id: i.id,
                                kind: match i.kind {
                                    RawKind::Topic => CategoryKind::Topic,
                                    RawKind::Outcome => CategoryKind::Outcome,
                                },
                                text: i.text,
                                outcome_level: i.level,
                            })
                            .collect(),
                    })
                    .collect(),
            })
            .collect();
        Guideline::new(raw.name, areas)
    }
}

impl From<&Guideline> for RawGuideline {
    fn from(g: &Guideline) -> Self {
        RawGuideline {
            name: g.name.clone(),
            areas: g
                .areas
                .iter()
                .map(|a| RawArea {
                    id: a.id.clone(),
                    title: a.title.clone(),
                    units: a
                        .units
                        .iter()
                        .map(|u| RawUnit {
                            id: u.id.clone(),
                            title: u.title.clone(),
                            summary: u.summary.clone(),
                            items: u
                                .categories
                                .iter()
                                .map(|c| RawItem {
                                    id: c.id.clone(),
                                    kind: match c.kind {
                                        CategoryKind::Outcome => RawKind::Outcome,
                                        _ => RawKind::Topic,
                                    },
                                    text: c.text.clone(),
                                    level: c.outcome_level,
                                })
                                .collect(),
                        })
                        .collect(),
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIXTURE: &str = r#"{
        "name": "fixture",
        "areas": [{"id": "AL", "title": "Algorithms", "units": [
            {"id": "AL-S", "title": "Sorting", "items": [
                {"id": "t1", "kind": "topic", "text": "Quicksort"},
                {"id": "t2", "kind": "topic", "text": "Merge sort"}
            ]}
        ]}]
    }"#;

    #[test]
    fn empty_areas_has_no_categories() {
        let g = parse_guideline(br#"{"name": "x", "areas": []}"#).unwrap();
        assert_eq!(g.total_category_count(), 0);
        assert_eq!(g.rateable_categories().count(), 0);
    }

    #[test]
    fn fixture_counts() {
        let g = parse_guideline(FIXTURE.as_bytes()).unwrap();
        assert_eq!(g.rateable_count(), 2);
        assert_eq!(g.heading_count(), 2);
        assert_eq!(g.total_category_count(), 4);
        let ids: Vec<_> = g.rateable_categories().map(|c| c.id.as_str()).collect();
        assert_eq!(ids, ["t1", "t2"]);
    }

    #[test]
    fn mixed_kinds_keep_file_order() {
        let g = parse_guideline(
            br#"{"name": "x", "areas": [{"id": "A", "title": "A", "units": [{"id": "U", "title": "U", "items": [
                {"id": "o1", "kind": "outcome", "text": "Explain", "level": "familiarity"},
                {"id": "t1", "kind": "topic", "text": "Topic"}
            ]}]}]}"#,
        )
        .unwrap();
        let ids: Vec<_> = g.rateable_categories().map(|c| c.id.as_str()).collect();
        assert_eq!(ids, ["o1", "t1"]);
    }

    #[test]
    fn context_lookup() {
        let g = parse_guideline(FIXTURE.as_bytes()).unwrap();
        let ctx = g.context_of(&"t1".into()).unwrap();
        assert_eq!(ctx.area_title, "Algorithms");
        assert_eq!(ctx.unit_title, "Sorting");
        let ctx = g.context_of(&"AL-S".into()).unwrap();
        assert_eq!((ctx.area_title.as_str(), ctx.unit_title.as_str()), ("Algorithms", "Sorting"));
        assert!(matches!(g.context_of(&"nope".into()), Err(OntologyError::UnknownId(_))));
        assert!(matches!(g.context_of(&"AL".into()), Err(OntologyError::AreaHasNoContext(_))));
    }

    #[test]
    fn duplicate_id_is_named() {
        let err = parse_guideline(
            br#"{"name": "x", "areas": [{"id": "A", "title": "A", "units": [{"id": "U", "title": "U", "items": [
                {"id": "A", "kind": "topic", "text": "clash"}
            ]}]}]}"#,
        )
        .unwrap_err();
        assert!(matches!(&err, OntologyError::DuplicateId(id) if id.as_str() == "A"), "{err}");
    }

    #[test]
    fn malformed_reports_path() {
        let err = parse_guideline(
            br#"{"name": "x", "areas": [{"id": "A", "title": "A", "units": [{"id": "U", "title": "U", "items": [
                {"id": "t", "kind": "lecture", "text": "bad kind"}
            ]}]}]}"#,
        )
        .unwrap_err();
        match err {
            OntologyError::Parse { path, .. } => assert_eq!(path, "areas[0].units[0].items[0].kind"),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn outcome_requires_level() {
        let err = parse_guideline(
            br#"{"name": "x", "areas": [{"id": "A", "title": "A", "units": [{"id": "U", "title": "U", "items": [
                {"id": "o", "kind": "outcome", "text": "no level"}
            ]}]}]}"#,
        );
        assert!(matches!(err, Err(OntologyError::Invalid { .. })));
    }

    #[test]
    fn empty_area_title_rejected() {
        let err = parse_guideline(br#"{"name": "x", "areas": [{"id": "A", "title": " ", "units": []}]}"#);
        assert!(matches!(err, Err(OntologyError::Invalid { .. })));
    }

    #[test]
    fn summary_roundtrips() {
        let mut g = parse_guideline(FIXTURE.as_bytes()).unwrap();
        assert!(g.unit(&"AL-S".into()).unwrap().summary.is_none());
        g.set_summary(&"AL-S".into(), "Sorting algorithms.".into()).unwrap();
        let again = parse_guideline(g.to_json().as_bytes()).unwrap();
        assert_eq!(again, g);
        assert!(g.set_summary(&"t1".into(), "x".into()).is_err());
    }
}
