//! Prompt templates. The template text lives in `prompts/` and is compiled
//! into the binary; bump [`PROMPT_VERSION`] whenever a template changes.

use std::borrow::Cow;

pub const PROMPT_VERSION: &str = "v1";

pub const SYSTEM: &str = include_str!("../../prompts/system.txt");
pub const BINARY: &str = include_str!("../../prompts/binary.txt");
pub const RATE: &str = include_str!("../../prompts/rate.txt");
pub const RATE_BATCH: &str = include_str!("../../prompts/rate_batch.txt");
pub const RATE_CONTEXT: &str = include_str!("../../prompts/rate_context.txt");
pub const RATE_CONTEXT_BATCH: &str = include_str!("../../prompts/rate_context_batch.txt");
pub const SUMMARIZE: &str = include_str!("../../prompts/summarize.txt");
pub const PRUNE_GATE: &str = include_str!("../../prompts/prune_gate.txt");
pub const WHOLE_ONTOLOGY: &str = include_str!("../../prompts/whole_ontology.txt");

/// Substitutes `{name}` placeholders in one left-to-right pass, so values
/// that themselves contain braces are inserted verbatim. Unknown
/// placeholders are left untouched.
pub fn fill(template: &str, values: &[(&str, &str)]) -> String {
    let mut out = String::with_capacity(template.len() + values.iter().map(|(_, v)| v.len()).sum::<usize>());
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        let replaced = after.find('}').and_then(|close| {
            let name = &after[..close];
            values.iter().find(|(k, _)| *k == name).map(|(_, v)| (*v, close))
        });
        match replaced {
            Some((value, close)) => {
                out.push_str(value);
                rest = &after[close + 1..];
            }
            None => {
                out.push('{');
                rest = after;
            }
        }
    }
    out.push_str(rest);
    out.trim_end().to_owned()
}

/// `1) text` lines.
pub fn numbered_list<'a>(items: impl IntoIterator<Item = &'a str>) -> String {
    items.into_iter().enumerate().map(|(i, t)| format!("{}) {}", i + 1, t)).collect::<Vec<_>>().join("\n")
}

/// Truncates `text` to at most `budget` characters on a char boundary.
pub fn truncate_document(text: &str, budget: usize) -> (Cow<'_, str>, bool) {
    match text.char_indices().nth(budget) {
        Some((cut, _)) => (Cow::Owned(text[..cut].to_owned()), true),
        None => (Cow::Borrowed(text), false),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fill_is_single_pass() {
        let out = fill("A {document} B {summary}", &[("document", "has {summary} inside"), ("summary", "S")]);
        assert_eq!(out, "A has {summary} inside B S");
    }

    #[test]
    fn unknown_placeholders_survive() {
        assert_eq!(fill("x {nope} {y", &[("y", "1")]), "x {nope} {y");
    }

    #[test]
    fn templates_use_known_placeholders() {
        let known = ["document", "category_text", "ka_title", "ku_title", "summary", "numbered_category_list"];
        for t in [BINARY, RATE, RATE_BATCH, RATE_CONTEXT, RATE_CONTEXT_BATCH, SUMMARIZE, PRUNE_GATE, WHOLE_ONTOLOGY] {
            let mut rest = t;
            while let Some(i) = rest.find('{') {
                let j = rest[i..].find('}').unwrap() + i;
                assert!(known.contains(&&rest[i + 1..j]), "{}", &rest[i..=j]);
                rest = &rest[j + 1..];
            }
        }
    }

    #[test]
    fn truncation_by_chars() {
        assert_eq!(truncate_document("héllo", 3), (Cow::Borrowed("hél"), true));
        assert_eq!(truncate_document("abc", 3), (Cow::Borrowed("abc"), false));
        assert_eq!(truncate_document("", 0), (Cow::Borrowed(""), false));
    }

    #[test]
    fn numbering() {
        assert_eq!(numbered_list(["a", "b"]), "1) a\n2) b");
    }
}
