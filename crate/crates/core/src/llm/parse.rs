//! Response parsers. Each returns `None` when the response does not fit
//! the expected shape, which triggers a retry.

/// Leading `yes` / `no`, case-insensitive, after optional whitespace.
pub fn parse_yes_no(response: &str) -> Option<bool> {
    let lower = response.trim_start().to_lowercase();
    let word_ends = |n: usize| !lower[n..].chars().next().is_some_and(char::is_alphanumeric);
    if lower.starts_with("yes") && word_ends(3) {
        Some(true)
    } else if lower.starts_with("no") && word_ends(2) {
        Some(false)
    } else {
        None
    }
}

/// `n` scores in `0..=5`, one per category, in order.
///
/// Accepts numbered lines such as `2) 4` or `2: 4` (the numbering must be
/// exactly `1..=n`); otherwise falls back to the bare integers in the
/// response, which must number exactly `n`. A single-category response
/// uses its first integer.
pub fn parse_ratings(response: &str, n: usize) -> Option<Vec<u8>> {
    let scores = numbered_scores(response, n).or_else(|| {
        let ints = integers(response);
        match (n, ints.len()) {
            (1, m) if m >= 1 => Some(vec![ints[0]]),
            (_, m) if m == n => Some(ints),
            _ => None,
        }
    })?;
    scores.into_iter().map(|s| u8::try_from(s).ok().filter(|&s| s <= 5)).collect()
}

fn numbered_scores(response: &str, n: usize) -> Option<Vec<u64>> {
    let mut found = Vec::new();
    for line in response.lines().map(str::trim).filter(|l| !l.is_empty()) {
        let digits = line.len() - line.trim_start_matches(|c: char| c.is_ascii_digit()).len();
        if digits == 0 {
            continue;
        }
        let rest = &line[digits..];
        let Some(rest) = rest.strip_prefix([')', '.', ':', '-', ']']) else {
            continue;
        };
        let index: u64 = line[..digits].parse().ok()?;
        let value = integers(rest).into_iter().next()?;
        found.push((index, value));
    }
    if found.len() != n || found.iter().enumerate().any(|(i, (idx, _))| *idx != i as u64 + 1) {
        return None;
    }
    Some(found.into_iter().map(|(_, v)| v).collect())
}

fn integers(text: &str) -> Vec<u64> {
    text.split(|c: char| !c.is_ascii_digit()).filter(|s| !s.is_empty()).filter_map(|s| s.parse().ok()).collect()
}

/// Non-empty trimmed text.
pub fn parse_summary(response: &str) -> Option<String> {
    let t = response.trim();
    (!t.is_empty()).then(|| t.to_owned())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn yes_no() {
        assert_eq!(parse_yes_no("Yes, this covers it."), Some(true));
        assert_eq!(parse_yes_no("no"), Some(false));
        assert_eq!(parse_yes_no("  NO."), Some(false));
        assert_eq!(parse_yes_no("maybe"), None);
        assert_eq!(parse_yes_no("nothing to add"), None);
        assert_eq!(parse_yes_no("yesterday"), None);
        assert_eq!(parse_yes_no(""), None);
    }

    #[test]
    fn single_rating() {
        assert_eq!(parse_ratings("4", 1), Some(vec![4]));
        assert_eq!(parse_ratings("Score: 3", 1), Some(vec![3]));
        assert_eq!(parse_ratings("1) 2", 1), Some(vec![2]));
        assert_eq!(parse_ratings("7", 1), None);
        assert_eq!(parse_ratings("none", 1), None);
    }

    #[test]
    fn batch_rating() {
        assert_eq!(parse_ratings("1) 5\n2) 0\n3) 3\n4) 2\n5) 5", 5), Some(vec![5, 0, 3, 2, 5]));
        assert_eq!(parse_ratings("1: 5\n2: 1", 2), Some(vec![5, 1]));
        assert_eq!(parse_ratings("5 0 3", 3), Some(vec![5, 0, 3]));
        assert_eq!(parse_ratings("1) 5\n2) 0", 3), None);
        assert_eq!(parse_ratings("1) 5\n3) 0", 2), None);
        assert_eq!(parse_ratings("1) 5\n2) 9", 2), None);
    }
}
