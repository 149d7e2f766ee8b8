//! Tweet normalization and whitespace tokenization.

/// Lowercases, removes links and @mentions, keeps hashtag words without the
/// `#`, drops every character outside `[a-z0-9' ]`, and collapses whitespace.
pub fn clean_text(text: &str) -> String {
    let lower = text.to_lowercase();
    let mut out = String::with_capacity(lower.len());
    for token in lower.split_whitespace() {
        if token.starts_with("http://")
            || token.starts_with("https://")
            || token.starts_with("www.")
            || token.starts_with('@')
        {
            continue;
        }
        let kept: String = token
            .chars()
            .filter(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || *c == '\'')
            .collect();
        if kept.is_empty() {
            continue;
        }
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(&kept);
    }
    out
}

pub fn tokenize(clean: &str) -> Vec<String> {
    clean.split(' ').filter(|t| !t.is_empty()).map(str::to_owned).collect()
}
