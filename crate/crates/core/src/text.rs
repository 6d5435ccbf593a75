//! Tokenization and sentence rendering shared across the pipeline.
//!
//! Tokens are lowercase; the corpus keeps the raw sentence text around for
//! display. Punctuation marks become their own single-character tokens.
//! Internal apostrophes and hyphens stay inside the word ("don't",
//! "two-page").

/// True for tokens that consist solely of punctuation.
pub fn is_punctuation(token: &str) -> bool {
    !token.is_empty() && token.chars().all(|c| !c.is_alphanumeric() && c != '\'')
}

/// A "word" here is a token carrying at least one alphanumeric character.
pub fn is_word(token: &str) -> bool {
    token.chars().any(char::is_alphanumeric)
}

/// Lowercase tokenizer. Splits on whitespace, then peels leading/trailing
/// punctuation into separate tokens. `<mask>` is preserved as one token so
/// masked templates round-trip.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for raw in text.split_whitespace() {
        if raw == crate::backend::MASK_TOKEN {
            out.push(raw.to_string());
            continue;
        }
        let chars: Vec<char> = raw.chars().collect();
        let mut start = 0;
        let mut end = chars.len();
        while start < end && !chars[start].is_alphanumeric() && chars[start] != '\'' {
            out.push(chars[start].to_lowercase().collect());
            start += 1;
        }
        let mut tail = Vec::new();
        while end > start && !chars[end - 1].is_alphanumeric() && chars[end - 1] != '\'' {
            tail.push(chars[end - 1].to_lowercase().collect::<String>());
            end -= 1;
        }
        if start < end {
            let word: String = chars[start..end].iter().collect::<String>().to_lowercase();
            out.push(word);
        }
        tail.reverse();
        out.extend(tail);
    }
    out
}

/// Join tokens back into display text: words separated by spaces,
/// punctuation attached to the preceding word, first letter capitalized,
/// and a terminal period added when no end punctuation was produced.
pub fn render_sentence(tokens: &[String]) -> String {
    let mut text = String::new();
    for tok in tokens {
        if tok.is_empty() {
            continue;
        }
        if is_punctuation(tok) {
            text.push_str(tok);
        } else {
            if !text.is_empty() {
                text.push(' ');
            }
            text.push_str(tok);
        }
    }
    let mut chars = text.chars();
    let mut out: String = match chars.next() {
        Some(c) => c.to_uppercase().collect::<String>() + chars.as_str(),
        None => return String::new(),
    };
    if !out.ends_with(['.', '!', '?']) {
        out.push('.');
    }
    out
}

/// Content words: alphanumeric-bearing, non-stopword tokens.
pub fn content_words(tokens: &[String]) -> Vec<&String> {
    tokens
        .iter()
        .filter(|t| is_word(t) && !crate::stopwords::is_stopword(t))
        .collect()
}
