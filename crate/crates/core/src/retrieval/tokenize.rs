use serde::{Deserialize, Serialize};

const STOPWORDS: &[&str] = &[
    "an", "and", "are", "as", "at", "be", "but", "by", "for", "from", "has", "have", "in", "into",
    "is", "it", "its", "no", "not", "of", "on", "or", "such", "that", "the", "their", "then",
    "there", "these", "they", "this", "to", "was", "were", "will", "with",
];

/// Lowercases, splits on non-alphanumeric code points and drops tokens
/// shorter than two characters.
pub fn tokenize(text: &str) -> Vec<String> {
    Tokenizer::default().tokens(text)
}

/// Tokenizer settings. Both filters are off by default, which gives exactly
/// [`tokenize`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tokenizer {
    #[serde(default)]
    pub stemming: bool,
    #[serde(default)]
    pub stopwords: bool,
}

impl Tokenizer {
    pub fn tokens(&self, text: &str) -> Vec<String> {
        self.spans(text).into_iter().map(|(_, _, t)| t).collect()
    }

    /// Tokens with their char ranges `[start, end)` in `text`.
    pub fn spans(&self, text: &str) -> Vec<(usize, usize, String)> {
        let mut out = Vec::new();
        let mut word = String::new();
        let mut start = 0;
        let mut pos = 0;
        for c in text.chars() {
            if c.is_alphanumeric() {
                if word.is_empty() {
                    start = pos;
                }
                word.push(c);
            } else if !word.is_empty() {
                self.emit(&mut out, start, pos, &word);
                word.clear();
            }
            pos += 1;
        }
        if !word.is_empty() {
            self.emit(&mut out, start, pos, &word);
        }
        out
    }

    fn emit(&self, out: &mut Vec<(usize, usize, String)>, start: usize, end: usize, word: &str) {
        let mut term = word.to_lowercase();
        if term.chars().count() < 2 {
            return;
        }
        if self.stopwords && STOPWORDS.contains(&term.as_str()) {
            return;
        }
        if self.stemming {
            term = s_stem(&term);
        }
        out.push((start, end, term));
    }
}

/// Harman's S-stemmer: strips regular English plurals.
fn s_stem(word: &str) -> String {
    let n = word.len();
    let ends = |endings: &[&str]| endings.iter().any(|e| word.ends_with(e));
    if word.ends_with("ies") && !ends(&["eies", "aies"]) && n > 3 {
        format!("{}y", &word[..n - 3])
    } else if word.ends_with('s') && !ends(&["us", "ss"]) && n > 2 {
        // the "es" rule also drops just the final "s"; its exceptions
        // (aes, ees, oes) fall through to this rule anyway
        word[..n - 1].to_owned()
    } else {
        word.to_owned()
    }
}
