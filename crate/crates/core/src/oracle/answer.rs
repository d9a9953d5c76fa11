//! Keyword adjudication of free-text descriptions.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AnswerKeyError {
    #[error("answer key for {0:?} has no object terms")]
    NoObjectTerms(String),
    #[error("answer key for {0:?} has no action terms")]
    NoActionTerms(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Accepted vocabulary for one action category. Each term set already
/// includes its synonyms; terms may be multi-word phrases.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerKey {
    pub category: String,
    pub object_terms: BTreeSet<String>,
    pub action_terms: BTreeSet<String>,
    /// Adjudicated verdicts keyed by normalized response text; these take
    /// precedence over keyword matching.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub overrides: BTreeMap<String, bool>,
}

impl AnswerKey {
    pub fn new<I, J, S, T>(category: impl Into<String>, objects: I, actions: J) -> Result<Self, AnswerKeyError>
    where
        I: IntoIterator<Item = S>,
        J: IntoIterator<Item = T>,
        S: Into<String>,
        T: Into<String>,
    {
        let key = AnswerKey {
            category: category.into(),
            object_terms: objects.into_iter().map(Into::into).collect(),
            action_terms: actions.into_iter().map(Into::into).collect(),
            overrides: BTreeMap::new(),
        };
        key.validate()?;
        Ok(key)
    }

    pub fn validate(&self) -> Result<(), AnswerKeyError> {
        if self.object_terms.is_empty() {
            return Err(AnswerKeyError::NoObjectTerms(self.category.clone()));
        }
        if self.action_terms.is_empty() {
            return Err(AnswerKeyError::NoActionTerms(self.category.clone()));
        }
        Ok(())
    }

    pub fn with_override(mut self, response: &str, verdict: bool) -> Self {
        self.overrides.insert(normalize(response).join(" "), verdict);
        self
    }

    /// Parses the plain-text key format:
    ///
    /// ```text
    /// # comment
    /// object: boat, canoe, kayak
    /// action: row, paddle
    /// override: a person in water = false
    /// ```
    pub fn parse(category: &str, text: &str) -> Result<Self, AnswerKeyError> {
        let mut objects = Vec::new();
        let mut actions = Vec::new();
        let mut overrides = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (field, value) = line.split_once(':').ok_or_else(|| AnswerKeyError::Parse {
                line: n + 1,
                message: "expected `field: values`".into(),
            })?;
            let terms = value.split(',').map(str::trim).filter(|t| !t.is_empty()).map(String::from);
            match field.trim().to_ascii_lowercase().as_str() {
                "object" | "objects" => objects.extend(terms),
                "action" | "actions" => actions.extend(terms),
                "override" => {
                    let (resp, verdict) = value.rsplit_once('=').ok_or_else(|| AnswerKeyError::Parse {
                        line: n + 1,
                        message: "override needs `text = true|false`".into(),
                    })?;
                    let verdict = match verdict.trim() {
                        "true" => true,
                        "false" => false,
                        other => {
                            return Err(AnswerKeyError::Parse {
                                line: n + 1,
                                message: format!("bad verdict {other:?}"),
                            })
                        }
                    };
                    overrides.insert(normalize(resp).join(" "), verdict);
                }
                other => {
                    return Err(AnswerKeyError::Parse {
                        line: n + 1,
                        message: format!("unknown field {other:?}"),
                    })
                }
            }
        }
        let mut key = AnswerKey::new(category, objects, actions)?;
        key.overrides = overrides;
        Ok(key)
    }
}

/// Lowercased, punctuation-free, stemmed words of `text`.
pub fn normalize(text: &str) -> Vec<String> {
    text.chars()
        .map(|c| if c.is_alphanumeric() { c.to_ascii_lowercase() } else { ' ' })
        .collect::<String>()
        .split_whitespace()
        .map(stem)
        .collect()
}

/// Suffix-stripping stemmer: enough to equate the inflections of "row" and
/// of "mop".
pub fn stem(word: &str) -> String {
    let mut w = word.to_string();
    let strip = |w: &mut String, suffix: &str, min_left: usize| -> bool {
        if w.ends_with(suffix) && w.len() - suffix.len() >= min_left {
            w.truncate(w.len() - suffix.len());
            true
        } else {
            false
        }
    };
    if w.ends_with("ies") && w.len() > 4 {
        w.truncate(w.len() - 3);
        w.push('y');
    } else if strip(&mut w, "ing", 3) || strip(&mut w, "ed", 3) {
        undouble(&mut w);
    } else if w.ends_with("ss") {
        // keep "glass", "grass"
    } else if w.ends_with('s') && w.len() > 3 {
        w.pop();
    }
    if w.ends_with('e') && w.len() > 3 {
        w.pop();
    }
    w
}

fn undouble(w: &mut String) {
    let b = w.as_bytes();
    let n = b.len();
    if n >= 2 && b[n - 1] == b[n - 2] && !matches!(b[n - 1], b'l' | b's' | b'z' | b'a' | b'e' | b'i' | b'o' | b'u') {
        w.pop();
    }
}

fn contains_phrase(tokens: &[String], phrase: &[String]) -> bool {
    !phrase.is_empty() && tokens.windows(phrase.len()).any(|w| w == phrase)
}

/// True iff the normalized text contains at least one of `terms`.
pub fn matches_any<'a>(text: &str, terms: impl IntoIterator<Item = &'a String>) -> bool {
    let tokens = normalize(text);
    matches_tokens(&tokens, terms)
}

fn matches_tokens<'a>(tokens: &[String], terms: impl IntoIterator<Item = &'a String>) -> bool {
    terms
        .into_iter()
        .any(|term| contains_phrase(tokens, &normalize(term)))
}

/// True iff the description names an object term and an action term.
pub fn match_description(free_text: &str, key: &AnswerKey) -> bool {
    let tokens = normalize(free_text);
    if tokens.is_empty() {
        return false;
    }
    if let Some(&verdict) = key.overrides.get(&tokens.join(" ")) {
        return verdict;
    }
    matches_tokens(&tokens, &key.object_terms) && matches_tokens(&tokens, &key.action_terms)
}
