use std::collections::HashMap;
use std::path::Path;

use crate::corpus::Rejection;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

const DEFAULT_LEXICON: &str = include_str!("../../data/vader_lexicon.txt");

/// Lowest and highest admissible token valence.
pub const VALENCE_RANGE: (f64, f64) = (-4.0, 4.0);

/// Lowercase token to valence in `[-4, 4]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Lexicon<T> {
    entries: HashMap<String, T>,
}

#[derive(Debug, Clone)]
pub struct LexiconLoad<T> {
    pub lexicon: Lexicon<T>,
    pub rejections: Vec<Rejection>,
}

impl<T: Scalar> Lexicon<T> {
    /// Builds a lexicon from `(token, valence)` pairs, validating the range.
    pub fn from_pairs<I, S>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, T)>,
        S: AsRef<str>,
    {
        let mut entries = HashMap::new();
        for (token, v) in pairs {
            if !in_range(v) {
                return Err(Error::InvalidInput(format!(
                    "valence {v} for `{}` outside [-4, 4]",
                    token.as_ref()
                )));
            }
            entries.insert(token.as_ref().to_lowercase(), v);
        }
        if entries.is_empty() {
            return Err(Error::Empty("lexicon has no entries".into()));
        }
        Ok(Lexicon { entries })
    }

    /// Parses `token<TAB>valence[<TAB>...]` lines. Extra columns are ignored.
    ///
    /// Tokens are lowercased. When a mixed-case token collides with one that
    /// was already lowercase in the file, the lowercase entry is kept; later
    /// lines otherwise replace earlier ones.
    pub fn parse(contents: &str) -> Result<LexiconLoad<T>> {
        let mut entries: HashMap<String, (T, bool)> = HashMap::new();
        let mut rejections = Vec::new();
        for (i, raw) in contents.lines().enumerate() {
            let line_no = i as u64 + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            let mut cols = line.split('\t');
            let token = cols.next().unwrap_or_default();
            let Some(value) = cols.next() else {
                rejections.push(Rejection {
                    line: line_no,
                    reason: "expected token<TAB>valence".into(),
                });
                continue;
            };
            let value = match value.trim().parse::<f64>() {
                Ok(v) if v.is_finite() => v,
                _ => {
                    rejections.push(Rejection {
                        line: line_no,
                        reason: format!("valence `{value}` is not a number"),
                    });
                    continue;
                }
            };
            let value = T::lit(value);
            if !in_range(value) {
                rejections.push(Rejection {
                    line: line_no,
                    reason: format!("valence {value} outside [-4, 4]"),
                });
                continue;
            }
            let lower = token.to_lowercase();
            let was_lower = lower == token;
            match entries.get(&lower) {
                Some(&(_, true)) if !was_lower => {}
                _ => {
                    entries.insert(lower, (value, was_lower));
                }
            }
        }
        if entries.is_empty() {
            return Err(Error::Empty("lexicon has no valid entries".into()));
        }
        let entries = entries.into_iter().map(|(k, (v, _))| (k, v)).collect();
        Ok(LexiconLoad {
            lexicon: Lexicon { entries },
            rejections,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<LexiconLoad<T>> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Lexicon::parse(&text)
    }

    /// The bundled English lexicon.
    pub fn english() -> Self {
        Lexicon::parse(DEFAULT_LEXICON).expect("bundled lexicon parses").lexicon
    }

    pub fn get(&self, token_lower: &str) -> Option<T> {
        self.entries.get(token_lower).copied()
    }

    pub fn contains(&self, token_lower: &str) -> bool {
        self.entries.contains_key(token_lower)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn in_range<T: Scalar>(v: T) -> bool {
    v >= T::lit(VALENCE_RANGE.0) && v <= T::lit(VALENCE_RANGE.1)
}

/// Raw text of the bundled lexicon file.
pub fn bundled_lexicon_source() -> &'static str {
    DEFAULT_LEXICON
}
