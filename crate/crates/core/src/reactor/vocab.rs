use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::textprep::TokenSeq;

/// Token index built from document frequencies.
///
/// Tokens are ordered by descending document frequency, ties broken
/// lexicographically, so the index assignment does not depend on corpus order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "VocabularyRepr", into = "VocabularyRepr")]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
    min_df: usize,
}

#[derive(Serialize, Deserialize)]
struct VocabularyRepr {
    tokens: Vec<String>,
    min_df: usize,
}

impl TryFrom<VocabularyRepr> for Vocabulary {
    type Error = Error;

    fn try_from(r: VocabularyRepr) -> Result<Self> {
        Vocabulary::from_tokens(r.tokens, r.min_df)
    }
}

impl From<Vocabulary> for VocabularyRepr {
    fn from(v: Vocabulary) -> Self {
        VocabularyRepr {
            tokens: v.tokens,
            min_df: v.min_df,
        }
    }
}

impl Vocabulary {
    /// Uses `tokens` in the given order; duplicates are rejected.
    pub fn from_tokens(tokens: Vec<String>, min_df: usize) -> Result<Self> {
        let mut index = HashMap::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            if index.insert(t.clone(), i).is_some() {
                return Err(Error::InvalidInput(format!("duplicate vocabulary token `{t}`")));
            }
        }
        Ok(Vocabulary { tokens, index, min_df })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn min_df(&self) -> usize {
        self.min_df
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }
}

/// Keeps tokens present in at least `min_df` distinct documents.
pub fn build_vocabulary(docs: &[TokenSeq], min_df: usize) -> Result<Vocabulary> {
    if docs.is_empty() {
        return Err(Error::Empty("cannot build a vocabulary from zero documents".into()));
    }
    if min_df == 0 {
        return Err(Error::InvalidInput("min_df must be at least 1".into()));
    }
    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    for doc in docs {
        let distinct: HashSet<&str> = doc.iter().map(String::as_str).collect();
        for t in distinct {
            *df.entry(t).or_default() += 1;
        }
    }
    let mut kept: Vec<(&str, usize)> = df.into_iter().filter(|&(_, n)| n >= min_df).collect();
    if kept.is_empty() {
        return Err(Error::Empty(format!("no token reaches document frequency {min_df}")));
    }
    kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    Vocabulary::from_tokens(kept.into_iter().map(|(t, _)| t.to_owned()).collect(), min_df)
}

/// Sparse bag-of-words counts, sorted by vocabulary index.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DocVector {
    entries: Vec<(usize, u32)>,
}

impl DocVector {
    pub fn entries(&self) -> &[(usize, u32)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, index: usize) -> u32 {
        self.entries
            .binary_search_by_key(&index, |&(i, _)| i)
            .map_or(0, |k| self.entries[k].1)
    }

    pub fn total(&self) -> u64 {
        self.entries.iter().map(|&(_, c)| u64::from(c)).sum()
    }

    /// Builds a vector from `(index, count)` pairs, merging repeats and dropping zeros.
    pub fn from_counts(pairs: impl IntoIterator<Item = (usize, u32)>) -> Self {
        let mut map: BTreeMap<usize, u32> = BTreeMap::new();
        for (i, c) in pairs {
            *map.entry(i).or_default() += c;
        }
        DocVector {
            entries: map.into_iter().filter(|&(_, c)| c > 0).collect(),
        }
    }
}

/// Counts in-vocabulary tokens; unknown tokens are ignored.
pub fn vectorize(doc: &TokenSeq, vocab: &Vocabulary) -> DocVector {
    DocVector::from_counts(doc.iter().filter_map(|t| vocab.index_of(t)).map(|i| (i, 1)))
}
