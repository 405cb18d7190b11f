//! Text normalization and token pipeline feeding the classifier features.
//!
//! The pipeline is `normalize -> tokenize -> remove_stopwords -> lemmatize`.
//! Valence scoring does not go through it: the scoring rules read casing and
//! punctuation from the raw text.

use std::collections::{HashMap, HashSet};
use std::ops::Deref;
use std::path::Path;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const DEFAULT_STOPWORDS: &str = include_str!("../data/stopwords_en.txt");
const DEFAULT_LEMMAS: &str = include_str!("../data/lemmas_en.txt");

/// Ordered lowercase word tokens. No token is empty or contains whitespace.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct TokenSeq(Vec<String>);

impl TokenSeq {
    pub fn new<I, S>(tokens: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let tokens: Vec<String> = tokens.into_iter().map(Into::into).collect();
        if let Some(bad) = tokens.iter().find(|t| !is_valid_token(t)) {
            return Err(Error::InvalidInput(format!("invalid token `{bad}`")));
        }
        Ok(TokenSeq(tokens))
    }

    pub fn into_vec(self) -> Vec<String> {
        self.0
    }
}

fn is_valid_token(t: &str) -> bool {
    !t.is_empty() && !t.chars().any(char::is_whitespace) && t.to_lowercase() == t
}

impl Deref for TokenSeq {
    type Target = [String];

    fn deref(&self) -> &[String] {
        &self.0
    }
}

impl TryFrom<Vec<String>> for TokenSeq {
    type Error = Error;

    fn try_from(v: Vec<String>) -> Result<Self> {
        TokenSeq::new(v)
    }
}

impl From<TokenSeq> for Vec<String> {
    fn from(t: TokenSeq) -> Self {
        t.0
    }
}

fn mention_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"@\w+").expect("valid regex"))
}

fn url_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?:https?://|www\.)\S*").expect("valid regex"))
}

/// Lowercases, strips `#` from hashtags, drops @-mentions and URLs, and
/// collapses whitespace runs to single spaces.
pub fn normalize(text: &str) -> String {
    let lowered = text.to_lowercase().replace('#', "");
    let no_mentions = mention_re().replace_all(&lowered, "");
    let no_urls = url_re().replace_all(&no_mentions, "");
    no_urls.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Splits on every non-alphanumeric character and lowercases the runs.
pub fn tokenize(text: &str) -> TokenSeq {
    TokenSeq(
        text.split(|c: char| !c.is_alphanumeric())
            .filter(|t| !t.is_empty())
            .map(str::to_lowercase)
            .collect(),
    )
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Stoplist(HashSet<String>);

impl Stoplist {
    pub fn new<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Stoplist(
            words
                .into_iter()
                .map(|w| w.as_ref().trim().to_lowercase())
                .filter(|w| !w.is_empty())
                .collect(),
        )
    }

    pub fn parse(contents: &str) -> Self {
        Stoplist::new(contents.lines().map(|l| l.split('#').next().unwrap_or("")))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Stoplist::parse(&text))
    }

    /// The bundled English list.
    pub fn english() -> Self {
        Stoplist::parse(DEFAULT_STOPWORDS)
    }

    pub fn contains(&self, token: &str) -> bool {
        self.0.contains(token)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Inflected form to base form. Lookups of unknown keys return the key.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LemmaDict(HashMap<String, String>);

impl LemmaDict {
    pub fn new<I, K, V>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (K, V)>,
        K: AsRef<str>,
        V: AsRef<str>,
    {
        let mut map = HashMap::new();
        for (k, v) in pairs {
            let (k, v) = (k.as_ref().trim().to_lowercase(), v.as_ref().trim().to_lowercase());
            if !is_valid_token(&k) || !is_valid_token(&v) {
                return Err(Error::InvalidInput(format!("invalid lemma pair `{k}` -> `{v}`")));
            }
            map.insert(k, v);
        }
        Ok(LemmaDict(map))
    }

    pub fn parse(contents: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (i, line) in contents.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            match line.split_once('\t') {
                Some((k, v)) if !k.trim().is_empty() && !v.trim().is_empty() => pairs.push((k, v)),
                _ => {
                    return Err(Error::InvalidInput(format!(
                        "lemma line {}: expected `inflected<TAB>base`",
                        i + 1
                    )))
                }
            }
        }
        LemmaDict::new(pairs)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        LemmaDict::parse(&text)
    }

    /// The bundled English dictionary.
    pub fn english() -> Self {
        LemmaDict::parse(DEFAULT_LEMMAS).expect("bundled lemma dictionary is well-formed")
    }

    pub fn lookup<'a>(&'a self, token: &'a str) -> &'a str {
        self.0.get(token).map_or(token, String::as_str)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }
}

pub fn remove_stopwords(tokens: &TokenSeq, stoplist: &Stoplist) -> TokenSeq {
    TokenSeq(tokens.iter().filter(|t| !stoplist.contains(t)).cloned().collect())
}

pub fn lemmatize(tokens: &TokenSeq, dict: &LemmaDict) -> TokenSeq {
    TokenSeq(tokens.iter().map(|t| dict.lookup(t).to_owned()).collect())
}

pub fn prep_for_features(text: &str, stoplist: &Stoplist, dict: &LemmaDict) -> TokenSeq {
    let tokens = tokenize(&normalize(text));
    lemmatize(&remove_stopwords(&tokens, stoplist), dict)
}

/// Stoplist and lemma dictionary bundled for repeated use.
#[derive(Debug, Clone, Default)]
pub struct Preprocessor {
    pub stoplist: Stoplist,
    pub lemmas: LemmaDict,
}

impl Preprocessor {
    pub fn new(stoplist: Stoplist, lemmas: LemmaDict) -> Self {
        Preprocessor { stoplist, lemmas }
    }

    pub fn english() -> Self {
        Preprocessor::new(Stoplist::english(), LemmaDict::english())
    }

    pub fn prep(&self, text: &str) -> TokenSeq {
        prep_for_features(text, &self.stoplist, &self.lemmas)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toks(v: &[&str]) -> TokenSeq {
        TokenSeq::new(v.iter().copied()).unwrap()
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize("Check https://x.co NOW"), "check now");
        assert_eq!(normalize("#covid19 @user hello"), "covid19 hello");
        assert_eq!(normalize("see www.example.org/a?b=c  and\tthen"), "see and then");
        assert_eq!(normalize(""), "");
    }

    #[test]
    fn tokenize_examples() {
        assert!(tokenize("").is_empty());
        assert_eq!(tokenize("don't stop"), toks(&["don", "t", "stop"]));
        assert_eq!(tokenize("COVID-19, Lockdown!"), toks(&["covid", "19", "lockdown"]));
    }

    #[test]
    fn stopwords_and_lemmas() {
        let stop = Stoplist::new(["the", "is"]);
        assert_eq!(
            remove_stopwords(&toks(&["the", "virus", "is", "bad"]), &stop),
            toks(&["virus", "bad"])
        );
        let t = toks(&["a", "b"]);
        assert_eq!(remove_stopwords(&t, &Stoplist::default()), t);
        let dict = LemmaDict::new([("viruses", "virus")]).unwrap();
        assert_eq!(lemmatize(&toks(&["viruses"]), &dict), toks(&["virus"]));
        assert_eq!(lemmatize(&t, &LemmaDict::default()), t);
    }

    #[test]
    fn prep_composition_example() {
        let stop = Stoplist::new(["the"]);
        let dict = LemmaDict::new([("viruses", "virus")]).unwrap();
        assert!(prep_for_features("", &stop, &dict).is_empty());
        assert_eq!(
            prep_for_features("The VIRUSES spread! http://a.b", &stop, &dict),
            toks(&["virus", "spread"])
        );
    }

    #[test]
    fn stoplist_file_comments() {
        let s = Stoplist::parse("# header\nThe\n  is # trailing\n\n");
        assert_eq!(s.len(), 2);
        assert!(s.contains("the") && s.contains("is"));
    }

    #[test]
    fn lemma_file_format() {
        let d = LemmaDict::parse("# c\nviruses\tvirus\r\nmice\tmouse\n").unwrap();
        assert_eq!(d.lookup("mice"), "mouse");
        assert_eq!(d.lookup("cat"), "cat");
        assert!(LemmaDict::parse("novalue\n").is_err());
    }

    #[test]
    fn bundled_resources_are_consistent() {
        let stop = Stoplist::english();
        let lemmas = LemmaDict::english();
        assert!(stop.len() > 100);
        assert!(lemmas.len() > 100);
        for (k, v) in lemmas.iter() {
            assert!(lemmas.lookup(v) == v, "lemma value `{v}` is itself a key");
            assert!(
                !stop.contains(v) || stop.contains(k),
                "`{k}` lemmatizes into stopword `{v}`"
            );
        }
    }

    #[test]
    fn token_seq_rejects_bad_tokens() {
        assert!(TokenSeq::new(["ok", ""]).is_err());
        assert!(TokenSeq::new(["a b"]).is_err());
        assert!(TokenSeq::new(["Upper"]).is_err());
    }

    fn messy_text() -> impl Strategy<Value = String> {
        let pieces = prop::sample::select(vec![
            "http://", "https://", "www.", "@", "#", " ", "\t", "\n", "a", "B", "z9", ".", "!", "'", "-", "co", "x.y",
            "é", "İ", "ß", "日本", "\u{a0}", "http", "ww", "w.",
        ]);
        prop::collection::vec(pieces, 0..24).prop_map(|v| v.concat())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn normalize_is_idempotent(s in messy_text()) {
            let once = normalize(&s);
            prop_assert_eq!(normalize(&once), once);
        }

        #[test]
        fn normalize_is_idempotent_any_string(s in any::<String>()) {
            let once = normalize(&s);
            prop_assert_eq!(normalize(&once), once);
        }

        #[test]
        fn tokenize_concatenates(a in messy_text(), b in messy_text()) {
            let joined = tokenize(&format!("{a} {b}"));
            let mut parts = tokenize(&a).into_vec();
            parts.extend(tokenize(&b).into_vec());
            prop_assert_eq!(joined.into_vec(), parts);
        }

        #[test]
        fn stopwords_never_survive(
            words in prop::collection::vec("[a-e]{1,2}", 0..30),
            stop in prop::collection::vec("[a-e]{1,2}", 0..6),
        ) {
            let stoplist = Stoplist::new(&stop);
            let out = remove_stopwords(&TokenSeq::new(words.clone()).unwrap(), &stoplist);
            prop_assert!(out.iter().all(|t| !stoplist.contains(t)));
            let expected: Vec<String> = words.into_iter().filter(|w| !stop.contains(w)).collect();
            prop_assert_eq!(out.into_vec(), expected);
        }

        #[test]
        fn lemmatize_idempotent_with_fixed_point_values(
            words in prop::collection::vec("[a-f]{1,2}", 0..30),
            keys in prop::collection::vec("[a-c]{1,2}", 0..8),
        ) {
            // values drawn from d-f never collide with a-c keys, so they are fixed points
            let dict = LemmaDict::new(keys.iter().map(|k| (k.clone(), format!("d{k}")))).unwrap();
            let t = TokenSeq::new(words).unwrap();
            let once = lemmatize(&t, &dict);
            prop_assert_eq!(lemmatize(&once, &dict), once);
        }

        #[test]
        fn prep_equals_manual_composition(s in messy_text()) {
            let pre = Preprocessor::english();
            let manual = lemmatize(
                &remove_stopwords(&tokenize(&normalize(&s)), &pre.stoplist),
                &pre.lemmas,
            );
            let out = pre.prep(&s);
            prop_assert!(out.iter().all(|t| is_valid_token(t) && !pre.stoplist.contains(t)));
            prop_assert_eq!(out, manual);
        }
    }
}
