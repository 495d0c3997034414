//! Tweet cleaning and tokenization.
//!
//! [`clean`] applies a fixed sequence of text-normalization steps controlled by
//! [`CleanConfig`]; [`tokenize`] splits on whitespace and collapses long runs of
//! repeated characters. Both are pure functions, deterministic and safe to call
//! from multiple threads.
//!
//! The cleaning steps run in this order (each gated on its flag):
//!
//! 1. drop whitespace-delimited tokens equal to `@USER` (exact, case-sensitive)
//! 2. drop tokens equal to `URL` (exact, case-sensitive)
//! 3. lowercase
//! 4. expand abbreviations token-wise (see [`AbbreviationLexicon`])
//! 5. drop hashtag tokens (whole `#token`, not just the `#`)
//! 6. remove emoji (category-`So` code points in the pinned emoji ranges)
//! 7. remove punctuation characters (Unicode general category `P*`)
//! 8. remove symbol characters (Unicode general category `S*`)
//! 9. remove decimal-digit characters (Unicode category `Nd`)
//! 10. drop stopword tokens
//! 11. collapse whitespace runs to single spaces and trim
//!
//! Step 11 always runs, so with every flag off `clean` is exactly
//! whitespace normalization. Hashtag removal precedes punctuation removal
//! because `#` itself is punctuation and would otherwise already be gone.

use std::collections::{BTreeMap, BTreeSet};

use unicode_properties::{GeneralCategoryGroup, UnicodeGeneralCategory};

use crate::error::{Error, Result};

/// A cleaned, whitespace-free token sequence.
pub type TokenList = Vec<String>;

/// Flags controlling [`clean`]. Defaults give the adopted pipeline: mention and
/// URL removal, punctuation and symbol stripping, lowercasing, abbreviation
/// expansion; emoji, hashtag, number and stopword removal stay off.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct CleanConfig {
    pub remove_user_mentions: bool,
    pub remove_url_tokens: bool,
    pub remove_punctuation: bool,
    pub remove_symbols: bool,
    pub lowercase: bool,
    pub expand_abbreviations: bool,
    pub remove_emoji: bool,
    pub remove_hashtags: bool,
    pub remove_numbers: bool,
    pub remove_stopwords: bool,
}

impl Default for CleanConfig {
    fn default() -> Self {
        CleanConfig {
            remove_user_mentions: true,
            remove_url_tokens: true,
            remove_punctuation: true,
            remove_symbols: true,
            lowercase: true,
            expand_abbreviations: true,
            remove_emoji: false,
            remove_hashtags: false,
            remove_numbers: false,
            remove_stopwords: false,
        }
    }
}

impl CleanConfig {
    /// All flags off; [`clean`] then only normalizes whitespace.
    pub fn all_off() -> Self {
        CleanConfig {
            remove_user_mentions: false,
            remove_url_tokens: false,
            remove_punctuation: false,
            remove_symbols: false,
            lowercase: false,
            expand_abbreviations: false,
            remove_emoji: false,
            remove_hashtags: false,
            remove_numbers: false,
            remove_stopwords: false,
        }
    }
}

/// Token-to-words replacement table for abbreviation expansion.
///
/// Keys are lowercase single tokens; values are nonempty word sequences.
/// Lookup tries the exact token first, then the token with every character a
/// later cleaning step will strip (punctuation, symbols, emoji, digits,
/// depending on the active flags) removed. With `idk -> i do not know` and
/// default flags, `idk!` therefore expands. The stripped probe keeps `clean`
/// idempotent: no token left after cleaning can turn into a key that the
/// first pass missed.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AbbreviationLexicon {
    entries: BTreeMap<String, Vec<String>>,
}

const DEFAULT_ABBREVIATIONS: &str = include_str!("../data/abbreviations.tsv");
const DEFAULT_STOPWORDS: &str = include_str!("../data/stopwords.txt");

impl AbbreviationLexicon {
    pub fn empty() -> Self {
        Self::default()
    }

    /// The curated lexicon shipped with the crate (`data/abbreviations.tsv`).
    pub fn shipped() -> Self {
        Self::parse(DEFAULT_ABBREVIATIONS, "data/abbreviations.tsv")
            .expect("shipped abbreviation lexicon is valid")
    }

    /// Parse `key<TAB>replacement words` lines. Blank lines are ignored.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (key, replacement) = line.split_once('\t').ok_or_else(|| {
                Error::malformed(origin, lineno + 1, "expected key<TAB>replacement")
            })?;
            let key = key.trim();
            if key.is_empty() || key.chars().any(char::is_whitespace) {
                return Err(Error::malformed(
                    origin,
                    lineno + 1,
                    "key must be a single nonempty token",
                ));
            }
            if key.chars().any(char::is_uppercase) {
                return Err(Error::malformed(origin, lineno + 1, "key must be lowercase"));
            }
            let words: Vec<String> = replacement.split_whitespace().map(String::from).collect();
            if words.is_empty() {
                return Err(Error::malformed(origin, lineno + 1, "empty replacement"));
            }
            entries.insert(key.to_string(), words);
        }
        Ok(AbbreviationLexicon { entries })
    }

    pub fn load(path: &str) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn from_entries<I, K, V>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (K, V)>,
        K: Into<String>,
        V: Into<Vec<String>>,
    {
        AbbreviationLexicon {
            entries: pairs
                .into_iter()
                .map(|(k, v)| (k.into(), v.into()))
                .collect(),
        }
    }

    pub fn get(&self, token: &str) -> Option<&[String]> {
        self.entries.get(token).map(Vec::as_slice)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[String])> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }
}

/// Stopword set for the optional stopword-removal step.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StopwordList {
    words: BTreeSet<String>,
}

impl StopwordList {
    pub fn empty() -> Self {
        Self::default()
    }

    /// The list shipped with the crate (`data/stopwords.txt`), one word per line.
    pub fn shipped() -> Self {
        Self::parse(DEFAULT_STOPWORDS)
    }

    pub fn parse(text: &str) -> Self {
        StopwordList {
            words: text
                .lines()
                .map(str::trim)
                .filter(|w| !w.is_empty())
                .map(String::from)
                .collect(),
        }
    }

    pub fn load(path: &str) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::parse(&text))
    }

    pub fn contains(&self, token: &str) -> bool {
        self.words.contains(token)
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.words.iter().map(String::as_str)
    }
}

fn is_punctuation(c: char) -> bool {
    c.general_category_group() == GeneralCategoryGroup::Punctuation
}

fn is_symbol(c: char) -> bool {
    c.general_category_group() == GeneralCategoryGroup::Symbol
}

// Pinned emoji ranges; a code point is removed as emoji only if it is
// category So and falls in one of these.
const EMOJI_RANGES: &[(u32, u32)] = &[
    (0x2600, 0x26FF),   // miscellaneous symbols
    (0x2700, 0x27BF),   // dingbats
    (0x1F1E6, 0x1F1FF), // regional indicators
    (0x1F300, 0x1F5FF), // misc symbols and pictographs
    (0x1F600, 0x1F64F), // emoticons
    (0x1F680, 0x1F6FF), // transport and map
    (0x1F900, 0x1F9FF), // supplemental symbols and pictographs
    (0x1FA70, 0x1FAFF), // symbols and pictographs extended-A
];

fn is_emoji(c: char) -> bool {
    let cp = c as u32;
    is_symbol(c) && EMOJI_RANGES.iter().any(|&(lo, hi)| cp >= lo && cp <= hi)
}

fn is_number(c: char) -> bool {
    c.general_category_group() == GeneralCategoryGroup::Number
}

fn drop_tokens(text: &str, mut pred: impl FnMut(&str) -> bool) -> String {
    text.split_whitespace()
        .filter(|t| !pred(t))
        .collect::<Vec<_>>()
        .join(" ")
}

// True for characters that the steps after abbreviation expansion will remove
// under the given flags.
fn stripped_later(c: char, cfg: &CleanConfig) -> bool {
    (cfg.remove_emoji && is_emoji(c))
        || (cfg.remove_punctuation && is_punctuation(c))
        || (cfg.remove_symbols && is_symbol(c))
        || (cfg.remove_numbers && is_number(c))
}

fn expand_token(token: &str, cfg: &CleanConfig, lex: &AbbreviationLexicon) -> Option<String> {
    if let Some(words) = lex.get(token) {
        return Some(words.join(" "));
    }
    let stripped: String = token.chars().filter(|&c| !stripped_later(c, cfg)).collect();
    if stripped == token || stripped.is_empty() {
        return None;
    }
    lex.get(&stripped).map(|words| words.join(" "))
}

/// Apply the cleaning pipeline described in the module docs.
///
/// Never fails; an empty result is valid (for example a tweet that consists
/// solely of `@USER` mentions and a URL).
pub fn clean(
    text: &str,
    cfg: &CleanConfig,
    lex: &AbbreviationLexicon,
    stopwords: &StopwordList,
) -> String {
    let mut s = text.to_string();
    if cfg.remove_user_mentions {
        s = drop_tokens(&s, |t| t == "@USER");
    }
    if cfg.remove_url_tokens {
        s = drop_tokens(&s, |t| t == "URL");
    }
    if cfg.lowercase {
        s = s.to_lowercase();
    }
    if cfg.expand_abbreviations && !lex.is_empty() {
        s = s
            .split_whitespace()
            .map(|t| expand_token(t, cfg, lex).unwrap_or_else(|| t.to_string()))
            .collect::<Vec<_>>()
            .join(" ");
    }
    if cfg.remove_hashtags {
        s = drop_tokens(&s, |t| t.starts_with('#'));
    }
    if cfg.remove_emoji {
        s.retain(|c| !is_emoji(c));
    }
    if cfg.remove_punctuation {
        s.retain(|c| !is_punctuation(c));
    }
    if cfg.remove_symbols {
        s.retain(|c| !is_symbol(c));
    }
    if cfg.remove_numbers {
        s.retain(|c| !is_number(c));
    }
    if cfg.remove_stopwords {
        s = drop_tokens(&s, |t| stopwords.contains(t));
    }
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Split on whitespace and collapse any run of more than three identical
/// characters to exactly three (`soooooo` becomes `sooo`). Runs of three or
/// fewer are untouched. Works on raw text as well as cleaned text.
pub fn tokenize(text: &str) -> TokenList {
    text.split_whitespace()
        .map(collapse_repeats)
        .filter(|t| !t.is_empty())
        .collect()
}

fn collapse_repeats(token: &str) -> String {
    let mut out = String::with_capacity(token.len());
    let mut prev: Option<char> = None;
    let mut run = 0usize;
    for c in token.chars() {
        if Some(c) == prev {
            run += 1;
        } else {
            prev = Some(c);
            run = 1;
        }
        if run <= 3 {
            out.push(c);
        }
    }
    out
}

/// Elementwise [`clean`] then [`tokenize`]; order preserved.
pub fn preprocess_corpus(
    texts: &[String],
    cfg: &CleanConfig,
    lex: &AbbreviationLexicon,
    stopwords: &StopwordList,
) -> Vec<TokenList> {
    texts
        .iter()
        .map(|t| tokenize(&clean(t, cfg, lex, stopwords)))
        .collect()
}
