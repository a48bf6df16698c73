//! Tag tokenization and part-of-speech labeling.
//!
//! The shipped tagger is a lexicon lookup with ordered suffix rules as a
//! fallback. Corpora tagged by an external tool can be passed through as
//! `surface/POS` tokens instead.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{parse_tsv, read_to_string};
use crate::text::{is_unsegmented_lang, normalize_key};

/// Separator used by corpora that ship pre-segmented tags (U+2028).
pub const SEGMENT_SEPARATOR: char = '\u{2028}';

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Pos {
    Adj,
    Noun,
    /// Participles and other forms usable as adjectives ("smiling face").
    AdjLike,
    Other,
    Unknown,
}

impl Pos {
    /// Parses a label from lexicon files or pre-tagged corpora. Accepts the
    /// native labels plus common Penn-style aliases.
    pub fn parse_label(label: &str) -> Option<Pos> {
        match label.trim().to_ascii_uppercase().as_str() {
            "ADJ" | "A" | "JJ" | "JJR" | "JJS" => Some(Pos::Adj),
            "NOUN" | "N" | "NN" | "NNS" => Some(Pos::Noun),
            "ADJ_LIKE" | "VBG" | "VBN" => Some(Pos::AdjLike),
            "OTHER" => Some(Pos::Other),
            "" => None,
            _ => Some(Pos::Other),
        }
    }

    pub fn is_adjectival(self) -> bool {
        matches!(self, Pos::Adj | Pos::AdjLike)
    }
}

/// Set of lexicon senses for one word.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PosSet(u8);

impl PosSet {
    fn bit(pos: Pos) -> u8 {
        match pos {
            Pos::Adj => 1,
            Pos::Noun => 2,
            Pos::AdjLike => 4,
            Pos::Other => 8,
            Pos::Unknown => 0,
        }
    }

    pub fn insert(&mut self, pos: Pos) {
        self.0 |= Self::bit(pos);
    }

    pub fn contains(self, pos: Pos) -> bool {
        let b = Self::bit(pos);
        b != 0 && self.0 & b != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// The single label reported for the word. ADJ wins over NOUN so that
    /// ambiguous words are offered to discovery as adjectives first; discovery
    /// consults the full set for the noun reading.
    pub fn primary(self) -> Pos {
        [Pos::Adj, Pos::AdjLike, Pos::Noun, Pos::Other]
            .into_iter()
            .find(|&p| self.contains(p))
            .unwrap_or(Pos::Unknown)
    }
}

impl FromIterator<Pos> for PosSet {
    fn from_iter<I: IntoIterator<Item = Pos>>(iter: I) -> Self {
        let mut s = PosSet::default();
        for p in iter {
            s.insert(p);
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TagSource {
    Lexicon,
    SuffixRule,
    Pretagged,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedToken {
    pub surface: String,
    pub pos: Pos,
    /// Full sense set behind `pos`.
    pub senses: PosSet,
    pub source: Option<TagSource>,
}

impl TaggedToken {
    pub fn can_be_adj(&self) -> bool {
        self.pos.is_adjectival() || self.senses.contains(Pos::Adj) || self.senses.contains(Pos::AdjLike)
    }

    pub fn can_be_noun(&self) -> bool {
        self.pos == Pos::Noun || self.senses.contains(Pos::Noun)
    }
}

#[derive(Debug, Clone, Default)]
pub struct PosLexicon {
    pub lang: String,
    entries: HashMap<String, PosSet>,
    /// Sorted longest suffix first.
    suffix_rules: Vec<(String, Pos)>,
}

impl PosLexicon {
    pub fn new(lang: &str) -> Self {
        PosLexicon {
            lang: normalize_key(lang),
            ..Default::default()
        }
    }

    pub fn insert(&mut self, word: &str, pos: Pos) {
        self.entries.entry(normalize_key(word)).or_default().insert(pos);
    }

    pub fn add_suffix_rule(&mut self, suffix: &str, pos: Pos) {
        self.suffix_rules.push((normalize_key(suffix), pos));
        // stable: equal-length suffixes keep file order
        self.suffix_rules
            .sort_by_key(|(s, _)| std::cmp::Reverse(s.chars().count()));
    }

    pub fn senses(&self, word: &str) -> PosSet {
        self.entries.get(word).copied().unwrap_or_default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Parses `word<TAB>POS[,POS...]` lines.
    pub fn parse_entries(&mut self, text: &str) -> std::result::Result<(), (usize, String)> {
        for (n, fields) in parse_tsv(text, 2)? {
            for label in fields[1].split(',') {
                let pos = Pos::parse_label(label).ok_or((n, format!("empty POS label for {:?}", fields[0])))?;
                self.insert(&fields[0], pos);
            }
        }
        Ok(())
    }

    /// Parses `suffix<TAB>POS` lines.
    pub fn parse_suffix_rules(&mut self, text: &str) -> std::result::Result<(), (usize, String)> {
        for (n, fields) in parse_tsv(text, 2)? {
            let pos = Pos::parse_label(&fields[1]).ok_or((n, "empty POS label".to_string()))?;
            self.add_suffix_rule(&fields[0], pos);
        }
        Ok(())
    }

    pub fn load(lang: &str, entries: &Path, suffix_rules: Option<&Path>) -> Result<Self> {
        let mut lex = PosLexicon::new(lang);
        lex.parse_entries(&read_to_string(entries)?)
            .map_err(|(n, m)| Error::parse(entries, n, m))?;
        if let Some(path) = suffix_rules {
            lex.parse_suffix_rules(&read_to_string(path)?)
                .map_err(|(n, m)| Error::parse(path, n, m))?;
        }
        Ok(lex)
    }

    fn tag_one(&self, token: &str) -> TaggedToken {
        let senses = self.senses(token);
        if !senses.is_empty() {
            return TaggedToken {
                surface: token.to_string(),
                pos: senses.primary(),
                senses,
                source: Some(TagSource::Lexicon),
            };
        }
        let len = token.chars().count();
        for (suffix, pos) in &self.suffix_rules {
            if len > suffix.chars().count() && token.ends_with(suffix.as_str()) {
                return TaggedToken {
                    surface: token.to_string(),
                    pos: *pos,
                    senses: std::iter::once(*pos).collect(),
                    source: Some(TagSource::SuffixRule),
                };
            }
        }
        TaggedToken {
            surface: token.to_string(),
            pos: Pos::Unknown,
            senses: PosSet::default(),
            source: None,
        }
    }
}

/// Labels each token: lexicon entry, then longest matching suffix rule,
/// otherwise UNKNOWN. Output is parallel to the input.
pub fn tag_tokens<S: AsRef<str>>(tokens: &[S], lexicon: &PosLexicon) -> Vec<TaggedToken> {
    tokens.iter().map(|t| lexicon.tag_one(t.as_ref())).collect()
}

/// Parses a pre-tagged tag made of whitespace-separated `surface/POS` tokens.
/// A token without a label is UNKNOWN.
pub fn parse_pretagged(tag: &str) -> Vec<TaggedToken> {
    tag.split(|c: char| c.is_whitespace() || c == SEGMENT_SEPARATOR)
        .filter(|t| !t.is_empty())
        .map(|tok| {
            let (surface, pos) = match tok.rsplit_once('/') {
                Some((s, l)) if !s.is_empty() => (s, Pos::parse_label(l).unwrap_or(Pos::Unknown)),
                _ => (tok, Pos::Unknown),
            };
            TaggedToken {
                surface: surface.to_string(),
                pos,
                senses: std::iter::once(pos).collect(),
                source: (pos != Pos::Unknown).then_some(TagSource::Pretagged),
            }
        })
        .collect()
}

/// A piece of a tokenized tag.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Segment {
    Word(String),
    /// A linking token such as Chinese 的 that may sit between adjective
    /// and noun.
    Connector(String),
}

/// Connectors recognized by default for a language.
pub fn default_connectors(lang: &str) -> Vec<String> {
    if lang.split(['-', '_']).next() == Some("zh") {
        vec!["的".to_string()]
    } else {
        Vec::new()
    }
}

/// Splits a tag into words and connectors.
///
/// Space-delimited scripts split on whitespace. Tags of unsegmented
/// languages are kept whole unless the corpus supplies boundaries (U+2028)
/// or a connector occurs inside them, in which case the tag splits around it.
pub fn segment_tag(tag: &str, lang: &str, connectors: &[String]) -> Vec<Segment> {
    let presegmented = tag.contains(SEGMENT_SEPARATOR);
    let pieces: Vec<&str> = if presegmented {
        tag.split(SEGMENT_SEPARATOR).map(str::trim).filter(|p| !p.is_empty()).collect()
    } else {
        tag.split_whitespace().collect()
    };
    let split_inside = !presegmented && is_unsegmented_lang(lang);
    let mut out = Vec::new();
    for piece in pieces {
        if connectors.iter().any(|c| c == piece) {
            out.push(Segment::Connector(piece.to_string()));
        } else if split_inside {
            split_around_connectors(piece, connectors, &mut out);
        } else {
            out.push(Segment::Word(piece.to_string()));
        }
    }
    out
}

fn split_around_connectors(piece: &str, connectors: &[String], out: &mut Vec<Segment>) {
    let mut rest = piece;
    while !rest.is_empty() {
        let next = connectors
            .iter()
            .filter(|c| !c.is_empty())
            .filter_map(|c| rest.find(c.as_str()).map(|i| (i, c)))
            .min_by_key(|(i, c)| (*i, std::cmp::Reverse(c.len())));
        match next {
            Some((i, c)) => {
                if i > 0 {
                    out.push(Segment::Word(rest[..i].to_string()));
                }
                out.push(Segment::Connector(c.clone()));
                rest = &rest[i + c.len()..];
            }
            None => {
                out.push(Segment::Word(rest.to_string()));
                break;
            }
        }
    }
}

/// Splits a tag into word tokens, dropping connectors.
pub fn tokenize_tag(tag: &str, lang: &str) -> Vec<String> {
    segment_tag(tag, lang, &default_connectors(lang))
        .into_iter()
        .filter_map(|s| match s {
            Segment::Word(w) => Some(w),
            Segment::Connector(_) => None,
        })
        .collect()
}
