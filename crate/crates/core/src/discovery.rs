//! Candidate adjective-noun pair discovery by exact co-occurrence inside a
//! single tag.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::corpus::{EmotionSeedSet, EmotionSlice, ImageRecord};
use crate::error::{Error, Result};
use crate::tagging::{default_connectors, parse_pretagged, segment_tag, tag_tokens, PosLexicon, Segment, TaggedToken};
use crate::text::normalize_key;

/// English frequency threshold; every other language keeps pairs seen once.
pub const ENGLISH_FREQ_THRESHOLD: u64 = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum WordOrder {
    AdjNoun,
    NounAdj,
}

/// Per-language discovery and filtering parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LanguageConfig {
    pub lang: String,
    pub orders: Vec<WordOrder>,
    pub connector_tokens: Vec<String>,
    pub freq_threshold: u64,
    /// Character folding applied to pair keys, e.g. traditional to
    /// simplified Chinese.
    #[serde(default)]
    pub script_merge: Option<BTreeMap<char, char>>,
    /// Tags are `surface/POS` tokens from an external tagger.
    #[serde(default)]
    pub pretagged: bool,
    /// Suffixes stripped to form stems when no stem table is given.
    #[serde(default)]
    pub stem_suffixes: Vec<String>,
}

impl LanguageConfig {
    /// Defaults for a language code: word orders by language family, 的 as
    /// connector for Chinese, frequency threshold 40 for English and 1
    /// otherwise.
    pub fn for_lang(lang: &str) -> Self {
        let lang = normalize_key(lang);
        let base = lang.split(['-', '_']).next().unwrap_or("").to_string();
        let orders = match base.as_str() {
            "en" | "de" | "nl" | "zh" | "ja" | "ru" | "pl" | "tr" => vec![WordOrder::AdjNoun],
            "ar" | "fa" => vec![WordOrder::NounAdj],
            _ => vec![WordOrder::AdjNoun, WordOrder::NounAdj],
        };
        let freq_threshold = if base == "en" { ENGLISH_FREQ_THRESHOLD } else { 1 };
        LanguageConfig {
            connector_tokens: default_connectors(&lang),
            lang,
            orders,
            freq_threshold,
            script_merge: None,
            pretagged: false,
            stem_suffixes: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.orders.is_empty() {
            return Err(Error::Config(format!("{}: no word orders configured", self.lang)));
        }
        if self.freq_threshold == 0 {
            return Err(Error::Config(format!("{}: frequency threshold must be >= 1", self.lang)));
        }
        Ok(())
    }

    pub fn is_english(&self) -> bool {
        self.lang == "en" || self.lang.starts_with("en-")
    }

    /// Folds a word into key form (script variants merged).
    pub fn fold(&self, word: &str) -> String {
        match &self.script_merge {
            Some(map) => word.chars().map(|c| *map.get(&c).unwrap_or(&c)).collect(),
            None => word.to_string(),
        }
    }
}

/// Key of an adjective-noun pair.
pub type AnpKey = (String, String);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnpCandidate {
    pub adj: String,
    pub noun: String,
    pub lang: String,
    pub image_ids: BTreeSet<String>,
    pub uploaders: BTreeSet<String>,
    /// `emotion_cooccur[i][j]`: images carrying the pair and keyword `j` of
    /// emotion `i + 1`.
    pub emotion_cooccur: Vec<Vec<u64>>,
    /// Occurrences of the pair as (part of) an image tag.
    pub tag_frequency: u64,
}

impl AnpCandidate {
    pub fn key(&self) -> AnpKey {
        (self.adj.clone(), self.noun.clone())
    }

    /// The pair written in its language's surface order is not tracked;
    /// this is the canonical `adj noun` phrase.
    pub fn phrase(&self) -> String {
        format!("{} {}", self.adj, self.noun)
    }
}

/// One pair occurrence inside a tag.
#[derive(Debug, Clone, PartialEq, Eq)]
struct PairHit {
    adj: String,
    noun: String,
}

enum Item {
    Word(TaggedToken),
    Connector,
}

fn tag_items(tag: &str, config: &LanguageConfig, lexicon: &PosLexicon) -> Vec<Item> {
    if config.pretagged {
        return parse_pretagged(tag)
            .into_iter()
            .map(|t| {
                if config.connector_tokens.contains(&t.surface) {
                    Item::Connector
                } else {
                    Item::Word(t)
                }
            })
            .collect();
    }
    let segments = segment_tag(tag, &config.lang, &config.connector_tokens);
    let words: Vec<&str> = segments
        .iter()
        .filter_map(|s| match s {
            Segment::Word(w) => Some(w.as_str()),
            Segment::Connector(_) => None,
        })
        .collect();
    let mut tagged = tag_tokens(&words, lexicon).into_iter();
    segments
        .iter()
        .map(|s| match s {
            Segment::Word(_) => Item::Word(tagged.next().expect("one tag per word")),
            Segment::Connector(_) => Item::Connector,
        })
        .collect()
}

/// All pair occurrences in one tag: adjacent words, or words separated by
/// exactly one connector, in any allowed order.
fn pairs_in_tag(tag: &str, config: &LanguageConfig, lexicon: &PosLexicon) -> Vec<PairHit> {
    let items = tag_items(tag, config, lexicon);
    let mut hits = Vec::new();
    for i in 0..items.len() {
        let Item::Word(left) = &items[i] else { continue };
        let first_here = hits.len();
        let right = match items.get(i + 1) {
            Some(Item::Word(w)) => w,
            Some(Item::Connector) => match items.get(i + 2) {
                Some(Item::Word(w)) => w,
                _ => continue,
            },
            None => continue,
        };
        for order in &config.orders {
            let (adj, noun) = match order {
                WordOrder::AdjNoun => (left, right),
                WordOrder::NounAdj => (right, left),
            };
            if adj.can_be_adj() && noun.can_be_noun() {
                let hit = PairHit {
                    adj: config.fold(&adj.surface),
                    noun: config.fold(&noun.surface),
                };
                if !hits[first_here..].contains(&hit) {
                    hits.push(hit);
                }
            }
        }
    }
    hits
}

fn empty_cooccur(seeds: &EmotionSeedSet) -> Vec<Vec<u64>> {
    seeds.keyword_counts().into_iter().map(|n| vec![0; n]).collect()
}

/// Collects candidate pairs from the tags of an emotion slice.
///
/// Candidates are returned sorted by tag frequency (descending) then key.
/// Co-occurrence counts are filled for the slice's emotion only; merging
/// candidates from all 24 slices yields the full matrix.
pub fn discover_candidates(
    slice: &EmotionSlice,
    seeds: &EmotionSeedSet,
    config: &LanguageConfig,
    lexicon: &PosLexicon,
) -> Vec<AnpCandidate> {
    let mut found: BTreeMap<AnpKey, AnpCandidate> = BTreeMap::new();
    let emotion_row = slice.emotion as usize;
    for image in &slice.images {
        let mut keys_in_image: BTreeSet<AnpKey> = BTreeSet::new();
        for tag in &image.tags {
            for hit in pairs_in_tag(tag, config, lexicon) {
                let key = (hit.adj, hit.noun);
                let cand = found.entry(key.clone()).or_insert_with(|| AnpCandidate {
                    adj: key.0.clone(),
                    noun: key.1.clone(),
                    lang: config.lang.clone(),
                    image_ids: BTreeSet::new(),
                    uploaders: BTreeSet::new(),
                    emotion_cooccur: empty_cooccur(seeds),
                    tag_frequency: 0,
                });
                cand.tag_frequency += 1;
                cand.image_ids.insert(image.id.clone());
                cand.uploaders.insert(image.uploader.clone());
                keys_in_image.insert(key);
            }
        }
        if keys_in_image.is_empty() {
            continue;
        }
        let tags: HashSet<&str> = image.tags.iter().map(String::as_str).collect();
        for key in &keys_in_image {
            let row = &mut found.get_mut(key).expect("inserted above").emotion_cooccur[emotion_row];
            for (j, kw) in slice.keywords.iter().enumerate() {
                if tags.contains(kw.as_str()) {
                    row[j] += 1;
                }
            }
        }
    }
    sorted(found.into_values().collect())
}

fn sorted(mut cands: Vec<AnpCandidate>) -> Vec<AnpCandidate> {
    cands.sort_by(|a, b| {
        b.tag_frequency
            .cmp(&a.tag_frequency)
            .then_with(|| a.adj.cmp(&b.adj))
            .then_with(|| a.noun.cmp(&b.noun))
    });
    cands
}

/// Merges candidates from several slices of one language.
pub fn merge_candidates(per_slice: Vec<Vec<AnpCandidate>>) -> Result<Vec<AnpCandidate>> {
    let mut lang: Option<String> = None;
    let mut merged: BTreeMap<AnpKey, AnpCandidate> = BTreeMap::new();
    for cand in per_slice.into_iter().flatten() {
        match &lang {
            None => lang = Some(cand.lang.clone()),
            Some(l) if *l != cand.lang => {
                return Err(Error::invalid(format!(
                    "cannot merge candidates of languages {l:?} and {:?}",
                    cand.lang
                )))
            }
            Some(_) => {}
        }
        match merged.get_mut(&cand.key()) {
            None => {
                merged.insert(cand.key(), cand);
            }
            Some(acc) => {
                acc.tag_frequency += cand.tag_frequency;
                acc.image_ids.extend(cand.image_ids);
                acc.uploaders.extend(cand.uploaders);
                if acc.emotion_cooccur.len() < cand.emotion_cooccur.len() {
                    acc.emotion_cooccur.resize(cand.emotion_cooccur.len(), Vec::new());
                }
                for (row, other) in acc.emotion_cooccur.iter_mut().zip(cand.emotion_cooccur) {
                    if row.len() < other.len() {
                        row.resize(other.len(), 0);
                    }
                    for (c, o) in row.iter_mut().zip(other) {
                        *c += o;
                    }
                }
            }
        }
    }
    Ok(sorted(merged.into_values().collect()))
}

/// Counts occurrences of every pair over a whole language corpus.
pub fn corpus_tag_frequencies(
    corpus: &[ImageRecord],
    config: &LanguageConfig,
    lexicon: &PosLexicon,
) -> HashMap<AnpKey, u64> {
    let mut counts = HashMap::new();
    for image in corpus {
        for tag in &image.tags {
            for hit in pairs_in_tag(tag, config, lexicon) {
                *counts.entry((hit.adj, hit.noun)).or_insert(0) += 1;
            }
        }
    }
    counts
}

/// Replaces slice-local tag frequencies with corpus-wide counts.
pub fn apply_corpus_frequencies(
    candidates: &mut Vec<AnpCandidate>,
    corpus: &[ImageRecord],
    config: &LanguageConfig,
    lexicon: &PosLexicon,
) {
    let counts = corpus_tag_frequencies(corpus, config, lexicon);
    for cand in candidates.iter_mut() {
        cand.tag_frequency = counts.get(&cand.key()).copied().unwrap_or(cand.tag_frequency);
    }
    let taken = std::mem::take(candidates);
    *candidates = sorted(taken);
}

/// One line of the candidate dump file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateLine {
    pub adj: String,
    pub noun: String,
    pub lang: String,
    pub tag_frequency: u64,
    pub n_images: usize,
    pub n_uploaders: usize,
    pub emotion_cooccur: Vec<Vec<u64>>,
    #[serde(default)]
    pub image_ids: Vec<String>,
    #[serde(default)]
    pub uploaders: Vec<String>,
}

impl From<&AnpCandidate> for CandidateLine {
    fn from(c: &AnpCandidate) -> Self {
        CandidateLine {
            adj: c.adj.clone(),
            noun: c.noun.clone(),
            lang: c.lang.clone(),
            tag_frequency: c.tag_frequency,
            n_images: c.image_ids.len(),
            n_uploaders: c.uploaders.len(),
            emotion_cooccur: c.emotion_cooccur.clone(),
            image_ids: c.image_ids.iter().cloned().collect(),
            uploaders: c.uploaders.iter().cloned().collect(),
        }
    }
}

impl CandidateLine {
    /// Rebuilds the candidate. Id and uploader sets are restored when the
    /// dump carries them; otherwise only their sizes survive, as synthetic
    /// placeholder members.
    pub fn into_candidate(self) -> AnpCandidate {
        let fill = |given: Vec<String>, n: usize, prefix: &str| -> BTreeSet<String> {
            if given.is_empty() && n > 0 {
                (0..n).map(|i| format!("{prefix}{i}")).collect()
            } else {
                given.into_iter().collect()
            }
        };
        AnpCandidate {
            image_ids: fill(self.image_ids, self.n_images, "#img"),
            uploaders: fill(self.uploaders, self.n_uploaders, "#up"),
            adj: self.adj,
            noun: self.noun,
            lang: self.lang,
            emotion_cooccur: self.emotion_cooccur,
            tag_frequency: self.tag_frequency,
        }
    }
}
