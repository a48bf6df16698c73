//! Corpus data model, corpus file loading and per-emotion image retrieval.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::read_to_string;
use crate::text::{contains_word, nfc_trim, normalize_key};
use crate::NUM_EMOTIONS;

/// Default number of images retrieved per emotion.
pub const DEFAULT_EMOTION_CAP: usize = 50_000;

/// The 24 seed emotions in canonical order: eight basic emotions, each at
/// three intensities from strongest to weakest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Emotion {
    Ecstasy,
    Joy,
    Serenity,
    Admiration,
    Trust,
    Acceptance,
    Terror,
    Fear,
    Apprehension,
    Amazement,
    Surprise,
    Distraction,
    Grief,
    Sadness,
    Pensiveness,
    Loathing,
    Disgust,
    Boredom,
    Rage,
    Anger,
    Annoyance,
    Vigilance,
    Anticipation,
    Interest,
}

impl Emotion {
    pub const ALL: [Emotion; NUM_EMOTIONS] = [
        Emotion::Ecstasy,
        Emotion::Joy,
        Emotion::Serenity,
        Emotion::Admiration,
        Emotion::Trust,
        Emotion::Acceptance,
        Emotion::Terror,
        Emotion::Fear,
        Emotion::Apprehension,
        Emotion::Amazement,
        Emotion::Surprise,
        Emotion::Distraction,
        Emotion::Grief,
        Emotion::Sadness,
        Emotion::Pensiveness,
        Emotion::Loathing,
        Emotion::Disgust,
        Emotion::Boredom,
        Emotion::Rage,
        Emotion::Anger,
        Emotion::Annoyance,
        Emotion::Vigilance,
        Emotion::Anticipation,
        Emotion::Interest,
    ];

    /// Looks up an emotion by its 1-based index.
    pub fn from_index(index: usize) -> Option<Emotion> {
        index.checked_sub(1).and_then(|i| Self::ALL.get(i).copied())
    }

    /// 1-based index in canonical order.
    pub fn index(self) -> usize {
        self as usize + 1
    }

    pub fn name(self) -> &'static str {
        const NAMES: [&str; NUM_EMOTIONS] = [
            "ecstasy", "joy", "serenity", "admiration", "trust", "acceptance", "terror", "fear",
            "apprehension", "amazement", "surprise", "distraction", "grief", "sadness",
            "pensiveness", "loathing", "disgust", "boredom", "rage", "anger", "annoyance",
            "vigilance", "anticipation", "interest",
        ];
        NAMES[self as usize]
    }
}

impl fmt::Display for Emotion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One image's metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageRecord {
    pub id: String,
    pub uploader: String,
    pub lang: String,
    /// Tags in matching form (NFC, trimmed, lowercased).
    pub tags: Vec<String>,
    /// Tags as written (NFC, trimmed), parallel to `tags`.
    pub raw_tags: Vec<String>,
    pub title: String,
    pub description: String,
    /// Lower is more relevant. Falls back to the record's position in the
    /// file when the corpus does not provide it.
    pub relevance_rank: u64,
    pub upload_time: i64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawImageRecord {
    id: Option<String>,
    uploader: Option<String>,
    lang: Option<String>,
    #[serde(default)]
    tags: Vec<String>,
    #[serde(default)]
    title: String,
    #[serde(default)]
    description: String,
    relevance_rank: Option<u64>,
    upload_time: Option<i64>,
}

/// Per-line problem encountered while loading a corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineDiagnostic {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Default)]
pub struct CorpusLoad {
    pub records: Vec<ImageRecord>,
    pub diagnostics: Vec<LineDiagnostic>,
    /// Records dropped because `id` or `uploader` was missing or empty.
    pub skipped_missing_key: usize,
    /// Records whose `lang` differs from the requested language.
    pub skipped_other_lang: usize,
}

/// Loads a JSON-lines corpus file, keeping records of language `lang`.
pub fn load_corpus(path: &Path, lang: &str) -> Result<CorpusLoad> {
    let text = read_to_string(path)?;
    Ok(parse_corpus(&text, lang))
}

pub fn parse_corpus(text: &str, lang: &str) -> CorpusLoad {
    let lang = normalize_key(lang);
    let mut load = CorpusLoad::default();
    let mut seen = HashSet::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawImageRecord = match serde_json::from_str(line) {
            Ok(r) => r,
            Err(e) => {
                load.diagnostics.push(LineDiagnostic {
                    line: line_no,
                    message: e.to_string(),
                });
                continue;
            }
        };
        let id = raw.id.as_deref().map(nfc_trim).unwrap_or_default();
        let uploader = raw.uploader.as_deref().map(nfc_trim).unwrap_or_default();
        if id.is_empty() || uploader.is_empty() {
            load.skipped_missing_key += 1;
            continue;
        }
        let rec_lang = raw.lang.as_deref().map(normalize_key).unwrap_or_else(|| lang.clone());
        if rec_lang != lang {
            load.skipped_other_lang += 1;
            continue;
        }
        if !seen.insert(id.clone()) {
            load.diagnostics.push(LineDiagnostic {
                line: line_no,
                message: format!("duplicate image id {id:?}"),
            });
            continue;
        }
        let mut tags = Vec::with_capacity(raw.tags.len());
        let mut raw_tags = Vec::with_capacity(raw.tags.len());
        for t in &raw.tags {
            let display = nfc_trim(t);
            if display.is_empty() {
                continue;
            }
            tags.push(display.to_lowercase());
            raw_tags.push(display);
        }
        load.records.push(ImageRecord {
            id,
            uploader,
            lang: rec_lang,
            tags,
            raw_tags,
            title: nfc_trim(&raw.title),
            description: nfc_trim(&raw.description),
            relevance_rank: raw.relevance_rank.unwrap_or(idx as u64),
            upload_time: raw.upload_time.unwrap_or(0),
        });
    }
    load
}

/// Ranked seed keywords for each of the 24 emotions in one language.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmotionSeedSet {
    pub lang: String,
    /// `keywords[i]` lists keywords of emotion `i + 1`, best first.
    keywords: Vec<Vec<String>>,
}

impl EmotionSeedSet {
    pub fn new(lang: &str, keywords: Vec<Vec<String>>) -> Result<Self> {
        if keywords.len() != NUM_EMOTIONS {
            return Err(Error::invalid(format!(
                "seed set for {lang:?} has {} emotions, expected {NUM_EMOTIONS}",
                keywords.len()
            )));
        }
        let mut normalized = Vec::with_capacity(NUM_EMOTIONS);
        for (i, list) in keywords.into_iter().enumerate() {
            let list: Vec<String> = list
                .iter()
                .map(|k| normalize_key(k))
                .filter(|k| !k.is_empty())
                .collect();
            if list.is_empty() {
                return Err(Error::invalid(format!(
                    "seed set for {lang:?}: emotion {} has no keywords",
                    Emotion::ALL[i]
                )));
            }
            normalized.push(list);
        }
        Ok(EmotionSeedSet {
            lang: normalize_key(lang),
            keywords: normalized,
        })
    }

    pub fn keywords(&self, emotion: Emotion) -> &[String] {
        &self.keywords[emotion as usize]
    }

    /// Number of keywords per emotion, in canonical order.
    pub fn keyword_counts(&self) -> Vec<usize> {
        self.keywords.iter().map(Vec::len).collect()
    }
}

/// Parses a seed file: a JSON object mapping language code to 24 keyword
/// arrays in canonical emotion order.
pub fn parse_seed_file(text: &str) -> Result<BTreeMap<String, EmotionSeedSet>> {
    let raw: BTreeMap<String, Vec<Vec<String>>> =
        serde_json::from_str(text).map_err(|e| Error::invalid(format!("seed file: {e}")))?;
    raw.into_iter()
        .map(|(lang, kws)| {
            let set = EmotionSeedSet::new(&lang, kws)?;
            Ok((set.lang.clone(), set))
        })
        .collect()
}

pub fn load_seed_file(path: &Path) -> Result<BTreeMap<String, EmotionSeedSet>> {
    parse_seed_file(&read_to_string(path)?).map_err(|e| match e {
        Error::InvalidInput(m) => Error::Config(format!("{}: {m}", path.display())),
        other => other,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SliceSource {
    TagOnly,
    TagPlusMetadata,
}

/// Images retrieved for one emotion.
#[derive(Debug, Clone, PartialEq)]
pub struct EmotionSlice {
    pub emotion: Emotion,
    /// The emotion's seed keywords, in rank order.
    pub keywords: Vec<String>,
    pub images: Vec<ImageRecord>,
    pub source: SliceSource,
}

/// Retrieves up to `cap` images for an emotion.
///
/// Images carrying a seed keyword as a whole tag come first, ordered by
/// relevance rank then id. When fewer than `cap` match, images whose title or
/// description contains a keyword at a word boundary are appended in the same
/// order.
pub fn query_emotion_slice(
    corpus: &[ImageRecord],
    seeds: &EmotionSeedSet,
    emotion: Emotion,
    cap: usize,
) -> Result<EmotionSlice> {
    if cap == 0 {
        return Err(Error::invalid("emotion slice cap must be at least 1"));
    }
    let keywords = seeds.keywords(emotion).to_vec();
    let kw_set: HashSet<&str> = keywords.iter().map(String::as_str).collect();

    let by_rank = |a: &&ImageRecord, b: &&ImageRecord| {
        a.relevance_rank.cmp(&b.relevance_rank).then_with(|| a.id.cmp(&b.id))
    };

    let mut tagged: Vec<&ImageRecord> = corpus
        .iter()
        .filter(|img| img.tags.iter().any(|t| kw_set.contains(t.as_str())))
        .collect();
    tagged.sort_by(by_rank);
    tagged.truncate(cap);

    let mut source = SliceSource::TagOnly;
    if tagged.len() < cap {
        let taken: HashSet<&str> = tagged.iter().map(|i| i.id.as_str()).collect();
        let mut extra: Vec<&ImageRecord> = corpus
            .iter()
            .filter(|img| !taken.contains(img.id.as_str()))
            .filter(|img| {
                let title = img.title.to_lowercase();
                let desc = img.description.to_lowercase();
                keywords
                    .iter()
                    .any(|k| contains_word(&title, k) || contains_word(&desc, k))
            })
            .collect();
        extra.sort_by(by_rank);
        extra.truncate(cap - tagged.len());
        if !extra.is_empty() {
            source = SliceSource::TagPlusMetadata;
            tagged.extend(extra);
        }
    }

    Ok(EmotionSlice {
        emotion,
        keywords,
        images: tagged.into_iter().cloned().collect(),
        source,
    })
}
