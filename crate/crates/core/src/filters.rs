//! The automatic filter cascade turning merged candidates into the
//! pre-crowdsourcing ontology.
//!
//! Filters run in a fixed order and every decision is written to the
//! record's trace:
//!
//! 1. language: both words in the target-language dictionary
//! 2. semantics: no named entity or platform jargon
//! 3. sentiment: non-zero pair sentiment
//! 4. frequency: tag frequency at or above the language threshold
//! 5. diversity: enough distinct uploaders
//! 6. subsampling: the most frequent pairs per adjective
//! 7. stem unification: one inflected form per (adjective, noun) stem pair

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::crosslingual::Translator;
use crate::discovery::{AnpCandidate, AnpKey, LanguageConfig};
use crate::error::{Error, Result};
use crate::io::{parse_tsv, read_to_string, read_word_set};
use crate::text::normalize_key;

pub const MIN_UPLOADERS: usize = 3;
pub const PER_ADJECTIVE_CAP: usize = 100;

/// Word-level sentiment scores in [-1, +1].
#[derive(Debug, Clone, Default)]
pub struct SentimentLexicon {
    pub lang: String,
    pub name: String,
    scores: HashMap<String, f64>,
}

impl SentimentLexicon {
    pub fn new(lang: &str, name: &str) -> Self {
        SentimentLexicon {
            lang: normalize_key(lang),
            name: name.to_string(),
            scores: HashMap::new(),
        }
    }

    pub fn insert(&mut self, word: &str, score: f64) -> Result<()> {
        if !(-1.0..=1.0).contains(&score) {
            return Err(Error::invalid(format!("{}: score {score} for {word:?} outside [-1, 1]", self.name)));
        }
        self.scores.insert(normalize_key(word), score);
        Ok(())
    }

    pub fn score(&self, word: &str) -> Option<f64> {
        self.scores.get(word).copied()
    }

    /// Parses `word<TAB>score` lines.
    pub fn parse(lang: &str, name: &str, text: &str) -> std::result::Result<Self, (usize, String)> {
        let mut lex = SentimentLexicon::new(lang, name);
        for (n, fields) in parse_tsv(text, 2)? {
            let score: f64 = fields[1]
                .trim()
                .parse()
                .map_err(|_| (n, format!("bad score {:?}", fields[1])))?;
            lex.insert(&fields[0], score).map_err(|e| (n, e.to_string()))?;
        }
        Ok(lex)
    }

    pub fn load(lang: &str, path: &Path) -> Result<Self> {
        let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let text = read_to_string(path).map_err(config_error)?;
        Self::parse(lang, &name, &text).map_err(|(n, m)| Error::parse(path, n, m))
    }
}

fn config_error(e: Error) -> Error {
    match e {
        Error::Io { path, source } => Error::Config(format!("cannot read {}: {source}", path.display())),
        other => other,
    }
}

#[derive(Debug, Clone, Default)]
pub struct Blocklists {
    pub named_entities: HashSet<String>,
    pub technical_terms: HashSet<String>,
    pub language_dictionary: HashSet<String>,
    pub english_dictionary: HashSet<String>,
}

impl Blocklists {
    pub fn load(
        named_entities: &Path,
        technical_terms: &Path,
        language_dictionary: &Path,
        english_dictionary: &Path,
    ) -> Result<Self> {
        let read = |p: &Path| read_word_set(p).map_err(config_error);
        Ok(Blocklists {
            named_entities: read(named_entities)?,
            technical_terms: read(technical_terms)?,
            language_dictionary: read(language_dictionary)?,
            english_dictionary: read(english_dictionary)?,
        })
    }

    fn is_blocked(&self, term: &str) -> bool {
        self.named_entities.contains(term) || self.technical_terms.contains(term)
    }
}

/// Maps inflected forms to stems: a lookup table when one is supplied,
/// else longest-suffix stripping.
#[derive(Debug, Clone)]
pub enum Stemmer {
    Table(HashMap<String, String>),
    Suffixes(Vec<String>),
}

impl Stemmer {
    pub fn parse_table(text: &str) -> std::result::Result<Self, (usize, String)> {
        let rows = parse_tsv(text, 2)?;
        Ok(Stemmer::Table(
            rows.into_iter()
                .map(|(_, f)| (normalize_key(&f[0]), normalize_key(&f[1])))
                .collect(),
        ))
    }

    pub fn load_table(path: &Path) -> Result<Self> {
        let text = read_to_string(path).map_err(config_error)?;
        Self::parse_table(&text).map_err(|(n, m)| Error::parse(path, n, m))
    }

    /// Picks the stemmer for a language: the table if given, else the
    /// configured suffixes, else none (unification skipped).
    pub fn for_config(table: Option<Stemmer>, config: &LanguageConfig) -> Option<Stemmer> {
        table.or_else(|| {
            (!config.stem_suffixes.is_empty()).then(|| {
                let mut sfx: Vec<String> = config.stem_suffixes.iter().map(|s| normalize_key(s)).collect();
                sfx.sort_by_key(|s| std::cmp::Reverse(s.chars().count()));
                Stemmer::Suffixes(sfx)
            })
        })
    }

    pub fn stem(&self, word: &str) -> String {
        match self {
            Stemmer::Table(t) => t.get(word).cloned().unwrap_or_else(|| word.to_string()),
            Stemmer::Suffixes(sfx) => {
                let len = word.chars().count();
                sfx.iter()
                    .find(|s| len > s.chars().count() + 1 && word.ends_with(s.as_str()))
                    .map(|s| word[..word.len() - s.len()].to_string())
                    .unwrap_or_else(|| word.to_string())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterName {
    Language,
    Semantics,
    Sentiment,
    Frequency,
    Diversity,
    Subsampling,
    StemUnification,
}

impl FilterName {
    pub fn as_str(self) -> &'static str {
        match self {
            FilterName::Language => "language",
            FilterName::Semantics => "semantics",
            FilterName::Sentiment => "sentiment",
            FilterName::Frequency => "frequency",
            FilterName::Diversity => "diversity",
            FilterName::Subsampling => "subsampling",
            FilterName::StemUnification => "stem_unification",
        }
    }
}

impl FromStr for FilterName {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "language" => FilterName::Language,
            "semantics" => FilterName::Semantics,
            "sentiment" => FilterName::Sentiment,
            "frequency" => FilterName::Frequency,
            "diversity" => FilterName::Diversity,
            "subsampling" => FilterName::Subsampling,
            "stem_unification" => FilterName::StemUnification,
            other => return Err(format!("unknown filter {other:?}")),
        })
    }
}

/// Lifecycle status of a pair. Serialized as `CANDIDATE`, `PRE_CROWD`,
/// `ACCEPTED`, `REJECTED` or `FILTERED(<filter>)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum AnpStatus {
    Candidate,
    Filtered(FilterName),
    PreCrowd,
    Accepted,
    Rejected,
}

impl fmt::Display for AnpStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnpStatus::Candidate => f.write_str("CANDIDATE"),
            AnpStatus::Filtered(r) => write!(f, "FILTERED({})", r.as_str()),
            AnpStatus::PreCrowd => f.write_str("PRE_CROWD"),
            AnpStatus::Accepted => f.write_str("ACCEPTED"),
            AnpStatus::Rejected => f.write_str("REJECTED"),
        }
    }
}

impl From<AnpStatus> for String {
    fn from(s: AnpStatus) -> String {
        s.to_string()
    }
}

impl TryFrom<String> for AnpStatus {
    type Error = String;

    fn try_from(s: String) -> std::result::Result<Self, String> {
        Ok(match s.as_str() {
            "CANDIDATE" => AnpStatus::Candidate,
            "PRE_CROWD" => AnpStatus::PreCrowd,
            "ACCEPTED" => AnpStatus::Accepted,
            "REJECTED" => AnpStatus::Rejected,
            other => {
                let inner = other
                    .strip_prefix("FILTERED(")
                    .and_then(|r| r.strip_suffix(')'))
                    .ok_or_else(|| format!("unknown status {other:?}"))?;
                AnpStatus::Filtered(inner.parse()?)
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub filter: FilterName,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// A pair with its sentiment, counts and filter history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnpRecord {
    pub adj: String,
    pub noun: String,
    pub lang: String,
    /// Pair sentiment in [-2, +2].
    pub sentiment: f64,
    pub adj_sentiment: f64,
    pub noun_sentiment: f64,
    pub tag_frequency: u64,
    pub image_ids: BTreeSet<String>,
    pub uploaders: BTreeSet<String>,
    pub emotion_cooccur: Vec<Vec<u64>>,
    pub status: AnpStatus,
    pub filter_trace: Vec<TraceEntry>,
}

impl AnpRecord {
    pub fn key(&self) -> AnpKey {
        (self.adj.clone(), self.noun.clone())
    }

    pub fn phrase(&self) -> String {
        format!("{} {}", self.adj, self.noun)
    }

    /// Number of images tagged with the pair.
    pub fn image_count(&self) -> usize {
        self.image_ids.len()
    }

    /// True for records that made it into an ontology (pre- or post-crowd).
    pub fn in_ontology(&self) -> bool {
        matches!(self.status, AnpStatus::PreCrowd | AnpStatus::Accepted)
    }

    fn fail(&mut self, filter: FilterName, note: Option<String>) {
        self.filter_trace.push(TraceEntry { filter, pass: false, note });
        self.status = AnpStatus::Filtered(filter);
    }

    fn pass(&mut self, filter: FilterName, note: Option<String>) {
        self.filter_trace.push(TraceEntry { filter, pass: true, note });
    }

    fn alive(&self) -> bool {
        self.status == AnpStatus::Candidate
    }
}

/// Mean of the word's score in the language's own lexicon and the English
/// lexicon score of its translation. A missing score counts as 0.
pub fn word_sentiment(
    word: &str,
    primary: &SentimentLexicon,
    english: &SentimentLexicon,
    translator: &dyn Translator,
) -> f64 {
    let own = primary.score(word).unwrap_or(0.0);
    let translated = translator
        .translate(&primary.lang, word)
        .and_then(|w| english.score(&normalize_key(&w)))
        .unwrap_or(0.0);
    (own + translated) / 2.0
}

/// Pair sentiment: the adjective alone when the two scores have strictly
/// opposite signs, otherwise their sum. A zero score never counts as a sign
/// conflict.
pub fn anp_sentiment(s_adj: f64, s_noun: f64) -> f64 {
    if s_adj * s_noun < 0.0 {
        s_adj
    } else {
        s_adj + s_noun
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterOptions {
    pub min_uploaders: usize,
    pub per_adjective_cap: usize,
    /// Disable to reproduce comparisons run without subsampling.
    pub subsample: bool,
}

impl Default for FilterOptions {
    fn default() -> Self {
        FilterOptions {
            min_uploaders: MIN_UPLOADERS,
            per_adjective_cap: PER_ADJECTIVE_CAP,
            subsample: true,
        }
    }
}

/// Lexicons and word lists consulted by the cascade.
pub struct FilterResources<'a> {
    pub primary: &'a SentimentLexicon,
    pub english: &'a SentimentLexicon,
    pub blocklists: &'a Blocklists,
    pub translator: &'a dyn Translator,
    pub stemmer: Option<&'a Stemmer>,
}

fn language_check(word: &str, config: &LanguageConfig, lists: &Blocklists) -> std::result::Result<(), String> {
    if lists.language_dictionary.contains(word) {
        return Ok(());
    }
    if !config.is_english() && lists.english_dictionary.contains(word) {
        Err(format!("{word:?} is English, not {}", config.lang))
    } else {
        Err(format!("{word:?} not in {} dictionary", config.lang))
    }
}

/// Runs the cascade. Every candidate comes back as a record: survivors with
/// status PRE_CROWD, the rest FILTERED by the first filter they failed.
pub fn apply_filters(
    candidates: &[AnpCandidate],
    config: &LanguageConfig,
    res: &FilterResources<'_>,
    opts: &FilterOptions,
) -> Result<Vec<AnpRecord>> {
    config.validate()?;
    let mut records: Vec<AnpRecord> = Vec::with_capacity(candidates.len());
    let mut seen = HashSet::new();
    for c in candidates {
        if !seen.insert(c.key()) {
            return Err(Error::invalid(format!("candidate {:?} appears twice; merge first", c.phrase())));
        }
        let s_adj = word_sentiment(&c.adj, res.primary, res.english, res.translator);
        let s_noun = word_sentiment(&c.noun, res.primary, res.english, res.translator);
        let mut r = AnpRecord {
            adj: c.adj.clone(),
            noun: c.noun.clone(),
            lang: c.lang.clone(),
            sentiment: anp_sentiment(s_adj, s_noun),
            adj_sentiment: s_adj,
            noun_sentiment: s_noun,
            tag_frequency: c.tag_frequency,
            image_ids: c.image_ids.clone(),
            uploaders: c.uploaders.clone(),
            emotion_cooccur: c.emotion_cooccur.clone(),
            status: AnpStatus::Candidate,
            filter_trace: Vec::new(),
        };
        per_record_filters(&mut r, config, res.blocklists, opts);
        records.push(r);
    }

    if opts.subsample {
        subsample(&mut records, opts.per_adjective_cap);
    }
    match res.stemmer {
        Some(stemmer) => unify_stems(&mut records, stemmer),
        None => {
            for r in records.iter_mut().filter(|r| r.alive()) {
                r.pass(FilterName::StemUnification, Some("no stemmer configured".into()));
            }
        }
    }
    for r in records.iter_mut().filter(|r| r.alive()) {
        r.status = AnpStatus::PreCrowd;
    }
    Ok(records)
}

fn per_record_filters(r: &mut AnpRecord, config: &LanguageConfig, lists: &Blocklists, opts: &FilterOptions) {
    if let Err(note) = language_check(&r.adj, config, lists).and_then(|_| language_check(&r.noun, config, lists)) {
        return r.fail(FilterName::Language, Some(note));
    }
    r.pass(FilterName::Language, None);

    let phrase = r.phrase();
    let blocked = [&r.adj, &r.noun, &phrase].into_iter().find(|t| lists.is_blocked(t)).cloned();
    if let Some(hit) = blocked {
        let note = format!("{hit:?} is a named entity or technical term");
        return r.fail(FilterName::Semantics, Some(note));
    }
    r.pass(FilterName::Semantics, None);

    if r.sentiment == 0.0 {
        return r.fail(FilterName::Sentiment, None);
    }
    r.pass(FilterName::Sentiment, None);

    if r.tag_frequency < config.freq_threshold {
        let note = format!("{} < {}", r.tag_frequency, config.freq_threshold);
        return r.fail(FilterName::Frequency, Some(note));
    }
    r.pass(FilterName::Frequency, None);

    if r.uploaders.len() < opts.min_uploaders {
        let note = format!("{} uploaders < {}", r.uploaders.len(), opts.min_uploaders);
        return r.fail(FilterName::Diversity, Some(note));
    }
    r.pass(FilterName::Diversity, None);
}

fn subsample(records: &mut [AnpRecord], cap: usize) {
    let mut by_adj: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (i, r) in records.iter().enumerate().filter(|(_, r)| r.alive()) {
        by_adj.entry(r.adj.clone()).or_default().push(i);
    }
    for idxs in by_adj.values_mut() {
        idxs.sort_by(|&a, &b| {
            records[b]
                .tag_frequency
                .cmp(&records[a].tag_frequency)
                .then_with(|| records[a].noun.cmp(&records[b].noun))
        });
        for (rank, &i) in idxs.iter().enumerate() {
            if rank < cap {
                records[i].pass(FilterName::Subsampling, None);
            } else {
                let note = format!("rank {} under adjective {:?}", rank + 1, records[i].adj);
                records[i].fail(FilterName::Subsampling, Some(note));
            }
        }
    }
}

fn unify_stems(records: &mut [AnpRecord], stemmer: &Stemmer) {
    let mut groups: BTreeMap<(String, String), Vec<usize>> = BTreeMap::new();
    for (i, r) in records.iter().enumerate().filter(|(_, r)| r.alive()) {
        groups
            .entry((stemmer.stem(&r.adj), stemmer.stem(&r.noun)))
            .or_default()
            .push(i);
    }
    for idxs in groups.values() {
        let winner = *idxs
            .iter()
            .min_by(|&&a, &&b| {
                records[b]
                    .tag_frequency
                    .cmp(&records[a].tag_frequency)
                    .then_with(|| records[a].key().cmp(&records[b].key()))
            })
            .expect("non-empty group");
        let winner_phrase = records[winner].phrase();
        for &i in idxs {
            if i == winner {
                records[i].pass(FilterName::StemUnification, None);
            } else {
                let note = format!("inflection of {winner_phrase:?}");
                records[i].fail(FilterName::StemUnification, Some(note));
            }
        }
    }
}
