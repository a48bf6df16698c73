use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filters::{AnpRecord, Blocklists};
use crate::io::{parse_tsv, read_to_string};
use crate::text::normalize_key;

/// Source of pivot-language (English) translations.
pub trait Translator {
    fn translate(&self, lang: &str, phrase: &str) -> Option<String>;
}

/// File-backed translation table keyed by `(lang, phrase)`. English input
/// translates to itself.
#[derive(Debug, Clone, Default)]
pub struct TranslationTable {
    entries: HashMap<(String, String), String>,
    pub source: Option<PathBuf>,
}

impl TranslationTable {
    pub fn insert(&mut self, lang: &str, phrase: &str, english: &str) {
        self.entries
            .insert((normalize_key(lang), normalize_key(phrase)), normalize_key(english));
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Parses `lang<TAB>phrase<TAB>english_phrase` lines.
    pub fn parse(text: &str) -> std::result::Result<Self, (usize, String)> {
        let mut table = TranslationTable::default();
        for (_, f) in parse_tsv(text, 3)? {
            table.insert(&f[0], &f[1], &f[2]);
        }
        Ok(table)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut table = Self::parse(&read_to_string(path)?).map_err(|(n, m)| Error::parse(path, n, m))?;
        table.source = Some(path.to_path_buf());
        Ok(table)
    }
}

fn is_english(lang: &str) -> bool {
    lang == "en" || lang.starts_with("en-")
}

impl Translator for TranslationTable {
    fn translate(&self, lang: &str, phrase: &str) -> Option<String> {
        let lang = normalize_key(lang);
        let phrase = normalize_key(phrase);
        if is_english(&lang) {
            return Some(phrase);
        }
        self.entries.get(&(lang, phrase)).cloned()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranslatedAnp {
    pub lang: String,
    pub adj: String,
    pub noun: String,
    pub english: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TranslatedSet {
    pub translated: Vec<TranslatedAnp>,
    /// Pairs with no table entry.
    pub untranslated: Vec<(String, String)>,
    /// Pairs whose translation failed the English word checks, with reason.
    pub invalid: Vec<(String, String, String)>,
}

impl TranslatedSet {
    /// Distinct English phrases, sorted.
    pub fn phrases(&self) -> std::collections::BTreeSet<String> {
        self.translated.iter().map(|t| t.english.clone()).collect()
    }
}

/// Surface forms under which a pair may appear in a translation table.
fn lookup_forms(adj: &str, noun: &str) -> [String; 4] {
    [
        format!("{adj} {noun}"),
        format!("{noun} {adj}"),
        format!("{adj}{noun}"),
        format!("{noun}{adj}"),
    ]
}

fn english_check(phrase: &str, lists: &Blocklists) -> std::result::Result<(), String> {
    if lists.named_entities.contains(phrase) || lists.technical_terms.contains(phrase) {
        return Err(format!("{phrase:?} is blocked"));
    }
    for w in phrase.split_whitespace() {
        if lists.named_entities.contains(w) || lists.technical_terms.contains(w) {
            return Err(format!("{w:?} is blocked"));
        }
        if !lists.english_dictionary.is_empty() && !lists.english_dictionary.contains(w) {
            return Err(format!("{w:?} not in English dictionary"));
        }
    }
    Ok(())
}

/// Maps every ontology pair to its English phrase. Untranslatable pairs and
/// translations failing the English checks are set aside, not errors.
pub fn translate_ontologies(
    ontologies: &BTreeMap<String, Vec<AnpRecord>>,
    translator: &dyn Translator,
    english_checks: Option<&Blocklists>,
) -> BTreeMap<String, TranslatedSet> {
    let mut out = BTreeMap::new();
    for (lang, records) in ontologies {
        let mut set = TranslatedSet::default();
        for r in records {
            let english = lookup_forms(&r.adj, &r.noun)
                .iter()
                .find_map(|form| translator.translate(lang, form));
            let Some(english) = english else {
                set.untranslated.push((r.adj.clone(), r.noun.clone()));
                continue;
            };
            if let Some(lists) = english_checks {
                if let Err(reason) = english_check(&english, lists) {
                    set.invalid.push((r.adj.clone(), r.noun.clone(), reason));
                    continue;
                }
            }
            set.translated.push(TranslatedAnp {
                lang: lang.clone(),
                adj: r.adj.clone(),
                noun: r.noun.clone(),
                english,
            });
        }
        out.insert(lang.clone(), set);
    }
    out
}
