//! The run manifest: one TOML file naming every input, per-language
//! settings, stage seeds and tunables. Relative paths resolve against the
//! manifest's directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anpkit_core::analysis::DEFAULT_ALPHA;
use anpkit_core::corpus::DEFAULT_EMOTION_CAP;
use anpkit_core::crosslingual::DEFAULT_K1;
use anpkit_core::discovery::WordOrder;
use anpkit_core::filters::{MIN_UPLOADERS, PER_ADJECTIVE_CAP};
use anpkit_core::predict::{DEFAULT_EPOCHS, DEFAULT_LABEL_THRESHOLD, DEFAULT_LAMBDA, DEFAULT_MIN_IMAGES_PER_ANP};
use anpkit_core::LanguageConfig;
use anpkit_valsvc::{DEFAULT_MIN_JUDGMENTS, DEFAULT_PAGE_SIZE, DEFAULT_QUIZ_PASS_THRESHOLD};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const DEFAULT_THRESHOLDS: [u64; 6] = [0, 1, 10, 100, 1000, 10000];

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default)]
    pub seeds: Seeds,
    pub inputs: Inputs,
    pub languages: BTreeMap<String, LangInputs>,
    #[serde(default)]
    pub options: Options,
    /// Directory the manifest was read from.
    #[serde(skip)]
    pub base: PathBuf,
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

/// One seed per stochastic stage.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Seeds {
    #[serde(default)]
    pub validate: u64,
    #[serde(default)]
    pub cluster: u64,
    #[serde(default)]
    pub predict: u64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Inputs {
    pub seeds: PathBuf,
    pub english_sentiment: PathBuf,
    pub english_dictionary: PathBuf,
    pub named_entities: PathBuf,
    pub technical_terms: PathBuf,
    pub translations: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub english_pos: Option<PathBuf>,
    pub features: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LangInputs {
    pub corpus: PathBuf,
    pub pos_lexicon: PathBuf,
    pub suffix_rules: Option<PathBuf>,
    pub sentiment: PathBuf,
    pub dictionary: PathBuf,
    pub stem_table: Option<PathBuf>,
    pub test_questions: Option<PathBuf>,
    pub freq_threshold: Option<u64>,
    pub orders: Option<Vec<WordOrder>>,
    #[serde(default)]
    pub pretagged: bool,
    #[serde(default)]
    pub stem_suffixes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Options {
    pub emotion_cap: usize,
    pub corpus_frequencies: bool,
    pub min_uploaders: usize,
    pub per_adjective_cap: usize,
    pub subsample: bool,
    pub alpha: f64,
    pub smoothing_weight: Option<f64>,
    pub compare_thresholds: Vec<u64>,
    pub k1: usize,
    pub k2_max: usize,
    pub label_threshold: f64,
    pub min_images_per_anp: usize,
    pub lambda: f64,
    pub epochs: usize,
    pub min_judgments: usize,
    pub page_size: usize,
    pub quiz_pass_threshold: usize,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            emotion_cap: DEFAULT_EMOTION_CAP,
            corpus_frequencies: true,
            min_uploaders: MIN_UPLOADERS,
            per_adjective_cap: PER_ADJECTIVE_CAP,
            subsample: true,
            alpha: DEFAULT_ALPHA,
            smoothing_weight: None,
            compare_thresholds: DEFAULT_THRESHOLDS.to_vec(),
            k1: DEFAULT_K1,
            k2_max: 20,
            label_threshold: DEFAULT_LABEL_THRESHOLD,
            min_images_per_anp: DEFAULT_MIN_IMAGES_PER_ANP,
            lambda: DEFAULT_LAMBDA,
            epochs: DEFAULT_EPOCHS,
            min_judgments: DEFAULT_MIN_JUDGMENTS,
            page_size: DEFAULT_PAGE_SIZE,
            quiz_pass_threshold: DEFAULT_QUIZ_PASS_THRESHOLD,
        }
    }
}

impl Manifest {
    pub fn parse(text: &str, base: &Path) -> CliResult<Self> {
        let mut m: Manifest = toml::from_str(text).map_err(|e| CliError::validation(format!("manifest: {e}")))?;
        m.base = base.to_path_buf();
        Ok(m)
    }

    /// Reads and validates a manifest file.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let m = Self::parse(&text, &base)?;
        m.validate()?;
        Ok(m)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }

    pub fn out_dir(&self) -> PathBuf {
        self.resolve(&self.out)
    }

    pub fn langs(&self) -> Vec<String> {
        self.languages.keys().cloned().collect()
    }

    pub fn lang(&self, code: &str) -> CliResult<&LangInputs> {
        self.languages
            .get(code)
            .ok_or_else(|| CliError::validation(format!("language {code:?} is not configured in the manifest")))
    }

    pub fn language_config(&self, code: &str) -> CliResult<LanguageConfig> {
        let li = self.lang(code)?;
        let mut cfg = LanguageConfig::for_lang(code);
        if let Some(t) = li.freq_threshold {
            cfg.freq_threshold = t;
        }
        if let Some(o) = &li.orders {
            cfg.orders = o.clone();
        }
        cfg.pretagged = li.pretagged;
        cfg.stem_suffixes = li.stem_suffixes.clone();
        cfg.validate()?;
        Ok(cfg)
    }

    fn referenced_paths(&self) -> Vec<(String, &Path)> {
        let i = &self.inputs;
        let mut v: Vec<(String, &Path)> = vec![
            ("inputs.seeds".into(), &i.seeds),
            ("inputs.english_sentiment".into(), &i.english_sentiment),
            ("inputs.english_dictionary".into(), &i.english_dictionary),
            ("inputs.named_entities".into(), &i.named_entities),
            ("inputs.technical_terms".into(), &i.technical_terms),
        ];
        let optional = [
            ("inputs.translations", &i.translations),
            ("inputs.embeddings", &i.embeddings),
            ("inputs.english_pos", &i.english_pos),
            ("inputs.features", &i.features),
        ];
        v.extend(optional.into_iter().filter_map(|(k, p)| p.as_deref().map(|p| (k.to_string(), p))));
        for (code, li) in &self.languages {
            let k = |f: &str| format!("languages.{code}.{f}");
            v.push((k("corpus"), &li.corpus));
            v.push((k("pos_lexicon"), &li.pos_lexicon));
            v.push((k("sentiment"), &li.sentiment));
            v.push((k("dictionary"), &li.dictionary));
            for (f, p) in [
                ("suffix_rules", &li.suffix_rules),
                ("stem_table", &li.stem_table),
                ("test_questions", &li.test_questions),
            ] {
                if let Some(p) = p {
                    v.push((k(f), p));
                }
            }
        }
        v
    }

    /// Every referenced file must exist and every language config must be
    /// usable.
    pub fn validate(&self) -> CliResult<()> {
        if self.languages.is_empty() {
            return Err(CliError::validation("manifest lists no languages"));
        }
        let missing: Vec<String> = self
            .referenced_paths()
            .into_iter()
            .filter(|(_, p)| !self.resolve(p).is_file())
            .map(|(k, p)| format!("{k} = {}", p.display()))
            .collect();
        if !missing.is_empty() {
            return Err(CliError::validation(format!("manifest references missing files: {}", missing.join(", "))));
        }
        for code in self.languages.keys() {
            self.language_config(code)?;
        }
        let o = &self.options;
        if o.emotion_cap == 0 || o.k1 == 0 || o.epochs == 0 || o.page_size == 0 {
            return Err(CliError::validation("options: emotion_cap, k1, epochs and page_size must be positive"));
        }
        let positive = |x: f64| x > 0.0 && x.is_finite();
        if !positive(o.lambda) || !positive(o.alpha) || !positive(o.label_threshold) {
            return Err(CliError::validation("options: lambda, alpha and label_threshold must be positive"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[inputs]
seeds = "seeds.json"
english_sentiment = "en.tsv"
english_dictionary = "en.txt"
named_entities = "ne.txt"
technical_terms = "tech.txt"

[languages.en]
corpus = "en.jsonl"
pos_lexicon = "pos.tsv"
sentiment = "en.tsv"
dictionary = "en.txt"
"#;

    fn touch_all(dir: &Path) {
        for f in ["seeds.json", "en.tsv", "en.txt", "ne.txt", "tech.txt", "en.jsonl", "pos.tsv"] {
            std::fs::write(dir.join(f), "").unwrap();
        }
    }

    #[test]
    fn defaults_fill_in() {
        let m = Manifest::parse(MINIMAL, Path::new("/base")).unwrap();
        assert_eq!(m.out, PathBuf::from("out"));
        assert_eq!(m.out_dir(), PathBuf::from("/base/out"));
        assert_eq!(m.options, Options::default());
        assert_eq!(m.options.min_uploaders, 3);
        assert_eq!(m.options.per_adjective_cap, 100);
        assert_eq!(m.options.k1, 200);
        assert_eq!(m.seeds, Seeds::default());
        assert_eq!(m.language_config("en").unwrap().freq_threshold, 40);
    }

    #[test]
    fn missing_files_are_listed() {
        let dir = tempfile::tempdir().unwrap();
        let m = Manifest::parse(MINIMAL, dir.path()).unwrap();
        let err = m.validate().unwrap_err().to_string();
        assert!(err.contains("inputs.seeds = seeds.json"), "{err}");
        assert!(err.contains("languages.en.corpus"), "{err}");
        touch_all(dir.path());
        m.validate().unwrap();
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = format!("{MINIMAL}\n[options]\nbogus = 1\n");
        assert!(Manifest::parse(&text, Path::new(".")).is_err());
    }

    #[test]
    fn language_overrides_apply() {
        let text = MINIMAL.replace("pos_lexicon = \"pos.tsv\"\n", "pos_lexicon = \"pos.tsv\"\nfreq_threshold = 5\norders = [\"NOUN_ADJ\"]\n");
        let m = Manifest::parse(&text, Path::new(".")).unwrap();
        let cfg = m.language_config("en").unwrap();
        assert_eq!(cfg.freq_threshold, 5);
        assert_eq!(cfg.orders, vec![WordOrder::NounAdj]);
    }

    #[test]
    fn unknown_language_is_a_validation_error() {
        let m = Manifest::parse(MINIMAL, Path::new(".")).unwrap();
        assert_eq!(m.lang("xx").unwrap_err().exit_code(), 1);
    }
}
