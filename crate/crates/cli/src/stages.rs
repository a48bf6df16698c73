//! Pipeline stages. Each reads its inputs from the manifest and earlier
//! stage outputs under the output directory, and writes its own outputs
//! with a provenance header.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anpkit_core::analysis::{
    compare_ontologies, heatmap_tsv, language_emotion_scores, median_sentiment, SmoothingTable,
};
use anpkit_core::corpus::{load_corpus, load_seed_file, query_emotion_slice, SliceSource};
use anpkit_core::crosslingual::{
    build_cluster_tree, cluster_alignment, exact_alignment, translate_ontologies, ElbowOptions, EmbeddingStore,
    TranslationTable, TreeOptions,
};
use anpkit_core::discovery::{apply_corpus_frequencies, discover_candidates, merge_candidates, CandidateLine};
use anpkit_core::filters::{apply_filters, Blocklists, FilterOptions, FilterResources, SentimentLexicon, Stemmer};
use anpkit_core::io::{read_jsonl, read_to_string, read_word_set, to_jsonl};
use anpkit_core::predict::{cross_predict, label_images, make_splits, train_per_language, FeatureSet, TrainOptions};
use anpkit_core::tagging::PosLexicon;
use anpkit_core::{AnpRecord, AnpStatus, Emotion};
use anpkit_valsvc::{parse_judgment_csv, ImportRow, JobSpec, Service, SvcError, TestQuestion};
use serde_json::json;

use crate::error::{CliError, CliResult};
use crate::manifest::Manifest;
use crate::provenance::{portable, Provenance};

/// Everything a stage needs: the validated manifest plus command-line
/// overrides.
pub struct Ctx {
    pub manifest: Manifest,
    pub out: PathBuf,
    pub lang: Option<String>,
    pub seed: Option<u64>,
}

/// Which ontology a downstream stage reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    PreCrowd,
    PostCrowd,
}

impl Ctx {
    pub fn new(manifest: Manifest, out: Option<PathBuf>, lang: Option<String>, seed: Option<u64>) -> CliResult<Self> {
        if let Some(l) = &lang {
            manifest.lang(l)?;
        }
        let out = out.unwrap_or_else(|| manifest.out_dir());
        Ok(Ctx {
            manifest,
            out,
            lang,
            seed,
        })
    }

    fn langs(&self) -> Vec<String> {
        match &self.lang {
            Some(l) => vec![l.clone()],
            None => self.manifest.langs(),
        }
    }

    /// The one language a per-job command acts on.
    fn single_lang(&self, command: &str) -> CliResult<String> {
        match (&self.lang, self.manifest.languages.len()) {
            (Some(l), _) => Ok(l.clone()),
            (None, 1) => Ok(self.manifest.langs().remove(0)),
            _ => Err(CliError::validation(format!("`{command}` needs --lang with a multi-language manifest"))),
        }
    }

    fn seed_or(&self, configured: u64) -> u64 {
        self.seed.unwrap_or(configured)
    }

    fn out_path(&self, rel: &str) -> PathBuf {
        self.out.join(rel)
    }

    /// Path of an earlier stage's output, or an error naming that stage.
    fn require(&self, rel: &str, stage: &'static str) -> CliResult<PathBuf> {
        let p = self.out_path(rel);
        if p.is_file() {
            Ok(p)
        } else {
            Err(CliError::Prerequisite { stage, path: p })
        }
    }

    /// Display label for an input: `out:`-relative for stage outputs,
    /// manifest-relative for configured inputs, else the bare file name.
    fn label(&self, p: &Path) -> String {
        if let Ok(rel) = p.strip_prefix(&self.out) {
            return format!("out:{}", portable(rel));
        }
        if let Ok(rel) = p.strip_prefix(&self.manifest.base) {
            if !self.manifest.base.as_os_str().is_empty() {
                return portable(rel);
            }
        }
        if p.is_relative() {
            return portable(p);
        }
        p.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default()
    }

    fn provenance(&self, stage: &'static str, lang: Option<&str>, seed: Option<u64>) -> CliResult<Provenance> {
        let mut opts = json!({ "options": self.manifest.options });
        if let Some(l) = lang {
            opts["language"] = serde_json::to_value(self.manifest.language_config(l)?).expect("config serializes");
        }
        Ok(Provenance::new(stage, lang, seed).with_options(&opts))
    }

    fn record(&self, prov: &mut Provenance, p: &Path) -> CliResult<()> {
        prov.input(self.label(p), p)
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        self.manifest.resolve(p)
    }

    fn ontology(&self, lang: &str, source: Source) -> CliResult<(PathBuf, Vec<AnpRecord>)> {
        let (path, keep) = match source {
            Source::PreCrowd => (self.require(&format!("ontology/{lang}.jsonl"), "filter")?, AnpStatus::PreCrowd),
            Source::PostCrowd => (self.require(&format!("ontology/{lang}.post.jsonl"), "export")?, AnpStatus::Accepted),
        };
        let recs: Vec<AnpRecord> = read_jsonl(&path)?;
        Ok((path, recs.into_iter().filter(|r| r.status == keep).collect()))
    }
}

fn optional_input<'a>(p: &'a Option<PathBuf>, key: &str, stage: &str) -> CliResult<&'a Path> {
    p.as_deref()
        .ok_or_else(|| CliError::validation(format!("`{stage}` needs {key} in the manifest")))
}

fn slice_source(s: SliceSource) -> &'static str {
    match s {
        SliceSource::TagOnly => "TAG_ONLY",
        SliceSource::TagPlusMetadata => "TAG_PLUS_METADATA",
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| format!("{x:.6}"))
}

pub fn discover(ctx: &Ctx) -> CliResult<()> {
    let m = &ctx.manifest;
    let seeds_path = ctx.resolve(&m.inputs.seeds);
    let seeds = load_seed_file(&seeds_path)?;
    for lang in ctx.langs() {
        let li = m.lang(&lang)?;
        let cfg = m.language_config(&lang)?;
        let set = seeds
            .get(&lang)
            .ok_or_else(|| CliError::validation(format!("{}: no seed keywords for {lang}", seeds_path.display())))?;
        let corpus_path = ctx.resolve(&li.corpus);
        let corpus = load_corpus(&corpus_path, &lang)?;
        for d in &corpus.diagnostics {
            eprintln!("warning: {}:{}: {}", corpus_path.display(), d.line, d.message);
        }
        let pos_path = ctx.resolve(&li.pos_lexicon);
        let suffix_path = li.suffix_rules.as_ref().map(|p| ctx.resolve(p));
        let lexicon = PosLexicon::load(&lang, &pos_path, suffix_path.as_deref())?;

        let mut slices = String::from("emotion\tsource\tn_images\tkeywords\n");
        let mut per_slice = Vec::with_capacity(Emotion::ALL.len());
        for emotion in Emotion::ALL {
            let slice = query_emotion_slice(&corpus.records, set, emotion, m.options.emotion_cap)?;
            let _ = writeln!(
                slices,
                "{}\t{}\t{}\t{}",
                emotion.name(),
                slice_source(slice.source),
                slice.images.len(),
                slice.keywords.join(",")
            );
            per_slice.push(discover_candidates(&slice, set, &cfg, &lexicon));
        }
        let mut candidates = merge_candidates(per_slice)?;
        if m.options.corpus_frequencies {
            apply_corpus_frequencies(&mut candidates, &corpus.records, &cfg, &lexicon);
        }
        let lines: Vec<CandidateLine> = candidates.iter().map(CandidateLine::from).collect();

        let mut prov = ctx.provenance("discover", Some(&lang), None)?;
        ctx.record(&mut prov, &seeds_path)?;
        ctx.record(&mut prov, &corpus_path)?;
        ctx.record(&mut prov, &pos_path)?;
        if let Some(p) = &suffix_path {
            ctx.record(&mut prov, p)?;
        }
        prov.write(&ctx.out_path(&format!("candidates/{lang}.jsonl")), &to_jsonl(&lines))?;
        prov.write(&ctx.out_path(&format!("slices/{lang}.tsv")), &slices)?;
        println!("{lang}: {} images, {} candidate pairs", corpus.records.len(), lines.len());
    }
    Ok(())
}

pub fn filter(ctx: &Ctx) -> CliResult<()> {
    let m = &ctx.manifest;
    let english_path = ctx.resolve(&m.inputs.english_sentiment);
    let english = SentimentLexicon::load("en", &english_path)?;
    let translations = match &m.inputs.translations {
        Some(p) => TranslationTable::load(&ctx.resolve(p))?,
        None => TranslationTable::default(),
    };
    for lang in ctx.langs() {
        let cand_path = ctx.require(&format!("candidates/{lang}.jsonl"), "discover")?;
        let li = m.lang(&lang)?;
        let cfg = m.language_config(&lang)?;
        let lines: Vec<CandidateLine> = read_jsonl(&cand_path)?;
        let candidates: Vec<_> = lines.into_iter().map(CandidateLine::into_candidate).collect();

        let sentiment_path = ctx.resolve(&li.sentiment);
        let primary = SentimentLexicon::load(&lang, &sentiment_path)?;
        let dict_path = ctx.resolve(&li.dictionary);
        let lists = Blocklists::load(
            &ctx.resolve(&m.inputs.named_entities),
            &ctx.resolve(&m.inputs.technical_terms),
            &dict_path,
            &ctx.resolve(&m.inputs.english_dictionary),
        )?;
        let stem_path = li.stem_table.as_ref().map(|p| ctx.resolve(p));
        let table = stem_path.as_deref().map(Stemmer::load_table).transpose()?;
        let stemmer = Stemmer::for_config(table, &cfg);
        let res = FilterResources {
            primary: &primary,
            english: &english,
            blocklists: &lists,
            translator: &translations,
            stemmer: stemmer.as_ref(),
        };
        let opts = FilterOptions {
            min_uploaders: m.options.min_uploaders,
            per_adjective_cap: m.options.per_adjective_cap,
            subsample: m.options.subsample,
        };
        let records = apply_filters(&candidates, &cfg, &res, &opts)?;
        let kept: Vec<&AnpRecord> = records.iter().filter(|r| r.status == AnpStatus::PreCrowd).collect();

        let mut by_status: BTreeMap<String, usize> = BTreeMap::new();
        for r in &records {
            *by_status.entry(r.status.to_string()).or_default() += 1;
        }
        let mut summary = String::from("status\tcount\n");
        for (s, n) in &by_status {
            let _ = writeln!(summary, "{s}\t{n}");
        }

        let mut prov = ctx.provenance("filter", Some(&lang), None)?;
        ctx.record(&mut prov, &cand_path)?;
        ctx.record(&mut prov, &sentiment_path)?;
        ctx.record(&mut prov, &english_path)?;
        ctx.record(&mut prov, &dict_path)?;
        for p in [&m.inputs.english_dictionary, &m.inputs.named_entities, &m.inputs.technical_terms] {
            ctx.record(&mut prov, &ctx.resolve(p))?;
        }
        if let Some(p) = &m.inputs.translations {
            ctx.record(&mut prov, &ctx.resolve(p))?;
        }
        if let Some(p) = &stem_path {
            ctx.record(&mut prov, p)?;
        }
        prov.write(&ctx.out_path(&format!("ontology/{lang}.jsonl")), &to_jsonl(&kept))?;
        prov.write(&ctx.out_path(&format!("ontology/{lang}.all.jsonl")), &to_jsonl(&records))?;
        prov.write(&ctx.out_path(&format!("ontology/{lang}.summary.tsv")), &summary)?;
        println!("{lang}: {} of {} candidates kept", kept.len(), records.len());
    }
    Ok(())
}

/// The crowd job for a language, rebuilt deterministically from the
/// pre-crowd ontology, the test questions and the validation seed. The
/// returned paths are the inputs it depends on.
fn job_spec(ctx: &Ctx, lang: &str, command: &str) -> CliResult<(JobSpec, Vec<PathBuf>)> {
    let m = &ctx.manifest;
    let tq = optional_input(&m.lang(lang)?.test_questions, &format!("languages.{lang}.test_questions"), command)?;
    let tq_path = ctx.resolve(tq);
    let tests: Vec<TestQuestion> = serde_json::from_str(&read_to_string(&tq_path)?)
        .map_err(|e| CliError::validation(format!("{}: {e}", tq_path.display())))?;
    let (ont_path, anps) = ctx.ontology(lang, Source::PreCrowd)?;
    let mut spec = JobSpec::new(lang, anps, tests);
    spec.min_judgments = m.options.min_judgments;
    spec.page_size = m.options.page_size;
    spec.quiz_pass_threshold = m.options.quiz_pass_threshold;
    spec.seed = ctx.seed_or(m.seeds.validate);
    Ok((spec, vec![ont_path, tq_path]))
}

fn row_key(worker: &str, adj: &str, noun: &str, verdict: bool, test: bool, ts: u64) -> (String, String, String, bool, bool, u64) {
    (worker.to_string(), adj.to_string(), noun.to_string(), verdict, test, ts)
}

pub fn import_judgments(ctx: &Ctx, csv_path: &Path) -> CliResult<()> {
    let lang = ctx.single_lang("import-judgments")?;
    let (spec, inputs) = job_spec(ctx, &lang, "import-judgments")?;
    let seed = spec.seed;
    let text = std::fs::read_to_string(csv_path).map_err(|e| CliError::io(csv_path, e))?;
    let rows = parse_judgment_csv(&text)
        .map_err(|(n, msg)| CliError::validation(format!("{}: record {n}: {msg}", csv_path.display())))?;

    let svc = Service::open(ctx.out_path("valsvc"))?;
    let (job_id, _) = svc.create_job(spec)?;

    // Rows already in the log count as imported, so re-running the same
    // file changes nothing.
    let mut present: HashMap<_, usize> = HashMap::new();
    let state = svc.state(&job_id)?;
    for j in state.judgments.iter().chain(&state.test_judgments) {
        let k = row_key(&j.worker_id, &j.adj, &j.noun, j.verdict, j.is_hidden_test, j.timestamp);
        *present.entry(k).or_default() += 1;
    }
    let mut fresh: Vec<ImportRow> = Vec::new();
    let mut fresh_index = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        let k = row_key(&r.worker, &r.adj, &r.noun, r.verdict, r.is_test, r.timestamp);
        match present.get_mut(&k) {
            Some(n) if *n > 0 => *n -= 1,
            _ => {
                fresh.push(r.clone());
                fresh_index.push(i);
            }
        }
    }
    let report = svc.import_judgments(&job_id, &fresh)?;
    let rejected: BTreeMap<usize, &str> = report
        .rejected
        .iter()
        .map(|(line, why)| (fresh_index[line - 1], why.as_str()))
        .collect();

    let mut body = String::from("row\tworker\tadj\tnoun\tstatus\tdetail\n");
    for (i, r) in rows.iter().enumerate() {
        let (status, detail) = match rejected.get(&i) {
            Some(why) => ("rejected", *why),
            None => ("ok", ""),
        };
        let _ = writeln!(body, "{}\t{}\t{}\t{}\t{status}\t{detail}", i + 1, r.worker, r.adj, r.noun);
    }
    let mut prov = ctx.provenance("import-judgments", Some(&lang), Some(seed))?;
    for p in &inputs {
        ctx.record(&mut prov, p)?;
    }
    ctx.record(&mut prov, csv_path)?;
    prov.write(&ctx.out_path(&format!("validation/{lang}.import.tsv")), &body)?;
    println!(
        "{lang}: job {job_id}, {} rows ok, {} rejected",
        rows.len() - rejected.len(),
        rejected.len()
    );
    Ok(())
}

pub fn export(ctx: &Ctx) -> CliResult<()> {
    let lang = ctx.single_lang("export")?;
    let (spec, inputs) = job_spec(ctx, &lang, "export")?;
    let seed = spec.seed;
    let job_id = spec.job_id();
    let store = ctx.out_path("valsvc");
    let svc = Service::open(&store)?;
    let log = store.join("jobs").join(&job_id).join("events.jsonl");
    match svc.status(&job_id) {
        Err(SvcError::NotFound(_)) => {
            return Err(CliError::Prerequisite {
                stage: "import-judgments",
                path: log,
            })
        }
        other => other?,
    };
    let records = svc.export(&job_id)?;
    let agg = svc.aggregate(&job_id)?;

    let mut results = String::from("adj\tnoun\tyes\tno\tmajority\tagreement\tcomplete\n");
    for a in &agg.anps {
        let majority = format!("{:?}", a.majority).to_uppercase();
        let _ = writeln!(
            results,
            "{}\t{}\t{}\t{}\t{majority}\t{}\t{}",
            a.adj,
            a.noun,
            a.yes,
            a.no,
            fmt_opt(a.agreement),
            !a.incomplete
        );
    }
    let accepted = records.iter().filter(|r| r.status == AnpStatus::Accepted).count();
    let summary = format!(
        "metric\tvalue\nn_anps\t{}\nn_complete\t{}\nn_accepted\t{accepted}\npercent_correct\t{}\nmean_agreement\t{}\n",
        agg.anps.len(),
        agg.n_complete,
        fmt_opt(agg.percent_correct),
        fmt_opt(agg.mean_agreement)
    );

    let mut prov = ctx.provenance("export", Some(&lang), Some(seed))?;
    for p in &inputs {
        ctx.record(&mut prov, p)?;
    }
    if log.is_file() {
        ctx.record(&mut prov, &log)?;
    }
    prov.write(&ctx.out_path(&format!("ontology/{lang}.post.jsonl")), &to_jsonl(&records))?;
    prov.write(&ctx.out_path(&format!("validation/{lang}.results.tsv")), &results)?;
    prov.write(&ctx.out_path(&format!("validation/{lang}.summary.tsv")), &summary)?;
    println!(
        "{lang}: {accepted} accepted, {} of {} complete, mean agreement {}",
        agg.n_complete,
        agg.anps.len(),
        fmt_opt(agg.mean_agreement)
    );
    Ok(())
}

pub fn analyze(ctx: &Ctx, source: Source) -> CliResult<()> {
    let opts = &ctx.manifest.options;
    let smoothing = opts.smoothing_weight.map(SmoothingTable::same_family).transpose()?;
    let mut prov = ctx.provenance("analyze", None, None)?;
    let mut heat = BTreeMap::new();
    let mut sentiment = String::from("lang\tn_anps\tn_replicated\tavg_count\tcap\tmedian\tq1\tq3\tp05\tp95\tmin\tmax\n");
    let mut counts = String::from("lang\tn_anps\tn_adjectives\tn_nouns\n");
    for lang in ctx.langs() {
        let (path, recs) = ctx.ontology(&lang, source)?;
        ctx.record(&mut prov, &path)?;
        heat.insert(lang.clone(), language_emotion_scores(&recs, smoothing.as_ref())?);
        let s = median_sentiment(&lang, &recs, opts.alpha)?;
        let _ = writeln!(
            sentiment,
            "{}\t{}\t{}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{:.6}",
            s.lang, s.n_anps, s.n_replicated, s.avg_count, s.cap, s.median, s.q1, s.q3, s.p05, s.p95, s.min, s.max
        );
        let adjs: BTreeSet<&str> = recs.iter().map(|r| r.adj.as_str()).collect();
        let nouns: BTreeSet<&str> = recs.iter().map(|r| r.noun.as_str()).collect();
        let _ = writeln!(counts, "{lang}\t{}\t{}\t{}", recs.len(), adjs.len(), nouns.len());
    }
    let suffix = match source {
        Source::PreCrowd => "",
        Source::PostCrowd => ".post",
    };
    prov.write(&ctx.out_path(&format!("analysis/emotions{suffix}.tsv")), &heatmap_tsv(&heat))?;
    prov.write(&ctx.out_path(&format!("analysis/sentiment{suffix}.tsv")), &sentiment)?;
    prov.write(&ctx.out_path(&format!("analysis/counts{suffix}.tsv")), &counts)?;
    println!("analyzed {} languages", heat.len());
    Ok(())
}

pub fn compare(ctx: &Ctx, a: Option<&Path>, b: Option<&Path>, name: Option<&str>) -> CliResult<()> {
    let default_lang = || ctx.single_lang("compare");
    let a_path = match a {
        Some(p) => p.to_path_buf(),
        None => ctx.require(&format!("ontology/{}.jsonl", default_lang()?), "filter")?,
    };
    let b_path = match b {
        Some(p) => p.to_path_buf(),
        None => ctx.require(&format!("ontology/{}.post.jsonl", default_lang()?), "export")?,
    };
    let load = |p: &Path| -> CliResult<Vec<AnpRecord>> {
        let recs: Vec<AnpRecord> = read_jsonl(p)?;
        Ok(recs.into_iter().filter(AnpRecord::in_ontology).collect())
    };
    let (ra, rb) = (load(&a_path)?, load(&b_path)?);
    let curve = compare_ontologies(&ra, &rb, &ctx.manifest.options.compare_thresholds);
    let name = match name {
        Some(n) => n.to_string(),
        None => ctx.single_lang("compare").unwrap_or_else(|_| "compare".into()),
    };
    let mut prov = ctx.provenance("compare", None, None)?;
    ctx.record(&mut prov, &a_path)?;
    ctx.record(&mut prov, &b_path)?;
    prov.write(&ctx.out_path(&format!("compare/{name}.tsv")), &curve.to_tsv())?;
    println!("compared {} against {} pairs", ra.len(), rb.len());
    Ok(())
}

pub fn cluster(ctx: &Ctx, source: Source) -> CliResult<()> {
    let m = &ctx.manifest;
    let tr_path = ctx.resolve(optional_input(&m.inputs.translations, "inputs.translations", "cluster")?);
    let emb_path = ctx.resolve(optional_input(&m.inputs.embeddings, "inputs.embeddings", "cluster")?);
    let pos_path = ctx.resolve(optional_input(&m.inputs.english_pos, "inputs.english_pos", "cluster")?);
    let seed = ctx.seed_or(m.seeds.cluster);
    let mut prov = ctx.provenance("cluster", None, Some(seed))?;

    let langs = ctx.langs();
    let mut ontologies = BTreeMap::new();
    for lang in &langs {
        let (path, recs) = ctx.ontology(lang, source)?;
        ctx.record(&mut prov, &path)?;
        ontologies.insert(lang.clone(), recs);
    }
    let english_dict = read_word_set(&ctx.resolve(&m.inputs.english_dictionary))?;
    let checks = Blocklists {
        named_entities: read_word_set(&ctx.resolve(&m.inputs.named_entities))?,
        technical_terms: read_word_set(&ctx.resolve(&m.inputs.technical_terms))?,
        language_dictionary: english_dict.clone(),
        english_dictionary: english_dict,
    };
    let table = TranslationTable::load(&tr_path)?;
    let translated = translate_ontologies(&ontologies, &table, Some(&checks));
    let embeddings = EmbeddingStore::load(&emb_path)?;
    let english_pos = PosLexicon::load("en", &pos_path, None)?;
    let tree = build_cluster_tree(
        &translated,
        &embeddings,
        &english_pos,
        &TreeOptions {
            k1: m.options.k1,
            seed,
            k2_max: m.options.k2_max,
            elbow: ElbowOptions::default(),
        },
    )?;
    let phrases: BTreeMap<String, BTreeSet<String>> =
        translated.iter().map(|(l, s)| (l.clone(), s.phrases())).collect();
    let exact = exact_alignment(&phrases);
    let by_cluster = cluster_alignment(&tree, &langs);

    let mut tr_report = String::from("lang\tadj\tnoun\tenglish\tstatus\n");
    for (lang, set) in &translated {
        for t in &set.translated {
            let _ = writeln!(tr_report, "{lang}\t{}\t{}\t{}\tok", t.adj, t.noun, t.english);
        }
        for (adj, noun) in &set.untranslated {
            let _ = writeln!(tr_report, "{lang}\t{adj}\t{noun}\t\tuntranslated");
        }
        for (adj, noun, why) in &set.invalid {
            let _ = writeln!(tr_report, "{lang}\t{adj}\t{noun}\t\tinvalid: {why}");
        }
    }

    for p in [&m.inputs.english_dictionary, &m.inputs.named_entities, &m.inputs.technical_terms] {
        ctx.record(&mut prov, &ctx.resolve(p))?;
    }
    ctx.record(&mut prov, &tr_path)?;
    ctx.record(&mut prov, &emb_path)?;
    ctx.record(&mut prov, &pos_path)?;
    let mut tree_json = tree.to_json();
    if !tree_json.ends_with('\n') {
        tree_json.push('\n');
    }
    prov.write(&ctx.out_path("cluster/tree.json"), &tree_json)?;
    prov.write(&ctx.out_path("cluster/exact_alignment.tsv"), &exact.to_tsv())?;
    prov.write(&ctx.out_path("cluster/cluster_alignment.tsv"), &by_cluster.to_tsv())?;
    prov.write(&ctx.out_path("cluster/translations.tsv"), &tr_report)?;
    println!(
        "{} noun clusters, {} subclusters",
        tree.noun_clusters.len(),
        tree.subclusters().count()
    );
    Ok(())
}

pub fn predict(ctx: &Ctx, source: Source) -> CliResult<()> {
    let m = &ctx.manifest;
    let feat_path = ctx.resolve(optional_input(&m.inputs.features, "inputs.features", "predict")?);
    let seed = ctx.seed_or(m.seeds.predict);
    let mut prov = ctx.provenance("predict", None, Some(seed))?;
    let mut all = Vec::new();
    for lang in ctx.langs() {
        let (path, recs) = ctx.ontology(&lang, source)?;
        ctx.record(&mut prov, &path)?;
        all.extend(recs);
    }
    let features = FeatureSet::load(&feat_path)?;
    ctx.record(&mut prov, &feat_path)?;
    let labeling = label_images(&all, &features, m.options.label_threshold)?;
    let plan = make_splits(&labeling, seed, m.options.min_images_per_anp)?;
    let opts = TrainOptions {
        lambda: m.options.lambda,
        epochs: m.options.epochs,
        seed,
    };
    let models = train_per_language(&plan, &features, &opts)?;
    let matrix = cross_predict(&models, &plan, &features)?;

    let mut splits = String::from("lang\ttrain_pos\ttrain_neg\ttest_pos\ttest_neg\n");
    for (lang, s) in &plan.langs {
        let c = s.counts;
        let _ = writeln!(splits, "{lang}\t{}\t{}\t{}\t{}", c.train_pos, c.train_neg, c.test_pos, c.test_neg);
    }
    let labels = format!(
        "metric\tvalue\nlabeled_images\t{}\nexcluded_weak\t{}\nunknown_anp\t{}\ndropped_anps\t{}\n",
        labeling.labels.len(),
        labeling.excluded_weak,
        labeling.unknown_anp.len(),
        plan.dropped_anps.len()
    );
    prov.write(&ctx.out_path("predict/accuracy.tsv"), &matrix.to_tsv())?;
    prov.write(&ctx.out_path("predict/splits.tsv"), &splits)?;
    prov.write(&ctx.out_path("predict/labels.tsv"), &labels)?;
    println!(
        "mean diagonal accuracy {:.4}, mean off-diagonal {:.4}",
        matrix.mean_diagonal(),
        matrix.mean_off_diagonal()
    );
    Ok(())
}

pub fn serve(ctx: &Ctx, addr: &str, ui: Option<&Path>) -> CliResult<()> {
    let addr: SocketAddr = addr
        .parse()
        .map_err(|e| CliError::validation(format!("bad --addr {addr:?}: {e}")))?;
    let svc = Arc::new(Service::open(ctx.out_path("valsvc"))?);
    for lang in ctx.langs() {
        if ctx.manifest.lang(&lang)?.test_questions.is_none() {
            continue;
        }
        match job_spec(ctx, &lang, "serve") {
            Ok((spec, _)) => {
                let (id, _) = svc.create_job(spec)?;
                println!("{lang}: job {id} at http://{addr}/jobs/{id}");
            }
            Err(e @ CliError::Prerequisite { .. }) => eprintln!("{lang}: no job ({e})"),
            Err(e) => return Err(e),
        }
    }
    if let Some(dir) = ui {
        if !dir.is_dir() {
            return Err(CliError::validation(format!("--ui {} is not a directory", dir.display())));
        }
    }
    println!("listening on http://{addr}");
    let rt = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| CliError::io("tokio runtime", e))?;
    rt.block_on(anpkit_valsvc::http::serve(svc, addr, ui.map(Path::to_path_buf)))
        .map_err(|e| CliError::io(addr.to_string(), e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx_at(base: &Path) -> Ctx {
        let text = r#"
[inputs]
seeds = "s"
english_sentiment = "s"
english_dictionary = "s"
named_entities = "s"
technical_terms = "s"

[languages.en]
corpus = "s"
pos_lexicon = "s"
sentiment = "s"
dictionary = "s"

[languages.de]
corpus = "s"
pos_lexicon = "s"
sentiment = "s"
dictionary = "s"
"#;
        let m = Manifest::parse(text, base).unwrap();
        Ctx::new(m, None, None, None).unwrap()
    }

    #[test]
    fn labels_are_relative() {
        let ctx = ctx_at(Path::new("/data/run"));
        assert_eq!(ctx.label(Path::new("/data/run/corpus/en.jsonl")), "corpus/en.jsonl");
        assert_eq!(ctx.label(Path::new("/data/run/out/candidates/en.jsonl")), "out:candidates/en.jsonl");
        assert_eq!(ctx.label(Path::new("/elsewhere/votes.csv")), "votes.csv");
    }

    #[test]
    fn missing_prerequisite_names_the_stage() {
        let dir = tempfile::tempdir().unwrap();
        let ctx = ctx_at(dir.path());
        let err = ctx.require("candidates/en.jsonl", "discover").unwrap_err();
        assert!(err.to_string().contains("run `anpkit discover` first"), "{err}");
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn multi_language_commands_need_lang() {
        let ctx = ctx_at(Path::new("."));
        assert!(ctx.single_lang("export").is_err());
        assert_eq!(ctx.langs(), vec!["de".to_string(), "en".to_string()]);
        let m = ctx.manifest;
        let one = Ctx::new(m, None, Some("en".into()), Some(9)).unwrap();
        assert_eq!(one.single_lang("export").unwrap(), "en");
        assert_eq!(one.seed_or(1), 9);
    }

    #[test]
    fn unknown_lang_flag_rejected() {
        let m = ctx_at(Path::new(".")).manifest;
        assert!(Ctx::new(m, None, Some("xx".into()), None).is_err());
    }
}
