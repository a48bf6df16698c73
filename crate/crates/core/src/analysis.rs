//! Ontology statistics: emotion distributions, replicated sentiment
//! summaries and frequency-threshold comparison curves.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::corpus::Emotion;
use crate::error::{Error, Result};
use crate::filters::AnpRecord;
use crate::NUM_EMOTIONS;

/// Default cap multiplier for count replication.
pub const DEFAULT_ALPHA: f64 = 3.0;

/// Row-stochastic 24x24 table redistributing emotion mass before
/// normalization: row `i` says how emotion `i`'s count is shared out.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothingTable(Vec<[f64; NUM_EMOTIONS]>);

impl SmoothingTable {
    pub fn identity() -> Self {
        SmoothingTable(
            (0..NUM_EMOTIONS)
                .map(|i| {
                    let mut row = [0.0; NUM_EMOTIONS];
                    row[i] = 1.0;
                    row
                })
                .collect(),
        )
    }

    /// Shares `weight` of each emotion's mass equally with the other two
    /// intensities of the same basic emotion.
    pub fn same_family(weight: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&weight) {
            return Err(Error::invalid("smoothing weight must lie in [0, 1]"));
        }
        let mut table = Self::identity();
        for (i, row) in table.0.iter_mut().enumerate() {
            let family = i / 3 * 3;
            for (j, v) in row.iter_mut().enumerate().skip(family).take(3) {
                *v = if j == i { 1.0 - weight } else { weight / 2.0 };
            }
        }
        Ok(table)
    }

    pub fn new(rows: Vec<[f64; NUM_EMOTIONS]>) -> Result<Self> {
        if rows.len() != NUM_EMOTIONS {
            return Err(Error::invalid("smoothing table needs 24 rows"));
        }
        for row in &rows {
            let sum: f64 = row.iter().sum();
            if row.iter().any(|&v| v < 0.0) || (sum - 1.0).abs() > 1e-9 {
                return Err(Error::invalid("smoothing rows must be non-negative and sum to 1"));
            }
        }
        Ok(SmoothingTable(rows))
    }

    fn apply(&self, mass: &[f64; NUM_EMOTIONS]) -> [f64; NUM_EMOTIONS] {
        let mut out = [0.0; NUM_EMOTIONS];
        for (i, row) in self.0.iter().enumerate() {
            for (o, w) in out.iter_mut().zip(row) {
                *o += mass[i] * w;
            }
        }
        out
    }
}

/// Per-pair emotion distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmotionVector {
    pub probs: [f64; NUM_EMOTIONS],
    /// Set when every co-occurrence count was zero and the uniform
    /// distribution was substituted.
    pub degenerate: bool,
}

/// Emotion probabilities of a pair: the mean co-occurrence count over each
/// emotion's keywords, normalized over the 24 emotions. All-zero counts give
/// the uniform vector.
pub fn emotion_probabilities(cooccur: &[Vec<u64>], smoothing: Option<&SmoothingTable>) -> EmotionVector {
    let mut mass = [0.0; NUM_EMOTIONS];
    for (m, row) in mass.iter_mut().zip(cooccur) {
        if !row.is_empty() {
            *m = row.iter().sum::<u64>() as f64 / row.len() as f64;
        }
    }
    if let Some(table) = smoothing {
        mass = table.apply(&mass);
    }
    let total: f64 = mass.iter().sum();
    if total <= 0.0 {
        return EmotionVector {
            probs: [1.0 / NUM_EMOTIONS as f64; NUM_EMOTIONS],
            degenerate: true,
        };
    }
    EmotionVector {
        probs: mass.map(|m| m / total),
        degenerate: false,
    }
}

/// Language-level emotion scores: pair distributions weighted by image
/// count, normalized to sum to 1.
pub fn language_emotion_scores(ontology: &[AnpRecord], smoothing: Option<&SmoothingTable>) -> Result<[f64; NUM_EMOTIONS]> {
    if ontology.is_empty() {
        return Err(Error::invalid("emotion scores of an empty ontology"));
    }
    let mut acc = [0.0; NUM_EMOTIONS];
    for r in ontology {
        let emo = emotion_probabilities(&r.emotion_cooccur, smoothing);
        let count = r.image_count() as f64;
        for (a, p) in acc.iter_mut().zip(emo.probs) {
            *a += p * count;
        }
    }
    let total: f64 = acc.iter().sum();
    if total <= 0.0 {
        return Err(Error::invalid("every pair in the ontology has zero images"));
    }
    Ok(acc.map(|a| a / total))
}

/// Heatmap TSV: one row per language, 24 columns in canonical order.
pub fn heatmap_tsv(rows: &BTreeMap<String, [f64; NUM_EMOTIONS]>) -> String {
    let mut out = String::from("lang");
    for e in Emotion::ALL {
        out.push('\t');
        out.push_str(e.name());
    }
    out.push('\n');
    for (lang, scores) in rows {
        out.push_str(lang);
        for s in scores {
            out.push_str(&format!("\t{s:.12}"));
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentimentSummary {
    pub lang: String,
    pub alpha: f64,
    /// Mean image count per pair.
    pub avg_count: f64,
    /// Replication cap `alpha * avg_count`.
    pub cap: f64,
    pub n_anps: usize,
    pub n_replicated: usize,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub p05: f64,
    pub p95: f64,
    pub min: f64,
    pub max: f64,
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Median and spread of pair sentiment with each pair repeated once per
/// image, capped at `floor(alpha * mean image count)`.
pub fn median_sentiment(lang: &str, ontology: &[AnpRecord], alpha: f64) -> Result<SentimentSummary> {
    if alpha.is_nan() || alpha <= 0.0 {
        return Err(Error::invalid("alpha must be positive"));
    }
    if ontology.is_empty() {
        return Err(Error::invalid("sentiment summary of an empty ontology"));
    }
    let avg = ontology.iter().map(|r| r.image_count() as f64).sum::<f64>() / ontology.len() as f64;
    let cap = alpha * avg;
    let cap_int = cap.floor() as usize;
    let mut values = Vec::new();
    for r in ontology {
        let k = r.image_count().min(cap_int);
        values.extend(std::iter::repeat_n(r.sentiment, k));
    }
    if values.is_empty() {
        return Err(Error::invalid("no replicated scores (all image counts are zero)"));
    }
    values.sort_by(f64::total_cmp);
    Ok(SentimentSummary {
        lang: lang.to_string(),
        alpha,
        avg_count: avg,
        cap,
        n_anps: ontology.len(),
        n_replicated: values.len(),
        median: quantile(&values, 0.5),
        q1: quantile(&values, 0.25),
        q3: quantile(&values, 0.75),
        p05: quantile(&values, 0.05),
        p95: quantile(&values, 0.95),
        min: values[0],
        max: values[values.len() - 1],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OntologyCounts {
    pub n_anps: usize,
    pub n_adjectives: usize,
    pub n_nouns: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapCurve {
    pub thresholds: Vec<u64>,
    /// `|A ∩ B| / |B|` per threshold, B being the reference.
    pub overlap_fraction: Vec<f64>,
    pub counts_a: Vec<OntologyCounts>,
    pub counts_b: Vec<OntologyCounts>,
}

impl OverlapCurve {
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("t\toverlap\tn_anps_a\tn_anps_b\tn_adj_a\tn_adj_b\tn_noun_a\tn_noun_b\n");
        for i in 0..self.thresholds.len() {
            let (a, b) = (self.counts_a[i], self.counts_b[i]);
            out.push_str(&format!(
                "{}\t{:.6}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                self.thresholds[i],
                self.overlap_fraction[i],
                a.n_anps,
                b.n_anps,
                a.n_adjectives,
                b.n_adjectives,
                a.n_nouns,
                b.n_nouns
            ));
        }
        out
    }
}

/// A pair as seen by the comparison: key plus frequency.
pub trait Keyed {
    fn key(&self) -> (String, String);
    fn frequency(&self) -> u64;
}

impl Keyed for AnpRecord {
    fn key(&self) -> (String, String) {
        AnpRecord::key(self)
    }

    fn frequency(&self) -> u64 {
        self.tag_frequency
    }
}

fn restrict<T: Keyed>(items: &[T], t: u64) -> (BTreeSet<(String, String)>, OntologyCounts) {
    let keys: BTreeSet<(String, String)> = items.iter().filter(|x| x.frequency() >= t).map(Keyed::key).collect();
    let adjs: BTreeSet<&str> = keys.iter().map(|k| k.0.as_str()).collect();
    let nouns: BTreeSet<&str> = keys.iter().map(|k| k.1.as_str()).collect();
    let counts = OntologyCounts {
        n_anps: keys.len(),
        n_adjectives: adjs.len(),
        n_nouns: nouns.len(),
    };
    (keys, counts)
}

/// Sweeps a frequency threshold over two ontologies. An empty reference at
/// some threshold counts as fully covered (overlap 1).
pub fn compare_ontologies<A: Keyed, B: Keyed>(a: &[A], b: &[B], thresholds: &[u64]) -> OverlapCurve {
    let mut curve = OverlapCurve {
        thresholds: thresholds.to_vec(),
        overlap_fraction: Vec::new(),
        counts_a: Vec::new(),
        counts_b: Vec::new(),
    };
    for &t in thresholds {
        let (ka, ca) = restrict(a, t);
        let (kb, cb) = restrict(b, t);
        let overlap = if kb.is_empty() {
            1.0
        } else {
            kb.intersection(&ka).count() as f64 / kb.len() as f64
        };
        curve.overlap_fraction.push(overlap);
        curve.counts_a.push(ca);
        curve.counts_b.push(cb);
    }
    curve
}
