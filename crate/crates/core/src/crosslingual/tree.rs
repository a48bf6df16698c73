use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::kmeans::distinct_count;
use super::{choose_k, derive_seed, kmeans_restarts, project_2d, ElbowOptions, EmbeddingStore, TranslatedSet};
use crate::error::{Error, Result};
use crate::tagging::{Pos, PosLexicon};

/// Default number of noun clusters in the first stage.
pub const DEFAULT_K1: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct TreeOptions {
    pub k1: usize,
    pub seed: u64,
    /// Upper end of the second-stage elbow grid.
    pub k2_max: usize,
    pub elbow: ElbowOptions,
}

impl Default for TreeOptions {
    fn default() -> Self {
        TreeOptions {
            k1: DEFAULT_K1,
            seed: 0,
            k2_max: 20,
            elbow: ElbowOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusteredPhrase {
    pub phrase: String,
    pub noun: String,
    /// Source languages whose pairs translate to this phrase.
    pub langs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubCluster {
    /// Dense within the parent noun cluster.
    pub id: usize,
    /// Dense over the whole tree.
    pub global_id: usize,
    pub phrases: Vec<ClusteredPhrase>,
    pub centroid: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NounCluster {
    pub id: usize,
    pub nouns: Vec<String>,
    pub centroid: Vec<f64>,
    pub subclusters: Vec<SubCluster>,
}

/// Two-level hierarchy: noun clusters, then phrase subclusters inside each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterTree {
    pub seed: u64,
    pub k1_requested: usize,
    pub k1: usize,
    pub noun_clusters: Vec<NounCluster>,
    /// Keys are `noun:<word>` and `phrase:<text>`.
    pub coords2d: BTreeMap<String, [f64; 2]>,
    /// Nouns without an embedding.
    pub oov_nouns: Vec<String>,
    /// Phrases with no noun token.
    pub phrases_without_noun: Vec<String>,
}

impl ClusterTree {
    pub fn subclusters(&self) -> impl Iterator<Item = &SubCluster> {
        self.noun_clusters.iter().flat_map(|c| c.subclusters.iter())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("tree serializes") + "\n"
    }
}

/// The last token with a noun sense.
fn phrase_noun<'a>(phrase: &'a str, lexicon: &PosLexicon) -> Option<&'a str> {
    phrase
        .split_whitespace()
        .rev()
        .find(|t| lexicon.senses(t).contains(Pos::Noun))
}

/// Builds the two-stage clustering over translated phrases.
///
/// Stage 1 clusters the nouns of all phrases with k-means (`k1`, clamped to
/// the number of distinct noun vectors). Stage 2 clusters the phrase
/// vectors inside each noun cluster with `k` picked by the elbow rule over
/// `{1..=min(k2_max, phrases - 1)}`.
pub fn build_cluster_tree(
    translated: &BTreeMap<String, TranslatedSet>,
    embeddings: &EmbeddingStore,
    english_lexicon: &PosLexicon,
    opts: &TreeOptions,
) -> Result<ClusterTree> {
    let mut phrase_langs: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for (lang, set) in translated {
        for t in &set.translated {
            phrase_langs.entry(t.english.clone()).or_default().insert(lang.clone());
        }
    }

    let mut phrase_noun_of: BTreeMap<String, String> = BTreeMap::new();
    let mut without_noun = Vec::new();
    let mut oov: BTreeSet<String> = BTreeSet::new();
    for phrase in phrase_langs.keys() {
        match phrase_noun(phrase, english_lexicon) {
            None => without_noun.push(phrase.clone()),
            Some(n) if !embeddings.contains(n) => {
                oov.insert(n.to_string());
            }
            Some(n) => {
                phrase_noun_of.insert(phrase.clone(), n.to_string());
            }
        }
    }

    let nouns: Vec<String> = phrase_noun_of.values().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    if nouns.is_empty() {
        return Err(Error::invalid("no in-vocabulary nouns to cluster"));
    }
    let noun_vecs: Vec<Vec<f64>> = nouns.iter().map(|n| embeddings.get(n).unwrap().to_vec()).collect();
    let k1 = opts.k1.min(distinct_count(&noun_vecs)).max(1);
    let stage1 = kmeans_restarts(&noun_vecs, k1, opts.seed, opts.elbow.n_init)?;

    let mut coords2d = BTreeMap::new();
    for (noun, xy) in nouns.iter().zip(project_2d(&noun_vecs)) {
        coords2d.insert(format!("noun:{noun}"), xy);
    }

    let mut noun_clusters = Vec::new();
    let mut global_id = 0;
    let mut all_phrases: Vec<(String, Vec<f64>)> = Vec::new();
    for c in 0..k1 {
        let members: Vec<&String> = nouns
            .iter()
            .zip(&stage1.assignments)
            .filter(|(_, &a)| a == c)
            .map(|(n, _)| n)
            .collect();
        if members.is_empty() {
            continue;
        }
        let member_set: BTreeSet<&str> = members.iter().map(|s| s.as_str()).collect();
        let phrases: Vec<(&String, &String)> = phrase_noun_of
            .iter()
            .filter(|(_, n)| member_set.contains(n.as_str()))
            .collect();
        let vecs: Vec<Vec<f64>> = phrases
            .iter()
            .map(|(p, _)| embeddings.phrase_vector(p.split_whitespace()).expect("noun is in vocabulary"))
            .collect();

        let cluster_seed = derive_seed(opts.seed, 1 + c as u64);
        // every phrase in its own subcluster is not a grouping, so k stops at n - 1
        let top = opts.k2_max.min(vecs.len().saturating_sub(1).max(1)).min(distinct_count(&vecs));
        let grid: Vec<usize> = (1..=top).collect();
        let k2 = if grid.len() < 2 { 1 } else { choose_k(&vecs, &grid, cluster_seed, &opts.elbow)?.k };
        let stage2 = kmeans_restarts(&vecs, k2, cluster_seed, opts.elbow.n_init)?;

        let mut subclusters = Vec::new();
        for s in 0..k2 {
            let idx: Vec<usize> = (0..phrases.len()).filter(|&i| stage2.assignments[i] == s).collect();
            if idx.is_empty() {
                continue;
            }
            subclusters.push(SubCluster {
                id: subclusters.len(),
                global_id,
                phrases: idx
                    .iter()
                    .map(|&i| ClusteredPhrase {
                        phrase: phrases[i].0.clone(),
                        noun: phrases[i].1.clone(),
                        langs: phrase_langs[phrases[i].0].iter().cloned().collect(),
                    })
                    .collect(),
                centroid: stage2.centroids[s].clone(),
            });
            global_id += 1;
        }
        for ((p, _), v) in phrases.iter().zip(vecs) {
            all_phrases.push(((*p).clone(), v));
        }
        noun_clusters.push(NounCluster {
            id: noun_clusters.len(),
            nouns: members.into_iter().cloned().collect(),
            centroid: stage1.centroids[c].clone(),
            subclusters,
        });
    }

    all_phrases.sort_by(|a, b| a.0.cmp(&b.0));
    let phrase_vecs: Vec<Vec<f64>> = all_phrases.iter().map(|(_, v)| v.clone()).collect();
    for ((p, _), xy) in all_phrases.iter().zip(project_2d(&phrase_vecs)) {
        coords2d.insert(format!("phrase:{p}"), xy);
    }

    Ok(ClusterTree {
        seed: opts.seed,
        k1_requested: opts.k1,
        k1,
        noun_clusters,
        coords2d,
        oov_nouns: oov.into_iter().collect(),
        phrases_without_noun: without_noun,
    })
}
