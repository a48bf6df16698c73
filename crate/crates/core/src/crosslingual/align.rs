use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::ClusterTree;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AlignmentMode {
    Exact,
    Cluster,
}

/// `matrix[r][c]`: fraction of column language `c`'s phrases matched by row
/// language `r`. The diagonal is 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentMatrix {
    pub langs: Vec<String>,
    pub matrix: Vec<Vec<f64>>,
    pub mode: AlignmentMode,
}

impl AlignmentMatrix {
    pub fn get(&self, row: &str, col: &str) -> Option<f64> {
        let r = self.langs.iter().position(|l| l == row)?;
        let c = self.langs.iter().position(|l| l == col)?;
        Some(self.matrix[r][c])
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("lang");
        for l in &self.langs {
            out.push('\t');
            out.push_str(l);
        }
        out.push('\n');
        for (l, row) in self.langs.iter().zip(&self.matrix) {
            out.push_str(l);
            for v in row {
                out.push_str(&format!("\t{v:.6}"));
            }
            out.push('\n');
        }
        out
    }
}

fn build(
    langs: Vec<String>,
    mode: AlignmentMode,
    entry: impl Fn(&str, &str) -> f64,
) -> AlignmentMatrix {
    let matrix = langs
        .iter()
        .map(|r| langs.iter().map(|c| if r == c { 1.0 } else { entry(r, c) }).collect())
        .collect();
    AlignmentMatrix { langs, matrix, mode }
}

/// Exact alignment over distinct translated phrases per language.
pub fn exact_alignment(phrases: &BTreeMap<String, BTreeSet<String>>) -> AlignmentMatrix {
    build(phrases.keys().cloned().collect(), AlignmentMode::Exact, |r, c| {
        let (pr, pc) = (&phrases[r], &phrases[c]);
        if pc.is_empty() {
            0.0
        } else {
            pc.intersection(pr).count() as f64 / pc.len() as f64
        }
    })
}

/// Cluster alignment: fraction of `c`'s clustered phrases whose subcluster
/// also holds a phrase from `r`.
pub fn cluster_alignment(tree: &ClusterTree, langs: &[String]) -> AlignmentMatrix {
    // per language: subcluster of each of its phrases
    let mut phrase_sub: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    let mut sub_langs: BTreeMap<usize, BTreeSet<&str>> = BTreeMap::new();
    for sub in tree.subclusters() {
        for p in &sub.phrases {
            for l in &p.langs {
                phrase_sub.entry(l.as_str()).or_default().push(sub.global_id);
                sub_langs.entry(sub.global_id).or_default().insert(l.as_str());
            }
        }
    }
    build(langs.to_vec(), AlignmentMode::Cluster, |r, c| {
        let Some(subs) = phrase_sub.get(c) else { return 0.0 };
        let hit = subs.iter().filter(|s| sub_langs[s].contains(r)).count();
        hit as f64 / subs.len() as f64
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sets(entries: &[(&str, &[&str])]) -> BTreeMap<String, BTreeSet<String>> {
        entries
            .iter()
            .map(|(l, ps)| (l.to_string(), ps.iter().map(|p| p.to_string()).collect()))
            .collect()
    }

    #[test]
    fn identical_sets_align_fully() {
        let m = exact_alignment(&sets(&[("de", &["old books", "happy dog"]), ("nl", &["old books", "happy dog"])]));
        assert!(m.matrix.iter().flatten().all(|&v| v == 1.0));
    }

    #[test]
    fn disjoint_sets() {
        let m = exact_alignment(&sets(&[("de", &["a b"]), ("nl", &["c d"])]));
        assert_eq!(m.get("de", "nl"), Some(0.0));
        assert_eq!(m.get("de", "de"), Some(1.0));
    }

    #[test]
    fn quarter_overlap() {
        // column language has 4 phrases, row shares exactly 1: 1/4
        let m = exact_alignment(&sets(&[("c", &["p1", "p2", "p3", "p4"]), ("r", &["p1", "x"])]));
        assert_eq!(m.get("r", "c"), Some(0.25));
        assert_eq!(m.get("c", "r"), Some(0.5));
    }

    #[test]
    fn tsv_layout() {
        let m = exact_alignment(&sets(&[("de", &["a"]), ("nl", &["a"])]));
        assert_eq!(m.to_tsv(), "lang\tde\tnl\nde\t1.000000\t1.000000\nnl\t1.000000\t1.000000\n");
    }
}
