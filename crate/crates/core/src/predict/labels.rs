use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::features::{anp_key, FeatureSet};
use crate::error::{Error, Result};
use crate::filters::AnpRecord;

pub const DEFAULT_LABEL_THRESHOLD: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledImage {
    pub anp_key: String,
    pub lang: String,
    pub positive: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentimentLabeling {
    pub threshold: f64,
    pub labels: BTreeMap<String, LabeledImage>,
    /// Images whose pair has |S| <= threshold.
    pub excluded_weak: usize,
    /// Images whose pair is missing from the ontology, with a message each.
    pub unknown_anp: Vec<String>,
}

/// Labels each feature row by the sign of its pair's sentiment. Rows whose
/// pair is weak (`|S| <= threshold`) or unknown are left out.
pub fn label_images(ontology: &[AnpRecord], features: &FeatureSet, threshold: f64) -> Result<SentimentLabeling> {
    if threshold.is_nan() || threshold <= 0.0 {
        return Err(Error::invalid("label threshold must be positive"));
    }
    let scores: BTreeMap<(&str, String), f64> = ontology
        .iter()
        .map(|r| ((r.lang.as_str(), anp_key(&r.adj, &r.noun)), r.sentiment))
        .collect();
    let mut out = SentimentLabeling {
        threshold,
        labels: BTreeMap::new(),
        excluded_weak: 0,
        unknown_anp: Vec::new(),
    };
    for (id, row) in &features.rows {
        let Some(&s) = scores.get(&(row.lang.as_str(), row.anp_key.clone())) else {
            out.unknown_anp.push(format!("{id}: pair {} ({}) not in ontology", row.anp_key, row.lang));
            continue;
        };
        if s.abs() <= threshold {
            out.excluded_weak += 1;
            continue;
        }
        out.labels.insert(
            id.clone(),
            LabeledImage { anp_key: row.anp_key.clone(), lang: row.lang.clone(), positive: s > 0.0 },
        );
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filters::AnpStatus;
    use proptest::prelude::*;

    fn rec(adj: &str, s: f64) -> AnpRecord {
        AnpRecord {
            adj: adj.into(),
            noun: "dog".into(),
            lang: "en".into(),
            sentiment: s,
            adj_sentiment: s,
            noun_sentiment: 0.0,
            tag_frequency: 1,
            image_ids: Default::default(),
            uploaders: Default::default(),
            emotion_cooccur: Vec::new(),
            status: AnpStatus::PreCrowd,
            filter_trace: Vec::new(),
        }
    }

    fn features(keys: &[&str]) -> FeatureSet {
        let mut f = FeatureSet::new(1).unwrap();
        for (i, k) in keys.iter().enumerate() {
            f.insert(&format!("i{i}"), k, "en", vec![0.0]).unwrap();
        }
        f
    }

    #[test]
    fn labels_by_sign_with_strict_threshold() {
        let onto = vec![rec("happy", 0.8), rec("meh", -0.03), rec("edge", 0.05), rec("sad", -0.5)];
        let f = features(&["happy_dog", "meh_dog", "edge_dog", "sad_dog", "lost_dog"]);
        let l = label_images(&onto, &f, DEFAULT_LABEL_THRESHOLD).unwrap();
        assert!(l.labels["i0"].positive);
        assert!(!l.labels.contains_key("i1"));
        assert!(!l.labels.contains_key("i2"));
        assert!(!l.labels["i3"].positive);
        assert_eq!(l.excluded_weak, 2);
        assert_eq!(l.unknown_anp.len(), 1);
        assert!(label_images(&onto, &f, 0.0).is_err());
    }

    #[test]
    fn just_above_threshold_is_labeled() {
        let onto = vec![rec("edge", 0.050001)];
        let l = label_images(&onto, &features(&["edge_dog"]), DEFAULT_LABEL_THRESHOLD).unwrap();
        assert_eq!(l.labels.len(), 1);
    }

    proptest! {
        #[test]
        fn threshold_monotone(scores in proptest::collection::vec(-2.0f64..2.0, 1..20), t1 in 0.001f64..1.0, dt in 0.0f64..1.0) {
            let onto: Vec<AnpRecord> = scores.iter().enumerate().map(|(i, &s)| rec(&format!("a{i}"), s)).collect();
            let keys: Vec<String> = (0..scores.len()).map(|i| format!("a{i}_dog")).collect();
            let refs: Vec<&str> = keys.iter().map(String::as_str).collect();
            let f = features(&refs);
            let lo = label_images(&onto, &f, t1).unwrap();
            let hi = label_images(&onto, &f, t1 + dt).unwrap();
            prop_assert!(hi.labels.keys().all(|k| lo.labels.contains_key(k)));
            prop_assert_eq!(label_images(&onto, &f, t1).unwrap(), lo);
        }
    }
}
