use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::labels::SentimentLabeling;
use crate::crosslingual::derive_seed;
use crate::error::{Error, Result};

pub const DEFAULT_MIN_IMAGES_PER_ANP: usize = 125;
pub const TRAIN_FRACTION: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ClassCounts {
    pub train_pos: usize,
    pub train_neg: usize,
    pub test_pos: usize,
    pub test_neg: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LangSplit {
    /// `(image_id, positive)` sorted by id.
    pub train: Vec<(String, bool)>,
    pub test: Vec<(String, bool)>,
    pub counts: ClassCounts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub seed: u64,
    pub min_images_per_anp: usize,
    pub langs: BTreeMap<String, LangSplit>,
    /// Pairs dropped for having too few images, as `lang:key`.
    pub dropped_anps: Vec<String>,
}

fn stream_id(parts: &[&str]) -> u64 {
    // FNV-1a, stable across runs and platforms
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for p in parts {
        for b in p.bytes().chain(std::iter::once(0)) {
            h ^= b as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    }
    h
}

/// Number of training items out of `n` (0.8 n rounded half up).
pub(crate) fn train_size(n: usize) -> usize {
    (TRAIN_FRACTION * n as f64 + 0.5).floor() as usize
}

/// Per-pair 80/20 split followed by seeded downsampling so that every
/// language has the same number of positives and negatives in train and in
/// test.
pub fn make_splits(labeling: &SentimentLabeling, seed: u64, min_images_per_anp: usize) -> Result<SplitPlan> {
    if labeling.labels.is_empty() {
        return Err(Error::invalid("no labeled images to split"));
    }
    let mut groups: BTreeMap<(&str, &str), Vec<(&str, bool)>> = BTreeMap::new();
    for (id, l) in &labeling.labels {
        groups.entry((l.lang.as_str(), l.anp_key.as_str())).or_default().push((id.as_str(), l.positive));
    }

    let mut dropped = Vec::new();
    // (lang) -> [train_pos, train_neg, test_pos, test_neg]
    let mut cells: BTreeMap<&str, [Vec<&str>; 4]> = BTreeMap::new();
    for ((lang, key), mut ids) in groups {
        let entry = cells.entry(lang).or_default();
        if ids.len() < min_images_per_anp {
            dropped.push(format!("{lang}:{key} ({} images)", ids.len()));
            continue;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, stream_id(&["split", lang, key])));
        ids.shuffle(&mut rng);
        let n_train = train_size(ids.len());
        for (i, (id, pos)) in ids.into_iter().enumerate() {
            let cell = match (i < n_train, pos) {
                (true, true) => 0,
                (true, false) => 1,
                (false, true) => 2,
                (false, false) => 3,
            };
            entry[cell].push(id);
        }
    }

    const CELL_NAMES: [&str; 4] = ["positive train", "negative train", "positive test", "negative test"];
    for (lang, c) in &cells {
        if let Some(i) = c.iter().position(Vec::is_empty) {
            return Err(Error::invalid(format!(
                "language {lang} has no {} examples after the split",
                CELL_NAMES[i]
            )));
        }
    }
    let mut target = [usize::MAX; 4];
    for c in cells.values() {
        for i in 0..4 {
            target[i] = target[i].min(c[i].len());
        }
    }

    let mut langs = BTreeMap::new();
    for (lang, mut c) in cells {
        let mut split = LangSplit::default();
        for i in 0..4 {
            let ids = &mut c[i];
            ids.sort_unstable();
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, stream_id(&["equalize", lang, CELL_NAMES[i]])));
            ids.shuffle(&mut rng);
            ids.truncate(target[i]);
            let positive = i % 2 == 0;
            let dest = if i < 2 { &mut split.train } else { &mut split.test };
            dest.extend(ids.iter().map(|id| (id.to_string(), positive)));
        }
        split.train.sort();
        split.test.sort();
        split.counts = ClassCounts { train_pos: target[0], train_neg: target[1], test_pos: target[2], test_neg: target[3] };
        langs.insert(lang.to_string(), split);
    }
    Ok(SplitPlan { seed, min_images_per_anp, langs, dropped_anps: dropped })
}
