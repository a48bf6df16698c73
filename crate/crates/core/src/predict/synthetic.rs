//! Generative feature fixtures: each language's sentiment signal is a mix
//! of a direction shared by all languages and a language-specific one,
//! plus isotropic Gaussian noise.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::features::{anp_key, FeatureSet};
use crate::error::{Error, Result};
use crate::filters::{AnpRecord, AnpStatus};

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub langs: Vec<String>,
    pub images_per_lang: usize,
    pub anps_per_lang: usize,
    pub dim: usize,
    pub shared_strength: f64,
    pub lang_strength: f64,
    pub noise: f64,
    /// Removes the noise component lying in the span of the signal
    /// directions, which makes every language linearly separable.
    pub separable: bool,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn default_with_seed(seed: u64) -> Self {
        SyntheticSpec {
            langs: (0..4).map(|i| format!("l{i}")).collect(),
            images_per_lang: 400,
            anps_per_lang: 8,
            dim: 32,
            shared_strength: 1.0,
            lang_strength: 1.0,
            noise: 1.0,
            separable: false,
            seed,
        }
    }

    pub fn separable(n_langs: usize, seed: u64) -> Self {
        SyntheticSpec {
            langs: (0..n_langs).map(|i| format!("l{i}")).collect(),
            separable: true,
            ..Self::default_with_seed(seed)
        }
    }
}

/// Orthonormal directions: index 0 is shared, 1.. are per language.
fn orthonormal(n: usize, dim: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let normal = Normal::new(0.0, 1.0).unwrap();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n);
    while basis.len() < n {
        let mut v: Vec<f64> = (0..dim).map(|_| normal.sample(rng)).collect();
        for b in &basis {
            let d: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            for (x, y) in v.iter_mut().zip(b) {
                *x -= d * y;
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-6 {
            basis.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    basis
}

/// Builds an ontology (half positive, half negative pairs per language) and
/// one feature row per image.
pub fn generate(spec: &SyntheticSpec) -> Result<(Vec<AnpRecord>, FeatureSet)> {
    if spec.langs.is_empty() || spec.anps_per_lang < 2 || spec.images_per_lang < spec.anps_per_lang {
        return Err(Error::invalid("synthetic spec needs languages, at least two pairs and one image per pair"));
    }
    if spec.dim < spec.langs.len() + 1 {
        return Err(Error::invalid("synthetic dimension must exceed the number of languages"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let basis = orthonormal(spec.langs.len() + 1, spec.dim, &mut rng);
    let normal = Normal::new(0.0, spec.noise.max(0.0)).unwrap();
    let mut features = FeatureSet::new(spec.dim)?;
    let mut ontology = Vec::new();

    for (li, lang) in spec.langs.iter().enumerate() {
        let signal: Vec<f64> = basis[0]
            .iter()
            .zip(&basis[li + 1])
            .map(|(g, u)| spec.shared_strength * g + spec.lang_strength * u)
            .collect();
        for a in 0..spec.anps_per_lang {
            let positive = a % 2 == 0;
            let adj = format!("{}{a}", if positive { "good" } else { "bad" });
            let noun = format!("thing{a}");
            let key = anp_key(&adj, &noun);
            let n_images = spec.images_per_lang / spec.anps_per_lang
                + usize::from(a < spec.images_per_lang % spec.anps_per_lang);
            let mut ids = std::collections::BTreeSet::new();
            for k in 0..n_images {
                let id = format!("{lang}-{a:03}-{k:05}");
                let mut noise: Vec<f64> = (0..spec.dim).map(|_| normal.sample(&mut rng)).collect();
                if spec.separable {
                    for b in &basis {
                        let d: f64 = noise.iter().zip(b).map(|(x, y)| x * y).sum();
                        for (x, y) in noise.iter_mut().zip(b) {
                            *x -= d * y;
                        }
                    }
                }
                let y = if positive { 1.0 } else { -1.0 };
                let v: Vec<f32> = signal.iter().zip(&noise).map(|(s, n)| (y * s + n) as f32).collect();
                features.insert(&id, &key, lang, v)?;
                ids.insert(id);
            }
            let s = if positive { 0.6 } else { -0.6 };
            ontology.push(AnpRecord {
                adj,
                noun,
                lang: lang.clone(),
                sentiment: s,
                adj_sentiment: s,
                noun_sentiment: 0.0,
                tag_frequency: n_images as u64,
                image_ids: ids,
                uploaders: Default::default(),
                emotion_cooccur: Vec::new(),
                status: AnpStatus::PreCrowd,
                filter_trace: Vec::new(),
            });
        }
    }
    Ok((ontology, features))
}
