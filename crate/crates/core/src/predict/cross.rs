use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::features::FeatureSet;
use super::linear::{train_linear, LinearModel, TrainOptions};
use super::splits::SplitPlan;
use crate::crosslingual::derive_seed;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyMatrix {
    pub langs: Vec<String>,
    /// `acc[r][c]`: model of `langs[r]` on the test set of `langs[c]`.
    pub acc: Vec<Vec<f64>>,
}

impl AccuracyMatrix {
    pub fn get(&self, model_lang: &str, test_lang: &str) -> Option<f64> {
        let r = self.langs.iter().position(|l| l == model_lang)?;
        let c = self.langs.iter().position(|l| l == test_lang)?;
        Some(self.acc[r][c])
    }

    pub fn mean_diagonal(&self) -> f64 {
        let n = self.langs.len();
        (0..n).map(|i| self.acc[i][i]).sum::<f64>() / n as f64
    }

    /// Mean of the off-diagonal entries; NaN for a single language.
    pub fn mean_off_diagonal(&self) -> f64 {
        let n = self.langs.len();
        let mut sum = 0.0;
        for r in 0..n {
            for c in 0..n {
                if r != c {
                    sum += self.acc[r][c];
                }
            }
        }
        sum / (n * n - n) as f64
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("model\\test");
        for l in &self.langs {
            out.push('\t');
            out.push_str(l);
        }
        out.push('\n');
        for (l, row) in self.langs.iter().zip(&self.acc) {
            out.push_str(l);
            for v in row {
                out.push_str(&format!("\t{v:.6}"));
            }
            out.push('\n');
        }
        out
    }
}

fn examples<'a>(set: &'a [(String, bool)], features: &'a FeatureSet) -> Result<(Vec<&'a [f32]>, Vec<bool>)> {
    let mut xs = Vec::with_capacity(set.len());
    let mut ys = Vec::with_capacity(set.len());
    for (id, y) in set {
        let row = features
            .get(id)
            .ok_or_else(|| Error::invalid(format!("split references image {id} with no feature row")))?;
        xs.push(row.vector.as_slice());
        ys.push(*y);
    }
    Ok((xs, ys))
}

/// Trains one model per language on its training split, one thread per
/// language. Each language gets its own seed stream.
pub fn train_per_language(plan: &SplitPlan, features: &FeatureSet, opts: &TrainOptions) -> Result<BTreeMap<String, LinearModel>> {
    let results: Vec<(String, Result<LinearModel>)> = std::thread::scope(|scope| {
        let handles: Vec<_> = plan
            .langs
            .iter()
            .enumerate()
            .map(|(i, (lang, split))| {
                let opts = TrainOptions { seed: derive_seed(opts.seed, i as u64), ..*opts };
                let handle = scope.spawn(move || -> Result<LinearModel> {
                    let (xs, ys) = examples(&split.train, features)?;
                    Ok(train_linear(&xs, &ys, &opts)?.model)
                });
                (lang.clone(), handle)
            })
            .collect();
        handles
            .into_iter()
            .map(|(lang, h)| (lang, h.join().expect("training thread panicked")))
            .collect()
    });
    let mut models = BTreeMap::new();
    for (lang, r) in results {
        models.insert(lang.clone(), r.map_err(|e| Error::invalid(format!("training {lang}: {e}")))?);
    }
    Ok(models)
}

/// Accuracy of every language's model on every language's test split.
pub fn cross_predict(models: &BTreeMap<String, LinearModel>, plan: &SplitPlan, features: &FeatureSet) -> Result<AccuracyMatrix> {
    let langs: Vec<String> = models.keys().cloned().collect();
    for (lang, m) in models {
        if m.dim() != features.dim {
            return Err(Error::invalid(format!(
                "model for {lang} has dimension {}, features have {}",
                m.dim(),
                features.dim
            )));
        }
        if !plan.langs.contains_key(lang) {
            return Err(Error::invalid(format!("no test split for language {lang}")));
        }
    }
    let mut acc = Vec::with_capacity(langs.len());
    for r in &langs {
        let model = &models[r];
        let mut row = Vec::with_capacity(langs.len());
        for c in &langs {
            let (xs, ys) = examples(&plan.langs[c].test, features)?;
            row.push(model.accuracy(&xs, &ys));
        }
        acc.push(row);
    }
    Ok(AccuracyMatrix { langs, acc })
}
