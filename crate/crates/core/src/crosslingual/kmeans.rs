use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::derive_seed;
use crate::error::{Error, Result};

pub const MAX_ITERATIONS: usize = 300;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansResult {
    pub assignments: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    /// Within-cluster sum of squared distances.
    pub inertia: f64,
    pub iterations: usize,
    /// Inertia after each assignment step.
    pub inertia_history: Vec<f64>,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub(crate) fn distinct_count(points: &[Vec<f64>]) -> usize {
    points
        .iter()
        .map(|p| p.iter().map(|v| v.to_bits()).collect::<Vec<u64>>())
        .collect::<HashSet<_>>()
        .len()
}

fn nearest(p: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, c) in centroids.iter().enumerate() {
        let d = sq_dist(p, c);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

fn assign(points: &[Vec<f64>], centroids: &[Vec<f64>]) -> (Vec<usize>, f64) {
    let mut inertia = 0.0;
    let labels = points
        .iter()
        .map(|p| {
            let (i, d) = nearest(p, centroids);
            inertia += d;
            i
        })
        .collect();
    (labels, inertia)
}

fn plus_plus_init(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut centroids = vec![points[rng.random_range(0..points.len())].clone()];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let mut target = rng.random::<f64>() * total;
        let mut pick = None;
        for (i, &d) in d2.iter().enumerate() {
            if d <= 0.0 {
                continue;
            }
            pick = Some(i);
            if target < d {
                break;
            }
            target -= d;
        }
        let c = points[pick.expect("k <= distinct points leaves positive mass")].clone();
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(sq_dist(p, &c));
        }
        centroids.push(c);
    }
    centroids
}

/// Recomputes centroids as cluster means. An empty cluster is moved to the
/// point farthest from its current centroid (lowest index on ties), each
/// point used at most once per step.
fn update(points: &[Vec<f64>], labels: &[usize], centroids: &mut [Vec<f64>]) {
    let dim = points[0].len();
    let k = centroids.len();
    let mut sums = vec![vec![0.0; dim]; k];
    let mut counts = vec![0usize; k];
    for (p, &l) in points.iter().zip(labels) {
        counts[l] += 1;
        for (s, x) in sums[l].iter_mut().zip(p) {
            *s += x;
        }
    }
    let mut used = HashSet::new();
    for c in 0..k {
        if counts[c] > 0 {
            centroids[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
        }
    }
    for c in 0..k {
        if counts[c] == 0 {
            let far = (0..points.len())
                .filter(|i| !used.contains(i))
                .max_by(|&a, &b| {
                    let da = sq_dist(&points[a], &centroids[labels[a]]);
                    let db = sq_dist(&points[b], &centroids[labels[b]]);
                    da.total_cmp(&db).then(b.cmp(&a))
                })
                .expect("more points than clusters");
            used.insert(far);
            centroids[c] = points[far].clone();
        }
    }
}

/// Lloyd's k-means with seeded k-means++ initialization. Stops when the
/// assignment is stable or after [`MAX_ITERATIONS`] update steps.
pub fn kmeans(points: &[Vec<f64>], k: usize, seed: u64) -> Result<KMeansResult> {
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    let Some(first) = points.first() else {
        return Err(Error::invalid("k-means on an empty point set"));
    };
    if points.iter().any(|p| p.len() != first.len()) {
        return Err(Error::invalid("points have inconsistent dimensionality"));
    }
    let distinct = distinct_count(points);
    if k > distinct {
        return Err(Error::invalid(format!("k = {k} exceeds {distinct} distinct points")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = plus_plus_init(points, k, &mut rng);
    let (mut labels, mut inertia) = assign(points, &centroids);
    let mut history = vec![inertia];
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        update(points, &labels, &mut centroids);
        let (next, next_inertia) = assign(points, &centroids);
        history.push(next_inertia);
        inertia = next_inertia;
        if next == labels {
            break;
        }
        labels = next;
    }
    Ok(KMeansResult {
        assignments: labels,
        centroids,
        inertia,
        iterations,
        inertia_history: history,
    })
}

/// Best-inertia result over `n_init` seeded restarts (first wins ties).
pub fn kmeans_restarts(points: &[Vec<f64>], k: usize, seed: u64, n_init: usize) -> Result<KMeansResult> {
    let mut best: Option<KMeansResult> = None;
    for run in 0..n_init.max(1) as u64 {
        let r = kmeans(points, k, derive_seed(seed, run))?;
        if best.as_ref().is_none_or(|b| r.inertia < b.inertia) {
            best = Some(r);
        }
    }
    Ok(best.expect("at least one run"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElbowOptions {
    /// A step whose relative inertia improvement falls below this counts as
    /// saturated.
    pub min_relative_gain: f64,
    pub n_init: usize,
}

impl Default for ElbowOptions {
    fn default() -> Self {
        ElbowOptions {
            min_relative_gain: 0.05,
            n_init: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElbowChoice {
    pub k: usize,
    /// `(k, inertia)` for every evaluated grid point.
    pub inertias: Vec<(usize, f64)>,
}

/// Elbow rule: the smallest grid `k` whose relative inertia improvement to
/// the next grid point is below the threshold; the last evaluated `k` if
/// inertia never saturates. Grid points above the number of distinct points
/// are skipped.
pub fn choose_k(points: &[Vec<f64>], grid: &[usize], seed: u64, opts: &ElbowOptions) -> Result<ElbowChoice> {
    if grid.len() < 2 {
        return Err(Error::invalid("elbow grid needs at least two values"));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("elbow grid must be strictly ascending"));
    }
    let distinct = distinct_count(points);
    let mut inertias = Vec::new();
    for &k in grid.iter().filter(|&&k| k >= 1 && k <= distinct) {
        let r = kmeans_restarts(points, k, derive_seed(seed, k as u64), opts.n_init)?;
        inertias.push((k, r.inertia));
    }
    let Some(&(last_k, _)) = inertias.last() else {
        return Err(Error::invalid("no grid value fits the number of distinct points"));
    };
    let k = inertias
        .windows(2)
        .find(|w| {
            let (here, next) = (w[0].1, w[1].1);
            let gain = if here > 0.0 { (here - next) / here } else { 0.0 };
            gain < opts.min_relative_gain
        })
        .map_or(last_k, |w| w[0].0);
    Ok(ElbowChoice { k, inertias })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand_distr::{Distribution, Normal};

    fn line(xs: &[f64]) -> Vec<Vec<f64>> {
        xs.iter().map(|&x| vec![x]).collect()
    }

    #[test]
    fn separated_points() {
        let r = kmeans(&line(&[0.0, 0.1, 10.0, 10.1]), 2, 1).unwrap();
        assert_eq!(r.assignments[0], r.assignments[1]);
        assert_eq!(r.assignments[2], r.assignments[3]);
        assert_ne!(r.assignments[0], r.assignments[2]);
        assert!((r.inertia - 0.01).abs() < 1e-9);
    }

    #[test]
    fn k_equals_n_has_zero_inertia() {
        let r = kmeans(&line(&[0.0, 3.0, 7.0, 11.0]), 4, 5).unwrap();
        assert_eq!(r.inertia, 0.0);
    }

    #[test]
    fn deterministic_under_seed() {
        let pts: Vec<Vec<f64>> = (0..50).map(|i| vec![(i * 37 % 11) as f64, (i * 13 % 7) as f64]).collect();
        assert_eq!(kmeans(&pts, 4, 9).unwrap(), kmeans(&pts, 4, 9).unwrap());
    }

    #[test]
    fn errors() {
        assert!(kmeans(&line(&[1.0, 1.0, 2.0]), 3, 0).is_err());
        assert!(kmeans(&[], 1, 0).is_err());
        assert!(kmeans(&line(&[1.0]), 0, 0).is_err());
        assert!(choose_k(&line(&[1.0, 2.0]), &[2], 0, &ElbowOptions::default()).is_err());
    }

    fn blobs(centers: &[Vec<f64>], per: usize, sigma: f64, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, sigma).unwrap();
        centers
            .iter()
            .flat_map(|c| {
                (0..per)
                    .map(|_| c.iter().map(|x| x + noise.sample(&mut rng)).collect::<Vec<f64>>())
                    .collect::<Vec<_>>()
            })
            .collect()
    }

    #[test]
    fn elbow_finds_five_blobs() {
        // d = 16, centers 10 apart on distinct axes, unit noise
        let centers: Vec<Vec<f64>> = (0..5)
            .map(|b| (0..16).map(|j| if j == b { 10.0 } else { 0.0 }).collect())
            .collect();
        let pts = blobs(&centers, 40, 0.5, 3);
        let grid: Vec<usize> = (2..=10).collect();
        let choice = choose_k(&pts, &grid, 11, &ElbowOptions::default()).unwrap();
        // the sweep itself is the oracle: big drops until 5, then saturation
        let gains: Vec<f64> = choice.inertias.windows(2).map(|w| (w[0].1 - w[1].1) / w[0].1).collect();
        assert!(gains[..3].iter().all(|&g| g > 0.2), "{gains:?}");
        assert!(gains[3] < 0.05, "{gains:?}");
        assert_eq!(choice.k, 5);
    }

    #[test]
    fn single_blob_picks_smallest_k() {
        // in high dimension a blob's split gains stay below the 5% bar
        let pts = blobs(&[vec![0.0; 64]], 200, 1.0, 5);
        let grid: Vec<usize> = (2..=6).collect();
        let c = choose_k(&pts, &grid, 1, &ElbowOptions::default()).unwrap();
        let first_gain = (c.inertias[0].1 - c.inertias[1].1) / c.inertias[0].1;
        assert!(first_gain < 0.05);
        assert_eq!(c.k, 2);
    }

    proptest! {
        #[test]
        fn inertia_never_increases(xs in proptest::collection::vec(-50.0f64..50.0, 6..40), k in 1usize..5, seed in 0u64..1000) {
            let pts: Vec<Vec<f64>> = xs.chunks(2).filter(|c| c.len() == 2).map(|c| c.to_vec()).collect();
            prop_assume!(k <= distinct_count(&pts));
            let r = kmeans(&pts, k, seed).unwrap();
            for w in r.inertia_history.windows(2) {
                prop_assert!(w[1] <= w[0] + 1e-9 * w[0].abs().max(1.0));
            }
            prop_assert_eq!(r.assignments.len(), pts.len());
            prop_assert!(r.assignments.iter().all(|&a| a < k));
        }
    }
}
