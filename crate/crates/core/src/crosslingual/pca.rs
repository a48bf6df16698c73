use nalgebra::{DMatrix, SymmetricEigen};

/// Projects points onto their first two principal components. Component
/// signs are fixed so the largest-magnitude loading is positive, which
/// makes the output deterministic.
pub fn project_2d(points: &[Vec<f64>]) -> Vec<[f64; 2]> {
    let n = points.len();
    if n == 0 {
        return Vec::new();
    }
    let d = points[0].len();
    let mean: Vec<f64> = (0..d)
        .map(|j| points.iter().map(|p| p[j]).sum::<f64>() / n as f64)
        .collect();
    let centered = DMatrix::from_fn(n, d, |i, j| points[i][j] - mean[j]);
    let cov = centered.transpose() * &centered / (n.max(2) - 1) as f64;
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));

    let axes: Vec<Vec<f64>> = order
        .iter()
        .take(2)
        .map(|&c| {
            let v: Vec<f64> = eig.eigenvectors.column(c).iter().copied().collect();
            let lead = v.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
            if lead < 0.0 {
                v.into_iter().map(|x| -x).collect()
            } else {
                v
            }
        })
        .collect();

    (0..n)
        .map(|i| {
            let mut xy = [0.0; 2];
            for (slot, axis) in xy.iter_mut().zip(&axes) {
                *slot = (0..d).map(|j| centered[(i, j)] * axis[j]).sum();
            }
            xy
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_dominant_axis() {
        let pts: Vec<Vec<f64>> = (0..10).map(|i| vec![0.0, i as f64, 0.01 * (i % 2) as f64]).collect();
        let xy = project_2d(&pts);
        assert!((xy[9][0] - xy[0][0] - 9.0).abs() < 1e-4);
        assert!(xy.iter().all(|p| p[1].abs() < 0.1));
    }

    #[test]
    fn degenerate_inputs() {
        assert!(project_2d(&[]).is_empty());
        assert_eq!(project_2d(&[vec![3.0]]), vec![[0.0, 0.0]]);
    }
}
