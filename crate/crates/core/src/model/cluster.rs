use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

const MAX_ITERATIONS: usize = 100;
const RESTARTS: usize = 10;

/// k-means result with centroids in lexicographic `(x, y)` order.
#[derive(Debug, Clone, PartialEq)]
pub struct TypeClusters {
    pub labels: Vec<usize>,
    pub anchors: Vec<[f64; 2]>,
    /// Within-cluster sum of squared distances.
    pub sse: f64,
}

fn dist2(a: [f64; 2], b: [f64; 2]) -> f64 {
    let (dx, dy) = (a[0] - b[0], a[1] - b[1]);
    dx * dx + dy * dy
}

fn nearest(p: [f64; 2], centroids: &[[f64; 2]]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (k, &c) in centroids.iter().enumerate() {
        let d = dist2(p, c);
        if d < best.1 {
            best = (k, d);
        }
    }
    best
}

fn seed_plus_plus(points: &[[f64; 2]], k: usize, rng: &mut ChaCha8Rng) -> Vec<[f64; 2]> {
    let mut centroids = vec![points[rng.random_range(0..points.len())]];
    let mut d2: Vec<f64> = points.iter().map(|&p| dist2(p, centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut idx = points.len() - 1;
            for (i, &w) in d2.iter().enumerate() {
                if target < w {
                    idx = i;
                    break;
                }
                target -= w;
            }
            idx
        } else {
            rng.random_range(0..points.len())
        };
        let c = points[pick];
        centroids.push(c);
        for (d, &p) in d2.iter_mut().zip(points) {
            *d = d.min(dist2(p, c));
        }
    }
    centroids
}

fn lloyd(points: &[[f64; 2]], mut centroids: Vec<[f64; 2]>) -> (Vec<usize>, Vec<[f64; 2]>, f64) {
    let k = centroids.len();
    let mut labels: Vec<usize> = points.iter().map(|&p| nearest(p, &centroids).0).collect();
    for _ in 0..MAX_ITERATIONS {
        let mut sums = vec![[0.0; 2]; k];
        let mut counts = vec![0usize; k];
        for (&p, &l) in points.iter().zip(&labels) {
            sums[l][0] += p[0];
            sums[l][1] += p[1];
            counts[l] += 1;
        }
        for c in 0..k {
            if counts[c] > 0 {
                centroids[c] = [sums[c][0] / counts[c] as f64, sums[c][1] / counts[c] as f64];
            }
        }
        let next: Vec<usize> = points.iter().map(|&p| nearest(p, &centroids).0).collect();
        if next == labels {
            break;
        }
        labels = next;
    }
    let sse = points.iter().zip(&labels).map(|(&p, &l)| dist2(p, centroids[l])).sum();
    (labels, centroids, sse)
}

/// Clusters parent-relative offsets into `n_types` part types.
///
/// Best of ten k-means++ restarts by SSE; centroids are then sorted
/// lexicographically so labels do not depend on restart order.
pub fn cluster_part_types(offsets: &[[f64; 2]], n_types: usize, seed: u64) -> Result<TypeClusters> {
    if n_types == 0 {
        return Err(Error::config("need at least one part type"));
    }
    if offsets.len() < n_types {
        return Err(Error::config(format!(
            "{} samples cannot form {} clusters",
            offsets.len(),
            n_types
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(Vec<usize>, Vec<[f64; 2]>, f64)> = None;
    for _ in 0..RESTARTS {
        let init = seed_plus_plus(offsets, n_types, &mut rng);
        let run = lloyd(offsets, init);
        if best.as_ref().is_none_or(|b| run.2 < b.2) {
            best = Some(run);
        }
    }
    let (_, mut centroids, _) = best.expect("at least one restart");
    centroids.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    let labels: Vec<usize> = offsets.iter().map(|&p| nearest(p, &centroids).0).collect();
    let sse = offsets.iter().zip(&labels).map(|(&p, &l)| dist2(p, centroids[l])).sum();
    Ok(TypeClusters {
        labels,
        anchors: centroids,
        sse,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blobs() -> Vec<[f64; 2]> {
        vec![
            [0.1, 0.0],
            [-0.2, 0.3],
            [0.0, -0.1],
            [0.3, 0.2],
            [-0.1, -0.2],
            [10.0, 5.0],
            [10.2, 5.1],
            [9.8, 4.7],
            [10.1, 5.3],
            [9.9, 4.9],
            [10.3, 5.2],
        ]
    }

    /// Minimum-SSE two-way split by trying every subset.
    fn exhaustive_two_partition(points: &[[f64; 2]]) -> Vec<bool> {
        let n = points.len();
        let sse = |mask: u32| {
            let mut total = 0.0;
            for side in [false, true] {
                let members: Vec<_> = (0..n).filter(|&i| ((mask >> i) & 1 == 1) == side).collect();
                if members.is_empty() {
                    continue;
                }
                let mx = members.iter().map(|&i| points[i][0]).sum::<f64>() / members.len() as f64;
                let my = members.iter().map(|&i| points[i][1]).sum::<f64>() / members.len() as f64;
                total += members.iter().map(|&i| dist2(points[i], [mx, my])).sum::<f64>();
            }
            total
        };
        let best = (1..(1u32 << n) - 1).min_by(|&a, &b| sse(a).total_cmp(&sse(b))).unwrap();
        (0..n).map(|i| (best >> i) & 1 == 1).collect()
    }

    #[test]
    fn one_type_anchor_is_the_mean() {
        let pts = blobs();
        let c = cluster_part_types(&pts, 1, 0).unwrap();
        assert!(c.labels.iter().all(|&l| l == 0));
        let mx = pts.iter().map(|p| p[0]).sum::<f64>() / pts.len() as f64;
        let my = pts.iter().map(|p| p[1]).sum::<f64>() / pts.len() as f64;
        assert!((c.anchors[0][0] - mx).abs() < 1e-12 && (c.anchors[0][1] - my).abs() < 1e-12);
    }

    #[test]
    fn two_blobs_match_exhaustive_partition() {
        let pts = blobs();
        let c = cluster_part_types(&pts, 2, 42).unwrap();
        let oracle = exhaustive_two_partition(&pts);
        let same = |i: usize, j: usize| (c.labels[i] == c.labels[j]) == (oracle[i] == oracle[j]);
        for i in 0..pts.len() {
            for j in 0..pts.len() {
                assert!(same(i, j));
            }
        }
        assert!(c.anchors[0][0] < c.anchors[1][0]);
    }

    #[test]
    fn duplicating_the_data_keeps_centroids() {
        let pts = blobs();
        let doubled: Vec<_> = pts.iter().chain(pts.iter()).copied().collect();
        let a = cluster_part_types(&pts, 2, 1).unwrap();
        let b = cluster_part_types(&doubled, 2, 1).unwrap();
        for (u, v) in a.anchors.iter().zip(&b.anchors) {
            assert!((u[0] - v[0]).abs() < 1e-12 && (u[1] - v[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn too_few_samples_is_a_config_error() {
        assert!(matches!(cluster_part_types(&[[0.0, 0.0]], 2, 0), Err(Error::Config(_))));
    }

    #[test]
    fn identical_points_are_handled() {
        let pts = vec![[1.0, 1.0]; 8];
        let c = cluster_part_types(&pts, 3, 7).unwrap();
        assert_eq!(c.labels, vec![0; 8]);
        assert_eq!(c.sse, 0.0);
    }
}
