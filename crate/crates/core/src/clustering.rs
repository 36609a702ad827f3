//! K-means with seeded restarts and elbow-based choice of k. The resulting
//! cluster labels serve as the crisp decision attribute.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DecisionSystem, InformationSystem, NormalizedMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KChoice {
    #[default]
    Auto,
    Fixed(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterConfig {
    pub k: KChoice,
    /// Upper end of the elbow scan; `None` means `min(10, n - 1)`.
    pub k_max: Option<usize>,
    pub nstart: usize,
    pub seed: u64,
    pub max_iterations: usize,
    pub tolerance: f64,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        Self {
            k: KChoice::Auto,
            k_max: None,
            nstart: 25,
            seed: 0,
            max_iterations: 100,
            tolerance: 1e-9,
        }
    }
}

impl ClusterConfig {
    pub fn with_k(k: usize) -> Self {
        Self {
            k: KChoice::Fixed(k),
            ..Self::default()
        }
    }

    fn effective_k_max(&self, n: usize) -> usize {
        self.k_max.unwrap_or_else(|| 10.min(n.saturating_sub(1)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterAssignment {
    /// Provider id to label in `1..=k`.
    pub labels: BTreeMap<String, u32>,
    /// Labels in matrix row order.
    pub row_labels: Vec<u32>,
    pub centroids: Vec<Vec<f64>>,
    /// Within-cluster sum of squared distances.
    pub sse: f64,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(point: &[f64], centroids: &[Vec<f64>]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (c, centroid) in centroids.iter().enumerate() {
        let d = sq_dist(point, centroid);
        if d < best_d {
            best_d = d;
            best = c;
        }
    }
    best
}

fn means(rows: &[Vec<f64>], assign: &[usize], k: usize, width: usize) -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut sums = vec![vec![0.0; width]; k];
    let mut counts = vec![0usize; k];
    for (row, &c) in rows.iter().zip(assign) {
        counts[c] += 1;
        for (s, v) in sums[c].iter_mut().zip(row) {
            *s += v;
        }
    }
    for (s, &n) in sums.iter_mut().zip(&counts) {
        if n > 0 {
            s.iter_mut().for_each(|x| *x /= n as f64);
        }
    }
    (sums, counts)
}

struct Run {
    assign: Vec<usize>,
    centroids: Vec<Vec<f64>>,
    sse: f64,
}

/// One Lloyd run from `k` distinct randomly chosen rows.
fn lloyd(rows: &[Vec<f64>], k: usize, config: &ClusterConfig, rng: &mut ChaCha8Rng) -> Run {
    let n = rows.len();
    let width = rows.first().map_or(0, Vec::len);
    let mut centroids: Vec<Vec<f64>> = rand::seq::index::sample(rng, n, k)
        .into_iter()
        .map(|i| rows[i].clone())
        .collect();
    let mut assign: Vec<usize> = rows.iter().map(|r| nearest(r, &centroids)).collect();

    for _ in 0..config.max_iterations {
        let (mut next, mut counts) = means(rows, &assign, k, width);

        // Empty clusters take the point farthest from its current centroid.
        while let Some(empty) = counts.iter().position(|&c| c == 0) {
            let donor = (0..n)
                .filter(|&i| counts[assign[i]] > 1)
                .max_by(|&a, &b| {
                    let da = sq_dist(&rows[a], &next[assign[a]]);
                    let db = sq_dist(&rows[b], &next[assign[b]]);
                    da.total_cmp(&db).then(b.cmp(&a))
                });
            let Some(i) = donor else { break };
            assign[i] = empty;
            (next, counts) = means(rows, &assign, k, width);
        }

        let shift: f64 = centroids.iter().zip(&next).map(|(a, b)| sq_dist(a, b)).sum();
        centroids = next;
        let reassigned: Vec<usize> = rows.iter().map(|r| nearest(r, &centroids)).collect();
        // Keep the repaired assignment when nearest-centroid would re-empty a cluster.
        let mut counts_new = vec![0usize; k];
        reassigned.iter().for_each(|&c| counts_new[c] += 1);
        let stable = reassigned == assign;
        if counts_new.iter().all(|&c| c > 0) {
            assign = reassigned;
        }
        if stable || shift <= config.tolerance {
            break;
        }
    }

    let (centroids, _) = means(rows, &assign, k, width);
    let sse = rows.iter().zip(&assign).map(|(r, &c)| sq_dist(r, &centroids[c])).sum();
    Run { assign, centroids, sse }
}

/// Runs Lloyd's algorithm `nstart` times and keeps the lowest-SSE run.
pub fn kmeans(matrix: &NormalizedMatrix, config: &ClusterConfig) -> Result<ClusterAssignment> {
    let k = match config.k {
        KChoice::Fixed(k) => k,
        KChoice::Auto => elbow_optimal_k(matrix, config)?,
    };
    kmeans_with_k(matrix, k, config)
}

pub fn kmeans_with_k(matrix: &NormalizedMatrix, k: usize, config: &ClusterConfig) -> Result<ClusterAssignment> {
    let n = matrix.n_rows();
    if k < 1 || k > n {
        return Err(Error::InvalidK(format!("k = {k} must be in 1..={n}")));
    }
    if config.nstart < 1 {
        return Err(Error::InvalidK("nstart must be at least 1".into()));
    }
    let rows = &matrix.rows;
    let best = (0..config.nstart)
        .into_par_iter()
        .map(|restart| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(restart as u64);
            (restart, lloyd(rows, k, config, &mut rng))
        })
        .min_by(|(ra, a), (rb, b)| a.sse.total_cmp(&b.sse).then(ra.cmp(rb)))
        .map(|(_, run)| run)
        .expect("nstart >= 1");

    // Canonical labels: clusters numbered by first appearance in row order.
    let mut remap = vec![0u32; k];
    let mut next = 1;
    for &c in &best.assign {
        if remap[c] == 0 {
            remap[c] = next;
            next += 1;
        }
    }
    let mut centroids = vec![Vec::new(); k];
    for (c, centroid) in best.centroids.into_iter().enumerate() {
        if remap[c] > 0 {
            centroids[remap[c] as usize - 1] = centroid;
        }
    }
    centroids.retain(|c| !c.is_empty());
    let row_labels: Vec<u32> = best.assign.iter().map(|&c| remap[c]).collect();
    let labels = matrix.provider_ids.iter().cloned().zip(row_labels.iter().copied()).collect();
    Ok(ClusterAssignment {
        labels,
        row_labels,
        centroids,
        sse: best.sse,
    })
}

/// Best-of-`nstart` SSE for every k in `1..=k_max`.
pub fn sse_curve(matrix: &NormalizedMatrix, k_max: usize, config: &ClusterConfig) -> Result<Vec<f64>> {
    (1..=k_max)
        .map(|k| kmeans_with_k(matrix, k, config).map(|a| a.sse))
        .collect()
}

/// Picks the k with the largest second difference of the SSE curve over
/// `2..k_max`; ties go to the smaller k.
pub fn elbow_optimal_k(matrix: &NormalizedMatrix, config: &ClusterConfig) -> Result<usize> {
    let n = matrix.n_rows();
    let k_max = config.effective_k_max(n);
    if k_max < 3 || k_max > n {
        return Err(Error::InvalidK(format!("k_max = {k_max} must be in 3..={n}")));
    }
    let sse = sse_curve(matrix, k_max, config)?;
    Ok(knee(&sse))
}

/// `sse[i]` is SSE(i + 1). Returns the knee k.
pub(crate) fn knee(sse: &[f64]) -> usize {
    let mut best_k = 2;
    let mut best = f64::NEG_INFINITY;
    for k in 2..sse.len() {
        let second = sse[k - 2] - 2.0 * sse[k - 1] + sse[k];
        if second > best {
            best = second;
            best_k = k;
        }
    }
    best_k
}

/// Attaches cluster labels to an information system as its decision attribute.
pub fn attach_decision(is: &InformationSystem, assignment: &ClusterAssignment) -> Result<DecisionSystem> {
    let mut labels = BTreeMap::new();
    for p in &is.providers {
        let label = assignment
            .labels
            .get(&p.id)
            .ok_or_else(|| Error::MissingLabel(p.id.clone()))?;
        labels.insert(p.id.clone(), *label);
    }
    DecisionSystem::new(is.clone(), labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::casestudy;
    use crate::model::min_max_normalize;
    use rand::Rng;

    fn column(points: &[f64]) -> NormalizedMatrix {
        NormalizedMatrix::from_rows(points.iter().map(|&x| vec![x]).collect())
    }

    fn blobs() -> NormalizedMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut rows = Vec::new();
        for (cx, cy) in [(0.0, 0.0), (5.0, 5.0), (10.0, 0.0)] {
            for _ in 0..8 {
                rows.push(vec![cx + rng.random_range(-0.1..0.1), cy + rng.random_range(-0.1..0.1)]);
            }
        }
        NormalizedMatrix::from_rows(rows)
    }

    #[test]
    fn single_cluster_uses_column_means() {
        let m = NormalizedMatrix::from_rows(vec![vec![0.0, 1.0], vec![1.0, 3.0], vec![2.0, 5.0]]);
        let a = kmeans_with_k(&m, 1, &ClusterConfig::default()).unwrap();
        assert!(a.row_labels.iter().all(|&l| l == 1));
        assert_eq!(a.centroids, vec![vec![1.0, 3.0]]);
        assert!((a.sse - (2.0 + 8.0)).abs() < 1e-12);
    }

    #[test]
    fn perfect_separation_has_zero_sse() {
        let m = column(&[0.0, 0.0, 0.5, 0.5, 1.0, 1.0]);
        let a = kmeans_with_k(&m, 3, &ClusterConfig::default()).unwrap();
        assert_eq!(a.sse, 0.0);
        assert_eq!(a.row_labels, vec![1, 1, 2, 2, 3, 3]);
    }

    /// Minimum-SSE 2-partition by enumerating every split of the points.
    fn best_two_partition(points: &[f64]) -> (f64, Vec<bool>) {
        let n = points.len();
        let mut best = (f64::INFINITY, Vec::new());
        for mask in 1u32..(1 << (n - 1)) {
            let side: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
            let mut sse = 0.0;
            for flag in [false, true] {
                let group: Vec<f64> = points.iter().zip(&side).filter(|(_, &s)| s == flag).map(|(p, _)| *p).collect();
                let mean = group.iter().sum::<f64>() / group.len() as f64;
                sse += group.iter().map(|x| (x - mean).powi(2)).sum::<f64>();
            }
            if sse < best.0 {
                best = (sse, side);
            }
        }
        best
    }

    #[test]
    fn two_means_matches_exhaustive_partition() {
        let points = [0.0, 0.1, 0.2, 0.8, 0.9, 1.0];
        let (oracle_sse, oracle_side) = best_two_partition(&points);
        let a = kmeans_with_k(&column(&points), 2, &ClusterConfig::default()).unwrap();
        assert!((a.sse - oracle_sse).abs() < 1e-12);
        assert_eq!(a.row_labels, vec![1, 1, 1, 2, 2, 2]);
        for i in 0..points.len() {
            for j in 0..points.len() {
                assert_eq!(oracle_side[i] == oracle_side[j], a.row_labels[i] == a.row_labels[j]);
            }
        }
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let m = blobs();
        let cfg = ClusterConfig {
            seed: 99,
            ..ClusterConfig::default()
        };
        assert_eq!(kmeans_with_k(&m, 4, &cfg).unwrap(), kmeans_with_k(&m, 4, &cfg).unwrap());
    }

    #[test]
    fn elbow_finds_three_blobs() {
        let m = blobs();
        let cfg = ClusterConfig::default();
        assert_eq!(elbow_optimal_k(&m, &cfg).unwrap(), 3);
        // SSE(3) is the within-blob scatter of the generating partition.
        let a = kmeans_with_k(&m, 3, &cfg).unwrap();
        let mut direct = 0.0;
        for blob in m.rows.chunks(8) {
            let cx = blob.iter().map(|r| r[0]).sum::<f64>() / 8.0;
            let cy = blob.iter().map(|r| r[1]).sum::<f64>() / 8.0;
            direct += blob.iter().map(|r| (r[0] - cx).powi(2) + (r[1] - cy).powi(2)).sum::<f64>();
        }
        assert!((a.sse - direct).abs() < 1e-9);
    }

    #[test]
    fn elbow_on_two_duplicated_sites() {
        let mut rows = vec![vec![0.2, 0.2]; 10];
        rows.extend(vec![vec![0.9, 0.7]; 10]);
        let m = NormalizedMatrix::from_rows(rows);
        assert_eq!(elbow_optimal_k(&m, &ClusterConfig::default()).unwrap(), 2);
    }

    #[test]
    fn invalid_k_is_rejected() {
        let m = column(&[0.0, 1.0]);
        assert!(matches!(kmeans_with_k(&m, 3, &ClusterConfig::default()), Err(Error::InvalidK(_))));
        assert!(matches!(kmeans_with_k(&m, 0, &ClusterConfig::default()), Err(Error::InvalidK(_))));
        assert!(matches!(elbow_optimal_k(&m, &ClusterConfig::default()), Err(Error::InvalidK(_))));
    }

    #[test]
    fn knee_prefers_smaller_k_on_ties() {
        assert_eq!(knee(&[4.0, 2.0, 0.0, 0.0, 0.0]), 3);
        assert_eq!(knee(&[3.0, 2.0, 1.0, 0.0]), 2);
    }

    #[test]
    fn attach_case_study_labels() {
        let is = casestudy::information_system();
        let labels = casestudy::labels();
        let assignment = ClusterAssignment {
            row_labels: is.providers.iter().map(|p| labels[&p.id]).collect(),
            labels: labels.clone(),
            centroids: vec![],
            sse: 0.0,
        };
        let ds = attach_decision(&is, &assignment).unwrap();
        assert_eq!(ds.label_vec(), vec![3, 1, 3, 2, 1, 3, 1, 2, 2, 2]);
        assert_eq!(ds.base, is);

        let mut partial = assignment.clone();
        partial.labels.remove("rackspace");
        assert!(matches!(attach_decision(&is, &partial), Err(Error::MissingLabel(_))));
    }

    #[test]
    fn case_study_elbow_runs() {
        let m = min_max_normalize(&casestudy::information_system());
        let k = elbow_optimal_k(&m, &ClusterConfig::default()).unwrap();
        assert!((2..=8).contains(&k));
    }
}
