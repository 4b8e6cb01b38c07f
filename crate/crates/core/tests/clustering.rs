use std::collections::HashMap;

use ndarray::{array, Array2};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use semshift::clustering::{
    kmeans, pca_2d, select_hashtag_vectors, silhouette, sweep_k, top_hashtags_per_cluster, Pca2, DEFAULT_MAX_ITERS,
    DEFAULT_RESTARTS,
};
use semshift::{EmbeddingSpace, Error};

/// `per` noisy unit vectors around each of `centers` random directions.
fn blobs(centers: usize, per: usize, dim: usize, noise: f64, seed: u64) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mids: Vec<Vec<f64>> = (0..centers)
        .map(|_| (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
        .collect();
    let mut m = Array2::zeros((centers * per, dim));
    for c in 0..centers {
        for p in 0..per {
            let v: Vec<f64> = mids[c]
                .iter()
                .map(|x| x + noise * rng.sample::<f64, _>(StandardNormal))
                .collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            for (k, x) in v.iter().enumerate() {
                m[[c * per + p, k]] = x / norm;
            }
        }
    }
    m
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Textbook silhouette, straight from the definition.
fn silhouette_oracle(data: &Array2<f64>, labels: &[usize]) -> Vec<f64> {
    let n = data.nrows();
    let k = labels.iter().max().unwrap() + 1;
    (0..n)
        .map(|i| {
            let own = labels.iter().filter(|&&l| l == labels[i]).count();
            if own == 1 {
                return 0.0;
            }
            let mean_to = |c: usize| {
                let members: Vec<usize> = (0..n).filter(|&j| labels[j] == c && j != i).collect();
                members
                    .iter()
                    .map(|&j| dist(data.row(i).as_slice().unwrap(), data.row(j).as_slice().unwrap()))
                    .sum::<f64>()
                    / members.len() as f64
            };
            let a = mean_to(labels[i]);
            let b = (0..k)
                .filter(|&c| c != labels[i] && labels.contains(&c))
                .map(mean_to)
                .fold(f64::INFINITY, f64::min);
            (b - a) / a.max(b)
        })
        .collect()
}

fn same_partition(a: &[usize], b: &[usize]) -> bool {
    (0..a.len()).all(|i| (0..a.len()).all(|j| (a[i] == a[j]) == (b[i] == b[j])))
}

#[test]
fn three_blobs_pick_three() {
    let data = blobs(3, 30, 10, 0.3, 1);
    let sweep = sweep_k(&data, 2..=8, 0).unwrap();
    assert_eq!(sweep.best_k, 3);
    assert_eq!(
        sweep.scores.iter().map(|s| s.0).collect::<Vec<_>>(),
        (2..=8).collect::<Vec<_>>()
    );
    let best = kmeans(&data, 3, 0, DEFAULT_MAX_ITERS, DEFAULT_RESTARTS).unwrap();
    let truth: Vec<usize> = (0..90).map(|i| i / 30).collect();
    assert!(same_partition(&best.assignments, &truth));
    assert!(best.silhouette.unwrap().mean > 0.6);
}

#[test]
fn silhouette_matches_the_definition() {
    let data = blobs(4, 8, 5, 1.0, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut labels: Vec<usize> = (0..32).map(|_| rng.random_range(0..4)).collect();
    labels[31] = 3;
    labels[0] = 0;
    let got = silhouette(&data, &labels).unwrap();
    let oracle = silhouette_oracle(&data, &labels);
    for (g, o) in got.values.iter().zip(&oracle) {
        assert!((g - o).abs() < 1e-12);
        assert!((-1.0..=1.0).contains(g));
    }
    assert!((got.mean - oracle.iter().sum::<f64>() / 32.0).abs() < 1e-12);
}

#[test]
fn singleton_clusters_score_zero() {
    let data = array![[0.0, 0.0], [0.1, 0.0], [5.0, 5.0]];
    let s = silhouette(&data, &[0, 0, 1]).unwrap();
    assert_eq!(s.values[2], 0.0);
    assert!(s.values[0] > 0.9);
}

#[test]
fn kmeans_is_deterministic_and_monotone() {
    let data = blobs(3, 20, 6, 0.8, 3);
    let a = kmeans(&data, 4, 11, DEFAULT_MAX_ITERS, DEFAULT_RESTARTS).unwrap();
    let b = kmeans(&data, 4, 11, DEFAULT_MAX_ITERS, DEFAULT_RESTARTS).unwrap();
    assert_eq!(a, b);
    assert!(a.inertia_history.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    assert_eq!(a.assignments.len(), 60);
    assert!(a.assignments.iter().all(|&c| c < 4));
}

#[test]
fn row_order_does_not_change_separated_clusters() {
    let data = blobs(3, 15, 8, 0.2, 4);
    let mut perm: Vec<usize> = (0..45).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(5));
    let shuffled = data.select(ndarray::Axis(0), &perm);
    let a = kmeans(&data, 3, 0, DEFAULT_MAX_ITERS, DEFAULT_RESTARTS).unwrap();
    let b = kmeans(&shuffled, 3, 0, DEFAULT_MAX_ITERS, DEFAULT_RESTARTS).unwrap();
    let unshuffled: Vec<usize> = {
        let mut v = vec![0; 45];
        for (pos, &orig) in perm.iter().enumerate() {
            v[orig] = b.assignments[pos];
        }
        v
    };
    assert!(same_partition(&a.assignments, &unshuffled));
}

#[test]
fn bad_k_is_rejected() {
    let data = blobs(2, 3, 3, 0.1, 6);
    assert!(matches!(kmeans(&data, 0, 0, 10, 1), Err(Error::InvalidArgument(_))));
    assert!(matches!(kmeans(&data, 7, 0, 10, 1), Err(Error::InvalidArgument(_))));
    assert!(sweep_k(&data, 2..=6, 0).is_err());
    assert!(sweep_k(&data, 1..=3, 0).is_err());
    assert!(kmeans(&data, 1, 0, 10, 1).unwrap().silhouette.is_none());
}

/// Leading eigenvectors of the sample covariance by power iteration with deflation.
fn pca_oracle(data: &Array2<f64>) -> (Vec<Vec<f64>>, Vec<f64>) {
    let (n, d) = data.dim();
    let mean: Vec<f64> = (0..d).map(|j| data.column(j).sum() / n as f64).collect();
    let mut cov = vec![vec![0.0; d]; d];
    for r in data.rows() {
        for a in 0..d {
            for b in 0..d {
                cov[a][b] += (r[a] - mean[a]) * (r[b] - mean[b]) / (n - 1) as f64;
            }
        }
    }
    let mut axes = Vec::new();
    let mut values = Vec::new();
    for _ in 0..2 {
        let mut v = vec![1.0; d];
        let mut lambda = 0.0;
        for _ in 0..5000 {
            let w: Vec<f64> = (0..d).map(|a| (0..d).map(|b| cov[a][b] * v[b]).sum()).collect();
            lambda = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            v = w.iter().map(|x| x / lambda).collect();
        }
        for a in 0..d {
            for b in 0..d {
                cov[a][b] -= lambda * v[a] * v[b];
            }
        }
        axes.push(v);
        values.push(lambda);
    }
    (axes, values)
}

#[test]
fn pca_matches_power_iteration() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let scales = [5.0, 3.0, 1.0, 0.5, 0.2];
    let data = Array2::from_shape_fn((80, 5), |(_, j)| {
        scales[j] * rng.sample::<f64, _>(StandardNormal) + j as f64
    });
    let pca = Pca2::fit(&data).unwrap();
    let (axes, values) = pca_oracle(&data);
    for k in 0..2 {
        let dot: f64 = pca.components.row(k).iter().zip(&axes[k]).map(|(a, b)| a * b).sum();
        assert!((dot.abs() - 1.0).abs() < 1e-9, "axis {k}: {dot}");
        assert!((pca.explained_variance[k] - values[k]).abs() < 1e-8 * values[k]);
    }
    let points = pca_2d(&data).unwrap();
    assert_eq!(points.dim(), (80, 2));
    for k in 0..2 {
        assert!(points.column(k).sum().abs() < 1e-9);
    }
    assert!(pca.explained_variance[0] >= pca.explained_variance[1]);
}

#[test]
fn hashtag_selection_and_top_lists() {
    let words: Vec<String> = ["#a", "#b", "plain", "#c", "#"].iter().map(|w| w.to_string()).collect();
    let vectors = array![[3.0, 4.0], [1.0, 0.0], [1.0, 1.0], [0.0, 2.0], [1.0, 1.0]];
    let counts: HashMap<String, u64> = [("#a", 50), ("#b", 20), ("plain", 99), ("#c", 5), ("#", 80)]
        .iter()
        .map(|(w, c)| (w.to_string(), *c))
        .collect();
    let mut space = EmbeddingSpace::new("s", words, vectors, None).unwrap();
    space.set_frequencies(&counts);
    let (tokens, m) = select_hashtag_vectors(&space, 10).unwrap();
    assert_eq!(tokens, ["#a", "#b"]);
    assert_eq!(m.row(0).to_vec(), [0.6, 0.8]);
    assert!(matches!(
        select_hashtag_vectors(&space, 1000),
        Err(Error::NoHashtags(1000))
    ));

    let result = kmeans(&m, 1, 0, 10, 1).unwrap();
    let tops = top_hashtags_per_cluster(&result, &tokens, &counts, 1);
    assert_eq!(tops, vec![vec![("#a".to_string(), 50)]]);
}
