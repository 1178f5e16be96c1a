//! Seeded k-means (k-means++ seeding, Lloyd iterations) over dense vectors.

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{CoreError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub assignments: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    /// Within-cluster sum of squared distances after each assignment pass.
    pub sse_history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl KMeansResult {
    pub fn sse(&self) -> f64 {
        *self.sse_history.last().expect("at least one pass")
    }

    pub fn members(&self, cluster: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] == cluster)
            .collect()
    }
}

pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Nearest centroid; ties go to the lower index.
fn nearest(p: &[f64], centroids: &[Vec<f64>]) -> usize {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centroids.iter().enumerate() {
        let d = sq_dist(p, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best.0
}

fn plus_plus_init(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut centroids = vec![points[rng.gen_range(0..points.len())].clone()];
    while centroids.len() < k {
        let weights: Vec<f64> = points
            .iter()
            .map(|p| {
                centroids
                    .iter()
                    .map(|c| sq_dist(p, c))
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        let next = match WeightedIndex::new(&weights) {
            Ok(dist) => dist.sample(rng),
            // Every point coincides with a centroid: fall back to a uniform pick.
            Err(_) => rng.gen_range(0..points.len()),
        };
        centroids.push(points[next].clone());
    }
    centroids
}

fn sse(points: &[Vec<f64>], assignments: &[usize], centroids: &[Vec<f64>]) -> f64 {
    points
        .iter()
        .zip(assignments)
        .map(|(p, &a)| sq_dist(p, &centroids[a]))
        .sum()
}

/// Lloyd's algorithm from a seeded k-means++ start. Stops when assignments stop changing
/// or after `max_iterations` update passes. An emptied cluster keeps its previous centroid.
pub fn kmeans(points: &[Vec<f64>], k: usize, seed: u64, max_iterations: usize) -> Result<KMeansResult> {
    if k == 0 || points.len() < k {
        return Err(CoreError::Precondition(format!(
            "k-means needs 1 <= k <= n points (k = {k}, n = {})",
            points.len()
        )));
    }
    let dim = points[0].len();
    if points.iter().any(|p| p.len() != dim) {
        return Err(CoreError::InvalidInput("points have mixed dimensions".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = plus_plus_init(points, k, &mut rng);
    let mut assignments: Vec<usize> = points.iter().map(|p| nearest(p, &centroids)).collect();
    let mut sse_history = vec![sse(points, &assignments, &centroids)];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iterations {
        iterations += 1;
        for (j, c) in centroids.iter_mut().enumerate() {
            let members: Vec<&Vec<f64>> = points
                .iter()
                .zip(&assignments)
                .filter(|(_, &a)| a == j)
                .map(|(p, _)| p)
                .collect();
            if members.is_empty() {
                continue;
            }
            for (d, slot) in c.iter_mut().enumerate() {
                *slot = members.iter().map(|m| m[d]).sum::<f64>() / members.len() as f64;
            }
        }
        let next: Vec<usize> = points.iter().map(|p| nearest(p, &centroids)).collect();
        sse_history.push(sse(points, &next, &centroids));
        if next == assignments {
            converged = true;
            break;
        }
        assignments = next;
    }
    Ok(KMeansResult {
        assignments,
        centroids,
        sse_history,
        iterations,
        converged,
    })
}
