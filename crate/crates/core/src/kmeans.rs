//! k-means++ seeding followed by Lloyd iterations.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::math::sq_dist;
use crate::rng;
use crate::{Error, Matrix, Result};

pub const MAX_LLOYD_ITERATIONS: usize = 300;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub assignment: Vec<usize>,
    /// `k × C` centroid rows.
    pub centroids: Matrix,
    /// Within-cluster sum of squares after each assignment step.
    pub inertia_trace: Vec<f64>,
    pub iterations: usize,
}

impl KMeansResult {
    pub fn inertia(&self) -> f64 {
        self.inertia_trace.last().copied().unwrap_or(0.0)
    }
}

pub fn distinct_rows(points: &Matrix) -> usize {
    let mut rows: Vec<&[f64]> = (0..points.nrows()).map(|i| points.row(i)).collect();
    let cmp = |a: &&[f64], b: &&[f64]| {
        a.iter().zip(b.iter()).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(core::cmp::Ordering::Equal)
    };
    rows.sort_by(cmp);
    rows.dedup_by(|a, b| cmp(a, b).is_eq());
    rows.len()
}

fn nearest(point: &[f64], centroids: &Matrix) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for c in 0..centroids.nrows() {
        let d = sq_dist(point, centroids.row(c));
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn plus_plus_seeds(points: &Matrix, k: usize, seed: u64) -> Matrix {
    let p = points.nrows();
    let mut r = rng::stream(seed, "kmeans++");
    let mut centroids = Matrix::zeros(k, points.ncols());
    let first = r.random_range(0..p);
    centroids.row_mut(0).copy_from_slice(points.row(first));
    let mut d2: Vec<f64> = (0..p).map(|i| sq_dist(points.row(i), points.row(first))).collect();
    for c in 1..k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = r.random::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = None;
            for (i, &d) in d2.iter().enumerate() {
                acc += d;
                if d > 0.0 && acc > target {
                    chosen = Some(i);
                    break;
                }
            }
            // Rounding can leave the target just past the last positive weight.
            chosen.unwrap_or_else(|| d2.iter().rposition(|&d| d > 0.0).expect("total > 0"))
        } else {
            first
        };
        centroids.row_mut(c).copy_from_slice(points.row(pick));
        for i in 0..p {
            d2[i] = d2[i].min(sq_dist(points.row(i), points.row(pick)));
        }
    }
    centroids
}

/// Clusters the rows of `points` into `k` groups.
pub fn kmeans(points: &Matrix, k: usize, seed: u64) -> Result<KMeansResult> {
    let p = points.nrows();
    if p == 0 {
        return Err(Error::EmptyInput);
    }
    if k == 0 {
        return Err(Error::InvalidArgument(format!("k = {k} must be positive")));
    }
    let distinct = distinct_rows(points);
    if k > distinct {
        return Err(Error::TooFewDistinctPoints { k, distinct });
    }
    let dim = points.ncols();
    let mut centroids = plus_plus_seeds(points, k, seed);
    let mut assignment = vec![usize::MAX; p];
    let mut inertia_trace = Vec::new();
    let mut iterations = 0;
    while iterations < MAX_LLOYD_ITERATIONS {
        iterations += 1;
        let mut changed = false;
        let mut inertia = 0.0;
        let mut dist = vec![0.0; p];
        for i in 0..p {
            let (c, d) = nearest(points.row(i), &centroids);
            if assignment[i] != c {
                assignment[i] = c;
                changed = true;
            }
            dist[i] = d;
            inertia += d;
        }
        // An empty cluster takes the point farthest from its centroid.
        let mut counts = vec![0usize; k];
        for &a in &assignment {
            counts[a] += 1;
        }
        for c in 0..k {
            if counts[c] == 0 {
                let far = (0..p)
                    .filter(|&i| counts[assignment[i]] > 1)
                    .fold(None, |best: Option<usize>, i| match best {
                        Some(b) if dist[b] >= dist[i] => Some(b),
                        _ => Some(i),
                    })
                    .expect("k <= distinct rows leaves a cluster with two points");
                counts[assignment[far]] -= 1;
                inertia -= dist[far];
                assignment[far] = c;
                counts[c] = 1;
                dist[far] = 0.0;
                changed = true;
            }
        }
        inertia_trace.push(inertia);
        let mut sums = Matrix::zeros(k, dim);
        for i in 0..p {
            let row = sums.row_mut(assignment[i]);
            for (s, x) in row.iter_mut().zip(points.row(i)) {
                *s += x;
            }
        }
        for c in 0..k {
            let n = counts[c] as f64;
            sums.row_mut(c).iter_mut().for_each(|s| *s /= n);
        }
        centroids = sums;
        if !changed {
            break;
        }
    }
    Ok(KMeansResult { assignment, centroids, inertia_trace, iterations })
}
