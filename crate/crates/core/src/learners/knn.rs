use alloc::vec::Vec;

use super::check_training;
use crate::math::sq_dist;
use crate::{Matrix, Result};

/// 1-nearest-neighbor on a feature subset; ties go to the earliest
/// training row.
#[derive(Debug, Clone, PartialEq)]
pub struct NearestNeighbor {
    features: Vec<usize>,
    points: Vec<Vec<f64>>,
    labels: Vec<usize>,
}

impl NearestNeighbor {
    pub fn fit(x: &Matrix, rows: &[usize], labels: &[usize], features: &[usize]) -> Result<Self> {
        check_training(x, rows, labels, features)?;
        Ok(NearestNeighbor {
            features: features.to_vec(),
            points: rows.iter().map(|&r| features.iter().map(|&f| x[(r, f)]).collect()).collect(),
            labels: rows.iter().map(|&r| labels[r]).collect(),
        })
    }

    pub fn predict(&self, row: &[f64]) -> usize {
        let z: Vec<f64> = self.features.iter().map(|&f| row[f]).collect();
        let mut best = (f64::INFINITY, 0);
        for (p, &l) in self.points.iter().zip(&self.labels) {
            let d = sq_dist(p, &z);
            if d < best.0 {
                best = (d, l);
            }
        }
        best.1
    }
}
