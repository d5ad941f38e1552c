use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use super::check_training;
use super::svm::{pairwise_sq, predict_svm, rbf_kernel, train_with_kernel, SvmParams};
use crate::rng;
use crate::{Error, Matrix, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct GridSearchSpec {
    pub c_grid: Vec<f64>,
    pub gamma_grid: Vec<f64>,
    pub folds: usize,
}

impl GridSearchSpec {
    pub const DEFAULT_C: [f64; 4] = [0.1, 1.0, 10.0, 100.0];
    pub const DEFAULT_GAMMA_SCALE: [f64; 4] = [0.01, 0.1, 1.0, 10.0];

    /// Default grid with gamma scaled by the feature count.
    pub fn standard(n_features: usize) -> Self {
        let f = n_features.max(1) as f64;
        GridSearchSpec {
            c_grid: Self::DEFAULT_C.to_vec(),
            gamma_grid: Self::DEFAULT_GAMMA_SCALE.iter().map(|g| g / f).collect(),
            folds: 5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.c_grid.is_empty() || self.gamma_grid.is_empty() {
            return Err(Error::InvalidArgument("grid search grids must be non-empty".into()));
        }
        if self.folds < 2 {
            return Err(Error::InvalidArgument(format!("folds = {} must be at least 2", self.folds)));
        }
        if self.c_grid.iter().chain(&self.gamma_grid).any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::InvalidArgument("grid values must be positive and finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSearchResult {
    pub c: f64,
    pub gamma: f64,
    /// Mean fold accuracy of the chosen pair.
    pub accuracy: f64,
}

/// Fold index per position of `rows`, stratified by class.
pub fn stratified_folds(rows: &[usize], labels: &[usize], folds: usize, seed: u64) -> Result<Vec<usize>> {
    let n_classes = rows.iter().map(|&r| labels[r]).max().map_or(0, |m| m + 1);
    let mut by_class = vec![Vec::new(); n_classes];
    for (pos, &r) in rows.iter().enumerate() {
        by_class[labels[r]].push(pos);
    }
    let mut fold = vec![0; rows.len()];
    for (class, mut members) in by_class.into_iter().enumerate() {
        if members.is_empty() {
            continue;
        }
        if members.len() < folds {
            return Err(Error::ClassTooSmall { class, count: members.len(), required: folds });
        }
        members.shuffle(&mut rng::substream(seed, "cv-folds", class as u64));
        for (i, pos) in members.into_iter().enumerate() {
            fold[pos] = i % folds;
        }
    }
    Ok(fold)
}

/// Picks `(C, gamma)` by mean stratified k-fold accuracy; ties go to the
/// smallest C, then the smallest gamma.
pub fn grid_search_cv(
    x: &Matrix,
    rows: &[usize],
    labels: &[usize],
    features: &[usize],
    spec: &GridSearchSpec,
    seed: u64,
) -> Result<GridSearchResult> {
    check_training(x, rows, labels, features)?;
    spec.validate()?;
    let mut classes: Vec<usize> = rows.iter().map(|&r| labels[r]).collect();
    classes.sort_unstable();
    classes.dedup();
    if classes.len() < 2 {
        return Err(Error::SingleClass);
    }
    let fold = stratified_folds(rows, labels, spec.folds, seed)?;
    let mut cs = spec.c_grid.clone();
    let mut gammas = spec.gamma_grid.clone();
    cs.sort_by(f64::total_cmp);
    gammas.sort_by(f64::total_cmp);
    let sq = pairwise_sq(x, rows, features);
    let splits: Vec<(Vec<usize>, Vec<usize>)> = (0..spec.folds)
        .map(|k| {
            let train = (0..rows.len()).filter(|&i| fold[i] != k).collect();
            let test = (0..rows.len()).filter(|&i| fold[i] == k).collect();
            (train, test)
        })
        .collect();
    let mut best: Option<GridSearchResult> = None;
    let mut accuracy = vec![vec![0.0; gammas.len()]; cs.len()];
    for (gi, &gamma) in gammas.iter().enumerate() {
        let kernel = rbf_kernel(&sq, gamma);
        for (ci, &c) in cs.iter().enumerate() {
            let mut total = 0.0;
            for (train, test) in &splits {
                let train_rows: Vec<usize> = train.iter().map(|&i| rows[i]).collect();
                let k = Matrix::from_fn(train.len(), train.len(), |a, b| kernel[(train[a], train[b])]);
                let correct = match train_with_kernel(x, &train_rows, labels, features, &k, SvmParams::new(c, gamma)) {
                    Ok(model) => {
                        test.iter().filter(|&&i| predict_svm(&model, x.row(rows[i])) == labels[rows[i]]).count()
                    }
                    // A fold without two classes cannot train; score it as a miss.
                    Err(Error::SingleClass) => 0,
                    Err(e) => return Err(e),
                };
                total += correct as f64 / test.len() as f64;
            }
            accuracy[ci][gi] = total / spec.folds as f64;
        }
    }
    for (ci, &c) in cs.iter().enumerate() {
        for (gi, &gamma) in gammas.iter().enumerate() {
            let acc = accuracy[ci][gi];
            if best.is_none_or(|b| acc > b.accuracy + 1e-12) {
                best = Some(GridSearchResult { c, gamma, accuracy: acc });
            }
        }
    }
    Ok(best.expect("grids are non-empty"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn folds_are_stratified() {
        let labels: Vec<usize> = (0..20).map(|i| i % 2).collect();
        let rows: Vec<usize> = (0..20).collect();
        let f = stratified_folds(&rows, &labels, 5, 1).unwrap();
        for k in 0..5 {
            let members: Vec<usize> = (0..20).filter(|&i| f[i] == k).collect();
            assert_eq!(members.len(), 4);
            assert_eq!(members.iter().filter(|&&i| labels[i] == 0).count(), 2);
        }
        assert_eq!(
            stratified_folds(&rows[..6], &labels, 5, 1),
            Err(Error::ClassTooSmall { class: 0, count: 3, required: 5 })
        );
    }

    #[test]
    fn single_point_grid() {
        let x = Matrix::from_rows(&[[0.0], [1.0], [2.0], [3.0]]).unwrap();
        let spec = GridSearchSpec { c_grid: vec![3.0], gamma_grid: vec![0.7], folds: 2 };
        let r = grid_search_cv(&x, &[0, 1, 2, 3], &[0, 1, 0, 1], &[0], &spec, 0).unwrap();
        assert_eq!((r.c, r.gamma), (3.0, 0.7));
    }

    #[test]
    fn standard_grid_scales_gamma() {
        let s = GridSearchSpec::standard(4);
        assert_eq!(s.gamma_grid, vec![0.0025, 0.025, 0.25, 2.5]);
        assert_eq!(s.folds, 5);
    }
}
