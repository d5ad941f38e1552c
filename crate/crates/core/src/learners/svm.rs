use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::check_training;
use super::vote::argmax_lowest;
use crate::math::{exp, sq_dist};
use crate::{Error, Matrix, Result};

const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvmParams {
    pub c: f64,
    pub gamma: f64,
    /// Stop once the maximal KKT violation drops below this.
    pub tol: f64,
    /// Iteration cap as a multiple of the training size.
    pub max_passes: usize,
}

impl SvmParams {
    pub fn new(c: f64, gamma: f64) -> Self {
        SvmParams { c, gamma, tol: 1e-3, max_passes: 1000 }
    }
}

/// One-vs-one machine separating `positive` (+1) from `negative` (−1).
#[derive(Debug, Clone, PartialEq)]
pub struct BinarySvm {
    pub positive: usize,
    pub negative: usize,
    /// Support vectors projected on the model's feature subset.
    pub support: Vec<Vec<f64>>,
    /// `α_i y_i` for every support vector.
    pub coef: Vec<f64>,
    /// Decision function is `Σ coef_i k(s_i, x) − rho`.
    pub rho: f64,
    /// All `α` at termination, in training order.
    pub alpha: Vec<f64>,
    /// Dual objective after every SMO step.
    pub objective_history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    pub features: Vec<usize>,
    pub c: f64,
    pub gamma: f64,
    pub n_classes: usize,
    pub machines: Vec<BinarySvm>,
}

fn project(row: &[f64], features: &[usize]) -> Vec<f64> {
    features.iter().map(|&f| row[f]).collect()
}

/// Solves `min ½αᵀQα − eᵀα` s.t. `yᵀα = 0`, `0 ≤ α ≤ C` with second-order
/// working-set selection.
pub(crate) fn smo(
    kernel: &Matrix,
    y: &[f64],
    c: f64,
    tol: f64,
    max_iter: usize,
) -> (Vec<f64>, f64, Vec<f64>, usize, bool) {
    let n = y.len();
    let q = |i: usize, j: usize| y[i] * y[j] * kernel[(i, j)];
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let up = |a: f64, yi: f64| (yi > 0.0 && a < c) || (yi < 0.0 && a > 0.0);
    let low = |a: f64, yi: f64| (yi > 0.0 && a > 0.0) || (yi < 0.0 && a < c);
    let objective =
        |alpha: &[f64], grad: &[f64]| -0.5 * alpha.iter().zip(grad).map(|(a, g)| a * (g - 1.0)).sum::<f64>();
    let mut history = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        let mut i = usize::MAX;
        let mut gmax = f64::NEG_INFINITY;
        for t in 0..n {
            if up(alpha[t], y[t]) && -y[t] * grad[t] > gmax {
                gmax = -y[t] * grad[t];
                i = t;
            }
        }
        let mut j = usize::MAX;
        let mut gmax2 = f64::NEG_INFINITY;
        let mut obj_min = f64::INFINITY;
        for t in 0..n {
            if !low(alpha[t], y[t]) {
                continue;
            }
            gmax2 = gmax2.max(y[t] * grad[t]);
            if i == usize::MAX {
                continue;
            }
            let b = gmax + y[t] * grad[t];
            if b > 0.0 {
                let mut a = kernel[(i, i)] + kernel[(t, t)] - 2.0 * kernel[(i, t)];
                if a <= 0.0 {
                    a = TAU;
                }
                let obj = -b * b / a;
                if obj < obj_min {
                    obj_min = obj;
                    j = t;
                }
            }
        }
        if i == usize::MAX || j == usize::MAX || gmax + gmax2 < tol {
            converged = true;
            break;
        }
        iterations += 1;
        let (old_ai, old_aj) = (alpha[i], alpha[j]);
        let mut a = kernel[(i, i)] + kernel[(j, j)] - 2.0 * kernel[(i, j)];
        if a <= 0.0 {
            a = TAU;
        }
        if y[i] != y[j] {
            let delta = (-grad[i] - grad[j]) / a;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let delta = (grad[i] - grad[j]) / a;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_ai, alpha[j] - old_aj);
        for t in 0..n {
            grad[t] += q(t, i) * di + q(t, j) * dj;
        }
        history.push(objective(&alpha, &grad));
    }
    // Bias from free vectors, or the midpoint of the feasible interval.
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut sum_free, mut n_free) = (0.0, 0usize);
    for t in 0..n {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            n_free += 1;
            sum_free += yg;
        }
    }
    let rho = if n_free > 0 { sum_free / n_free as f64 } else { 0.5 * (ub + lb) };
    (alpha, rho, history, iterations, converged)
}

pub(crate) fn rbf_kernel(sq: &Matrix, gamma: f64) -> Matrix {
    Matrix::from_fn(sq.nrows(), sq.ncols(), |i, j| exp(-gamma * sq[(i, j)]))
}

pub(crate) fn pairwise_sq(x: &Matrix, rows: &[usize], features: &[usize]) -> Matrix {
    let proj: Vec<Vec<f64>> = rows.iter().map(|&r| project(x.row(r), features)).collect();
    let n = rows.len();
    let mut d = Matrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = sq_dist(&proj[i], &proj[j]);
            d[(i, j)] = v;
            d[(j, i)] = v;
        }
    }
    d
}

/// Trains on `rows` given the kernel over exactly those rows.
pub(crate) fn train_with_kernel(
    x: &Matrix,
    rows: &[usize],
    labels: &[usize],
    features: &[usize],
    kernel: &Matrix,
    params: SvmParams,
) -> Result<SvmModel> {
    if !(params.c > 0.0) || !(params.gamma > 0.0) {
        return Err(Error::InvalidArgument(format!("C = {} and gamma = {} must be positive", params.c, params.gamma)));
    }
    let n_classes = rows.iter().map(|&r| labels[r]).max().map_or(0, |m| m + 1);
    let mut present = vec![false; n_classes];
    for &r in rows {
        present[labels[r]] = true;
    }
    let classes: Vec<usize> = (0..n_classes).filter(|&c| present[c]).collect();
    if classes.len() < 2 {
        return Err(Error::SingleClass);
    }
    let mut machines = Vec::new();
    for (a_pos, &pos) in classes.iter().enumerate() {
        for &neg in &classes[a_pos + 1..] {
            let local: Vec<usize> =
                (0..rows.len()).filter(|&i| labels[rows[i]] == pos || labels[rows[i]] == neg).collect();
            let y: Vec<f64> = local.iter().map(|&i| if labels[rows[i]] == pos { 1.0 } else { -1.0 }).collect();
            let k = Matrix::from_fn(local.len(), local.len(), |i, j| kernel[(local[i], local[j])]);
            let max_iter = params.max_passes.saturating_mul(local.len()).max(1);
            let (alpha, rho, objective_history, iterations, converged) = smo(&k, &y, params.c, params.tol, max_iter);
            if !converged {
                log::debug!("SMO hit the iteration cap ({max_iter}) for classes {pos} vs {neg}");
            }
            let mut support = Vec::new();
            let mut coef = Vec::new();
            for (s, &i) in local.iter().enumerate() {
                if alpha[s] > 0.0 {
                    support.push(project(x.row(rows[i]), features));
                    coef.push(alpha[s] * y[s]);
                }
            }
            machines.push(BinarySvm {
                positive: pos,
                negative: neg,
                support,
                coef,
                rho,
                alpha,
                objective_history,
                iterations,
                converged,
            });
        }
    }
    Ok(SvmModel { features: features.to_vec(), c: params.c, gamma: params.gamma, n_classes, machines })
}

/// One-vs-one RBF SVM restricted to `features`.
pub fn train_svm_smo(
    x: &Matrix,
    rows: &[usize],
    labels: &[usize],
    features: &[usize],
    params: SvmParams,
) -> Result<SvmModel> {
    check_training(x, rows, labels, features)?;
    let kernel = rbf_kernel(&pairwise_sq(x, rows, features), params.gamma);
    train_with_kernel(x, rows, labels, features, &kernel, params)
}

impl BinarySvm {
    pub fn decision_projected(&self, z: &[f64], gamma: f64) -> f64 {
        self.support.iter().zip(&self.coef).map(|(s, c)| c * exp(-gamma * sq_dist(s, z))).sum::<f64>() - self.rho
    }
}

impl SvmModel {
    /// Decision value of machine `m` on a full-width row.
    pub fn decision_value(&self, m: usize, row: &[f64]) -> f64 {
        self.machines[m].decision_projected(&project(row, &self.features), self.gamma)
    }
}

/// One-vs-one vote; ties go to the lowest class.
pub fn predict_svm(model: &SvmModel, row: &[f64]) -> usize {
    let z = project(row, &model.features);
    let mut votes = vec![0usize; model.n_classes];
    for m in &model.machines {
        if m.decision_projected(&z, model.gamma) > 0.0 {
            votes[m.positive] += 1;
        } else {
            votes[m.negative] += 1;
        }
    }
    argmax_lowest(&votes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_points_bisector() {
        let x = Matrix::from_rows(&[[0.0, 0.0], [2.0, 0.0]]).unwrap();
        let m = train_svm_smo(&x, &[0, 1], &[0, 1], &[0, 1], SvmParams::new(1.0, 0.5)).unwrap();
        assert_eq!(predict_svm(&m, x.row(0)), 0);
        assert_eq!(predict_svm(&m, x.row(1)), 1);
        assert!(m.decision_value(0, &[1.0, 0.0]).abs() < 1e-6);
        assert!(m.decision_value(0, &[1.0, 7.0]).abs() < 1e-6);
    }

    #[test]
    fn single_class_rejected() {
        let x = Matrix::from_rows(&[[0.0], [1.0]]).unwrap();
        assert_eq!(train_svm_smo(&x, &[0, 1], &[1, 1], &[0], SvmParams::new(1.0, 1.0)), Err(Error::SingleClass));
    }

    #[test]
    fn alphas_in_box_and_objective_rises() {
        let x = Matrix::from_rows(&[[0.0, 0.1], [0.3, 0.9], [1.0, 0.2], [0.8, 1.1], [0.5, 0.5], [0.1, 0.7]]).unwrap();
        let y = [0, 1, 0, 1, 1, 0];
        let c = 2.0;
        let m = train_svm_smo(&x, &[0, 1, 2, 3, 4, 5], &y, &[0, 1], SvmParams::new(c, 2.0)).unwrap();
        let b = &m.machines[0];
        assert!(b.alpha.iter().all(|&a| (0.0..=c).contains(&a)));
        assert!(b.objective_history.windows(2).all(|w| w[1] >= w[0] - 1e-12));
        assert!(b.converged);
    }
}
