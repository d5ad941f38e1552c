//! Approximate joint diagonalization of two symmetric positive matrices by
//! Pham's pairwise Jacobi-like scheme.
//!
//! The demixing matrix `B` is refined by 2×2 transforms on every index pair
//! so that `B A Bᵀ` and `B B' Bᵀ` become as diagonal as possible under the
//! log-determinant criterion. The returned basis is `V = Bᵀ`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::math::{abs, ln, ln_1p, sqrt};
use crate::{Error, Matrix, Result};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 200;

const MAX_HALVINGS: usize = 30;
/// `omega - 1` below which a pair counts as degenerate.
const DEGENERATE: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct JointBasis {
    /// Columns are the joint eigenvectors, unit norm, ascending by
    /// `diag_gk + diag_mi`.
    pub basis: Matrix,
    pub diag_gk: Vec<f64>,
    pub diag_mi: Vec<f64>,
    pub criterion_value: f64,
    pub iterations: usize,
    /// Criterion before the first sweep and after every sweep.
    pub trace: Vec<f64>,
    pub eps_a: f64,
    pub eps_b: f64,
}

impl JointBasis {
    /// `diag_gk[n] + diag_mi[n]`, ascending.
    pub fn joint_spectrum(&self) -> Vec<f64> {
        self.diag_gk.iter().zip(&self.diag_mi).map(|(a, b)| a + b).collect()
    }
}

/// `log(det diag(VᵀAV) / det VᵀAV) + log(det diag(VᵀBV) / det VᵀBV)`.
pub fn pham_criterion(a: &Matrix, b: &Matrix, v: &Matrix) -> Result<f64> {
    check_pair(a, b)?;
    if v.nrows() != a.nrows() || !v.is_square() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), found: v.nrows() });
    }
    let log_det_a = a.cholesky_log_det()?;
    let log_det_b = b.cholesky_log_det()?;
    let (log_det_v, _) = v.log_abs_det().ok_or(Error::SingularMatrix)?;
    let mut total = 0.0;
    for (m, log_det) in [(a, log_det_a), (b, log_det_b)] {
        let c = m.congruence(v)?;
        let mut log_diag = 0.0;
        for d in c.diagonal() {
            if !(d > 0.0) {
                return Err(Error::NotPositiveDefinite);
            }
            log_diag += ln(d);
        }
        total += log_diag - (log_det + 2.0 * log_det_v);
    }
    Ok(total)
}

fn check_pair(a: &Matrix, b: &Matrix) -> Result<()> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), found: a.ncols() });
    }
    if b.nrows() != a.nrows() || b.ncols() != a.ncols() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), found: b.nrows() });
    }
    for m in [a, b] {
        let scale = 1.0 + m.as_slice().iter().fold(0.0f64, |acc, x| acc.max(abs(*x)));
        if m.max_asymmetry() > 1e-9 * scale {
            return Err(Error::NotSymmetric);
        }
    }
    Ok(())
}

fn ridge(m: &Matrix) -> f64 {
    let n = m.nrows().max(1) as f64;
    let tr = m.trace();
    if tr > 0.0 {
        1e-8 * tr / n
    } else {
        1e-8
    }
}

/// Criterion of `B M Bᵀ` for both matrices, given their log-determinants.
fn sweep_criterion(mats: &[Matrix; 2], log_dets: [f64; 2], demix: &Matrix) -> Result<f64> {
    let (log_det_b, _) = demix.log_abs_det().ok_or(Error::SingularMatrix)?;
    let v = demix.transpose();
    let mut total = 0.0;
    for (m, log_det) in mats.iter().zip(log_dets) {
        let c = m.congruence(&v)?;
        let log_diag: f64 = c.diagonal().iter().map(|&d| ln(d)).sum();
        total += log_diag - log_det - 2.0 * log_det_b;
    }
    Ok(total)
}

/// Left-multiplies rows `i, j` by `[[1, p], [q, 1]]`.
fn transform_rows(m: &mut Matrix, i: usize, j: usize, p: f64, q: f64) {
    for k in 0..m.ncols() {
        let (mi, mj) = (m[(i, k)], m[(j, k)]);
        m[(i, k)] = mi + p * mj;
        m[(j, k)] = q * mi + mj;
    }
}

fn transform_cols(m: &mut Matrix, i: usize, j: usize, p: f64, q: f64) {
    for k in 0..m.nrows() {
        let (mi, mj) = (m[(k, i)], m[(k, j)]);
        m[(k, i)] = mi + p * mj;
        m[(k, j)] = q * mi + mj;
    }
}

/// Symmetric 2×2 block `(m11, m22, m12)`.
type Block = (f64, f64, f64);

fn block(m: &Matrix, i: usize, j: usize) -> Block {
    (m[(i, i)], m[(j, j)], m[(i, j)])
}

/// Rows `(1, p)` and `(q, 1)` that zero the off-diagonal of both blocks, or
/// `None` when the blocks are proportional and any diagonalizer of one
/// diagonalizes the other.
fn solve_pair(a: Block, b: Block) -> Option<(f64, f64)> {
    let ((a11, a22, a12), (b11, b22, b12)) = (a, b);
    let qa = a22 * b12 - b22 * a12;
    let qb = a22 * b11 - b22 * a11;
    let qc = a12 * b11 - b12 * a11;
    let scale = (abs(a11) + abs(a22)) * (abs(b11) + abs(b22));
    let disc = qb * qb - 4.0 * qa * qc;
    if abs(qa) + abs(qb) + abs(qc) <= 1e-14 * scale || disc < 0.0 {
        return None;
    }
    // Root nearest zero, i.e. the update closest to the identity.
    let denom = qb + if qb < 0.0 { -sqrt(disc) } else { sqrt(disc) };
    let p = if denom == 0.0 { 0.0 } else { -2.0 * qc / denom };
    let (da, db) = (a11 + p * a12, b11 + p * b12);
    let q = if abs(da) >= abs(db) { -(a12 + p * a22) / da } else { -(b12 + p * b22) / db };
    Some((p, q))
}

/// Exact joint diagonalizer of the 2×2 blocks on `(i, j)`, used when the
/// Newton step is ill-conditioned (both matrices share a diagonal ratio).
/// Proportional blocks leave a free choice; it is pinned by also
/// diagonalizing the Gram block of the demixing rows, which keeps those rows
/// orthogonal so the ridge stays diagonal too.
fn exact_pair(c: &[Matrix; 2], demix: &Matrix, i: usize, j: usize) -> (f64, f64) {
    let (a, b) = (block(&c[0], i, j), block(&c[1], i, j));
    if let Some(step) = solve_pair(a, b) {
        return step;
    }
    let dot = |r: usize, s: usize| demix.row(r).iter().zip(demix.row(s)).map(|(x, y)| x * y).sum::<f64>();
    let gram = (dot(i, i), dot(j, j), dot(i, j));
    let sum = (a.0 + b.0, a.1 + b.1, a.2 + b.2);
    solve_pair(sum, gram).unwrap_or((0.0, 0.0))
}

/// One pass over all pairs; `c` holds the current `B M Bᵀ`. Returns the
/// largest accepted step.
fn sweep(c: &mut [Matrix; 2], demix: &mut Matrix) -> f64 {
    let n = demix.nrows();
    let mut largest: f64 = 0.0;
    let k = c.len() as f64;
    for i in 1..n {
        for j in 0..i {
            let (mut g12, mut g21, mut o21, mut o12) = (0.0, 0.0, 0.0, 0.0);
            for m in c.iter() {
                let (c1, c2, cij) = (m[(i, i)], m[(j, j)], m[(i, j)]);
                g12 += cij / c1;
                g21 += cij / c2;
                o21 += c1 / c2;
                o12 += c2 / c1;
            }
            g12 /= k;
            g21 /= k;
            o21 /= k;
            o12 /= k;
            let omega = sqrt(o12 * o21);
            let (p0, q0) = if omega - 1.0 < DEGENERATE {
                exact_pair(c, demix, i, j)
            } else {
                let t = sqrt(o21 / o12);
                let t1 = (t * g12 + g21) / (omega + 1.0);
                let t2 = (t * g12 - g21) / (omega - 1.0);
                let h12 = t1 + t2;
                let h21 = (t1 - t2) / t;
                let tau = 1.0 + sqrt((1.0 - h12 * h21).max(0.0));
                (-h12 / tau, -h21 / tau)
            };
            if !(p0.is_finite() && q0.is_finite()) || (p0 == 0.0 && q0 == 0.0) {
                continue;
            }
            // Accept the step only if it does not raise the exact criterion.
            // log1p keeps the change resolvable for tiny steps.
            let mut step = 1.0;
            let mut accepted = None;
            for _ in 0..MAX_HALVINGS {
                let (p, q) = (step * p0, step * q0);
                let det = 1.0 - p * q;
                let mut delta = -2.0 * k * if det > 0.0 { ln_1p(-p * q) } else { ln(abs(det)) };
                let mut valid = det != 0.0;
                for m in c.iter() {
                    let (c1, c2, cij) = (m[(i, i)], m[(j, j)], m[(i, j)]);
                    let n1 = c1 + 2.0 * p * cij + p * p * c2;
                    let n2 = q * q * c1 + 2.0 * q * cij + c2;
                    if !(n1 > 0.0 && n2 > 0.0) {
                        valid = false;
                        break;
                    }
                    delta += ln_1p((2.0 * p * cij + p * p * c2) / c1) + ln_1p((q * q * c1 + 2.0 * q * cij) / c2);
                }
                if valid && delta <= 0.0 {
                    accepted = Some((p, q));
                    break;
                }
                step *= 0.5;
            }
            if let Some((p, q)) = accepted {
                for m in c.iter_mut() {
                    transform_rows(m, i, j, p, q);
                    transform_cols(m, i, j, p, q);
                }
                transform_rows(demix, i, j, p, q);
                largest = largest.max(abs(p)).max(abs(q));
            }
        }
    }
    largest
}

/// Sweeps until the largest accepted pair step drops below `tol` or
/// `max_iter` sweeps have run.
pub fn joint_diagonalize(a: &Matrix, b: &Matrix, tol: f64, max_iter: usize) -> Result<JointBasis> {
    check_pair(a, b)?;
    let n = a.nrows();
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    if !(tol >= 0.0) {
        return Err(Error::InvalidArgument(format!("tol = {tol} must be nonnegative")));
    }
    let (eps_a, eps_b) = (ridge(a), ridge(b));
    let mats = [a.add_identity(eps_a), b.add_identity(eps_b)];
    let log_dets = [mats[0].cholesky_log_det()?, mats[1].cholesky_log_det()?];

    let mut demix = Matrix::identity(n);
    let mut trace = vec![sweep_criterion(&mats, log_dets, &demix)?];
    let mut iterations = 0;
    while iterations < max_iter {
        let mut c = [mats[0].clone(), mats[1].clone()];
        let v = demix.transpose();
        for (ci, m) in c.iter_mut().zip(&mats) {
            *ci = m.congruence(&v)?;
        }
        let step = sweep(&mut c, &mut demix);
        // The criterion is invariant to row scaling; keep rows unit norm.
        for r in 0..n {
            let norm = sqrt(demix.row(r).iter().map(|x| x * x).sum());
            if norm > 0.0 {
                demix.row_mut(r).iter_mut().for_each(|x| *x /= norm);
            }
        }
        iterations += 1;
        let value = sweep_criterion(&mats, log_dets, &demix)?;
        log::trace!("joint diagonalization sweep {iterations}: criterion {value:e}");
        trace.push(value);
        // The criterion itself is too cancellation-prone near zero to
        // stop on, so convergence is judged by the step size.
        if step < tol {
            break;
        }
    }

    let v = demix.transpose();
    let ta = a.congruence(&v)?;
    let tb = b.congruence(&v)?;
    let (da, db) = (ta.diagonal(), tb.diagonal());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| (da[x] + db[x]).total_cmp(&(da[y] + db[y])).then(x.cmp(&y)));
    let basis = v.select_columns(&order);
    Ok(JointBasis {
        basis,
        diag_gk: order.iter().map(|&i| da[i]).collect(),
        diag_mi: order.iter().map(|&i| db[i]).collect(),
        criterion_value: *trace.last().expect("trace starts non-empty"),
        iterations,
        trace,
        eps_a,
        eps_b,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn criterion_examples() {
        let a = Matrix::diagonal_from(&[1.0, 2.0, 3.0]);
        let b = Matrix::diagonal_from(&[5.0, 0.5, 1.0]);
        assert!(pham_criterion(&a, &b, &Matrix::identity(3)).unwrap().abs() < 1e-14);

        let c = core::f64::consts::FRAC_1_SQRT_2;
        let rot = Matrix::from_rows(&[[c, -c], [c, c]]).unwrap();
        let id = Matrix::identity(2);
        assert!(pham_criterion(&id, &id, &rot).unwrap().abs() < 1e-14);

        let a = Matrix::from_rows(&[[2.0, 1.0], [1.0, 2.0]]).unwrap();
        let v = pham_criterion(&a, &id, &id).unwrap();
        assert!((v - (4.0f64 / 3.0).ln()).abs() < 1e-12);
        assert!((v - 0.287682).abs() < 1e-6);
    }

    #[test]
    fn criterion_errors() {
        let id = Matrix::identity(2);
        let indef = Matrix::from_rows(&[[1.0, 2.0], [2.0, 1.0]]).unwrap();
        assert_eq!(pham_criterion(&indef, &id, &id), Err(Error::NotPositiveDefinite));
        let sing = Matrix::from_rows(&[[1.0, 1.0], [1.0, 1.0]]).unwrap();
        assert_eq!(pham_criterion(&id, &id, &sing), Err(Error::SingularMatrix));
    }

    #[test]
    fn diagonal_pair_is_a_fixed_point() {
        let a = Matrix::diagonal_from(&[0.0, 1.0, 0.5]);
        let b = Matrix::diagonal_from(&[1.0, 0.2, 0.9]);
        let jb = joint_diagonalize(&a, &b, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        assert!(jb.criterion_value < 1e-12);
        for j in 0..3 {
            let col = jb.basis.column(j);
            assert_eq!(col.iter().filter(|x| x.abs() == 1.0).count(), 1);
        }
        // ascending joint sums: 1.0, 1.2, 1.4
        assert_eq!(jb.joint_spectrum(), vec![1.0, 1.2, 1.4]);
    }

    #[test]
    fn rejects_bad_input() {
        let a = Matrix::from_rows(&[[1.0, 0.5], [0.0, 1.0]]).unwrap();
        let id = Matrix::identity(2);
        assert_eq!(joint_diagonalize(&a, &id, 1e-10, 10).unwrap_err(), Error::NotSymmetric);
        assert!(joint_diagonalize(&id, &Matrix::identity(3), 1e-10, 10).is_err());
    }
}
