//! Knee detection on an ascending spectrum.

use alloc::format;
use alloc::vec::Vec;

use crate::{Error, Result};

pub const DEFAULT_SENSITIVITY: f64 = 1.0;

/// Number of leading values before the knee of an ascending curve.
///
/// The curve is rescaled to the unit square and compared with its chord.
/// Local maxima of the difference curve are knee candidates, and a
/// candidate is confirmed once the difference falls `sensitivity / (n - 1)`
/// below it before the next candidate. Among confirmed candidates the
/// largest difference wins and `K` is its position plus one. Without a
/// confirmed knee, `K` sits at the largest successive gap (lowest on ties).
/// The result is clamped to `1..n`.
pub fn kneedle_select_k(values: &[f64], sensitivity: f64) -> Result<usize> {
    let n = values.len();
    if n < 3 {
        return Err(Error::InvalidArgument(format!("kneedle needs at least 3 values, got {n}")));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("kneedle values must be finite".into()));
    }
    if !(sensitivity >= 0.0) {
        return Err(Error::InvalidArgument(format!("sensitivity {sensitivity} must be nonnegative")));
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let range = hi - lo;
    let step = 1.0 / (n - 1) as f64;
    let diff: Vec<f64> = values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let y = if range > 0.0 { (v - lo) / range } else { 0.0 };
            i as f64 * step - y
        })
        .collect();
    let maxima: Vec<usize> = (1..n - 1).filter(|&i| diff[i] > diff[i - 1] && diff[i] >= diff[i + 1]).collect();
    let mut knee: Option<usize> = None;
    for (a, &i) in maxima.iter().enumerate() {
        let threshold = diff[i] - sensitivity * step;
        let end = maxima.get(a + 1).copied().unwrap_or(n);
        if ((i + 1)..end).any(|j| diff[j] < threshold) && knee.is_none_or(|b| diff[i] > diff[b]) {
            knee = Some(i);
        }
    }
    let k = match knee {
        Some(i) => i + 1,
        None => {
            let mut best = 0;
            for i in 1..n - 1 {
                if values[i + 1] - values[i] > values[best + 1] - values[best] {
                    best = i;
                }
            }
            best + 1
        }
    };
    Ok(k.clamp(1, n - 1))
}
