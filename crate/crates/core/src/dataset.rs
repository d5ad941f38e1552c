//! Multimodal data model, standardization and stratified splitting.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use rand::seq::SliceRandom;

use crate::math::{abs, round, sqrt};
use crate::rng;
use crate::{Error, Matrix, Result};

/// `P` samples by `N` features, with the column ranges of each modality.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    values: Matrix,
    modalities: Vec<Range<usize>>,
}

impl DataMatrix {
    /// Validates finiteness, `P >= 1`, `N >= 2` and that the modality ranges
    /// are contiguous and cover `0..N` in order.
    pub fn new(values: Matrix, modalities: Vec<Range<usize>>) -> Result<Self> {
        if values.nrows() == 0 {
            return Err(Error::EmptyInput);
        }
        if values.ncols() < 2 {
            return Err(Error::InvalidArgument(format!("at least 2 features required, found {}", values.ncols())));
        }
        for i in 0..values.nrows() {
            for (j, v) in values.row(i).iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
            }
        }
        let mut next = 0;
        for r in &modalities {
            if r.start != next || r.end <= r.start {
                return Err(Error::InvalidArgument(format!(
                    "modality range {}..{} is not contiguous with column {next}",
                    r.start, r.end
                )));
            }
            next = r.end;
        }
        if next != values.ncols() {
            return Err(Error::InvalidArgument(format!(
                "modalities cover columns 0..{next} but there are {} features",
                values.ncols()
            )));
        }
        Ok(DataMatrix { values, modalities })
    }

    pub fn single_modality(values: Matrix) -> Result<Self> {
        let n = values.ncols();
        DataMatrix::new(values, vec![0..n])
    }

    pub fn values(&self) -> &Matrix {
        &self.values
    }

    pub fn modalities(&self) -> &[Range<usize>] {
        &self.modalities
    }

    pub fn n_samples(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.values.ncols()
    }
}

/// Class index per sample, classes numbered `0..n_classes`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelVector {
    labels: Vec<usize>,
    n_classes: usize,
}

impl LabelVector {
    pub fn new(labels: Vec<usize>, n_classes: usize) -> Result<Self> {
        if let Some((i, &l)) = labels.iter().enumerate().find(|(_, &l)| l >= n_classes) {
            return Err(Error::InvalidArgument(format!("label {l} of sample {i} outside class set 0..{n_classes}")));
        }
        Ok(LabelVector { labels, n_classes })
    }

    /// Class count inferred as `max + 1`.
    pub fn from_labels(labels: Vec<usize>) -> Self {
        let n_classes = labels.iter().max().map_or(0, |m| m + 1);
        LabelVector { labels, n_classes }
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrainTestSplit {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Per-column standardization with the sample (n - 1) standard deviation.
///
/// Constant columns map to zeros.
pub fn zscore_normalize(data: &DataMatrix) -> Result<DataMatrix> {
    let p = data.n_samples();
    if p < 2 {
        return Err(Error::InvalidArgument(format!("z-score needs P >= 2, found {p}")));
    }
    let x = data.values();
    let mut out = x.clone();
    for j in 0..x.ncols() {
        let mean = (0..p).map(|i| x[(i, j)]).sum::<f64>() / p as f64;
        let var = (0..p).map(|i| (x[(i, j)] - mean) * (x[(i, j)] - mean)).sum::<f64>() / (p - 1) as f64;
        let sd = sqrt(var);
        let constant = sd <= 1e-12 * (1.0 + abs(mean));
        for i in 0..p {
            out[(i, j)] = if constant { 0.0 } else { (x[(i, j)] - mean) / sd };
        }
    }
    DataMatrix::new(out, data.modalities.clone())
}

/// Per-class split with `round(train_fraction * class_size)` training samples.
pub fn stratified_split(labels: &LabelVector, train_fraction: f64, seed: u64) -> Result<TrainTestSplit> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!("train fraction {train_fraction} outside (0, 1)")));
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (class, members) in class_members(labels).into_iter().enumerate() {
        if members.is_empty() {
            continue;
        }
        if members.len() < 2 {
            return Err(Error::ClassTooSmall { class, count: members.len(), required: 2 });
        }
        let mut members = members;
        let mut rng = rng::substream(seed, "stratified-split", class as u64);
        members.shuffle(&mut rng);
        let n_train = round(train_fraction * members.len() as f64) as usize;
        train.extend_from_slice(&members[..n_train]);
        test.extend_from_slice(&members[n_train..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(TrainTestSplit { train, test })
}

/// Sample indices of each class, in ascending order.
pub fn class_members(labels: &LabelVector) -> Vec<Vec<usize>> {
    let mut members = vec![Vec::new(); labels.n_classes()];
    for (i, &l) in labels.as_slice().iter().enumerate() {
        members[l].push(i);
    }
    members
}
