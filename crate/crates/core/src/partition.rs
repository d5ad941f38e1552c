//! Supersamples by a density watershed on the k-nearest-neighbor graph.
//!
//! The energy of a sample is its inverse mean distance to its `k` nearest
//! neighbors. Every sample climbs to its densest neighbor until it reaches a
//! local maximum; samples that reach the same maximum form one basin. Basins
//! below `min_size` are merged into the neighboring basin they share the
//! most k-NN edges with.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::math::{ceil, sq_dist, sqrt};
use crate::{Error, Matrix, Result};

pub const DENSITY_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupersamplePartition {
    assignment: Vec<usize>,
    n_supersamples: usize,
}

impl SupersamplePartition {
    /// Checks that ids are `0..S` and that every id is used.
    pub fn new(assignment: Vec<usize>) -> Result<Self> {
        if assignment.is_empty() {
            return Err(Error::EmptyInput);
        }
        let s = assignment.iter().max().map_or(0, |m| m + 1);
        let mut used = vec![false; s];
        for &a in &assignment {
            used[a] = true;
        }
        if let Some(id) = used.iter().position(|u| !u) {
            return Err(Error::InvalidPartition(format!("supersample {id} is empty")));
        }
        Ok(SupersamplePartition { assignment, n_supersamples: s })
    }

    /// One supersample holding every sample.
    pub fn trivial(n_samples: usize) -> Result<Self> {
        SupersamplePartition::new(vec![0; n_samples])
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn n_supersamples(&self) -> usize {
        self.n_supersamples
    }

    pub fn n_samples(&self) -> usize {
        self.assignment.len()
    }

    /// Sample indices of supersample `id`, ascending.
    pub fn members(&self, id: usize) -> Vec<usize> {
        (0..self.assignment.len()).filter(|&i| self.assignment[i] == id).collect()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.n_supersamples];
        for &a in &self.assignment {
            sizes[a] += 1;
        }
        sizes
    }

    /// True when both partitions group samples identically up to relabeling.
    pub fn equivalent(&self, other: &SupersamplePartition) -> bool {
        if self.assignment.len() != other.assignment.len() || self.n_supersamples != other.n_supersamples {
            return false;
        }
        let mut fwd = vec![usize::MAX; self.n_supersamples];
        let mut bwd = vec![usize::MAX; other.n_supersamples];
        for (&a, &b) in self.assignment.iter().zip(&other.assignment) {
            if fwd[a] == usize::MAX && bwd[b] == usize::MAX {
                fwd[a] = b;
                bwd[b] = a;
            } else if fwd[a] != b || bwd[b] != a {
                return false;
            }
        }
        true
    }
}

/// Default neighborhood size `max(10, ceil(sqrt(P)))`, capped at `P - 1`.
pub fn default_k(n_samples: usize) -> usize {
    let k = (ceil(sqrt(n_samples as f64)) as usize).max(10);
    k.min(n_samples.saturating_sub(1)).max(1)
}

/// Nearest neighbors of every sample, closest first, ties by lower index.
fn knn(points: &Matrix, k: usize) -> Vec<Vec<(usize, f64)>> {
    let p = points.nrows();
    let mut out = Vec::with_capacity(p);
    let mut cand: Vec<(usize, f64)> = Vec::with_capacity(p);
    for i in 0..p {
        cand.clear();
        let xi = points.row(i);
        cand.extend((0..p).filter(|&j| j != i).map(|j| (j, sqrt(sq_dist(xi, points.row(j))))));
        cand.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        out.push(cand[..k].to_vec());
    }
    out
}

fn check_k(p: usize, k: usize) -> Result<()> {
    if p == 0 {
        return Err(Error::EmptyInput);
    }
    if k == 0 || k >= p {
        return Err(Error::InvalidArgument(format!("k = {k} must satisfy 1 <= k < P = {p}")));
    }
    Ok(())
}

fn densities_from(neighbors: &[Vec<(usize, f64)>]) -> Vec<f64> {
    neighbors
        .iter()
        .map(|nb| {
            let mean = nb.iter().map(|(_, d)| d).sum::<f64>() / nb.len() as f64;
            1.0 / (mean + DENSITY_EPS)
        })
        .collect()
}

/// `1 / (mean distance to the k nearest neighbors + 1e-12)` per sample.
pub fn knn_density(points: &Matrix, k: usize) -> Result<Vec<f64>> {
    check_k(points.nrows(), k)?;
    Ok(densities_from(&knn(points, k)))
}

/// Strict order used for climbing: higher density first, then lower index.
fn higher(density: &[f64], a: usize, b: usize) -> bool {
    match density[a].total_cmp(&density[b]) {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => a < b,
    }
}

/// Watershed parameters. A basin whose peak density is `d` merges into a
/// higher adjacent basin once their saddle density reaches `persistence * d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WatershedConfig {
    pub k: usize,
    pub min_size: usize,
    /// In `[0, 1]`; 1 keeps every steepest-ascent basin.
    pub persistence: f64,
}

pub const DEFAULT_MIN_SIZE: usize = 5;
pub const DEFAULT_PERSISTENCE: f64 = 0.5;

impl WatershedConfig {
    pub fn for_samples(n_samples: usize) -> Self {
        WatershedConfig { k: default_k(n_samples), min_size: DEFAULT_MIN_SIZE, persistence: DEFAULT_PERSISTENCE }
    }
}

fn find(uf: &mut [usize], mut i: usize) -> usize {
    let mut root = i;
    while uf[root] != root {
        root = uf[root];
    }
    while uf[i] != root {
        let next = uf[i];
        uf[i] = root;
        i = next;
    }
    root
}

/// Watershed with the default persistence.
pub fn watershed_partition(points: &Matrix, k: usize, min_size: usize) -> Result<SupersamplePartition> {
    watershed_partition_with(points, &WatershedConfig { k, min_size, persistence: DEFAULT_PERSISTENCE })
}

pub fn watershed_partition_with(points: &Matrix, config: &WatershedConfig) -> Result<SupersamplePartition> {
    let WatershedConfig { k, min_size, persistence } = *config;
    if !(0.0..=1.0).contains(&persistence) {
        return Err(Error::InvalidArgument(format!("persistence {persistence} outside [0, 1]")));
    }
    let p = points.nrows();
    if p == 0 {
        return Err(Error::EmptyInput);
    }
    if p < min_size {
        return Err(Error::InvalidArgument(format!("P = {p} is below min_size = {min_size}")));
    }
    if p == 1 {
        return SupersamplePartition::trivial(1);
    }
    let k = k.min(p - 1);
    check_k(p, k)?;
    let neighbors = knn(points, k);
    let density = densities_from(&neighbors);
    let mut adjacent: Vec<Vec<usize>> = vec![Vec::new(); p];
    for i in 0..p {
        for &(j, _) in &neighbors[i] {
            adjacent[i].push(j);
            adjacent[j].push(i);
        }
    }

    // Samples enter from the densest down. Each one joins the basin of its
    // highest k-NN neighbor (or starts a basin at a local maximum); when it
    // touches two basins it is their saddle, and the lower basin is absorbed
    // if the saddle is high enough relative to its peak. Roots stay peaks.
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| {
        if higher(&density, a, b) {
            Ordering::Less
        } else if a == b {
            Ordering::Equal
        } else {
            Ordering::Greater
        }
    });
    let mut uf: Vec<usize> = (0..p).collect();
    let mut entered = vec![false; p];
    for &i in &order {
        entered[i] = true;
        let best =
            neighbors[i].iter().map(|&(j, _)| j).fold(i, |best, j| if higher(&density, j, best) { j } else { best });
        if best != i {
            uf[i] = find(&mut uf, best);
        }
        for &j in &adjacent[i] {
            if !entered[j] {
                continue;
            }
            let (ri, rj) = (find(&mut uf, i), find(&mut uf, j));
            if ri == rj {
                continue;
            }
            let (hi, lo) = if higher(&density, ri, rj) { (ri, rj) } else { (rj, ri) };
            if density[i] >= persistence * density[lo] {
                uf[lo] = hi;
            }
        }
    }
    let seed_of: Vec<usize> = (0..p).map(|i| find(&mut uf, i)).collect();

    // Basin label = its seed; merge undersized basins.
    let mut label = seed_of;
    loop {
        let mut sizes: BTreeMap<usize, usize> = BTreeMap::new();
        for &l in &label {
            *sizes.entry(l).or_insert(0) += 1;
        }
        if sizes.len() <= 1 {
            break;
        }
        let small =
            sizes.iter().filter(|(_, &s)| s < min_size).min_by(|a, b| a.1.cmp(b.1).then(a.0.cmp(b.0))).map(|(&l, _)| l);
        let Some(small) = small else { break };
        let mut edges: BTreeMap<usize, usize> = BTreeMap::new();
        for i in 0..p {
            for &(j, _) in &neighbors[i] {
                let (li, lj) = (label[i], label[j]);
                if li == small && lj != small {
                    *edges.entry(lj).or_insert(0) += 1;
                } else if lj == small && li != small {
                    *edges.entry(li).or_insert(0) += 1;
                }
            }
        }
        let target = match edges.iter().max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0))) {
            Some((&l, _)) => l,
            None => nearest_other_basin(points, &label, small),
        };
        for l in label.iter_mut() {
            if *l == small {
                *l = target;
            }
        }
    }

    // Relabel by first appearance.
    let mut remap: BTreeMap<usize, usize> = BTreeMap::new();
    let assignment = label
        .iter()
        .map(|l| {
            let next = remap.len();
            *remap.entry(*l).or_insert(next)
        })
        .collect();
    SupersamplePartition::new(assignment)
}

fn nearest_other_basin(points: &Matrix, label: &[usize], basin: usize) -> usize {
    let mut best = (f64::INFINITY, usize::MAX);
    for i in (0..label.len()).filter(|&i| label[i] == basin) {
        for j in (0..label.len()).filter(|&j| label[j] != basin) {
            let d = sq_dist(points.row(i), points.row(j));
            if d < best.0 {
                best = (d, label[j]);
            }
        }
    }
    best.1
}
