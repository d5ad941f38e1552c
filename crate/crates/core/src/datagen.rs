//! Seeded synthetic multimodal data with planted structure.
//!
//! Each planted group is a set of features that are noisy copies of one
//! latent signal. Inside a sample cluster, the latent signals of the groups
//! listed in that cluster's relevance map are shifted by class. Sample
//! clusters are separated by offsets on the noise features, which carry no
//! class signal.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use crate::dataset::{DataMatrix, LabelVector};
use crate::math::sqrt;
use crate::rng::{self, standard_normal};
use crate::{Error, Matrix, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub n_clusters: usize,
    pub n_classes: usize,
    /// Disjoint feature index sets; every index not in a group is noise.
    pub groups: Vec<Vec<usize>>,
    pub n_noise_features: usize,
    /// For each cluster, the indices into `groups` that carry class signal.
    pub relevance_map: Vec<Vec<usize>>,
    pub noise_sigma: f64,
    /// Distance between adjacent class means of a relevant latent signal.
    pub class_separation: f64,
    /// Minimum distance between sample-cluster centers.
    pub cluster_separation: f64,
    pub seed: u64,
}

impl SynthSpec {
    /// Three groups of three features followed by three noise features, two
    /// clusters with relevance `{0, 1}` and `{1, 2}`.
    pub fn standard(noise_sigma: f64, seed: u64) -> Self {
        SynthSpec {
            n_clusters: 2,
            n_classes: 2,
            groups: vec![vec![0, 1, 2], vec![3, 4, 5], vec![6, 7, 8]],
            n_noise_features: 3,
            relevance_map: vec![vec![0, 1], vec![1, 2]],
            noise_sigma,
            class_separation: 3.0,
            cluster_separation: 20.0,
            seed,
        }
    }

    /// Six clusters that all draw class signal from groups 0 and 1; nine
    /// noise features carry the cluster offsets.
    pub fn shared_groups(noise_sigma: f64, seed: u64) -> Self {
        SynthSpec {
            n_clusters: 6,
            n_noise_features: 9,
            relevance_map: vec![vec![0, 1]; 6],
            ..SynthSpec::standard(noise_sigma, seed)
        }
    }

    pub fn n_features(&self) -> usize {
        self.groups.iter().map(Vec::len).sum::<usize>() + self.n_noise_features
    }

    /// Feature indices that belong to no group, ascending.
    pub fn noise_features(&self) -> Vec<usize> {
        let mut in_group = vec![false; self.n_features()];
        for g in &self.groups {
            for &f in g {
                if f < in_group.len() {
                    in_group[f] = true;
                }
            }
        }
        (0..in_group.len()).filter(|&f| !in_group[f]).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_features();
        if self.n_clusters == 0 || self.n_classes == 0 {
            return Err(Error::InvalidArgument("need at least one cluster and one class".into()));
        }
        if n < 2 {
            return Err(Error::InvalidArgument(format!("need at least 2 features, found {n}")));
        }
        let mut seen = vec![false; n];
        for (g, members) in self.groups.iter().enumerate() {
            if members.is_empty() {
                return Err(Error::InvalidArgument(format!("group {g} is empty")));
            }
            for &f in members {
                if f >= n {
                    return Err(Error::InvalidArgument(format!(
                        "group {g} references feature {f} but there are {n} features"
                    )));
                }
                if seen[f] {
                    return Err(Error::InvalidArgument(format!("feature {f} is in two groups")));
                }
                seen[f] = true;
            }
        }
        if self.relevance_map.len() != self.n_clusters {
            return Err(Error::InvalidArgument(format!(
                "relevance map has {} entries for {} clusters",
                self.relevance_map.len(),
                self.n_clusters
            )));
        }
        for (c, rel) in self.relevance_map.iter().enumerate() {
            if let Some(g) = rel.iter().find(|&&g| g >= self.groups.len()) {
                return Err(Error::InvalidArgument(format!("cluster {c} lists undeclared group {g}")));
            }
        }
        if !(self.noise_sigma >= 0.0) {
            return Err(Error::InvalidArgument("noise_sigma must be >= 0".into()));
        }
        Ok(())
    }
}

/// Planted structure emitted alongside generated data.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    /// Sample cluster of every row.
    pub cluster: Vec<usize>,
    pub groups: Vec<Vec<usize>>,
    pub relevance_map: Vec<Vec<usize>>,
    /// Union of the relevant groups' features, per cluster, ascending.
    pub relevant_features: Vec<Vec<usize>>,
    pub noise_features: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct SynthData {
    pub data: DataMatrix,
    pub labels: LabelVector,
    pub truth: GroundTruth,
}

fn cluster_centers(spec: &SynthSpec, dim: usize) -> Vec<Vec<f64>> {
    let mut rng = rng::stream(spec.seed, "datagen-centers");
    let mut centers: Vec<Vec<f64>> = Vec::with_capacity(spec.n_clusters);
    for _ in 0..spec.n_clusters {
        let mut candidate = vec![0.0; dim];
        for _attempt in 0..1000 {
            for x in candidate.iter_mut() {
                *x = standard_normal(&mut rng) * spec.cluster_separation;
            }
            let far = centers.iter().all(|c| sqrt(crate::math::sq_dist(c, &candidate)) >= spec.cluster_separation);
            if far {
                break;
            }
        }
        centers.push(candidate.clone());
    }
    centers
}

fn class_offset(spec: &SynthSpec, class: usize) -> f64 {
    spec.class_separation * (class as f64 - (spec.n_classes as f64 - 1.0) / 2.0)
}

/// Generates `samples_per_cluster` rows per cluster, cluster-major.
pub fn gen_multimodal(spec: &SynthSpec, samples_per_cluster: usize) -> Result<SynthData> {
    spec.validate()?;
    if samples_per_cluster == 0 {
        return Err(Error::EmptyInput);
    }
    let n = spec.n_features();
    let noise = spec.noise_features();
    // Clusters live on the noise features; without any, on the group latents.
    let center_dim = if noise.is_empty() { spec.groups.len() } else { noise.len() };
    let centers = cluster_centers(spec, center_dim);

    let p = spec.n_clusters * samples_per_cluster;
    let mut x = Matrix::zeros(p, n);
    let mut labels = Vec::with_capacity(p);
    let mut cluster = Vec::with_capacity(p);
    let mut rng = rng::stream(spec.seed, "datagen-samples");
    for (c, center) in centers.iter().enumerate() {
        let mut class_of: Vec<usize> = (0..samples_per_cluster).map(|i| i % spec.n_classes).collect();
        class_of.shuffle(&mut rng::substream(spec.seed, "datagen-labels", c as u64));
        let relevant = &spec.relevance_map[c];
        for &class in &class_of {
            let row = labels.len();
            for (g, members) in spec.groups.iter().enumerate() {
                let mut latent = standard_normal(&mut rng);
                if relevant.contains(&g) {
                    latent += class_offset(spec, class);
                }
                if noise.is_empty() {
                    latent += center[g];
                }
                for &f in members {
                    x[(row, f)] = latent + spec.noise_sigma * standard_normal(&mut rng);
                }
            }
            for (k, &f) in noise.iter().enumerate() {
                x[(row, f)] = standard_normal(&mut rng) + center[k];
            }
            labels.push(class);
            cluster.push(c);
        }
    }

    let relevant_features = spec
        .relevance_map
        .iter()
        .map(|rel| {
            let mut fs: Vec<usize> = rel.iter().flat_map(|&g| spec.groups[g].iter().copied()).collect();
            fs.sort_unstable();
            fs.dedup();
            fs
        })
        .collect();
    Ok(SynthData {
        data: DataMatrix::single_modality(x)?,
        labels: LabelVector::new(labels, spec.n_classes)?,
        truth: GroundTruth {
            cluster,
            groups: spec.groups.clone(),
            relevance_map: spec.relevance_map.clone(),
            relevant_features,
            noise_features: noise,
        },
    })
}

/// Two unit-variance isotropic blobs whose means are `separation` apart
/// along the first axis. Returns the points and the blob of each point.
pub fn gen_two_blobs(separation: f64, per_blob: usize, dim: usize, seed: u64) -> Result<(Matrix, Vec<usize>)> {
    if !(separation > 0.0) || dim == 0 {
        return Err(Error::InvalidArgument("need separation > 0 and dim >= 1".into()));
    }
    let mut rng = rng::stream(seed, "two-blobs");
    let mut x = Matrix::zeros(2 * per_blob, dim);
    let mut blob = Vec::with_capacity(2 * per_blob);
    for b in 0..2 {
        for k in 0..per_blob {
            let row = b * per_blob + k;
            for d in 0..dim {
                x[(row, d)] = standard_normal(&mut rng);
            }
            if b == 1 {
                x[(row, 0)] += separation;
            }
            blob.push(b);
        }
    }
    Ok((x, blob))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corr(a: &[f64], b: &[f64]) -> f64 {
        let n = a.len() as f64;
        let ma = a.iter().sum::<f64>() / n;
        let mb = b.iter().sum::<f64>() / n;
        let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
        let va: f64 = a.iter().map(|x| (x - ma) * (x - ma)).sum();
        let vb: f64 = b.iter().map(|y| (y - mb) * (y - mb)).sum();
        cov / (va * vb).sqrt()
    }

    #[test]
    fn zero_noise_groups_are_exact_copies() {
        let d = gen_multimodal(&SynthSpec::standard(0.0, 1), 40).unwrap();
        let x = d.data.values();
        for i in 0..x.nrows() {
            assert_eq!(x[(i, 0)], x[(i, 1)]);
            assert_eq!(x[(i, 3)], x[(i, 5)]);
        }
    }

    #[test]
    fn sample_count() {
        let d = gen_multimodal(&SynthSpec::standard(0.1, 2), 50).unwrap();
        assert_eq!(d.data.n_samples(), 100);
        assert_eq!(d.data.n_features(), 12);
        assert_eq!(d.truth.noise_features, vec![9, 10, 11]);
        assert_eq!(d.truth.relevant_features[0], vec![0, 1, 2, 3, 4, 5]);
    }

    #[test]
    fn low_noise_groups_are_highly_correlated() {
        let d = gen_multimodal(&SynthSpec::standard(0.1, 3), 200).unwrap();
        let x = d.data.values();
        for g in &d.truth.groups {
            for &a in g {
                for &b in g {
                    if a < b {
                        assert!(corr(&x.column(a), &x.column(b)) >= 0.9);
                    }
                }
            }
        }
    }

    fn class_means(d: &SynthData, cluster: usize, feature: usize) -> (f64, f64) {
        let x = d.data.values();
        let mut sums = [0.0; 2];
        let mut counts = [0usize; 2];
        for i in 0..x.nrows() {
            if d.truth.cluster[i] == cluster {
                let l = d.labels.as_slice()[i];
                sums[l] += x[(i, feature)];
                counts[l] += 1;
            }
        }
        (sums[0] / counts[0] as f64, sums[1] / counts[1] as f64)
    }

    #[test]
    fn irrelevant_group_is_label_independent() {
        let spec = SynthSpec {
            groups: vec![vec![0, 1], vec![2, 3]],
            relevance_map: vec![vec![0], vec![1]],
            n_noise_features: 2,
            noise_sigma: 0.3,
            ..SynthSpec::standard(0.3, 5)
        };
        let d = gen_multimodal(&spec, 2000).unwrap();
        // Cluster 0: group A (features 0,1) informative, group B (2,3) not.
        let (a0, a1) = class_means(&d, 0, 0);
        assert!((a1 - a0).abs() >= 3.0 * spec.noise_sigma);
        let (b0, b1) = class_means(&d, 0, 2);
        assert!((b1 - b0).abs() < 0.15, "{b0} {b1}");
        let (n0, n1) = class_means(&d, 0, 4);
        assert!((n1 - n0).abs() < 0.15);
    }

    #[test]
    fn deterministic_per_seed() {
        let a = gen_multimodal(&SynthSpec::standard(0.2, 9), 30).unwrap();
        let b = gen_multimodal(&SynthSpec::standard(0.2, 9), 30).unwrap();
        assert_eq!(a.data, b.data);
        assert_eq!(a.labels, b.labels);
        let c = gen_multimodal(&SynthSpec::standard(0.2, 10), 30).unwrap();
        assert_ne!(a.data, c.data);
    }

    #[test]
    fn rejects_zero_samples_and_bad_specs() {
        assert_eq!(gen_multimodal(&SynthSpec::standard(0.0, 1), 0).unwrap_err(), Error::EmptyInput);
        let mut bad = SynthSpec::standard(0.0, 1);
        bad.groups[1] = vec![2, 3];
        assert!(gen_multimodal(&bad, 10).is_err());
        let mut bad = SynthSpec::standard(0.0, 1);
        bad.relevance_map[0] = vec![7];
        assert!(gen_multimodal(&bad, 10).is_err());
    }

    #[test]
    fn blobs_are_recovered_by_nearest_centroid() {
        let (x, blob) = gen_two_blobs(10.0, 100, 2, 4).unwrap();
        let (c0, c1) = ([0.0, 0.0], [10.0, 0.0]);
        let agree = (0..x.nrows())
            .filter(|&i| {
                let r = x.row(i);
                let nearest = usize::from(crate::math::sq_dist(r, &c1) < crate::math::sq_dist(r, &c0));
                nearest == blob[i]
            })
            .count();
        assert_eq!(agree, 200);
        let (x, _) = gen_two_blobs(1.0, 1, 3, 0).unwrap();
        assert_eq!(x.nrows(), 2);
        assert_eq!(gen_two_blobs(3.0, 5, 2, 1).unwrap(), gen_two_blobs(3.0, 5, 2, 1).unwrap());
    }
}
