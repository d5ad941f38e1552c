use alloc::vec;
use alloc::vec::Vec;

use rand::seq::index::sample;

use super::check_training;
use super::vote::argmax_lowest;
use crate::rng;
use crate::{Matrix, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeConfig {
    pub max_depth: usize,
    pub min_leaf: usize,
    /// Features drawn at random per node; `None` tries every permitted one.
    pub max_features: Option<usize>,
}

impl Default for TreeConfig {
    fn default() -> Self {
        TreeConfig { max_depth: 8, min_leaf: 2, max_features: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Leaf { counts: Vec<usize> },
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    nodes: Vec<Node>,
    features: Vec<usize>,
    n_classes: usize,
    config: TreeConfig,
}

impl DecisionTree {
    pub fn features(&self) -> &[usize] {
        &self.features
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(nodes, *left).max(go(nodes, *right)),
            }
        }
        go(&self.nodes, 0)
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    /// `(feature, threshold)` of the root, if it splits.
    pub fn root_split(&self) -> Option<(usize, f64)> {
        match &self.nodes[0] {
            Node::Split { feature, threshold, .. } => Some((*feature, *threshold)),
            Node::Leaf { .. } => None,
        }
    }

    /// Features used by some split.
    pub fn split_features(&self) -> Vec<usize> {
        let mut f: Vec<usize> = self
            .nodes
            .iter()
            .filter_map(|n| match n {
                Node::Split { feature, .. } => Some(*feature),
                Node::Leaf { .. } => None,
            })
            .collect();
        f.sort_unstable();
        f.dedup();
        f
    }

    pub fn config(&self) -> TreeConfig {
        self.config
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }
}

fn gini(counts: &[usize], total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let t = total as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / t) * (c as f64 / t)).sum::<f64>()
}

struct Builder<'a> {
    x: &'a Matrix,
    labels: &'a [usize],
    features: &'a [usize],
    n_classes: usize,
    config: TreeConfig,
    seed: u64,
    nodes: Vec<Node>,
}

impl Builder<'_> {
    fn counts(&self, rows: &[usize]) -> Vec<usize> {
        let mut c = vec![0; self.n_classes];
        for &r in rows {
            c[self.labels[r]] += 1;
        }
        c
    }

    /// Node ids by path (root 1, children 2p and 2p + 1) seed the per-node
    /// feature draw, so a deeper tree refines a shallower one.
    fn candidate_features(&self, path: u64) -> Vec<usize> {
        match self.config.max_features {
            Some(m) if m < self.features.len() => {
                let mut r = rng::substream(self.seed, "cart-node", path);
                let mut idx: Vec<usize> = sample(&mut r, self.features.len(), m.max(1)).into_vec();
                idx.sort_unstable();
                idx.into_iter().map(|i| self.features[i]).collect()
            }
            _ => self.features.to_vec(),
        }
    }

    fn best_split(&self, rows: &[usize], counts: &[usize], path: u64) -> Option<(usize, f64)> {
        let n = rows.len();
        let min_leaf = self.config.min_leaf.max(1);
        let parent = gini(counts, n);
        let mut best: Option<(f64, usize, f64)> = None;
        let mut sorted = rows.to_vec();
        for f in self.candidate_features(path) {
            sorted.sort_by(|&a, &b| self.x[(a, f)].total_cmp(&self.x[(b, f)]).then(a.cmp(&b)));
            let mut left = vec![0usize; self.n_classes];
            for pos in 0..n - 1 {
                left[self.labels[sorted[pos]]] += 1;
                let (v, next) = (self.x[(sorted[pos], f)], self.x[(sorted[pos + 1], f)]);
                let n_left = pos + 1;
                if v == next || n_left < min_leaf || n - n_left < min_leaf {
                    continue;
                }
                let right: Vec<usize> = counts.iter().zip(&left).map(|(c, l)| c - l).collect();
                let child =
                    (n_left as f64 * gini(&left, n_left) + (n - n_left) as f64 * gini(&right, n - n_left)) / n as f64;
                let gain = parent - child;
                if best.is_none_or(|(g, _, _)| gain > g + 1e-12) {
                    best = Some((gain, f, 0.5 * (v + next)));
                }
            }
        }
        best.map(|(_, f, t)| (f, t))
    }

    fn build(&mut self, rows: &[usize], depth: usize, path: u64) -> usize {
        let counts = self.counts(rows);
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { counts: counts.clone() });
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        if pure || depth >= self.config.max_depth || rows.len() < 2 * self.config.min_leaf.max(1) {
            return id;
        }
        let Some((feature, threshold)) = self.best_split(rows, &counts, path) else {
            return id;
        };
        let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| self.x[(i, feature)] < threshold);
        let left = self.build(&l, depth + 1, 2 * path);
        let right = self.build(&r, depth + 1, 2 * path + 1);
        self.nodes[id] = Node::Split { feature, threshold, left, right };
        id
    }
}

/// Greedy Gini CART on `rows` (repeats allowed, e.g. a bootstrap),
/// splitting only on `features`.
pub fn train_cart(
    x: &Matrix,
    rows: &[usize],
    labels: &[usize],
    features: &[usize],
    config: TreeConfig,
    seed: u64,
) -> Result<DecisionTree> {
    check_training(x, rows, labels, features)?;
    let n_classes = rows.iter().map(|&r| labels[r]).max().map_or(0, |m| m + 1);
    let mut features = features.to_vec();
    features.sort_unstable();
    features.dedup();
    let mut b = Builder { x, labels, features: &features, n_classes, config, seed, nodes: Vec::new() };
    b.build(rows, 0, 1);
    let nodes = b.nodes;
    Ok(DecisionTree { nodes, features, n_classes, config })
}

/// Leaf majority class for a full-width sample row; `x < t` goes left.
pub fn predict_tree(tree: &DecisionTree, row: &[f64]) -> usize {
    let mut i = 0;
    loop {
        match &tree.nodes[i] {
            Node::Leaf { counts } => return argmax_lowest(counts),
            Node::Split { feature, threshold, left, right } => {
                i = if row[*feature] < *threshold { *left } else { *right };
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Error;

    fn line(xs: &[f64]) -> Matrix {
        let rows: Vec<[f64; 1]> = xs.iter().map(|&x| [x]).collect();
        Matrix::from_rows(&rows).unwrap()
    }

    #[test]
    fn one_sample_is_a_leaf() {
        let x = line(&[3.0]);
        let t = train_cart(&x, &[0], &[1], &[0], TreeConfig::default(), 0).unwrap();
        assert_eq!(t.depth(), 0);
        assert_eq!(predict_tree(&t, &[-100.0]), 1);
    }

    #[test]
    fn one_dimensional_split() {
        let x = line(&[1.0, 2.0, 3.0, 4.0]);
        let y = [0, 0, 1, 1];
        let t = train_cart(&x, &[0, 1, 2, 3], &y, &[0], TreeConfig::default(), 0).unwrap();
        assert_eq!(t.root_split(), Some((0, 2.5)));
        for i in 0..4 {
            assert_eq!(predict_tree(&t, x.row(i)), y[i]);
        }
        // threshold itself goes right
        assert_eq!(predict_tree(&t, &[2.5]), 1);
    }

    #[test]
    fn pure_set_is_a_leaf() {
        let x = line(&[1.0, 2.0, 3.0]);
        let t = train_cart(&x, &[0, 1, 2], &[2, 2, 2], &[0], TreeConfig::default(), 0).unwrap();
        assert_eq!((t.depth(), t.n_leaves()), (0, 1));
    }

    #[test]
    fn splits_stay_in_feature_set() {
        let x = Matrix::from_rows(&[[0.0, 5.0, 1.0], [1.0, 4.0, 0.0], [2.0, 3.0, 1.0], [3.0, 2.0, 0.0]]).unwrap();
        let t = train_cart(&x, &[0, 1, 2, 3], &[0, 0, 1, 1], &[1, 2], TreeConfig::default(), 0).unwrap();
        assert!(t.split_features().iter().all(|f| [1, 2].contains(f)));
        assert_eq!(train_cart(&x, &[], &[0, 0, 1, 1], &[0], TreeConfig::default(), 0).unwrap_err(), Error::EmptyInput);
    }
}
