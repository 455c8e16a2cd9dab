//! Multi-output CART regression tree predicting (x, y) from raw feature values.
//!
//! Impurity of a node is the sum of squared distances of its labels to the node mean,
//! summed over both outputs. Splits are axis aligned at midpoints between consecutive
//! distinct feature values, with `value <= threshold` going left.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureVector;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TreeConfig {
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    pub min_impurity_decrease: f64,
}

impl Default for TreeConfig {
    fn default() -> Self {
        TreeConfig {
            max_depth: 30,
            min_samples_leaf: 2,
            min_impurity_decrease: 0.0,
        }
    }
}

impl TreeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_depth == 0 || self.min_samples_leaf == 0 {
            return Err(Error::Config(
                "tree max_depth and min_samples_leaf must be at least 1".into(),
            ));
        }
        if !(self.min_impurity_decrease >= 0.0) {
            return Err(Error::Config("min_impurity_decrease must be >= 0".into()));
        }
        Ok(())
    }

    pub fn descriptor(&self) -> String {
        format!("tree[d{}l{}]", self.max_depth, self.min_samples_leaf)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "lowercase")]
pub enum TreeNode {
    Internal {
        feature: usize,
        threshold: f64,
        impurity: f64,
        sample_count: usize,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    Leaf {
        mean_x: f64,
        mean_y: f64,
        impurity: f64,
        sample_count: usize,
    },
}

impl TreeNode {
    pub fn impurity(&self) -> f64 {
        match self {
            TreeNode::Internal { impurity, .. } | TreeNode::Leaf { impurity, .. } => *impurity,
        }
    }

    pub fn sample_count(&self) -> usize {
        match self {
            TreeNode::Internal { sample_count, .. } | TreeNode::Leaf { sample_count, .. } => {
                *sample_count
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Internal { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn leaves(&self) -> Vec<&TreeNode> {
        match self {
            TreeNode::Leaf { .. } => vec![self],
            TreeNode::Internal { left, right, .. } => {
                let mut out = left.leaves();
                out.extend(right.leaves());
                out
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeModel {
    pub config: TreeConfig,
    pub n_features: usize,
    pub root: TreeNode,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split {
    pub feature: usize,
    pub threshold: f64,
    /// Summed impurity of the two children.
    pub children_impurity: f64,
    pub n_left: usize,
}

struct Data<'a> {
    vectors: &'a [FeatureVector],
    config: &'a TreeConfig,
}

fn node_stats(vectors: &[FeatureVector], idx: &[usize]) -> ([f64; 2], f64) {
    let n = idx.len() as f64;
    let mut mean = [0.0; 2];
    for &i in idx {
        mean[0] += vectors[i].label[0];
        mean[1] += vectors[i].label[1];
    }
    mean[0] /= n;
    mean[1] /= n;
    let sse = idx
        .iter()
        .map(|&i| {
            let l = vectors[i].label;
            (l[0] - mean[0]).powi(2) + (l[1] - mean[1]).powi(2)
        })
        .sum();
    (mean, sse)
}

fn all_labels_equal(vectors: &[FeatureVector], idx: &[usize]) -> bool {
    let first = vectors[idx[0]].label;
    idx.iter().all(|&i| vectors[i].label == first)
}

/// Best (feature, threshold) for the samples in `idx`; `None` when no admissible split.
///
/// Ties keep the lower feature index, then the lower threshold.
pub fn best_split(vectors: &[FeatureVector], idx: &[usize], min_samples_leaf: usize) -> Option<Split> {
    let n = idx.len();
    if n < 2 * min_samples_leaf.max(1) {
        return None;
    }
    let (mean, _) = node_stats(vectors, idx);
    let n_features = vectors[idx[0]].values.len();
    let mut order: Vec<usize> = idx.to_vec();
    let mut best: Option<Split> = None;
    // centred labels reduce cancellation in the running sums
    let centred = |i: usize| {
        let l = vectors[i].label;
        [l[0] - mean[0], l[1] - mean[1]]
    };
    let (mut tot_s, mut tot_q) = ([0.0; 2], 0.0);
    for &i in idx {
        let c = centred(i);
        tot_s[0] += c[0];
        tot_s[1] += c[1];
        tot_q += c[0] * c[0] + c[1] * c[1];
    }
    for f in 0..n_features {
        order.sort_by(|&a, &b| vectors[a].values[f].total_cmp(&vectors[b].values[f]));
        let (mut ls, mut lq) = ([0.0; 2], 0.0);
        for p in 1..n {
            let c = centred(order[p - 1]);
            ls[0] += c[0];
            ls[1] += c[1];
            lq += c[0] * c[0] + c[1] * c[1];
            let lo = vectors[order[p - 1]].values[f];
            let hi = vectors[order[p]].values[f];
            if lo == hi || p < min_samples_leaf || n - p < min_samples_leaf {
                continue;
            }
            let nl = p as f64;
            let nr = (n - p) as f64;
            let rs = [tot_s[0] - ls[0], tot_s[1] - ls[1]];
            let left = lq - (ls[0] * ls[0] + ls[1] * ls[1]) / nl;
            let right = (tot_q - lq) - (rs[0] * rs[0] + rs[1] * rs[1]) / nr;
            let children = left.max(0.0) + right.max(0.0);
            if best.is_none_or(|b| children < b.children_impurity) {
                let mut threshold = 0.5 * (lo + hi);
                if threshold >= hi {
                    threshold = lo;
                }
                best = Some(Split {
                    feature: f,
                    threshold,
                    children_impurity: children,
                    n_left: p,
                });
            }
        }
    }
    best
}

fn grow(data: &Data, idx: &mut [usize], depth: usize) -> TreeNode {
    let (mean, impurity) = node_stats(data.vectors, idx);
    let leaf = TreeNode::Leaf {
        mean_x: mean[0],
        mean_y: mean[1],
        impurity,
        sample_count: idx.len(),
    };
    if depth >= data.config.max_depth || all_labels_equal(data.vectors, idx) {
        return leaf;
    }
    let Some(split) = best_split(data.vectors, idx, data.config.min_samples_leaf) else {
        return leaf;
    };
    if !(impurity - split.children_impurity > data.config.min_impurity_decrease) {
        return leaf;
    }
    let f = split.feature;
    let t = split.threshold;
    idx.sort_by(|&a, &b| {
        let va = data.vectors[a].values[f] <= t;
        let vb = data.vectors[b].values[f] <= t;
        vb.cmp(&va).then(a.cmp(&b))
    });
    let n_left = idx.iter().filter(|&&i| data.vectors[i].values[f] <= t).count();
    let (l, r) = idx.split_at_mut(n_left);
    TreeNode::Internal {
        feature: f,
        threshold: t,
        impurity,
        sample_count: l.len() + r.len(),
        left: Box::new(grow(data, l, depth + 1)),
        right: Box::new(grow(data, r, depth + 1)),
    }
}

/// Greedy top-down fit on raw features and raw labels. Fully deterministic.
pub fn fit(vectors: &[FeatureVector], config: &TreeConfig) -> Result<TreeModel> {
    config.validate()?;
    let first = vectors
        .first()
        .ok_or_else(|| Error::Data("cannot fit a tree on an empty training set".into()))?;
    let width = first.values.len();
    if let Some(bad) = vectors.iter().find(|v| v.values.len() != width) {
        return Err(Error::DimensionMismatch {
            expected: width,
            actual: bad.values.len(),
        });
    }
    let mut idx: Vec<usize> = (0..vectors.len()).collect();
    let data = Data { vectors, config };
    Ok(TreeModel {
        config: config.clone(),
        n_features: width,
        root: grow(&data, &mut idx, 0),
    })
}

impl TreeModel {
    pub fn predict(&self, features: &[f64]) -> Result<[f64; 2]> {
        if features.len() != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                actual: features.len(),
            });
        }
        let mut node = &self.root;
        loop {
            match node {
                TreeNode::Leaf { mean_x, mean_y, .. } => return Ok([*mean_x, *mean_y]),
                TreeNode::Internal {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => {
                    node = if features[*feature] <= *threshold { left } else { right };
                }
            }
        }
    }

    pub fn predict_batch(&self, vectors: &[FeatureVector]) -> Result<Vec<[f64; 2]>> {
        vectors.iter().map(|v| self.predict(&v.values)).collect()
    }

    pub fn depth(&self) -> usize {
        self.root.depth()
    }

    pub fn leaf_count(&self) -> usize {
        self.root.leaves().len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fv(values: Vec<f64>, label: [f64; 2]) -> FeatureVector {
        FeatureVector { values, label }
    }

    #[test]
    fn identical_labels_single_leaf() {
        let data: Vec<_> = (0..6).map(|i| fv(vec![i as f64], [1.5, -2.0])).collect();
        let t = fit(&data, &TreeConfig::default()).unwrap();
        assert_eq!(t.depth(), 0);
        assert_eq!(t.predict(&[100.0]).unwrap(), [1.5, -2.0]);
    }

    #[test]
    fn two_clusters() {
        let data = vec![
            fv(vec![0.0], [0.0, 0.0]),
            fv(vec![0.0], [0.0, 0.0]),
            fv(vec![10.0], [5.0, 5.0]),
            fv(vec![10.0], [5.0, 5.0]),
        ];
        let t = fit(&data, &TreeConfig::default()).unwrap();
        assert_eq!(t.depth(), 1);
        match &t.root {
            TreeNode::Internal {
                feature,
                threshold,
                left,
                right,
                ..
            } => {
                assert_eq!((*feature, *threshold), (0, 5.0));
                assert!(matches!(**left, TreeNode::Leaf { mean_x: 0.0, mean_y: 0.0, .. }));
                assert!(matches!(**right, TreeNode::Leaf { mean_x: 5.0, mean_y: 5.0, .. }));
            }
            leaf => panic!("expected a split, got {leaf:?}"),
        }
    }

    #[test]
    fn respects_depth_and_leaf_size() {
        let data: Vec<_> = (0..40)
            .map(|i| fv(vec![i as f64, (i * 7 % 11) as f64], [i as f64, (i * i) as f64]))
            .collect();
        let t = fit(
            &data,
            &TreeConfig {
                max_depth: 3,
                min_samples_leaf: 4,
                ..TreeConfig::default()
            },
        )
        .unwrap();
        assert!(t.depth() <= 3);
        let leaves = t.root.leaves();
        assert!(leaves.iter().all(|l| l.sample_count() >= 4));
        assert_eq!(leaves.iter().map(|l| l.sample_count()).sum::<usize>(), 40);
    }

    #[test]
    fn width_mismatch_and_empty() {
        let data = vec![fv(vec![0.0, 1.0], [0.0, 0.0]), fv(vec![1.0, 1.0], [1.0, 1.0])];
        let t = fit(&data, &TreeConfig::default()).unwrap();
        assert!(matches!(t.predict(&[0.0]), Err(Error::DimensionMismatch { .. })));
        assert!(fit(&[], &TreeConfig::default()).is_err());
    }

    #[test]
    fn json_round_trip() {
        let data: Vec<_> = (0..20).map(|i| fv(vec![i as f64], [i as f64 * 0.1, 3.0])).collect();
        let t = fit(&data, &TreeConfig::default()).unwrap();
        let s = serde_json::to_string(&t).unwrap();
        let back: TreeModel = serde_json::from_str(&s).unwrap();
        assert_eq!(back, t);
    }
}
