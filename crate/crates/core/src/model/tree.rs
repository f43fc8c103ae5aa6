//! Deterministic CART-style classification tree with Gini impurity.

use std::cmp::Ordering;

use crate::features::NUM_FEATURES;
use crate::formats::FormatTag;

pub const NUM_CLASSES: usize = FormatTag::ALL.len();

pub type ClassCounts = [usize; NUM_CLASSES];

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    /// Samples with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf { label: FormatTag, counts: ClassCounts },
}

/// Tree nodes in preorder; node 0 is the root.
#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    pub(crate) nodes: Vec<Node>,
}

/// Best split found for a set of samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitChoice {
    pub feature: usize,
    pub threshold: f64,
    pub n_left: usize,
}

/// Majority class; ties go to the earlier format.
pub fn majority(counts: &ClassCounts) -> FormatTag {
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    FormatTag::from_index(best).expect("class index in range")
}

pub fn class_counts(labels: impl IntoIterator<Item = FormatTag>) -> ClassCounts {
    let mut counts = [0; NUM_CLASSES];
    for l in labels {
        counts[l.index()] += 1;
    }
    counts
}

/// `sum c^2 / n` as an exact fraction. Maximizing `left + right` is the same
/// as minimizing the size-weighted Gini impurity of the two children.
#[derive(Debug, Clone, Copy)]
struct Purity {
    num: u128,
    den: u128,
}

impl Purity {
    fn of_pair(l: &ClassCounts, nl: usize, r: &ClassCounts, nr: usize) -> Self {
        let sq = |c: &ClassCounts| c.iter().map(|&v| (v as u128) * (v as u128)).sum::<u128>();
        let (nl, nr) = (nl as u128, nr as u128);
        Purity {
            num: sq(l) * nr + sq(r) * nl,
            den: nl * nr,
        }
    }

    fn cmp(&self, other: &Self) -> Ordering {
        (self.num * other.den).cmp(&(other.num * self.den))
    }
}

/// Threshold between two adjacent distinct values. The float midpoint can
/// round up to `hi`, in which case `lo` keeps the partition unchanged.
pub fn midpoint(lo: f64, hi: f64) -> f64 {
    let mid = lo + (hi - lo) / 2.0;
    if mid >= hi {
        lo
    } else {
        mid
    }
}

/// Exhaustive split search over every feature and every midpoint between
/// adjacent distinct values. Both children must hold at least
/// `min_samples_leaf` samples. Ties keep the lower feature, then the lower
/// threshold.
pub fn best_split(
    x: &[[f64; NUM_FEATURES]],
    y: &[FormatTag],
    idx: &[usize],
    min_samples_leaf: usize,
) -> Option<SplitChoice> {
    let n = idx.len();
    let total = class_counts(idx.iter().map(|&i| y[i]));
    let min_leaf = min_samples_leaf.max(1);
    let mut best: Option<(Purity, SplitChoice)> = None;
    let mut order = idx.to_vec();
    for feature in 0..NUM_FEATURES {
        order.sort_by(|&a, &b| x[a][feature].total_cmp(&x[b][feature]));
        let mut left = [0; NUM_CLASSES];
        for pos in 0..n.saturating_sub(1) {
            left[y[order[pos]].index()] += 1;
            let (lo, hi) = (x[order[pos]][feature], x[order[pos + 1]][feature]);
            if lo == hi {
                continue;
            }
            let nl = pos + 1;
            let nr = n - nl;
            if nl < min_leaf || nr < min_leaf {
                continue;
            }
            let mut right = total;
            for c in 0..NUM_CLASSES {
                right[c] -= left[c];
            }
            let score = Purity::of_pair(&left, nl, &right, nr);
            let choice = SplitChoice {
                feature,
                threshold: midpoint(lo, hi),
                n_left: nl,
            };
            if best.as_ref().is_none_or(|(b, _)| score.cmp(b) == Ordering::Greater) {
                best = Some((score, choice));
            }
        }
    }
    best.map(|(_, c)| c)
}

impl Tree {
    /// Grows a tree on `x`/`y`. A node splits when it is impure, shallower
    /// than `max_depth` and some split leaves `min_samples_leaf` samples on
    /// each side.
    pub fn fit(x: &[[f64; NUM_FEATURES]], y: &[FormatTag], max_depth: usize, min_samples_leaf: usize) -> Tree {
        assert_eq!(x.len(), y.len());
        assert!(!x.is_empty(), "cannot fit a tree on zero samples");
        let mut tree = Tree { nodes: Vec::new() };
        let idx: Vec<usize> = (0..x.len()).collect();
        tree.grow(x, y, idx, 0, max_depth, min_samples_leaf);
        tree
    }

    fn grow(
        &mut self,
        x: &[[f64; NUM_FEATURES]],
        y: &[FormatTag],
        idx: Vec<usize>,
        depth: usize,
        max_depth: usize,
        min_samples_leaf: usize,
    ) -> usize {
        let id = self.nodes.len();
        let counts = class_counts(idx.iter().map(|&i| y[i]));
        let leaf = Node::Leaf {
            label: majority(&counts),
            counts,
        };
        self.nodes.push(leaf);
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        if pure || depth >= max_depth {
            return id;
        }
        let Some(split) = best_split(x, y, &idx, min_samples_leaf) else {
            return id;
        };
        let (l, r): (Vec<usize>, Vec<usize>) = idx
            .into_iter()
            .partition(|&i| x[i][split.feature] <= split.threshold);
        debug_assert_eq!(l.len(), split.n_left);
        let left = self.grow(x, y, l, depth + 1, max_depth, min_samples_leaf);
        let right = self.grow(x, y, r, depth + 1, max_depth, min_samples_leaf);
        self.nodes[id] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
        };
        id
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    /// Ids of the nodes visited by `x`, root first.
    pub fn path(&self, x: &[f64; NUM_FEATURES]) -> Vec<usize> {
        let mut id = 0;
        let mut path = vec![0];
        while let Node::Split {
            feature,
            threshold,
            left,
            right,
        } = self.nodes[id]
        {
            id = if x[feature] <= threshold { left } else { right };
            path.push(id);
        }
        path
    }

    pub fn predict(&self, x: &[f64; NUM_FEATURES]) -> FormatTag {
        match self.nodes[*self.path(x).last().expect("path is never empty")] {
            Node::Leaf { label, .. } => label,
            Node::Split { .. } => unreachable!("paths end at leaves"),
        }
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], id: usize) -> usize {
            match nodes[id] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(nodes, left).max(go(nodes, right)),
            }
        }
        go(&self.nodes, 0)
    }

    /// Checks that node 0 roots a binary tree reaching every node exactly once.
    pub(crate) fn validate(&self) -> Result<(), String> {
        if self.nodes.is_empty() {
            return Err("tree has no nodes".into());
        }
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![0];
        while let Some(id) = stack.pop() {
            if id >= self.nodes.len() {
                return Err(format!("child id {id} out of range"));
            }
            if std::mem::replace(&mut seen[id], true) {
                return Err(format!("node {id} reached twice"));
            }
            if let Node::Split { feature, left, right, .. } = self.nodes[id] {
                if feature >= NUM_FEATURES {
                    return Err(format!("node {id} splits on unknown feature {feature}"));
                }
                stack.extend([right, left]);
            }
        }
        match seen.iter().position(|s| !s) {
            Some(id) => Err(format!("node {id} is unreachable")),
            None => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use FormatTag::*;

    fn row(v: f64) -> [f64; NUM_FEATURES] {
        let mut r = [0.0; NUM_FEATURES];
        r[5] = v;
        r
    }

    #[test]
    fn two_clusters_split_once() {
        let x: Vec<_> = [0.1, 0.2, 0.3, 0.7, 0.8, 0.9].iter().map(|&v| row(v)).collect();
        let y = [Csr, Csr, Csr, Sell, Sell, Sell];
        let t = Tree::fit(&x, &y, 8, 1);
        assert_eq!(t.depth(), 1);
        match t.nodes()[0] {
            Node::Split { feature, threshold, .. } => {
                // features 0..5 are constant, so nnz_avg is the first usable one
                assert_eq!(feature, 5);
                assert_eq!(threshold, 0.5);
            }
            _ => panic!("expected a split"),
        }
        assert!(x.iter().zip(y).all(|(r, l)| t.predict(r) == l));
    }

    #[test]
    fn pure_root_is_a_leaf() {
        let x = vec![row(0.0), row(1.0)];
        let t = Tree::fit(&x, &[Ell, Ell], 8, 1);
        assert_eq!(t.nodes(), &[Node::Leaf { label: Ell, counts: [0, 0, 2, 0, 0] }]);
    }

    #[test]
    fn depth_zero_uses_tag_order() {
        let x: Vec<_> = (0..5).map(|i| row(i as f64)).collect();
        let t = Tree::fit(&x, &[Hyb, Sell, Ell, Csr5, Csr], 0, 1);
        assert_eq!(t.predict(&row(3.0)), Csr);
        assert_eq!(majority(&[0, 1, 0, 1, 0]), Csr5);
    }

    #[test]
    fn min_leaf_blocks_small_children() {
        let x: Vec<_> = (0..4).map(|i| row(i as f64)).collect();
        let t = Tree::fit(&x, &[Csr, Sell, Sell, Sell], 8, 2);
        // the only clean cut leaves a single sample on the left
        assert_eq!(t.nodes().len(), 3);
        match t.nodes()[0] {
            Node::Split { threshold, .. } => assert_eq!(threshold, 1.5),
            _ => panic!("expected a split"),
        }
    }

    #[test]
    fn midpoint_of_adjacent_floats() {
        let lo = 1.0f64;
        let hi = f64::from_bits(lo.to_bits() + 1);
        assert_eq!(midpoint(lo, hi), lo);
        assert_eq!(midpoint(0.25, 0.75), 0.5);
    }

    #[test]
    fn validation_catches_cycles() {
        let bad = Tree {
            nodes: vec![Node::Split { feature: 0, threshold: 0.0, left: 0, right: 0 }],
        };
        assert!(bad.validate().is_err());
    }
}
