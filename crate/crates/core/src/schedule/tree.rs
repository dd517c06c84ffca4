//! Binary partitions of feature space and their CART fit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A node of a [`PartitionTree`]. Inputs with `x[feature] <= threshold` go left.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
    /// Cell index, 0-based.
    Leaf(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartitionTree {
    root: Node,
    dim: usize,
    cells: usize,
}

impl PartitionTree {
    /// Validates that leaves carry each index `0..cells` exactly once and that
    /// features lie below `dim`.
    pub fn new(root: Node, dim: usize) -> Result<Self> {
        let mut seen = Vec::new();
        collect(&root, dim, &mut seen)?;
        let cells = seen.len();
        let mut sorted = seen.clone();
        sorted.sort_unstable();
        if sorted.iter().enumerate().any(|(i, &c)| i != c) {
            return Err(Error::invalid(format!(
                "leaf cells {seen:?} are not a permutation of 0..{cells}"
            )));
        }
        Ok(Self { root, dim, cells })
    }

    pub fn single_leaf(dim: usize) -> Self {
        Self {
            root: Node::Leaf(0),
            dim,
            cells: 1,
        }
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cell_count(&self) -> usize {
        self.cells
    }

    /// 0-based cell containing `x`.
    pub fn locate(&self, x: &[f64]) -> Result<usize> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        let mut node = &self.root;
        loop {
            match node {
                Node::Leaf(c) => return Ok(*c),
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => node = if x[*feature] <= *threshold { left } else { right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn go(n: &Node) -> usize {
            match n {
                Node::Leaf(_) => 0,
                Node::Split { left, right, .. } => 1 + go(left).max(go(right)),
            }
        }
        go(&self.root)
    }

    /// Features used by any split, ascending.
    pub fn split_features(&self) -> Vec<usize> {
        fn go(n: &Node, out: &mut Vec<usize>) {
            if let Node::Split { feature, left, right, .. } = n {
                out.push(*feature);
                go(left, out);
                go(right, out);
            }
        }
        let mut out = Vec::new();
        go(&self.root, &mut out);
        out.sort_unstable();
        out.dedup();
        out
    }
}

fn collect(n: &Node, dim: usize, seen: &mut Vec<usize>) -> Result<()> {
    match n {
        Node::Leaf(c) => seen.push(*c),
        Node::Split {
            feature,
            threshold,
            left,
            right,
        } => {
            if *feature >= dim {
                return Err(Error::invalid(format!("feature {feature} out of range for dimension {dim}")));
            }
            if !threshold.is_finite() {
                return Err(Error::invalid("split thresholds must be finite"));
            }
            collect(left, dim, seen)?;
            collect(right, dim, seen)?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeParams {
    #[serde(default = "default_depth")]
    pub max_depth: usize,
    #[serde(default = "default_min_leaf")]
    pub min_leaf: usize,
    #[serde(default = "default_max_leaves")]
    pub max_leaves: usize,
}

fn default_depth() -> usize {
    8
}
fn default_min_leaf() -> usize {
    100
}
fn default_max_leaves() -> usize {
    16
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            max_depth: default_depth(),
            min_leaf: default_min_leaf(),
            max_leaves: default_max_leaves(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeFit {
    pub tree: PartitionTree,
    /// Set when too few records were available to grow the tree.
    pub warning: Option<String>,
}

#[derive(Debug, Clone, Copy)]
struct Split {
    feature: usize,
    threshold: f64,
    gain: f64,
}

struct Growing {
    rows: Vec<usize>,
    depth: usize,
    split: Option<Split>,
}

fn sse(sum: f64, sum2: f64, n: f64) -> f64 {
    (sum2 - sum * sum / n).max(0.0)
}

fn best_split(x: &[Vec<f64>], y: &[f64], rows: &[usize], dim: usize, min_leaf: usize) -> Option<Split> {
    let n = rows.len();
    let min_leaf = min_leaf.max(1);
    if n < 2 * min_leaf {
        return None;
    }
    let total: f64 = rows.iter().map(|&i| y[i]).sum();
    let total2: f64 = rows.iter().map(|&i| y[i] * y[i]).sum();
    let parent = sse(total, total2, n as f64);
    let tolerance = 1e-12 * parent.max(f64::MIN_POSITIVE);
    let mut best: Option<Split> = None;
    let mut order = rows.to_vec();
    for f in 0..dim {
        order.sort_by(|&a, &b| x[a][f].total_cmp(&x[b][f]).then(a.cmp(&b)));
        let (mut ls, mut ls2) = (0.0, 0.0);
        for (j, &i) in order.iter().enumerate().take(n - 1) {
            ls += y[i];
            ls2 += y[i] * y[i];
            let left_n = j + 1;
            if left_n < min_leaf || n - left_n < min_leaf {
                continue;
            }
            let (a, b) = (x[i][f], x[order[j + 1]][f]);
            if a == b {
                continue;
            }
            let gain = parent
                - sse(ls, ls2, left_n as f64)
                - sse(total - ls, total2 - ls2, (n - left_n) as f64);
            if gain > tolerance && best.is_none_or(|s| gain > s.gain) {
                let mid = a + (b - a) / 2.0;
                let threshold = if mid < b { mid } else { a };
                best = Some(Split {
                    feature: f,
                    threshold,
                    gain,
                });
            }
        }
    }
    best
}

/// Grows a regression tree best-first by SSE reduction. Splits are placed at
/// midpoints between consecutive distinct values; ties in gain keep the lowest
/// feature, then the lowest threshold. Cells are numbered depth-first, left
/// to right.
pub fn fit_partition(features: &[Vec<f64>], targets: &[f64], dim: usize, params: &TreeParams) -> Result<TreeFit> {
    if features.len() != targets.len() {
        return Err(Error::DimensionMismatch {
            expected: features.len(),
            got: targets.len(),
        });
    }
    if let Some(bad) = features.iter().find(|f| f.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: bad.len(),
        });
    }
    if targets.iter().any(|t| !t.is_finite()) {
        return Err(Error::invalid("regression targets must be finite"));
    }
    let n = targets.len();
    if n == 0 || n < params.min_leaf {
        return Ok(TreeFit {
            tree: PartitionTree::single_leaf(dim),
            warning: Some(format!(
                "{n} usable records, fewer than min_leaf = {}; using a single cell",
                params.min_leaf
            )),
        });
    }

    // Arena of growing nodes; children[i] is set once node i is split.
    let mut nodes = vec![Growing {
        rows: (0..n).collect(),
        depth: 0,
        split: None,
    }];
    let mut children: Vec<Option<(usize, usize)>> = vec![None];
    let evaluate = |g: &Growing| {
        if g.depth >= params.max_depth {
            None
        } else {
            best_split(features, targets, &g.rows, dim, params.min_leaf)
        }
    };
    nodes[0].split = evaluate(&nodes[0]);
    let mut leaves = 1;
    while leaves < params.max_leaves.max(1) {
        let mut pick: Option<(usize, f64)> = None;
        for (i, g) in nodes.iter().enumerate() {
            if children[i].is_none() {
                if let Some(s) = g.split {
                    if pick.is_none_or(|(_, best)| s.gain > best) {
                        pick = Some((i, s.gain));
                    }
                }
            }
        }
        let Some((i, _)) = pick else { break };
        let s = nodes[i].split.expect("picked nodes have a split");
        let (l, r): (Vec<usize>, Vec<usize>) = nodes[i]
            .rows
            .iter()
            .partition(|&&row| features[row][s.feature] <= s.threshold);
        let depth = nodes[i].depth + 1;
        for rows in [l, r] {
            let mut g = Growing { rows, depth, split: None };
            g.split = evaluate(&g);
            nodes.push(g);
            children.push(None);
        }
        children[i] = Some((nodes.len() - 2, nodes.len() - 1));
        leaves += 1;
    }

    fn build(i: usize, nodes: &[Growing], children: &[Option<(usize, usize)>], next: &mut usize) -> Node {
        match children[i] {
            None => {
                *next += 1;
                Node::Leaf(*next - 1)
            }
            Some((l, r)) => {
                let s = nodes[i].split.expect("split nodes record their split");
                let left = Box::new(build(l, nodes, children, next));
                let right = Box::new(build(r, nodes, children, next));
                Node::Split {
                    feature: s.feature,
                    threshold: s.threshold,
                    left,
                    right,
                }
            }
        }
    }
    let mut next = 0;
    let root = build(0, &nodes, &children, &mut next);
    Ok(TreeFit {
        tree: PartitionTree::new(root, dim)?,
        warning: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn leaf(c: usize) -> Box<Node> {
        Box::new(Node::Leaf(c))
    }

    #[test]
    fn ties_route_left() {
        let t = PartitionTree::new(
            Node::Split {
                feature: 0,
                threshold: 1.0,
                left: leaf(0),
                right: leaf(1),
            },
            2,
        )
        .unwrap();
        assert_eq!(t.locate(&[1.0, 0.0]).unwrap(), 0);
        assert_eq!(t.locate(&[1.0 + 1e-15, 0.0]).unwrap(), 1);
        assert!(t.locate(&[1.0]).is_err());
    }

    #[test]
    fn cells_must_be_a_bijection() {
        let bad = Node::Split {
            feature: 0,
            threshold: 0.0,
            left: leaf(0),
            right: leaf(0),
        };
        assert!(PartitionTree::new(bad, 1).is_err());
    }

    #[test]
    fn constant_targets_give_one_leaf() {
        let x: Vec<Vec<f64>> = (0..500).map(|i| vec![i as f64]).collect();
        let fit = fit_partition(&x, &vec![3.0; 500], 1, &TreeParams::default()).unwrap();
        assert_eq!(fit.tree.cell_count(), 1);
        assert!(fit.warning.is_none());
    }

    #[test]
    fn no_records_gives_flagged_single_leaf() {
        let fit = fit_partition(&[], &[], 4, &TreeParams::default()).unwrap();
        assert_eq!(fit.tree.cell_count(), 1);
        assert!(fit.warning.is_some());
        assert_eq!(fit.tree.locate(&[0.0; 4]).unwrap(), 0);
    }

    #[test]
    fn max_leaves_and_depth_are_respected() {
        let x: Vec<Vec<f64>> = (0..4000).map(|i| vec![i as f64, (i * 7 % 13) as f64]).collect();
        let y: Vec<f64> = x.iter().map(|v| (v[0] / 100.0).sin() + v[1]).collect();
        let params = TreeParams {
            max_depth: 3,
            min_leaf: 10,
            max_leaves: 6,
        };
        let fit = fit_partition(&x, &y, 2, &params).unwrap();
        assert!(fit.tree.cell_count() <= 6);
        assert!(fit.tree.depth() <= 3);
    }
}
