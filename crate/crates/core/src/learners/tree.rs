use std::cmp::Ordering;

use ndarray::ArrayView2;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TreeParams {
    /// `None` grows until leaves are pure or unsplittable.
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: None,
            min_samples_split: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum Node {
    /// `score` is the class-1 fraction of the training rows reaching the leaf.
    Leaf { score: f64 },
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// Flat node list; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn score(&self, row: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf { score } => return score,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if row[feature] <= threshold {
                        left
                    } else {
                        right
                    }
                }
            }
        }
    }

    pub fn predict(&self, row: &[f64]) -> u8 {
        u8::from(self.score(row) > 0.5)
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

/// Split quality as an exact rational: maximizing
/// `(l0² + l1²)/nl + (r0² + r1²)/nr` is minimizing weighted Gini impurity.
#[derive(Debug, Clone, Copy)]
struct Purity {
    num: u128,
    den: u128,
}

impl Purity {
    fn new(left: [u64; 2], right: [u64; 2]) -> Self {
        let sq = |c: [u64; 2]| (c[0] as u128).pow(2) + (c[1] as u128).pow(2);
        let nl = (left[0] + left[1]) as u128;
        let nr = (right[0] + right[1]) as u128;
        Purity {
            num: sq(left) * nr + sq(right) * nl,
            den: nl * nr,
        }
    }

    fn cmp(&self, other: &Purity) -> Ordering {
        (self.num * other.den).cmp(&(other.num * self.den))
    }
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    purity: Purity,
    feature: usize,
    threshold: f64,
}

impl Candidate {
    /// Higher purity first, then lower feature index, then lower threshold.
    fn beats(&self, other: &Candidate) -> bool {
        match self.purity.cmp(&other.purity) {
            Ordering::Greater => true,
            Ordering::Less => false,
            Ordering::Equal => (self.feature, self.threshold) < (other.feature, other.threshold),
        }
    }
}

/// Best threshold on one feature, or `None` when the feature is constant
/// over `rows`.
fn best_split_on(
    x: ArrayView2<f64>,
    y: &[u8],
    rows: &[usize],
    feature: usize,
    scratch: &mut Vec<(f64, u8)>,
) -> Option<Candidate> {
    scratch.clear();
    scratch.extend(rows.iter().map(|&r| (x[[r, feature]], y[r])));
    scratch.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));

    let mut total = [0u64; 2];
    for &(_, l) in scratch.iter() {
        total[l as usize] += 1;
    }
    let mut left = [0u64; 2];
    let mut best: Option<Candidate> = None;
    for w in 0..scratch.len() - 1 {
        left[scratch[w].1 as usize] += 1;
        let (lo, hi) = (scratch[w].0, scratch[w + 1].0);
        if lo == hi {
            continue;
        }
        let right = [total[0] - left[0], total[1] - left[1]];
        let mut threshold = lo + (hi - lo) / 2.0;
        if threshold >= hi {
            threshold = lo;
        }
        let cand = Candidate {
            purity: Purity::new(left, right),
            feature,
            threshold,
        };
        if best.is_none_or(|b| cand.beats(&b)) {
            best = Some(cand);
        }
    }
    best
}

/// Random feature subsampling used by the forest: features are visited in
/// a shuffled order until `max_features` non-constant ones have been scored.
pub(super) struct FeatureSampler<'a, R: Rng> {
    pub rng: &'a mut R,
    pub max_features: usize,
}

pub(super) struct Builder<'a, R: Rng> {
    pub x: ArrayView2<'a, f64>,
    pub y: &'a [u8],
    pub params: TreeParams,
    pub sampler: Option<FeatureSampler<'a, R>>,
    nodes: Vec<Node>,
    scratch: Vec<(f64, u8)>,
}

impl<'a, R: Rng> Builder<'a, R> {
    pub fn new(
        x: ArrayView2<'a, f64>,
        y: &'a [u8],
        params: TreeParams,
        sampler: Option<FeatureSampler<'a, R>>,
    ) -> Self {
        Builder {
            x,
            y,
            params,
            sampler,
            nodes: Vec::new(),
            scratch: Vec::new(),
        }
    }

    pub fn build(mut self, rows: &[usize]) -> Tree {
        let mut rows = rows.to_vec();
        self.grow(&mut rows, 0);
        Tree { nodes: self.nodes }
    }

    fn leaf(&mut self, rows: &[usize]) -> usize {
        let ones = rows.iter().filter(|&&r| self.y[r] == 1).count();
        self.nodes.push(Node::Leaf {
            score: ones as f64 / rows.len() as f64,
        });
        self.nodes.len() - 1
    }

    fn find_split(&mut self, rows: &[usize]) -> Option<Candidate> {
        let n_features = self.x.ncols();
        let mut best: Option<Candidate> = None;
        let consider = |c: Option<Candidate>, best: &mut Option<Candidate>| {
            if let Some(c) = c {
                if best.is_none_or(|b| c.beats(&b)) {
                    *best = Some(c);
                }
                true
            } else {
                false
            }
        };
        match &mut self.sampler {
            None => {
                for f in 0..n_features {
                    let c = best_split_on(self.x, self.y, rows, f, &mut self.scratch);
                    consider(c, &mut best);
                }
            }
            Some(sampler) => {
                let mut order: Vec<usize> = (0..n_features).collect();
                order.shuffle(sampler.rng);
                let mut visited = 0;
                for f in order {
                    let c = best_split_on(self.x, self.y, rows, f, &mut self.scratch);
                    if consider(c, &mut best) {
                        visited += 1;
                        if visited >= sampler.max_features {
                            break;
                        }
                    }
                }
            }
        }
        best
    }

    fn grow(&mut self, rows: &mut [usize], depth: usize) -> usize {
        let ones = rows.iter().filter(|&&r| self.y[r] == 1).count();
        let pure = ones == 0 || ones == rows.len();
        let depth_capped = self.params.max_depth.is_some_and(|d| depth >= d);
        if pure || depth_capped || rows.len() < self.params.min_samples_split {
            return self.leaf(rows);
        }
        let Some(split) = self.find_split(rows) else {
            return self.leaf(rows);
        };

        let at = self.nodes.len();
        self.nodes.push(Node::Leaf { score: 0.0 });
        let x = self.x;
        let (mut lrows, mut rrows): (Vec<usize>, Vec<usize>) = rows
            .iter()
            .partition(|&&r| x[[r, split.feature]] <= split.threshold);
        let left = self.grow(&mut lrows, depth + 1);
        let right = self.grow(&mut rrows, depth + 1);
        self.nodes[at] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
        };
        at
    }
}

/// CART with Gini impurity over all rows and all features.
pub(super) fn fit(p: &TreeParams, x: ArrayView2<f64>, y: &[u8]) -> Tree {
    let rows: Vec<usize> = (0..y.len()).collect();
    Builder::<rand_chacha::ChaCha8Rng>::new(x, y, *p, None).build(&rows)
}
