use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{feature_columns, input_features, Predictor};
use crate::error::{Error, Result};
use crate::Table;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_leaf: usize,
    /// Bootstrap sample size as a fraction of the training rows.
    pub bootstrap_fraction: f64,
    /// Tree `i` is grown from a generator seeded with `seed + i`.
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 100,
            max_depth: 6,
            min_leaf: 2,
            bootstrap_fraction: 1.0,
            seed: 42,
        }
    }
}

/// Axis-aligned regression tree. Rows with `x[feature] <= threshold` go left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Tree {
    Leaf(f64),
    Split {
        feature: usize,
        threshold: f64,
        left: Box<Tree>,
        right: Box<Tree>,
    },
}

impl Tree {
    fn predict_row(&self, cols: &[&[f64]], i: usize) -> f64 {
        let mut node = self;
        loop {
            match node {
                Tree::Leaf(v) => return *v,
                Tree::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if cols[*feature][i] <= *threshold {
                        left
                    } else {
                        right
                    };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Tree::Leaf(_) => 0,
            Tree::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }
}

/// Bagged CART regression trees; prediction is the mean over trees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub outcome: String,
    pub features: Vec<String>,
    pub config: ForestConfig,
    pub trees: Vec<Tree>,
}

impl Predictor for ForestModel {
    fn method_name(&self) -> &str {
        "Random Forest"
    }

    fn features(&self) -> &[String] {
        &self.features
    }

    fn predict(&self, table: &Table) -> Result<Vec<f64>> {
        let cols = feature_columns(table, &self.features)?;
        let k = self.trees.len() as f64;
        Ok((0..table.n_rows())
            .map(|i| {
                self.trees
                    .iter()
                    .map(|t| t.predict_row(&cols, i))
                    .sum::<f64>()
                    / k
            })
            .collect())
    }
}

pub fn fit_forest(table: &Table, outcome: &str, config: &ForestConfig) -> Result<ForestModel> {
    if config.n_trees == 0 || config.max_depth == 0 || config.min_leaf == 0 {
        return Err(Error::InvalidArgument(
            "n_trees, max_depth and min_leaf must be positive".into(),
        ));
    }
    if !(config.bootstrap_fraction > 0.0 && config.bootstrap_fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "bootstrap fraction must be in (0, 1], got {}",
            config.bootstrap_fraction
        )));
    }
    let n = table.n_rows();
    if n < 2 {
        return Err(Error::TooFewRows { needed: 2, got: n });
    }
    let features = input_features(table, outcome)?;
    let cols = feature_columns(table, &features)?;
    let y = table.column(outcome)?;
    let sample_size = ((n as f64) * config.bootstrap_fraction).round().max(1.0) as usize;

    let builder = TreeBuilder {
        cols: &cols,
        y,
        max_depth: config.max_depth,
        min_leaf: config.min_leaf,
    };
    let trees = (0..config.n_trees)
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(t as u64));
            let rows: Vec<usize> = (0..sample_size).map(|_| rng.random_range(0..n)).collect();
            builder.grow(rows, 0)
        })
        .collect();
    Ok(ForestModel {
        outcome: outcome.to_string(),
        features,
        config: *config,
        trees,
    })
}

struct TreeBuilder<'a> {
    cols: &'a [&'a [f64]],
    y: &'a [f64],
    max_depth: usize,
    min_leaf: usize,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    score: f64,
}

impl TreeBuilder<'_> {
    fn grow(&self, rows: Vec<usize>, depth: usize) -> Tree {
        let n = rows.len();
        let sum: f64 = rows.iter().map(|&i| self.y[i]).sum();
        let mean = sum / n as f64;
        if depth >= self.max_depth || n < 2 * self.min_leaf {
            return Tree::Leaf(mean);
        }
        let Some(best) = self.best_split(&rows, sum) else {
            return Tree::Leaf(mean);
        };
        let (left, right): (Vec<usize>, Vec<usize>) = rows
            .into_iter()
            .partition(|&i| self.cols[best.feature][i] <= best.threshold);
        Tree::Split {
            feature: best.feature,
            threshold: best.threshold,
            left: Box::new(self.grow(left, depth + 1)),
            right: Box::new(self.grow(right, depth + 1)),
        }
    }

    /// Maximizes `S_L²/n_L + S_R²/n_R`, equivalent to the largest reduction
    /// in squared error. Returns `None` if no split improves on the parent.
    fn best_split(&self, rows: &[usize], total: f64) -> Option<BestSplit> {
        let n = rows.len();
        let parent = total * total / n as f64;
        let mut best: Option<BestSplit> = None;
        let mut order = rows.to_vec();
        for (f, col) in self.cols.iter().enumerate() {
            order.sort_by(|&a, &b| col[a].total_cmp(&col[b]));
            let mut left_sum = 0.0;
            for k in 1..n {
                left_sum += self.y[order[k - 1]];
                let (lo, hi) = (col[order[k - 1]], col[order[k]]);
                if k < self.min_leaf || n - k < self.min_leaf || lo == hi {
                    continue;
                }
                let right_sum = total - left_sum;
                let score = left_sum * left_sum / k as f64 + right_sum * right_sum / (n - k) as f64;
                if score
                    > best
                        .as_ref()
                        .map_or(parent * (1.0 + 1e-12) + 1e-12, |b| b.score)
                {
                    best = Some(BestSplit {
                        feature: f,
                        threshold: lo + (hi - lo) / 2.0,
                        score,
                    });
                }
            }
        }
        best
    }
}
