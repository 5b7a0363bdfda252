//! Gradient-boosted decision trees for binary lithotype classification.
//!
//! Logistic-loss boosting with second-order (Newton) leaf values and split
//! gain, L2 stabilizer fixed at 1. Splits are exact greedy over sorted
//! unique feature values; no histogram binning. Feature columns are sorted
//! once per training set and reused across all trees, so each tree level
//! costs one pass over the data per feature.
//!
//! Determinism: with a fixed seed, training is bit-reproducible. Equal-gain
//! splits resolve to the lowest feature index, then the lowest threshold.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Real;
use crate::well::Lithotype;

/// Version tag of the persisted model format.
pub const MODEL_FORMAT_VERSION: &str = "drillwatch/1";

/// One node of a regression tree. Internal nodes route a row left iff
/// `row[feature] < threshold`; leaves carry an additive log-odds
/// contribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TreeNode<F> {
    Split {
        feature: usize,
        threshold: F,
        left: Box<TreeNode<F>>,
        right: Box<TreeNode<F>>,
    },
    Leaf {
        #[serde(rename = "leaf_value")]
        value: F,
    },
}

impl<F: Real> TreeNode<F> {
    /// Routes one row to its leaf value.
    pub fn predict_row(&self, row: &[F]) -> F {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf { value } => return *value,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if row[*feature] < *threshold {
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
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }
}

/// Boosting hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct GbdtConfig<F> {
    pub n_trees: usize,
    pub max_depth: usize,
    pub learning_rate: F,
    /// Fraction of rows drawn (without replacement) per tree.
    pub subsample_rows: F,
    /// Fraction of features drawn per tree.
    pub subsample_features: F,
    /// Minimal row count on each side of a split.
    pub min_leaf: usize,
    /// Weight samples by inverse class frequency.
    pub balance_classes: bool,
    pub seed: u64,
}

impl<F: Real> Default for GbdtConfig<F> {
    fn default() -> Self {
        GbdtConfig {
            n_trees: 200,
            max_depth: 3,
            learning_rate: F::from_f64_lossy(0.05),
            subsample_rows: F::one(),
            subsample_features: F::one(),
            min_leaf: 20,
            balance_classes: false,
            seed: 0,
        }
    }
}

impl<F: Real> GbdtConfig<F> {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees < 1 {
            return Err(Error::Config("n_trees must be at least 1".into()));
        }
        if !(1..=12).contains(&self.max_depth) {
            return Err(Error::Config("max_depth must lie in 1..=12".into()));
        }
        if !(self.learning_rate > F::zero() && self.learning_rate <= F::one()) {
            return Err(Error::Config("learning_rate must lie in (0, 1]".into()));
        }
        for (name, f) in [
            ("subsample_rows", self.subsample_rows),
            ("subsample_features", self.subsample_features),
        ] {
            if !(f > F::zero() && f <= F::one()) {
                return Err(Error::Config(format!("{name} must lie in (0, 1]")));
            }
        }
        if self.min_leaf < 1 {
            return Err(Error::Config("min_leaf must be at least 1".into()));
        }
        Ok(())
    }
}

/// A trained boosted ensemble. Prediction is
/// `sigmoid(base_score + learning_rate * sum of tree outputs)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GbdtModel<F> {
    pub base_score: F,
    pub learning_rate: F,
    pub feature_names: Vec<String>,
    pub trees: Vec<TreeNode<F>>,
    /// Training log-loss after each boosting iteration; empty on loaded
    /// models.
    pub train_loss: Vec<F>,
}

impl<F: Real> GbdtModel<F> {
    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }
}

/// Numerically stable logistic function.
pub fn sigmoid<F: Real>(x: F) -> F {
    if x >= F::zero() {
        F::one() / (F::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (F::one() + e)
    }
}

fn softplus<F: Real>(x: F) -> F {
    x.max(F::zero()) + (-(x.abs())).exp().ln_1p()
}

fn log_loss<F: Real>(scores: &[F], targets: &[F]) -> F {
    let two = F::from_f64_lossy(2.0);
    let mut sum = F::zero();
    for (&s, &y) in scores.iter().zip(targets) {
        // softplus(-s) for y = 1, softplus(s) for y = 0
        sum = sum + softplus((F::one() - two * y) * s);
    }
    sum / F::from_f64_lossy(scores.len() as f64)
}

const LAMBDA: f64 = 1.0;

/// Pre-sorted training columns, built once and reused by every tree.
struct Trainer<F> {
    columns: Vec<Vec<F>>,
    sorted: Vec<Vec<u32>>,
    n_rows: usize,
}

const INACTIVE: u32 = u32::MAX;

#[derive(Clone)]
struct LevelNode<F> {
    slot: usize,
    g: F,
    h: F,
    count: usize,
    best_gain: F,
    best_feature: usize,
    best_threshold: F,
    // per-feature scan state
    left_g: F,
    left_h: F,
    left_count: usize,
    last_value: F,
    seen_any: bool,
}

enum Built<F> {
    Leaf(F),
    Split {
        feature: usize,
        threshold: F,
        left: usize,
        right: usize,
    },
}

impl<F: Real> Trainer<F> {
    fn new<R: AsRef<[F]>>(rows: &[R], n_features: usize) -> Trainer<F> {
        let n_rows = rows.len();
        let mut columns = vec![Vec::with_capacity(n_rows); n_features];
        for row in rows {
            for (f, &v) in row.as_ref().iter().enumerate() {
                columns[f].push(v);
            }
        }
        let sorted = columns
            .iter()
            .map(|col| {
                let mut idx: Vec<u32> = (0..n_rows as u32).collect();
                idx.sort_by(|&a, &b| {
                    col[a as usize]
                        .partial_cmp(&col[b as usize])
                        .expect("finite feature values")
                        .then(a.cmp(&b))
                });
                idx
            })
            .collect();
        Trainer {
            columns,
            sorted,
            n_rows,
        }
    }

    /// Grows one tree level-wise over the active rows.
    fn fit(
        &self,
        grad: &[F],
        hess: &[F],
        active_rows: &[u32],
        features: &[usize],
        max_depth: usize,
        min_leaf: usize,
    ) -> TreeNode<F> {
        let lambda = F::from_f64_lossy(LAMBDA);
        let mut node_of = vec![INACTIVE; self.n_rows];
        for &r in active_rows {
            node_of[r as usize] = 0;
        }

        let mut arena: Vec<Built<F>> = vec![Built::Leaf(F::zero())];
        let mut level: Vec<LevelNode<F>> = vec![LevelNode {
            slot: 0,
            g: F::zero(),
            h: F::zero(),
            count: 0,
            best_gain: F::zero(),
            best_feature: 0,
            best_threshold: F::zero(),
            left_g: F::zero(),
            left_h: F::zero(),
            left_count: 0,
            last_value: F::zero(),
            seen_any: false,
        }];

        for depth in 0..=max_depth {
            if level.is_empty() {
                break;
            }
            // node totals, accumulated in row order
            for node in level.iter_mut() {
                node.g = F::zero();
                node.h = F::zero();
                node.count = 0;
                node.best_gain = F::zero();
            }
            for r in 0..self.n_rows {
                let nid = node_of[r];
                if nid == INACTIVE {
                    continue;
                }
                let node = &mut level[nid as usize];
                node.g = node.g + grad[r];
                node.h = node.h + hess[r];
                node.count += 1;
            }

            if depth < max_depth {
                for &f in features {
                    for node in level.iter_mut() {
                        node.left_g = F::zero();
                        node.left_h = F::zero();
                        node.left_count = 0;
                        node.seen_any = false;
                    }
                    let col = &self.columns[f];
                    for &r in &self.sorted[f] {
                        let nid = node_of[r as usize];
                        if nid == INACTIVE {
                            continue;
                        }
                        let node = &mut level[nid as usize];
                        let v = col[r as usize];
                        if node.seen_any && v > node.last_value {
                            let right_count = node.count - node.left_count;
                            if node.left_count >= min_leaf && right_count >= min_leaf {
                                let right_g = node.g - node.left_g;
                                let right_h = node.h - node.left_h;
                                let gain = node.left_g * node.left_g / (node.left_h + lambda)
                                    + right_g * right_g / (right_h + lambda)
                                    - node.g * node.g / (node.h + lambda);
                                if gain > node.best_gain {
                                    node.best_gain = gain;
                                    node.best_feature = f;
                                    node.best_threshold =
                                        (node.last_value + v) / F::from_f64_lossy(2.0);
                                }
                            }
                        }
                        node.left_g = node.left_g + grad[r as usize];
                        node.left_h = node.left_h + hess[r as usize];
                        node.left_count += 1;
                        node.last_value = v;
                        node.seen_any = true;
                    }
                }
            }

            // resolve nodes: split or finalize as leaf
            let mut next_level: Vec<LevelNode<F>> = Vec::new();
            let mut child_of: Vec<Option<(usize, usize, F, u32, u32)>> =
                Vec::with_capacity(level.len());
            for node in &level {
                if depth < max_depth && node.best_gain > F::zero() {
                    let left_slot = arena.len();
                    arena.push(Built::Leaf(F::zero()));
                    let right_slot = arena.len();
                    arena.push(Built::Leaf(F::zero()));
                    arena[node.slot] = Built::Split {
                        feature: node.best_feature,
                        threshold: node.best_threshold,
                        left: left_slot,
                        right: right_slot,
                    };
                    let left_id = next_level.len() as u32;
                    next_level.push(LevelNode {
                        slot: left_slot,
                        ..node.clone()
                    });
                    let right_id = next_level.len() as u32;
                    next_level.push(LevelNode {
                        slot: right_slot,
                        ..node.clone()
                    });
                    child_of.push(Some((
                        node.best_feature,
                        node.slot,
                        node.best_threshold,
                        left_id,
                        right_id,
                    )));
                } else {
                    arena[node.slot] = Built::Leaf(-node.g / (node.h + lambda));
                    child_of.push(None);
                }
            }

            for r in 0..self.n_rows {
                let nid = node_of[r];
                if nid == INACTIVE {
                    continue;
                }
                match child_of[nid as usize] {
                    Some((feature, _, threshold, left_id, right_id)) => {
                        node_of[r] = if self.columns[feature][r] < threshold {
                            left_id
                        } else {
                            right_id
                        };
                    }
                    None => node_of[r] = INACTIVE,
                }
            }
            level = next_level;
        }

        Self::materialize(&arena, 0)
    }

    fn materialize(arena: &[Built<F>], slot: usize) -> TreeNode<F> {
        match &arena[slot] {
            Built::Leaf(v) => TreeNode::Leaf { value: *v },
            Built::Split {
                feature,
                threshold,
                left,
                right,
            } => TreeNode::Split {
                feature: *feature,
                threshold: *threshold,
                left: Box::new(Self::materialize(arena, *left)),
                right: Box::new(Self::materialize(arena, *right)),
            },
        }
    }
}

fn sample_sorted(rng: &mut impl Rng, n: usize, fraction: f64) -> Vec<u32> {
    if fraction >= 1.0 {
        return (0..n as u32).collect();
    }
    let k = ((n as f64 * fraction).round() as usize).clamp(1, n);
    let mut picked = rand::seq::index::sample(rng, n, k).into_vec();
    picked.sort_unstable();
    picked.into_iter().map(|i| i as u32).collect()
}

/// Fits a single regression tree to the given gradients and curvatures.
/// Row and feature subsampling follow the config fractions using `rng`.
pub fn fit_tree<F: Real, R: AsRef<[F]>>(
    rows: &[R],
    grad: &[F],
    hess: &[F],
    cfg: &GbdtConfig<F>,
    rng: &mut impl Rng,
) -> Result<TreeNode<F>> {
    cfg.validate()?;
    if rows.is_empty() {
        return Err(Error::Fit("no rows to fit".into()));
    }
    if grad.len() != rows.len() || hess.len() != rows.len() {
        return Err(Error::Shape(
            "gradient/curvature length must match row count".into(),
        ));
    }
    if hess.iter().any(|h| *h < F::zero()) {
        return Err(Error::Fit("negative curvature".into()));
    }
    let n_features = rows[0].as_ref().len();
    let trainer = Trainer::new(rows, n_features);
    let active = sample_sorted(rng, rows.len(), cfg.subsample_rows.as_f64());
    let features: Vec<usize> = sample_sorted(rng, n_features, cfg.subsample_features.as_f64())
        .into_iter()
        .map(|f| f as usize)
        .collect();
    Ok(trainer.fit(grad, hess, &active, &features, cfg.max_depth, cfg.min_leaf))
}

/// Trains a boosted ensemble on the pooled rows.
///
/// Gradient and curvature are the logistic-loss derivatives `p - y` and
/// `p (1 - p)`; the base score is the log-odds of the training shale
/// fraction; every iteration's training log-loss is recorded on the model.
pub fn train_gbdt<F: Real, R: AsRef<[F]>>(
    rows: &[R],
    labels: &[Lithotype],
    feature_names: &[String],
    cfg: &GbdtConfig<F>,
) -> Result<GbdtModel<F>> {
    cfg.validate()?;
    let n = rows.len();
    if n != labels.len() {
        return Err(Error::Shape("row/label count mismatch".into()));
    }
    if n < 2 * cfg.min_leaf {
        return Err(Error::Fit(format!(
            "need at least {} rows for min_leaf {}",
            2 * cfg.min_leaf,
            cfg.min_leaf
        )));
    }
    if rows.iter().any(|r| r.as_ref().len() != feature_names.len()) {
        return Err(Error::Shape("row width does not match feature names".into()));
    }

    let targets: Vec<F> = labels
        .iter()
        .map(|&l| {
            if l == Lithotype::Shale {
                F::one()
            } else {
                F::zero()
            }
        })
        .collect();
    let n_pos = targets.iter().filter(|&&y| y == F::one()).count();
    if n_pos == 0 || n_pos == n {
        return Err(Error::Fit(
            "training pool holds a single class; base score undefined".into(),
        ));
    }
    let pos_frac = F::from_f64_lossy(n_pos as f64 / n as f64);
    let base_score = (pos_frac / (F::one() - pos_frac)).ln();

    // optional inverse-frequency class weights
    let (w_pos, w_neg) = if cfg.balance_classes {
        let half = F::from_f64_lossy(0.5);
        (
            half / pos_frac,
            half / (F::one() - pos_frac),
        )
    } else {
        (F::one(), F::one())
    };

    let trainer = Trainer::new(rows, feature_names.len());
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    let mut scores = vec![base_score; n];
    let mut grad = vec![F::zero(); n];
    let mut hess = vec![F::zero(); n];
    let mut trees = Vec::with_capacity(cfg.n_trees);
    let mut train_loss = Vec::with_capacity(cfg.n_trees);

    for _ in 0..cfg.n_trees {
        for i in 0..n {
            let p = sigmoid(scores[i]);
            let w = if targets[i] == F::one() { w_pos } else { w_neg };
            grad[i] = (p - targets[i]) * w;
            hess[i] = p * (F::one() - p) * w;
        }
        let active = sample_sorted(&mut rng, n, cfg.subsample_rows.as_f64());
        let features: Vec<usize> =
            sample_sorted(&mut rng, feature_names.len(), cfg.subsample_features.as_f64())
                .into_iter()
                .map(|f| f as usize)
                .collect();
        let tree = trainer.fit(&grad, &hess, &active, &features, cfg.max_depth, cfg.min_leaf);
        for (i, row) in rows.iter().enumerate() {
            scores[i] = scores[i] + cfg.learning_rate * tree.predict_row(row.as_ref());
        }
        train_loss.push(log_loss(&scores, &targets));
        trees.push(tree);
    }

    Ok(GbdtModel {
        base_score,
        learning_rate: cfg.learning_rate,
        feature_names: feature_names.to_vec(),
        trees,
        train_loss,
    })
}

/// Shale probability for each row.
pub fn predict_proba<F: Real, R: AsRef<[F]>>(
    model: &GbdtModel<F>,
    rows: &[R],
) -> Result<Vec<F>> {
    let width = model.n_features();
    let mut out = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        let row = row.as_ref();
        if row.len() != width {
            return Err(Error::Shape(format!(
                "row {i} has {} features, model expects {width}",
                row.len()
            )));
        }
        let mut score = model.base_score;
        for tree in &model.trees {
            score = score + model.learning_rate * tree.predict_row(row);
        }
        out.push(sigmoid(score));
    }
    Ok(out)
}

#[derive(Serialize, Deserialize)]
#[serde(bound(deserialize = "F: serde::de::DeserializeOwned"))]
struct ModelDocument<F> {
    version: String,
    base_score: F,
    learning_rate: F,
    feature_names: Vec<String>,
    trees: Vec<TreeNode<F>>,
}

/// Serializes a model to its versioned document.
pub fn save_model<F: Real>(model: &GbdtModel<F>) -> String {
    let doc = ModelDocument {
        version: MODEL_FORMAT_VERSION.to_string(),
        base_score: model.base_score,
        learning_rate: model.learning_rate,
        feature_names: model.feature_names.clone(),
        trees: model.trees.clone(),
    };
    serde_json::to_string_pretty(&doc).expect("model serializes")
}

/// Parses a model document, rejecting unknown versions and malformed input.
pub fn load_model<F: Real>(document: &str) -> Result<GbdtModel<F>> {
    let doc: ModelDocument<F> = serde_json::from_str(document)
        .map_err(|e| Error::ModelLoad(format!("malformed model document: {e}")))?;
    if doc.version != MODEL_FORMAT_VERSION {
        return Err(Error::ModelLoad(format!(
            "unsupported model version '{}', expected '{}'",
            doc.version, MODEL_FORMAT_VERSION
        )));
    }
    Ok(GbdtModel {
        base_score: doc.base_score,
        learning_rate: doc.learning_rate,
        feature_names: doc.feature_names,
        trees: doc.trees,
        train_loss: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const S: Lithotype = Lithotype::Sand;
    const SH: Lithotype = Lithotype::Shale;

    fn toy_cfg() -> GbdtConfig<f64> {
        GbdtConfig {
            min_leaf: 1,
            ..GbdtConfig::default()
        }
    }

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("f{i}")).collect()
    }

    #[test]
    fn fit_tree_hand_worked_split() {
        let rows = vec![vec![0.0], vec![0.0], vec![1.0], vec![1.0]];
        let grad = vec![-0.5, -0.5, 0.5, 0.5];
        let hess = vec![0.25; 4];
        let mut rng = ChaCha12Rng::seed_from_u64(0);
        let tree = fit_tree(&rows, &grad, &hess, &toy_cfg(), &mut rng).unwrap();
        match &tree {
            TreeNode::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                assert_eq!(*feature, 0);
                assert_eq!(*threshold, 0.5);
                let expect = 1.0 / 1.5;
                match (left.as_ref(), right.as_ref()) {
                    (TreeNode::Leaf { value: l }, TreeNode::Leaf { value: r }) => {
                        assert!((l - expect).abs() < 1e-12);
                        assert!((r + expect).abs() < 1e-12);
                    }
                    other => panic!("expected two leaves, got {other:?}"),
                }
            }
            other => panic!("expected a root split, got {other:?}"),
        }
    }

    #[test]
    fn fit_tree_zero_gradients_single_leaf() {
        let rows = vec![vec![0.0], vec![1.0], vec![2.0]];
        let grad = vec![0.0; 3];
        let hess = vec![0.25; 3];
        let mut rng = ChaCha12Rng::seed_from_u64(0);
        let tree = fit_tree(&rows, &grad, &hess, &toy_cfg(), &mut rng).unwrap();
        assert_eq!(tree, TreeNode::Leaf { value: 0.0 });
    }

    #[test]
    fn fit_tree_constant_feature_single_leaf() {
        let rows = vec![vec![3.0]; 4];
        let grad = vec![-0.5, 0.5, 0.5, 0.5];
        let hess = vec![0.25; 4];
        let mut rng = ChaCha12Rng::seed_from_u64(0);
        let tree = fit_tree(&rows, &grad, &hess, &toy_cfg(), &mut rng).unwrap();
        let expect = -1.0 / 2.0; // -G / (H + 1) over the full set
        match tree {
            TreeNode::Leaf { value } => assert!((value - expect).abs() < 1e-12),
            other => panic!("expected a leaf, got {other:?}"),
        }
    }

    #[test]
    fn fit_tree_empty_input_errors() {
        let mut rng = ChaCha12Rng::seed_from_u64(0);
        let rows: Vec<Vec<f64>> = vec![];
        assert!(fit_tree(&rows, &[], &[], &toy_cfg(), &mut rng).is_err());
    }

    #[test]
    fn fit_tree_respects_max_depth() {
        let rows: Vec<Vec<f64>> = (0..64).map(|i| vec![i as f64]).collect();
        let grad: Vec<f64> = (0..64).map(|i| if i % 2 == 0 { -0.5 } else { 0.5 }).collect();
        let hess = vec![0.25; 64];
        let cfg = GbdtConfig {
            max_depth: 2,
            ..toy_cfg()
        };
        let mut rng = ChaCha12Rng::seed_from_u64(0);
        let tree = fit_tree(&rows, &grad, &hess, &cfg, &mut rng).unwrap();
        assert!(tree.depth() <= 2);
    }

    fn separable() -> (Vec<Vec<f64>>, Vec<Lithotype>) {
        let rows = vec![vec![2.0], vec![3.0], vec![-2.0], vec![-3.0]];
        let labels = vec![SH, SH, S, S];
        (rows, labels)
    }

    #[test]
    fn train_loss_falls_on_separable_toy() {
        let (rows, labels) = separable();
        let cfg = GbdtConfig {
            n_trees: 50,
            ..toy_cfg()
        };
        let model = train_gbdt(&rows, &labels, &names(1), &cfg).unwrap();
        assert!(model.train_loss[49] < model.train_loss[0]);
    }

    #[test]
    fn base_score_is_class_log_odds() {
        let rows = vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0]];
        let labels = vec![SH, S, S, S];
        let cfg = GbdtConfig {
            n_trees: 1,
            ..toy_cfg()
        };
        let model = train_gbdt(&rows, &labels, &names(1), &cfg).unwrap();
        assert!((model.base_score - (0.25f64 / 0.75).ln()).abs() < 1e-12);
        assert!((model.base_score + 1.0986).abs() < 1e-4);
    }

    #[test]
    fn config_rejects_zero_trees() {
        let cfg = GbdtConfig::<f64> {
            n_trees: 0,
            ..GbdtConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn single_class_training_errors() {
        let rows = vec![vec![0.0], vec![1.0]];
        let labels = vec![S, S];
        assert!(train_gbdt(&rows, &labels, &names(1), &toy_cfg()).is_err());
    }

    #[test]
    fn predict_empty_ensemble_is_constant_base() {
        let model = GbdtModel {
            base_score: 0.4_f64,
            learning_rate: 0.05,
            feature_names: names(2),
            trees: vec![],
            train_loss: vec![],
        };
        let probs = predict_proba(&model, &[vec![0.0, 1.0], vec![5.0, -3.0]]).unwrap();
        let expect = sigmoid(0.4);
        assert!(probs.iter().all(|&p| (p - expect).abs() < 1e-15));
    }

    #[test]
    fn predict_separable_ranks_classes() {
        let (rows, labels) = separable();
        let cfg = GbdtConfig {
            n_trees: 20,
            ..toy_cfg()
        };
        let model = train_gbdt(&rows, &labels, &names(1), &cfg).unwrap();
        let probs = predict_proba(&model, &rows).unwrap();
        let min_pos = probs[0].min(probs[1]);
        let max_neg = probs[2].max(probs[3]);
        assert!(min_pos > max_neg);
    }

    #[test]
    fn single_stump_composes_exactly() {
        let (rows, labels) = separable();
        let cfg = GbdtConfig {
            n_trees: 1,
            ..toy_cfg()
        };
        let model = train_gbdt(&rows, &labels, &names(1), &cfg).unwrap();
        let leaf = |row: &Vec<f64>| model.trees[0].predict_row(row);
        let probs = predict_proba(&model, &rows).unwrap();
        for (row, p) in rows.iter().zip(&probs) {
            let by_hand = sigmoid(model.base_score + model.learning_rate * leaf(row));
            assert_eq!(*p, by_hand);
        }
    }

    #[test]
    fn predict_dimension_mismatch_errors() {
        let (rows, labels) = separable();
        let model = train_gbdt(&rows, &labels, &names(1), &toy_cfg()).unwrap();
        assert!(matches!(
            predict_proba(&model, &[vec![0.0, 1.0]]),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn training_is_bit_reproducible() {
        let rows: Vec<Vec<f64>> = (0..80)
            .map(|i| vec![(i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()])
            .collect();
        let labels: Vec<Lithotype> = (0..80).map(|i| if i % 3 == 0 { SH } else { S }).collect();
        let cfg = GbdtConfig {
            n_trees: 10,
            subsample_rows: 0.7,
            subsample_features: 0.5,
            min_leaf: 2,
            seed: 99,
            ..GbdtConfig::default()
        };
        let a = train_gbdt(&rows, &labels, &names(2), &cfg).unwrap();
        let b = train_gbdt(&rows, &labels, &names(2), &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn save_load_round_trip_predicts_identically() {
        let (rows, labels) = separable();
        let cfg = GbdtConfig {
            n_trees: 12,
            ..toy_cfg()
        };
        let model = train_gbdt(&rows, &labels, &names(1), &cfg).unwrap();
        let loaded = load_model::<f64>(&save_model(&model)).unwrap();
        let test_rows: Vec<Vec<f64>> = (0..1000)
            .map(|i| vec![((i as f64) * 0.173).sin() * 4.0])
            .collect();
        assert_eq!(
            predict_proba(&model, &test_rows).unwrap(),
            predict_proba(&loaded, &test_rows).unwrap()
        );
    }

    #[test]
    fn load_truncated_document_errors() {
        let (rows, labels) = separable();
        let model = train_gbdt(&rows, &labels, &names(1), &toy_cfg()).unwrap();
        let doc = save_model(&model);
        let truncated = &doc[..doc.len() / 2];
        assert!(matches!(
            load_model::<f64>(truncated),
            Err(Error::ModelLoad(_))
        ));
    }

    #[test]
    fn load_unknown_version_errors() {
        let (rows, labels) = separable();
        let model = train_gbdt(&rows, &labels, &names(1), &toy_cfg()).unwrap();
        let doc = save_model(&model).replace(MODEL_FORMAT_VERSION, "v999");
        match load_model::<f64>(&doc) {
            Err(Error::ModelLoad(msg)) => assert!(msg.contains("v999")),
            other => panic!("expected version error, got {other:?}"),
        }
    }
}
