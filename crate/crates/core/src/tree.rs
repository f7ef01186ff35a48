//! Binary axis-aligned decision trees, their training metrics and the JSON
//! model document.
//!
//! Every split sends `x[feature] <= threshold` to the left child.

use std::fmt::{self, Write as _};

use serde::de::{self, Deserializer};
use serde::ser::{SerializeMap, Serializer};
use serde::{Deserialize, Serialize};

use crate::boosting::WeakLearner;
use crate::dataset::{Dataset, SampleView};
use crate::error::{Error, Result};
use crate::greedy::GreedyConfig;
use crate::solver::DpdtConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Split {
    pub feature: usize,
    pub threshold: f64,
}

impl Split {
    pub fn new(feature: usize, threshold: f64) -> Self {
        Split { feature, threshold }
    }

    #[inline]
    pub fn goes_left(&self, value: f64) -> bool {
        value <= self.threshold
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Tree {
    Leaf(usize),
    Node {
        split: Split,
        left: Box<Tree>,
        right: Box<Tree>,
    },
}

impl Tree {
    pub fn leaf(class: usize) -> Self {
        Tree::Leaf(class)
    }

    pub fn node(split: Split, left: Tree, right: Tree) -> Self {
        Tree::Node {
            split,
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, Tree::Leaf(_))
    }

    pub fn depth(&self) -> usize {
        match self {
            Tree::Leaf(_) => 0,
            Tree::Node { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn internal_nodes(&self) -> usize {
        match self {
            Tree::Leaf(_) => 0,
            Tree::Node { left, right, .. } => 1 + left.internal_nodes() + right.internal_nodes(),
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            Tree::Leaf(_) => 1,
            Tree::Node { left, right, .. } => left.leaf_count() + right.leaf_count(),
        }
    }

    /// Splits in pre-order.
    pub fn splits(&self) -> Vec<Split> {
        let mut out = Vec::new();
        self.collect_splits(&mut out);
        out
    }

    fn collect_splits(&self, out: &mut Vec<Split>) {
        if let Tree::Node { split, left, right } = self {
            out.push(*split);
            left.collect_splits(out);
            right.collect_splits(out);
        }
    }

    /// Class assigned to `x`. Fails if a split tests a feature `x` lacks.
    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        let mut node = self;
        loop {
            match node {
                Tree::Leaf(k) => return Ok(*k),
                Tree::Node { split, left, right } => {
                    let v = *x.get(split.feature).ok_or(Error::DimensionMismatch {
                        feature: split.feature,
                        dim: x.len(),
                    })?;
                    node = if split.goes_left(v) { left } else { right };
                }
            }
        }
    }

    /// Prediction for row `row` of `data`. Panics on a feature index outside
    /// the dataset.
    pub fn predict_row(&self, data: &Dataset, row: usize) -> usize {
        let mut node = self;
        loop {
            match node {
                Tree::Leaf(k) => return *k,
                Tree::Node { split, left, right } => {
                    node = if split.goes_left(data.value(row, split.feature)) {
                        left
                    } else {
                        right
                    };
                }
            }
        }
    }

    /// Number of splits applied to row `row` on its way to a leaf.
    pub fn path_length(&self, data: &Dataset, row: usize) -> usize {
        let mut node = self;
        let mut steps = 0;
        while let Tree::Node { split, left, right } = node {
            steps += 1;
            node = if split.goes_left(data.value(row, split.feature)) {
                left
            } else {
                right
            };
        }
        steps
    }

    /// Weighted fraction of the view's samples the tree misclassifies.
    pub fn misclassification(&self, view: &SampleView<'_>) -> f64 {
        let data = view.data();
        let wrong: f64 = view
            .indices()
            .iter()
            .filter(|&&i| self.predict_row(data, i) != data.label(i))
            .map(|&i| view.weight(i))
            .sum();
        wrong / view.mass()
    }

    pub fn accuracy(&self, view: &SampleView<'_>) -> f64 {
        1.0 - self.misclassification(view)
    }

    /// Expected number of splits performed on the view, computed by the
    /// recursion `C(leaf) = 0`, `C(T) = 1 + p_l C(T_l) + p_r C(T_r)` with
    /// `p_l`, `p_r` the weight fractions routed to each child.
    pub fn expected_splits(&self, view: &SampleView<'_>) -> f64 {
        expected_splits_rec(self, view, view.indices())
    }

    /// Weighted average over samples of the number of splits on each
    /// sample's root-to-leaf path. Agrees with [`Tree::expected_splits`].
    pub fn mean_path_length(&self, view: &SampleView<'_>) -> f64 {
        let data = view.data();
        let total: f64 = view
            .indices()
            .iter()
            .map(|&i| view.weight(i) * self.path_length(data, i) as f64)
            .sum();
        total / view.mass()
    }

    /// Misclassification fraction plus `alpha` times the expected number of
    /// splits.
    pub fn regularized_loss(&self, view: &SampleView<'_>, alpha: f64) -> f64 {
        self.misclassification(view) + alpha * self.expected_splits(view)
    }

    /// Indented text rendering using `names` for features where available.
    pub fn render(&self, names: &[String]) -> String {
        let mut out = String::new();
        self.render_into(names, 0, &mut out);
        out
    }

    fn render_into(&self, names: &[String], indent: usize, out: &mut String) {
        let pad = "  ".repeat(indent);
        match self {
            Tree::Leaf(k) => {
                let _ = writeln!(out, "{pad}class {k}");
            }
            Tree::Node { split, left, right } => {
                let name = names
                    .get(split.feature)
                    .cloned()
                    .unwrap_or_else(|| format!("f{}", split.feature));
                let _ = writeln!(out, "{pad}if {name} <= {}:", split.threshold);
                left.render_into(names, indent + 1, out);
                let _ = writeln!(out, "{pad}else:");
                right.render_into(names, indent + 1, out);
            }
        }
    }
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(&[]))
    }
}

fn expected_splits_rec(tree: &Tree, view: &SampleView<'_>, indices: &[usize]) -> f64 {
    let Tree::Node { split, left, right } = tree else {
        return 0.0;
    };
    let column = view.data().column(split.feature);
    let (li, ri): (Vec<usize>, Vec<usize>) =
        indices.iter().partition(|&&i| split.goes_left(column[i]));
    let ml: f64 = li.iter().map(|&i| view.weight(i)).sum();
    let mr: f64 = ri.iter().map(|&i| view.weight(i)).sum();
    let mass = ml + mr;
    if !(mass > 0.0) {
        return 1.0;
    }
    let p_left = ml / mass;
    let p_right = 1.0 - p_left;
    let c_left = if ml > 0.0 {
        expected_splits_rec(left, view, &li)
    } else {
        0.0
    };
    let c_right = if mr > 0.0 {
        expected_splits_rec(right, view, &ri)
    } else {
        0.0
    };
    1.0 + p_left * c_left + p_right * c_right
}

impl Serialize for Tree {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Tree::Leaf(k) => {
                let mut map = serializer.serialize_map(Some(1))?;
                map.serialize_entry("leaf", k)?;
                map.end()
            }
            Tree::Node { split, left, right } => {
                let mut map = serializer.serialize_map(Some(3))?;
                map.serialize_entry("split", split)?;
                map.serialize_entry("left", left)?;
                map.serialize_entry("right", right)?;
                map.end()
            }
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNode {
    leaf: Option<usize>,
    split: Option<Split>,
    left: Option<Box<RawNode>>,
    right: Option<Box<RawNode>>,
}

impl RawNode {
    fn into_tree(self, path: &str) -> std::result::Result<Tree, String> {
        match (self.leaf, self.split, self.left, self.right) {
            (Some(k), None, None, None) => Ok(Tree::Leaf(k)),
            (None, Some(split), Some(l), Some(r)) => {
                if !split.threshold.is_finite() {
                    return Err(format!("{path}: threshold must be finite"));
                }
                let left = l.into_tree(&format!("{path}.left"))?;
                let right = r.into_tree(&format!("{path}.right"))?;
                Ok(Tree::node(split, left, right))
            }
            (Some(_), ..) => Err(format!(
                "{path}: a leaf cannot also carry a split or children"
            )),
            (None, Some(_), l, r) => Err(format!(
                "{path}: split node needs both children (left {}, right {})",
                if l.is_some() { "present" } else { "missing" },
                if r.is_some() { "present" } else { "missing" },
            )),
            (None, None, ..) => Err(format!("{path}: node is neither a leaf nor a split")),
        }
    }
}

impl<'de> Deserialize<'de> for Tree {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        RawNode::deserialize(deserializer)?
            .into_tree("root")
            .map_err(de::Error::custom)
    }
}

/// How a model was fitted, embedded in the model document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algo", rename_all = "snake_case")]
pub enum FitConfig {
    Cart(GreedyConfig),
    Dpdt(DpdtConfig),
}

impl From<FitConfig> for WeakLearner {
    fn from(c: FitConfig) -> Self {
        match c {
            FitConfig::Cart(g) => WeakLearner::Greedy(g),
            FitConfig::Dpdt(d) => WeakLearner::Dpdt(d),
        }
    }
}

/// A trained tree with the schema it was trained on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Model {
    pub p: usize,
    pub k: usize,
    pub features: Vec<String>,
    pub config: FitConfig,
    pub root: Tree,
}

impl Model {
    pub fn new(data: &Dataset, config: FitConfig, root: Tree) -> Self {
        Model {
            p: data.n_features(),
            k: data.class_count(),
            features: data.feature_names().to_vec(),
            config,
            root,
        }
    }

    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        if x.len() != self.p {
            return Err(Error::SchemaMismatch {
                found: x.len(),
                expected: self.p,
            });
        }
        self.root.predict(x)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: Model = serde_json::from_str(text)?;
        if model.features.len() != model.p {
            return Err(Error::Config(format!(
                "model lists {} feature names for p = {}",
                model.features.len(),
                model.p
            )));
        }
        Ok(model)
    }
}

pub fn tree_to_json(tree: &Tree) -> String {
    serde_json::to_string(tree).expect("tree serialization cannot fail")
}

pub fn tree_from_json(text: &str) -> Result<Tree> {
    Ok(serde_json::from_str(text)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stump() -> Tree {
        Tree::node(Split::new(0, 0.5), Tree::leaf(0), Tree::leaf(1))
    }

    fn xor_tree() -> Tree {
        Tree::node(
            Split::new(1, 0.5),
            Tree::node(Split::new(0, 0.5), Tree::leaf(0), Tree::leaf(1)),
            Tree::node(Split::new(0, 0.5), Tree::leaf(1), Tree::leaf(0)),
        )
    }

    #[test]
    fn predict_basics() {
        assert_eq!(Tree::leaf(1).predict(&[3.0]).unwrap(), 1);
        assert_eq!(stump().predict(&[0.5]).unwrap(), 0);
        assert_eq!(stump().predict(&[0.6]).unwrap(), 1);
        assert_eq!(xor_tree().predict(&[0.25, 0.75]).unwrap(), 1);
        assert_eq!(xor_tree().predict(&[0.75, 0.75]).unwrap(), 0);
        assert!(matches!(
            xor_tree().predict(&[0.25]),
            Err(Error::DimensionMismatch { feature: 1, dim: 1 })
        ));
    }

    fn grid4() -> Dataset {
        // One point per XOR quadrant.
        Dataset::from_rows(
            &[
                vec![0.25, 0.25],
                vec![0.25, 0.75],
                vec![0.75, 0.25],
                vec![0.75, 0.75],
            ],
            vec![0, 1, 1, 0],
            2,
        )
        .unwrap()
    }

    #[test]
    fn expected_splits_examples() {
        let data = grid4();
        let view = data.view();
        assert_eq!(Tree::leaf(0).expected_splits(&view), 0.0);
        assert_eq!(stump().expected_splits(&view), 1.0);
        assert_eq!(xor_tree().expected_splits(&view), 2.0);
        assert_eq!(xor_tree().mean_path_length(&view), 2.0);
    }

    #[test]
    fn expected_splits_with_empty_child() {
        let data = grid4();
        let view = data.view();
        // Everything goes left at the root; the right subtree gets p = 0.
        let t = Tree::node(Split::new(0, 9.0), stump(), stump());
        assert_eq!(t.expected_splits(&view), 2.0);
    }

    #[test]
    fn regularized_loss_examples() {
        let data = grid4();
        let view = data.view();
        assert_eq!(xor_tree().regularized_loss(&view, 0.0), 0.0);
        assert!((xor_tree().regularized_loss(&view, 0.01) - 0.02).abs() < 1e-15);

        let d = Dataset::from_columns(vec![vec![0.0; 5]], vec![0, 0, 0, 1, 1], 2).unwrap();
        assert!((Tree::leaf(0).regularized_loss(&d.view(), 0.0) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn json_leaf_and_stump() {
        assert_eq!(tree_to_json(&Tree::leaf(0)), r#"{"leaf":0}"#);
        assert_eq!(tree_from_json(r#"{"leaf":0}"#).unwrap(), Tree::leaf(0));

        let t = Tree::node(Split::new(2, 0.1 + 0.2), Tree::leaf(0), Tree::leaf(1));
        let text = tree_to_json(&t);
        assert!(text.contains("0.30000000000000004"), "{text}");
        let back = tree_from_json(&text).unwrap();
        assert_eq!(back, t);
        if let Tree::Node { split, .. } = back {
            assert_eq!(split.threshold.to_bits(), (0.1f64 + 0.2).to_bits());
        }
    }

    #[test]
    fn json_structural_errors() {
        let unary = r#"{"split":{"feature":0,"threshold":1.0},"left":{"leaf":0}}"#;
        let err = tree_from_json(unary).unwrap_err().to_string();
        assert!(err.contains("both children"), "{err}");

        let nested = r#"{"split":{"feature":0,"threshold":1.0},"left":{"leaf":0},
            "right":{"split":{"feature":1,"threshold":2.0},"right":{"leaf":1}}}"#;
        let err = tree_from_json(nested).unwrap_err().to_string();
        assert!(err.contains("root.right"), "{err}");

        assert!(tree_from_json(r#"{"leaf":0,"left":{"leaf":1}}"#).is_err());
        assert!(tree_from_json(r#"{}"#).is_err());
        assert!(tree_from_json(r#"{"leaf":-1}"#).is_err());
        let err = tree_from_json("{\"leaf\":\n 0,").unwrap_err().to_string();
        assert!(err.contains("line 2"), "{err}");
    }

    #[test]
    fn model_document_keys() {
        let data = grid4();
        let model = Model::new(
            &data,
            FitConfig::Cart(GreedyConfig::with_depth(2)),
            xor_tree(),
        );
        let value: serde_json::Value = serde_json::from_str(&model.to_json()).unwrap();
        let keys: Vec<&str> = value
            .as_object()
            .unwrap()
            .keys()
            .map(String::as_str)
            .collect();
        for key in ["p", "k", "features", "config", "root"] {
            assert!(keys.contains(&key), "missing {key}");
        }
        assert_eq!(Model::from_json(&model.to_json()).unwrap(), model);
        assert!(matches!(
            model.predict(&[0.1]),
            Err(Error::SchemaMismatch { .. })
        ));
        assert_eq!(model.predict(&[0.1, 0.9]).unwrap(), 1);
    }
}
