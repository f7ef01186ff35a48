//! Greedy CART-style induction.
//!
//! Candidate thresholds are the observed feature values of the node's samples
//! (so decision boundaries pass through data points). Impurity, class votes
//! and child proportions all use sample weights.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::SampleView;
use crate::splitgen::OpsCounter;
use crate::tree::{Split, Tree};

/// Gains closer than this are treated as equal, so ties resolve by index
/// rather than by rounding noise.
pub const GAIN_TIE_TOLERANCE: f64 = 1e-12;

/// Below this many (sample, feature) cells the split scan stays sequential.
const PARALLEL_SCAN_CELLS: usize = 50_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Impurity {
    #[default]
    Gini,
    Entropy,
}

impl Impurity {
    /// Impurity of a node whose class weights are `class_weights` (total `mass`).
    pub fn of(self, class_weights: &[f64], mass: f64) -> f64 {
        if !(mass > 0.0) {
            return 0.0;
        }
        match self {
            Impurity::Gini => {
                1.0 - class_weights
                    .iter()
                    .map(|&w| {
                        let q = w / mass;
                        q * q
                    })
                    .sum::<f64>()
            }
            Impurity::Entropy => -class_weights
                .iter()
                .filter(|&&w| w > 0.0)
                .map(|&w| {
                    let q = w / mass;
                    q * q.log2()
                })
                .sum::<f64>(),
        }
    }
}

impl std::str::FromStr for Impurity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gini" => Ok(Impurity::Gini),
            "entropy" => Ok(Impurity::Entropy),
            other => Err(format!(
                "unknown impurity {other:?} (expected gini or entropy)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreedyConfig {
    pub max_depth: usize,
    /// Cap on internal nodes; when set, growth is best-first.
    pub max_internal_nodes: Option<usize>,
    pub impurity: Impurity,
    pub min_samples_leaf: usize,
    pub min_impurity_decrease: f64,
}

impl GreedyConfig {
    pub fn with_depth(max_depth: usize) -> Self {
        GreedyConfig {
            max_depth,
            max_internal_nodes: None,
            impurity: Impurity::Gini,
            min_samples_leaf: 1,
            min_impurity_decrease: 0.0,
        }
    }

    pub fn budget(mut self, max_internal_nodes: usize) -> Self {
        self.max_internal_nodes = Some(max_internal_nodes);
        self
    }

    pub fn impurity(mut self, impurity: Impurity) -> Self {
        self.impurity = impurity;
        self
    }

    pub fn validate(&self) -> crate::Result<()> {
        if self.max_internal_nodes == Some(0) {
            return Err(crate::Error::Config(
                "node budget must be at least 1".into(),
            ));
        }
        if self.min_samples_leaf == 0 {
            return Err(crate::Error::Config(
                "min_samples_leaf must be at least 1".into(),
            ));
        }
        if !(self.min_impurity_decrease >= 0.0) {
            return Err(crate::Error::Config(
                "min_impurity_decrease must be >= 0".into(),
            ));
        }
        Ok(())
    }

    fn rules(&self) -> SplitRules {
        SplitRules {
            impurity: self.impurity,
            min_samples_leaf: self.min_samples_leaf,
            min_impurity_decrease: self.min_impurity_decrease,
        }
    }
}

/// Admissibility rules applied to every candidate split.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SplitRules {
    pub impurity: Impurity,
    pub min_samples_leaf: usize,
    pub min_impurity_decrease: f64,
}

impl SplitRules {
    pub fn plain(impurity: Impurity) -> Self {
        SplitRules {
            impurity,
            min_samples_leaf: 1,
            min_impurity_decrease: 0.0,
        }
    }
}

/// Calls `visit(threshold, gain)` for every admissible split on `feature`,
/// thresholds ascending. `gain` is the impurity decrease
/// `I(parent) - p_l I(left) - p_r I(right)`, clamped at zero.
pub(crate) fn scan_feature(
    view: &SampleView<'_>,
    feature: usize,
    rules: &SplitRules,
    totals: &[f64],
    mut visit: impl FnMut(f64, f64),
) {
    let data = view.data();
    let column = data.column(feature);
    let mut rows: Vec<(f64, usize, f64)> = view
        .indices()
        .iter()
        .map(|&i| (column[i], data.label(i), view.weight(i)))
        .collect();
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mass = view.mass();
    let parent = rules.impurity.of(totals, mass);
    let n = rows.len();
    let mut left = vec![0.0; totals.len()];
    let mut right = vec![0.0; totals.len()];
    let mut left_mass = 0.0;
    for j in 0..n.saturating_sub(1) {
        let (value, label, w) = rows[j];
        left[label] += w;
        left_mass += w;
        if rows[j + 1].0 <= value {
            continue;
        }
        let left_count = j + 1;
        if left_count < rules.min_samples_leaf || n - left_count < rules.min_samples_leaf {
            continue;
        }
        for k in 0..totals.len() {
            right[k] = (totals[k] - left[k]).max(0.0);
        }
        let right_mass = mass - left_mass;
        if !(left_mass > 0.0) || !(right_mass > 0.0) {
            continue;
        }
        let gain = parent
            - (left_mass / mass) * rules.impurity.of(&left, left_mass)
            - (right_mass / mass) * rules.impurity.of(&right, right_mass);
        let gain = gain.max(0.0);
        if gain + GAIN_TIE_TOLERANCE < rules.min_impurity_decrease {
            continue;
        }
        visit(value, gain);
    }
}

/// Every admissible split of the view with its gain, ordered by feature
/// then threshold. Empty for pure views.
pub(crate) fn all_splits(view: &SampleView<'_>, rules: &SplitRules) -> Vec<(Split, f64)> {
    let totals = view.class_weights();
    if totals.iter().filter(|&&w| w > 0.0).count() <= 1 {
        return Vec::new();
    }
    let p = view.data().n_features();
    let per_feature = |f: usize| {
        let mut out = Vec::new();
        scan_feature(view, f, rules, &totals, |t, g| {
            out.push((Split::new(f, t), g))
        });
        out
    };
    if view.len() * p >= PARALLEL_SCAN_CELLS {
        (0..p)
            .into_par_iter()
            .map(per_feature)
            .collect::<Vec<_>>()
            .concat()
    } else {
        (0..p).flat_map(per_feature).collect()
    }
}

pub(crate) fn best_split_with(view: &SampleView<'_>, rules: &SplitRules) -> Option<(Split, f64)> {
    let totals = view.class_weights();
    if totals.iter().filter(|&&w| w > 0.0).count() <= 1 {
        return None;
    }
    let p = view.data().n_features();
    let per_feature = |f: usize| {
        let mut best: Option<(Split, f64)> = None;
        scan_feature(view, f, rules, &totals, |t, g| {
            if best.is_none_or(|(_, b)| g > b + GAIN_TIE_TOLERANCE) {
                best = Some((Split::new(f, t), g));
            }
        });
        best
    };
    let bests: Vec<Option<(Split, f64)>> = if view.len() * p >= PARALLEL_SCAN_CELLS {
        (0..p).into_par_iter().map(per_feature).collect()
    } else {
        (0..p).map(per_feature).collect()
    };
    // Reduced in feature order whatever the scan's execution order was.
    bests
        .into_iter()
        .flatten()
        .fold(None, |acc, cand| match acc {
            Some((_, g)) if cand.1 <= g + GAIN_TIE_TOLERANCE => acc,
            _ => Some(cand),
        })
}

/// The split with the largest impurity decrease, lowest feature then lowest
/// threshold on ties. `None` when the view is pure or cannot be split.
pub fn best_split(view: &SampleView<'_>, impurity: Impurity) -> Option<(Split, f64)> {
    best_split_with(view, &SplitRules::plain(impurity))
}

/// Result of a greedy fit, with the splits in the order they were created.
#[derive(Debug, Clone)]
pub(crate) struct GreedyFit {
    pub tree: Tree,
    pub discovery: Vec<Split>,
    pub nodes_evaluated: usize,
}

pub fn fit_greedy(view: &SampleView<'_>, config: &GreedyConfig) -> Tree {
    grow(view, config).tree
}

/// [`fit_greedy`], charging one operation per internal node constructed to
/// `counter` and one state per node evaluated.
pub fn fit_greedy_counted(
    view: &SampleView<'_>,
    config: &GreedyConfig,
    counter: &OpsCounter,
) -> Tree {
    let fit = grow(view, config);
    counter.add_candidates(fit.discovery.len() as u64);
    counter.add_states(fit.nodes_evaluated as u64);
    fit.tree
}

pub(crate) fn grow(view: &SampleView<'_>, config: &GreedyConfig) -> GreedyFit {
    let rules = config.rules();
    match config.max_internal_nodes {
        None => {
            let mut discovery = Vec::new();
            let mut evaluated = 0;
            let tree = grow_recursive(
                view,
                0,
                config.max_depth,
                &rules,
                &mut discovery,
                &mut evaluated,
            );
            GreedyFit {
                tree,
                discovery,
                nodes_evaluated: evaluated,
            }
        }
        Some(budget) => grow_best_first(view, config.max_depth, budget, &rules),
    }
}

fn grow_recursive(
    view: &SampleView<'_>,
    depth: usize,
    max_depth: usize,
    rules: &SplitRules,
    discovery: &mut Vec<Split>,
    evaluated: &mut usize,
) -> Tree {
    let leaf = Tree::leaf(view.majority().0);
    if depth >= max_depth {
        return leaf;
    }
    *evaluated += 1;
    let Some((split, _)) = best_split_with(view, rules) else {
        return leaf;
    };
    let Ok((l, r, _)) = view.partition(&split) else {
        return leaf;
    };
    discovery.push(split);
    let left = grow_recursive(&l, depth + 1, max_depth, rules, discovery, evaluated);
    let right = grow_recursive(&r, depth + 1, max_depth, rules, discovery, evaluated);
    Tree::node(split, left, right)
}

struct ArenaNode {
    class: usize,
    split: Option<(Split, usize, usize)>,
}

struct FrontierLeaf<'a> {
    node: usize,
    view: SampleView<'a>,
    depth: usize,
    best: Option<(Split, f64)>,
}

/// Best-first growth: repeatedly expand the frontier leaf whose best split
/// has the largest mass-weighted gain, earliest-inserted leaf on ties.
fn grow_best_first(
    view: &SampleView<'_>,
    max_depth: usize,
    budget: usize,
    rules: &SplitRules,
) -> GreedyFit {
    let root_mass = view.mass();
    let mut arena = vec![ArenaNode {
        class: view.majority().0,
        split: None,
    }];
    let mut evaluated = 0;
    let mut evaluate = |view: &SampleView<'_>, depth: usize| {
        if depth >= max_depth {
            None
        } else {
            evaluated += 1;
            best_split_with(view, rules)
        }
    };
    let mut frontier = vec![FrontierLeaf {
        node: 0,
        best: evaluate(view, 0),
        view: view.clone(),
        depth: 0,
    }];
    let mut discovery = Vec::new();

    while discovery.len() < budget {
        let mut pick: Option<(usize, f64)> = None;
        for (pos, leaf) in frontier.iter().enumerate() {
            if let Some((_, gain)) = leaf.best {
                let priority = gain * leaf.view.mass() / root_mass;
                if pick.is_none_or(|(_, p)| priority > p + GAIN_TIE_TOLERANCE) {
                    pick = Some((pos, priority));
                }
            }
        }
        let Some((pos, _)) = pick else { break };
        let leaf = frontier.remove(pos);
        let (split, _) = leaf.best.expect("picked leaf has a split");
        let Ok((l, r, _)) = leaf.view.partition(&split) else {
            continue;
        };
        discovery.push(split);
        let left_id = arena.len();
        arena.push(ArenaNode {
            class: l.majority().0,
            split: None,
        });
        arena.push(ArenaNode {
            class: r.majority().0,
            split: None,
        });
        arena[leaf.node].split = Some((split, left_id, left_id + 1));
        for (id, child) in [(left_id, l), (left_id + 1, r)] {
            frontier.push(FrontierLeaf {
                node: id,
                best: evaluate(&child, leaf.depth + 1),
                view: child,
                depth: leaf.depth + 1,
            });
        }
    }

    fn build(arena: &[ArenaNode], id: usize) -> Tree {
        match arena[id].split {
            None => Tree::leaf(arena[id].class),
            Some((split, l, r)) => Tree::node(split, build(arena, l), build(arena, r)),
        }
    }
    GreedyFit {
        tree: build(&arena, 0),
        discovery,
        nodes_evaluated: evaluated,
    }
}
