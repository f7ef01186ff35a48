//! Dynamic-programming tree induction.
//!
//! Tree induction is a finite-horizon MDP whose states are `(subset, depth)`
//! pairs. A class-assignment action ends the episode with reward minus the
//! misclassified weight fraction; a split action costs `alpha` and moves to
//! the left or right child state with probability equal to its weight share.
//! Depth `max_depth` only admits class assignments.
//!
//! The MDP is never materialised: [`solve_state`] builds it depth first and
//! propagates optimal values back up (backward induction), keeping only the
//! best action's subtree at each state, so memory stays linear in the data.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{majority_of, SampleView};
use crate::error::{Error, Result};
use crate::splitgen::{generate, GeneratorKind, GeneratorSpec, OpsCounter, OpsCounts};
use crate::tree::{Split, Tree};

/// Values closer than this count as ties.
pub const VALUE_TIE_TOLERANCE: f64 = 1e-12;

/// States with at least this many samples solve their candidates in parallel.
const PARALLEL_MIN_SAMPLES: usize = 2_000;

/// How ties between equally valued actions are resolved. Among tied splits
/// the lowest (feature, threshold) always wins, and among tied classes the
/// lowest index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieBreak {
    /// A leaf beats any split of equal value.
    #[default]
    PreferLeaf,
    /// A split beats a leaf of equal value. With unit budgets this makes the
    /// result coincide node for node with the greedy tree.
    PreferSplit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DpdtConfig {
    pub max_depth: usize,
    pub alpha: f64,
    pub generator: GeneratorSpec,
    #[serde(default)]
    pub tie_break: TieBreak,
}

impl DpdtConfig {
    /// Calls-to-CART generator with the given per-depth budgets; the depth is
    /// the number of budgets.
    pub fn cart_call(budgets: Vec<usize>, alpha: f64) -> Self {
        DpdtConfig {
            max_depth: budgets.len(),
            alpha,
            generator: GeneratorSpec::cart_call(budgets),
            tie_break: TieBreak::default(),
        }
    }

    pub fn top_b(budgets: Vec<usize>, alpha: f64) -> Self {
        DpdtConfig {
            max_depth: budgets.len(),
            alpha,
            generator: GeneratorSpec::top_b(budgets),
            tie_break: TieBreak::default(),
        }
    }

    pub fn exhaustive(max_depth: usize, alpha: f64) -> Self {
        DpdtConfig {
            max_depth,
            alpha,
            generator: GeneratorSpec::exhaustive(),
            tie_break: TieBreak::default(),
        }
    }

    pub fn tie_break(mut self, tie_break: TieBreak) -> Self {
        self.tie_break = tie_break;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::Config(format!(
                "alpha {} outside [0, 1]",
                self.alpha
            )));
        }
        self.generator.validate(self.max_depth)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Action {
    Leaf(usize),
    Split {
        split: Split,
        p_left: f64,
        left: Box<StateValue>,
        right: Box<StateValue>,
    },
}

/// Optimal value of a state and the action attaining it.
#[derive(Debug, Clone, PartialEq)]
pub struct StateValue {
    pub value: f64,
    pub action: Action,
}

impl StateValue {
    /// Follows the optimal actions from this state down, turning class
    /// assignments into leaves and splits into internal nodes.
    pub fn extract(&self) -> Tree {
        match &self.action {
            Action::Leaf(k) => Tree::leaf(*k),
            Action::Split {
                split, left, right, ..
            } => Tree::node(*split, left.extract(), right.extract()),
        }
    }
}

/// Optimal value of the state `(view, depth)` under `config`.
pub fn solve_state(
    view: &SampleView<'_>,
    depth: usize,
    config: &DpdtConfig,
    counter: &OpsCounter,
) -> StateValue {
    let mass = view.mass();
    let (class, class_mass) = view.majority();
    let leaf = StateValue {
        value: -((mass - class_mass) / mass),
        action: Action::Leaf(class),
    };
    if depth >= config.max_depth {
        return leaf;
    }

    if config.generator.kind == GeneratorKind::Exhaustive && depth + 1 == config.max_depth {
        counter.add_states(1);
        if view.is_pure() {
            return leaf;
        }
        let (best, evaluated) = best_last_split(view, config.alpha);
        counter.add_candidates(evaluated);
        return choose(leaf, best, config.tie_break);
    }

    let mut candidates = generate(&config.generator, view, depth, config.max_depth, counter);
    if candidates.is_empty() {
        return leaf;
    }
    candidates.sort_by(|a, b| {
        a.feature
            .cmp(&b.feature)
            .then(a.threshold.total_cmp(&b.threshold))
    });

    let evaluate = |split: &Split| -> Option<StateValue> {
        let (l, r, p_left) = view.partition(split).ok()?;
        let left = solve_state(&l, depth + 1, config, counter);
        let right = solve_state(&r, depth + 1, config, counter);
        let p_right = 1.0 - p_left;
        Some(StateValue {
            value: -config.alpha + p_left * left.value + p_right * right.value,
            action: Action::Split {
                split: *split,
                p_left,
                left: Box::new(left),
                right: Box::new(right),
            },
        })
    };

    let mut best_split: Option<StateValue> = None;
    let mut consider = |q: StateValue| {
        if best_split
            .as_ref()
            .is_none_or(|b| q.value > b.value + VALUE_TIE_TOLERANCE)
        {
            best_split = Some(q);
        }
    };
    if candidates.len() > 1 && view.len() >= PARALLEL_MIN_SAMPLES {
        let results: Vec<Option<StateValue>> = candidates.par_iter().map(evaluate).collect();
        results.into_iter().flatten().for_each(&mut consider);
    } else {
        // Sequential path keeps only the incumbent's subtree alive.
        candidates
            .iter()
            .filter_map(evaluate)
            .for_each(&mut consider);
    }

    choose(leaf, best_split, config.tie_break)
}

fn choose(leaf: StateValue, split: Option<StateValue>, tie_break: TieBreak) -> StateValue {
    match (split, tie_break) {
        (None, _) => leaf,
        (Some(s), TieBreak::PreferLeaf) if s.value > leaf.value + VALUE_TIE_TOLERANCE => s,
        (Some(s), TieBreak::PreferSplit) if s.value + VALUE_TIE_TOLERANCE >= leaf.value => s,
        _ => leaf,
    }
}

fn forced_leaf(class_weights: &[f64], mass: f64) -> StateValue {
    let (class, class_mass) = majority_of(class_weights);
    StateValue {
        value: -((mass - class_mass) / mass),
        action: Action::Leaf(class),
    }
}

/// Best exhaustive split of a state one step before the horizon, where both
/// children are forced leaves. A sorted sweep per feature scores every
/// threshold in the order the generic path would visit them, avoiding one
/// partition per candidate. Also returns the number of thresholds scored.
fn best_last_split(view: &SampleView<'_>, alpha: f64) -> (Option<StateValue>, u64) {
    let data = view.data();
    let totals = view.class_weights();
    let mass = view.mass();
    let mut best: Option<StateValue> = None;
    let mut evaluated = 0;
    for feature in 0..data.n_features() {
        let column = data.column(feature);
        let mut rows: Vec<(f64, usize, f64)> = view
            .indices()
            .iter()
            .map(|&i| (column[i], data.label(i), view.weight(i)))
            .collect();
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut left = vec![0.0; totals.len()];
        let mut mass_left = 0.0;
        for j in 0..rows.len().saturating_sub(1) {
            let (threshold, label, w) = rows[j];
            left[label] += w;
            mass_left += w;
            if rows[j + 1].0 <= threshold {
                continue;
            }
            evaluated += 1;
            let mass_right = mass - mass_left;
            if !(mass_left > 0.0) || !(mass_right > 0.0) {
                continue;
            }
            let right: Vec<f64> = totals.iter().zip(&left).map(|(t, l)| t - l).collect();
            let l = forced_leaf(&left, mass_left);
            let r = forced_leaf(&right, mass_right);
            let p_left = mass_left / (mass_left + mass_right);
            let value = -alpha + p_left * l.value + (1.0 - p_left) * r.value;
            if best
                .as_ref()
                .is_none_or(|b| value > b.value + VALUE_TIE_TOLERANCE)
            {
                best = Some(StateValue {
                    value,
                    action: Action::Split {
                        split: Split::new(feature, threshold),
                        p_left,
                        left: Box::new(l),
                        right: Box::new(r),
                    },
                });
            }
        }
    }
    (best, evaluated)
}

#[derive(Debug, Clone)]
pub struct DpdtFit {
    pub tree: Tree,
    pub ops: OpsCounts,
    /// Optimal return from the root state; equals minus the tree's
    /// regularized loss on the training view.
    pub j_alpha: f64,
}

pub fn fit_dpdt(view: &SampleView<'_>, config: &DpdtConfig) -> Result<DpdtFit> {
    let counter = OpsCounter::new();
    let fit = fit_dpdt_counted(view, config, &counter)?;
    Ok(fit)
}

/// [`fit_dpdt`] accumulating into an existing counter.
pub fn fit_dpdt_counted(
    view: &SampleView<'_>,
    config: &DpdtConfig,
    counter: &OpsCounter,
) -> Result<DpdtFit> {
    config.validate()?;
    if view.is_empty() {
        return Err(Error::Empty);
    }
    let root = solve_state(view, 0, config, counter);
    let tree = root.extract();
    debug_assert!(
        (root.value + tree.regularized_loss(view, config.alpha)).abs() < 1e-9,
        "return {} disagrees with loss {}",
        root.value,
        tree.regularized_loss(view, config.alpha)
    );
    Ok(DpdtFit {
        tree,
        ops: counter.snapshot(),
        j_alpha: root.value,
    })
}
