//! Candidate-split generators: given a state (a weighted subset of the data
//! and its depth) they return the small set of splits the solver may try.

use std::collections::HashSet;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::dataset::SampleView;
use crate::error::{Error, Result};
use crate::greedy::{self, GreedyConfig, Impurity, SplitRules, GAIN_TIE_TOLERANCE};
use crate::tree::Split;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    /// Every split with two non-empty children.
    Exhaustive,
    /// The `B` splits with the highest impurity decrease.
    TopB,
    /// Internal nodes of a budgeted greedy tree grown on the state.
    CartCall,
}

impl std::str::FromStr for GeneratorKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "exhaustive" => Ok(GeneratorKind::Exhaustive),
            "top_b" => Ok(GeneratorKind::TopB),
            "cart_call" => Ok(GeneratorKind::CartCall),
            other => Err(format!(
                "unknown generator {other:?} (expected exhaustive, top_b or cart_call)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    /// Per-depth budgets `B_1..B_D`; the root state uses the first entry.
    /// Ignored by the exhaustive generator.
    pub budgets: Vec<usize>,
    pub impurity: Impurity,
}

impl GeneratorSpec {
    pub fn exhaustive() -> Self {
        GeneratorSpec {
            kind: GeneratorKind::Exhaustive,
            budgets: Vec::new(),
            impurity: Impurity::Gini,
        }
    }

    pub fn top_b(budgets: Vec<usize>) -> Self {
        GeneratorSpec {
            kind: GeneratorKind::TopB,
            budgets,
            impurity: Impurity::Gini,
        }
    }

    pub fn cart_call(budgets: Vec<usize>) -> Self {
        GeneratorSpec {
            kind: GeneratorKind::CartCall,
            budgets,
            impurity: Impurity::Gini,
        }
    }

    pub fn with_impurity(mut self, impurity: Impurity) -> Self {
        self.impurity = impurity;
        self
    }

    pub fn validate(&self, max_depth: usize) -> Result<()> {
        if self.kind == GeneratorKind::Exhaustive {
            return Ok(());
        }
        if self.budgets.len() != max_depth {
            return Err(Error::Config(format!(
                "{} budgets given for max depth {max_depth}",
                self.budgets.len()
            )));
        }
        if self.budgets.contains(&0) {
            return Err(Error::Config("every budget must be at least 1".into()));
        }
        Ok(())
    }
}

/// Counts of the work done during a fit. Safe to share across threads.
#[derive(Debug, Default)]
pub struct OpsCounter {
    candidates: AtomicU64,
    states: AtomicU64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct OpsCounts {
    pub candidate_splits_generated: u64,
    pub states_expanded: u64,
}

impl OpsCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_candidates(&self, n: u64) {
        self.candidates.fetch_add(n, Ordering::Relaxed);
    }

    pub fn add_states(&self, n: u64) {
        self.states.fetch_add(n, Ordering::Relaxed);
    }

    pub fn snapshot(&self) -> OpsCounts {
        OpsCounts {
            candidate_splits_generated: self.candidates.load(Ordering::Relaxed),
            states_expanded: self.states.load(Ordering::Relaxed),
        }
    }
}

/// Candidate splits for the state `(view, depth)` of a horizon-`max_depth`
/// problem. Pure states get no candidates. Every returned split leaves both
/// children non-empty.
pub fn generate(
    spec: &GeneratorSpec,
    view: &SampleView<'_>,
    depth: usize,
    max_depth: usize,
    counter: &OpsCounter,
) -> Vec<Split> {
    debug_assert!(depth < max_depth);
    counter.add_states(1);
    if view.is_pure() {
        return Vec::new();
    }
    match spec.kind {
        GeneratorKind::Exhaustive => {
            let splits = exhaustive(view);
            counter.add_candidates(splits.len() as u64);
            splits
        }
        GeneratorKind::TopB => {
            let mut scored = greedy::all_splits(view, &SplitRules::plain(spec.impurity));
            counter.add_candidates(scored.len() as u64);
            // Gains are bucketed at the tie tolerance so rounding noise
            // cannot reorder ties. The sort is stable: tied splits keep
            // (feature, threshold) order and larger budgets return supersets.
            scored
                .sort_by_key(|&(_, g)| std::cmp::Reverse((g / GAIN_TIE_TOLERANCE).round() as i64));
            scored.truncate(spec.budgets[depth]);
            scored.into_iter().map(|(s, _)| s).collect()
        }
        GeneratorKind::CartCall => {
            let config = GreedyConfig::with_depth(max_depth - depth)
                .budget(spec.budgets[depth])
                .impurity(spec.impurity);
            let fit = greedy::grow(view, &config);
            counter.add_candidates(fit.discovery.len() as u64);
            dedup_by_partition(view, fit.discovery)
        }
    }
}

/// One split per distinct observed value of each feature, excluding the
/// largest (it would leave the right child empty).
fn exhaustive(view: &SampleView<'_>) -> Vec<Split> {
    let data = view.data();
    let mut out = Vec::new();
    for f in 0..data.n_features() {
        let column = data.column(f);
        let mut values: Vec<f64> = view.indices().iter().map(|&i| column[i]).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        values.pop();
        out.extend(values.into_iter().map(|t| Split::new(f, t)));
    }
    out
}

/// Keeps the first split for each distinct left-child index set.
fn dedup_by_partition(view: &SampleView<'_>, splits: Vec<Split>) -> Vec<Split> {
    let data = view.data();
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    splits
        .into_iter()
        .filter(|s| {
            let column = data.column(s.feature);
            let left: Vec<usize> = view
                .indices()
                .iter()
                .copied()
                .filter(|&i| s.goes_left(column[i]))
                .collect();
            !left.is_empty() && left.len() < view.len() && seen.insert(left)
        })
        .collect()
}
