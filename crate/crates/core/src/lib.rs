//! Dynamic-programming decision trees.
//!
//! Depth-limited tree induction is solved as a finite-horizon Markov decision
//! process over subsets of the training data. A split generator proposes a
//! handful of candidate splits per state (for example the nodes of a small
//! greedy tree grown on that state), and backward induction picks the
//! combination that minimises the regularized training loss
//! `misclassification + alpha * expected_splits`.
//!
//! ```
//! use dpdt::{dataset, fit_dpdt, fit_greedy, DpdtConfig, GreedyConfig};
//!
//! let data = dataset::generate_xor(2_000, 7).unwrap();
//! let view = data.view();
//! let greedy = fit_greedy(&view, &GreedyConfig::with_depth(2));
//! let dp = fit_dpdt(&view, &DpdtConfig::cart_call(vec![2, 2], 0.0)).unwrap();
//! assert!(dp.tree.regularized_loss(&view, 0.0) <= greedy.regularized_loss(&view, 0.0));
//! ```

// `!(x > 0.0)` is deliberate throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod boosting;
pub mod dataset;
mod error;
pub mod greedy;
pub mod solver;
pub mod splitgen;
pub mod tree;

pub use boosting::{fit_adaboost, Ensemble, WeakLearner};
pub use dataset::{Dataset, SampleView};
pub use error::{Error, Result};
pub use greedy::{best_split, fit_greedy, fit_greedy_counted, GreedyConfig, Impurity};
pub use solver::{
    fit_dpdt, fit_dpdt_counted, solve_state, DpdtConfig, DpdtFit, StateValue, TieBreak,
};
pub use splitgen::{generate, GeneratorKind, GeneratorSpec, OpsCounter, OpsCounts};
pub use tree::{FitConfig, Model, Split, Tree};
