//! Multiclass AdaBoost (SAMME) over depth-limited trees.

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, SampleView};
use crate::error::{Error, Result};
use crate::greedy::{fit_greedy, GreedyConfig};
use crate::solver::{fit_dpdt, DpdtConfig};
use crate::tree::Tree;

/// Weighted errors are floored here, capping a perfect learner's stage
/// weight at `ln(1e12) + ln(K - 1)` (times the learning rate).
pub const MIN_WEIGHTED_ERROR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algo", rename_all = "snake_case")]
pub enum WeakLearner {
    Dpdt(DpdtConfig),
    #[serde(rename = "cart")]
    Greedy(GreedyConfig),
}

impl WeakLearner {
    pub fn fit(&self, view: &SampleView<'_>) -> Result<Tree> {
        match self {
            WeakLearner::Dpdt(c) => Ok(fit_dpdt(view, c)?.tree),
            WeakLearner::Greedy(c) => {
                c.validate()?;
                Ok(fit_greedy(view, c))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Member {
    pub beta: f64,
    pub tree: Tree,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    pub members: Vec<Member>,
    pub k: usize,
}

impl Ensemble {
    /// Class with the largest total stage weight among member votes; lowest
    /// index on ties.
    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        let mut scores = vec![0.0; self.k];
        for m in &self.members {
            let k = m.tree.predict(x)?;
            if k < self.k {
                scores[k] += m.beta;
            }
        }
        Ok(argmax(&scores))
    }

    pub fn predict_row(&self, data: &Dataset, row: usize) -> usize {
        let mut scores = vec![0.0; self.k];
        for m in &self.members {
            let k = m.tree.predict_row(data, row);
            if k < self.k {
                scores[k] += m.beta;
            }
        }
        argmax(&scores)
    }

    pub fn accuracy(&self, view: &SampleView<'_>) -> f64 {
        let data = view.data();
        let right: f64 = view
            .indices()
            .iter()
            .filter(|&&i| self.predict_row(data, i) == data.label(i))
            .map(|&i| view.weight(i))
            .sum();
        right / view.mass()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("ensemble serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (k, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = k;
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    RoundsExhausted,
    /// A weak learner classified every sample correctly.
    PerfectLearner,
    /// A weak learner did no better than chance; it was discarded.
    NoImprovement,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundReport {
    pub round: usize,
    pub weighted_error: f64,
    pub beta: f64,
    pub retained: bool,
}

#[derive(Debug, Clone)]
pub struct BoostFit {
    pub ensemble: Ensemble,
    pub rounds: Vec<RoundReport>,
    pub stop: StopReason,
    /// Sample weights after the last reweighting; they sum to one.
    pub final_weights: Vec<f64>,
}

impl BoostFit {
    pub fn rounds_completed(&self) -> usize {
        self.ensemble.members.len()
    }
}

/// SAMME stage weight for weighted error `error` on `k` classes.
pub fn stage_weight(error: f64, k: usize, learning_rate: f64) -> f64 {
    let e = error.max(MIN_WEIGHTED_ERROR);
    learning_rate * (((1.0 - e) / e).ln() + ((k - 1) as f64).ln())
}

pub fn fit_adaboost(
    data: &Dataset,
    weak: &WeakLearner,
    rounds: usize,
    learning_rate: f64,
) -> Result<BoostFit> {
    let k = data.class_count();
    if k < 2 {
        return Err(Error::InvalidDataset(
            "boosting needs at least two classes".into(),
        ));
    }
    if rounds == 0 {
        return Err(Error::Config("rounds must be at least 1".into()));
    }
    if !(learning_rate > 0.0 && learning_rate <= 1.0) {
        return Err(Error::Config(format!(
            "learning rate {learning_rate} outside (0, 1]"
        )));
    }
    let n = data.n_samples();
    let chance = 1.0 - 1.0 / k as f64;
    let mut weights = vec![1.0 / n as f64; n];
    let mut members = Vec::new();
    let mut reports = Vec::new();
    let mut stop = StopReason::RoundsExhausted;

    for round in 1..=rounds {
        let view = SampleView::weighted(data, &weights)?;
        let tree = weak.fit(&view)?;
        let missed: Vec<bool> = (0..n)
            .map(|i| tree.predict_row(data, i) != data.label(i))
            .collect();
        let error: f64 = missed
            .iter()
            .zip(&weights)
            .filter(|(m, _)| **m)
            .map(|(_, w)| w)
            .sum::<f64>()
            / view.mass();

        if error >= chance {
            reports.push(RoundReport {
                round,
                weighted_error: error,
                beta: stage_weight(error, k, learning_rate),
                retained: false,
            });
            if members.is_empty() {
                return Err(Error::WeakLearnerTooWeak {
                    error,
                    limit: chance,
                });
            }
            stop = StopReason::NoImprovement;
            break;
        }

        let beta = stage_weight(error, k, learning_rate);
        reports.push(RoundReport {
            round,
            weighted_error: error,
            beta,
            retained: true,
        });
        members.push(Member { beta, tree });
        if error <= 0.0 {
            stop = StopReason::PerfectLearner;
            break;
        }

        let factor = beta.exp();
        for (w, &m) in weights.iter_mut().zip(&missed) {
            if m {
                *w *= factor;
            }
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        debug_assert!((weights.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    Ok(BoostFit {
        ensemble: Ensemble { members, k },
        rounds: reports,
        stop,
        final_weights: weights,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::generate_checkerboard;
    use crate::greedy::GreedyConfig;
    use crate::tree::Split;

    fn stump_learner() -> WeakLearner {
        WeakLearner::Greedy(GreedyConfig::with_depth(1))
    }

    #[test]
    fn perfect_first_round_stops() {
        let data =
            Dataset::from_columns(vec![vec![0.0, 1.0, 2.0, 3.0]], vec![0, 0, 1, 1], 2).unwrap();
        let fit = fit_adaboost(&data, &stump_learner(), 10, 1.0).unwrap();
        assert_eq!(fit.rounds_completed(), 1);
        assert_eq!(fit.stop, StopReason::PerfectLearner);
        assert_eq!(fit.ensemble.accuracy(&data.view()), 1.0);
        assert!((fit.ensemble.members[0].beta - 1e12f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn coin_flip_learner_has_zero_weight() {
        assert_eq!(stage_weight(0.5, 2, 1.0), 0.0);
        // A depth-0 learner on balanced data errs exactly half the time.
        let data = Dataset::from_columns(vec![vec![0.0, 1.0]], vec![0, 1], 2).unwrap();
        let weak = WeakLearner::Greedy(GreedyConfig::with_depth(0));
        assert!(matches!(
            fit_adaboost(&data, &weak, 5, 1.0),
            Err(Error::WeakLearnerTooWeak { .. })
        ));
    }

    #[test]
    fn samme_adds_log_k_minus_one() {
        let b = stage_weight(0.3, 3, 0.5);
        assert!((b - 0.5 * ((0.7f64 / 0.3).ln() + 2f64.ln())).abs() < 1e-15);
    }

    #[test]
    fn ensemble_votes() {
        let a = Tree::node(Split::new(0, 0.5), Tree::leaf(0), Tree::leaf(1));
        let b = Tree::leaf(1);
        let single = Ensemble {
            members: vec![Member {
                beta: 0.7,
                tree: a.clone(),
            }],
            k: 2,
        };
        for x in [0.1, 0.9] {
            assert_eq!(single.predict(&[x]).unwrap(), a.predict(&[x]).unwrap());
        }
        let tie = Ensemble {
            members: vec![
                Member {
                    beta: 1.0,
                    tree: Tree::leaf(1),
                },
                Member {
                    beta: 1.0,
                    tree: Tree::leaf(0),
                },
            ],
            k: 2,
        };
        assert_eq!(tie.predict(&[0.0]).unwrap(), 0);
        let agree = Ensemble {
            members: vec![
                Member {
                    beta: 0.1,
                    tree: b.clone(),
                },
                Member { beta: 3.0, tree: b },
            ],
            k: 3,
        };
        assert_eq!(agree.predict(&[0.0]).unwrap(), 1);
        assert!(single.predict(&[]).is_err());
    }

    #[test]
    fn separable_line_is_learned_quickly() {
        let xs: Vec<f64> = (0..40).map(f64::from).collect();
        let labels = xs.iter().map(|&x| usize::from(x >= 17.0)).collect();
        let data = Dataset::from_columns(vec![xs], labels, 2).unwrap();
        let fit = fit_adaboost(&data, &stump_learner(), 10, 1.0).unwrap();
        assert!(fit.rounds_completed() <= 10);
        assert_eq!(fit.ensemble.accuracy(&data.view()), 1.0);
    }

    #[test]
    fn weights_stay_normalised_and_members_beat_chance() {
        let data = generate_checkerboard(500, 3, 1).unwrap();
        let weak = WeakLearner::Dpdt(DpdtConfig::cart_call(vec![2, 2], 0.0));
        let fit = fit_adaboost(&data, &weak, 15, 1.0).unwrap();
        for r in fit.rounds.iter().filter(|r| r.retained) {
            assert!(r.weighted_error < 0.5);
            assert!(r.beta.is_finite());
        }
        assert!(!fit.ensemble.members.is_empty());
        assert!((fit.final_weights.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!(fit.final_weights.iter().all(|&w| w > 0.0));
    }

    #[test]
    fn json_shape() {
        let e = Ensemble {
            members: vec![Member {
                beta: 0.25,
                tree: Tree::leaf(1),
            }],
            k: 2,
        };
        let v: serde_json::Value = serde_json::from_str(&e.to_json()).unwrap();
        assert_eq!(v["k"], 2);
        assert_eq!(v["members"][0]["beta"], 0.25);
        assert_eq!(v["members"][0]["tree"]["leaf"], 1);
        assert_eq!(Ensemble::from_json(&e.to_json()).unwrap(), e);
    }
}
