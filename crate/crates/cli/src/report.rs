use std::time::Instant;

use anyhow::Result;
use dpdt::{
    fit_dpdt_counted, fit_greedy_counted, Dataset, FitConfig, GeneratorKind, OpsCounter, OpsCounts,
    Tree,
};
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub algorithm: String,
    pub config: FitConfig,
    pub n_train: usize,
    pub train_accuracy: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub test_accuracy: Option<f64>,
    pub alpha: f64,
    pub regularized_loss: f64,
    pub expected_splits: f64,
    pub internal_nodes: usize,
    pub depth: usize,
    pub ops: OpsCounts,
    pub seconds: f64,
    pub seed: Option<u64>,
}

/// Short label for a configuration, e.g. `cart`, `dpdt[8,1,1]` or
/// `dpdt-exhaustive`.
pub fn algorithm_label(config: &FitConfig) -> String {
    match config {
        FitConfig::Cart(_) => "cart".into(),
        FitConfig::Dpdt(c) => match c.generator.kind {
            GeneratorKind::Exhaustive => "dpdt-exhaustive".into(),
            GeneratorKind::TopB => format!("dpdt-top_b{:?}", c.generator.budgets).replace(' ', ""),
            GeneratorKind::CartCall => format!("dpdt{:?}", c.generator.budgets).replace(' ', ""),
        },
    }
}

/// Fits `config` on `train` and measures it. `alpha` is the penalty the
/// reported loss uses; for DPDT it is the configured one.
pub fn fit_and_report(
    config: &FitConfig,
    alpha: f64,
    train: &Dataset,
    test: Option<&Dataset>,
    seed: Option<u64>,
) -> Result<(Tree, RunReport)> {
    let view = train.view();
    let counter = OpsCounter::new();
    let start = Instant::now();
    let tree = match config {
        FitConfig::Cart(c) => fit_greedy_counted(&view, c, &counter),
        FitConfig::Dpdt(c) => fit_dpdt_counted(&view, c, &counter)?.tree,
    };
    let seconds = start.elapsed().as_secs_f64();
    let report = RunReport {
        algorithm: algorithm_label(config),
        config: config.clone(),
        n_train: train.n_samples(),
        train_accuracy: tree.accuracy(&view),
        test_accuracy: test.map(|t| tree.accuracy(&t.view())),
        alpha,
        regularized_loss: tree.regularized_loss(&view, alpha),
        expected_splits: tree.expected_splits(&view),
        internal_nodes: tree.internal_nodes(),
        depth: tree.depth(),
        ops: counter.snapshot(),
        seconds,
        seed,
    };
    Ok((tree, report))
}

/// Fixed-width text table of reports, one row each.
pub fn table(reports: &[RunReport]) -> String {
    let mut rows = vec![[
        "algorithm".to_string(),
        "train_acc".into(),
        "test_acc".into(),
        "loss".into(),
        "exp_splits".into(),
        "nodes".into(),
        "ops".into(),
        "states".into(),
        "seconds".into(),
    ]];
    for r in reports {
        rows.push([
            r.algorithm.clone(),
            format!("{:.4}", r.train_accuracy),
            r.test_accuracy
                .map_or_else(|| "-".into(), |a| format!("{a:.4}")),
            format!("{:.6}", r.regularized_loss),
            format!("{:.3}", r.expected_splits),
            r.internal_nodes.to_string(),
            r.ops.candidate_splits_generated.to_string(),
            r.ops.states_expanded.to_string(),
            format!("{:.3}", r.seconds),
        ]);
    }
    let widths: Vec<usize> = (0..rows[0].len())
        .map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in &rows {
        let cells: Vec<String> = row
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(c, (cell, &w))| {
                if c == 0 {
                    format!("{cell:<w$}")
                } else {
                    format!("{cell:>w$}")
                }
            })
            .collect();
        out.push_str(cells.join("  ").trim_end());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use dpdt::{DpdtConfig, GreedyConfig};

    #[test]
    fn labels() {
        assert_eq!(
            algorithm_label(&FitConfig::Cart(GreedyConfig::with_depth(2))),
            "cart"
        );
        assert_eq!(
            algorithm_label(&FitConfig::Dpdt(DpdtConfig::cart_call(vec![8, 1, 1], 0.0))),
            "dpdt[8,1,1]"
        );
        assert_eq!(
            algorithm_label(&FitConfig::Dpdt(DpdtConfig::exhaustive(2, 0.0))),
            "dpdt-exhaustive"
        );
    }

    #[test]
    fn table_aligns_columns() {
        let data = dpdt::dataset::xor_lattice(4).unwrap();
        let config = FitConfig::Cart(GreedyConfig::with_depth(1));
        let (_, r) = fit_and_report(&config, 0.0, &data, None, None).unwrap();
        let text = table(&[r.clone(), r]);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[1], lines[2]);
        assert!(lines[0].starts_with("algorithm"));
    }
}
