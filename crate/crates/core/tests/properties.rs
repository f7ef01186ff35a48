use dpdt::dataset::random_classification;
use dpdt::tree::{tree_from_json, tree_to_json};
use dpdt::{
    fit_dpdt, fit_greedy, Dataset, DpdtConfig, FitConfig, GreedyConfig, Model, SampleView, Split,
    Tree,
};
use proptest::prelude::*;

/// Rows of `view` reaching each side of `split`.
fn sides(view: &SampleView<'_>, split: &Split) -> (Vec<usize>, Vec<usize>) {
    let column = view.data().column(split.feature);
    view.indices()
        .iter()
        .partition(|&&i| column[i] <= split.threshold)
}

/// Misclassified count plus `alpha` times the summed path lengths of `tree`
/// on `rows`, counted sample by sample.
fn cost(tree: &Tree, data: &Dataset, rows: &[usize], alpha: f64) -> f64 {
    rows.iter()
        .map(|&i| {
            let mut node = tree;
            let mut steps = 0.0;
            while let Tree::Node { split, left, right } = node {
                steps += 1.0;
                node = if split.goes_left(data.value(i, split.feature)) {
                    left
                } else {
                    right
                };
            }
            let Tree::Leaf(k) = node else { unreachable!() };
            f64::from(u8::from(*k != data.label(i))) + alpha * steps
        })
        .sum()
}

fn majority(data: &Dataset, rows: &[usize]) -> usize {
    let mut counts = vec![0usize; data.class_count()];
    rows.iter().for_each(|&i| counts[data.label(i)] += 1);
    let max = *counts.iter().max().unwrap();
    counts.iter().position(|&c| c == max).unwrap()
}

/// Bottom-up pruning of a greedy tree: a subtree survives only if it is
/// strictly cheaper than a majority leaf on the rows reaching it.
fn prune(tree: &Tree, data: &Dataset, rows: &[usize], alpha: f64) -> Tree {
    let leaf = Tree::leaf(majority(data, rows));
    let Tree::Node { split, left, right } = tree else {
        return leaf;
    };
    let view = data.view().subset(rows.to_vec()).unwrap();
    let (l, r) = sides(&view, split);
    let kept = Tree::node(
        *split,
        prune(left, data, &l, alpha),
        prune(right, data, &r, alpha),
    );
    let n = rows.len() as f64;
    if cost(&kept, data, rows, alpha) / n < cost(&leaf, data, rows, alpha) / n - 1e-12 {
        kept
    } else {
        leaf
    }
}

fn dataset() -> impl Strategy<Value = Dataset> {
    (0u64..10_000, 5usize..120, 1usize..4, 2usize..4)
        .prop_map(|(seed, n, p, k)| random_classification(n, p, k, seed).unwrap())
}

fn loss(tree: &Tree, data: &Dataset, alpha: f64) -> f64 {
    tree.regularized_loss(&data.view(), alpha)
}

fn arb_tree() -> impl Strategy<Value = Tree> {
    let leaf = (0usize..5).prop_map(Tree::leaf);
    leaf.prop_recursive(7, 128, 2, |inner| {
        let threshold = prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO;
        (0usize..6, threshold, inner.clone(), inner)
            .prop_map(|(f, t, l, r)| Tree::node(Split::new(f, t), l, r))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// With one candidate per state and leaves preferred on ties, the solver
    /// returns the greedy tree with every non-improving subtree collapsed.
    #[test]
    fn unit_budgets_give_pruned_greedy(data in dataset(), depth in 1usize..5, alpha in prop_oneof![Just(0.0), Just(0.01), Just(0.05)]) {
        let greedy = fit_greedy(&data.view(), &GreedyConfig::with_depth(depth));
        let rows: Vec<usize> = (0..data.n_samples()).collect();
        let oracle = prune(&greedy, &data, &rows, alpha);
        let dp = fit_dpdt(&data.view(), &DpdtConfig::cart_call(vec![1; depth], alpha)).unwrap();
        prop_assert_eq!(dp.tree, oracle);
    }

    #[test]
    fn never_worse_than_greedy_or_its_pruning(data in dataset(), depth in 1usize..4, b in 1usize..5, alpha in 0.0f64..0.1) {
        let greedy = fit_greedy(&data.view(), &GreedyConfig::with_depth(depth));
        let rows: Vec<usize> = (0..data.n_samples()).collect();
        let pruned = prune(&greedy, &data, &rows, alpha);
        let dp = fit_dpdt(&data.view(), &DpdtConfig::cart_call(vec![b; depth], alpha)).unwrap();
        let l = loss(&dp.tree, &data, alpha);
        prop_assert!(l <= loss(&greedy, &data, alpha) + 1e-12);
        prop_assert!(l <= loss(&pruned, &data, alpha) + 1e-12);
        prop_assert!(dp.tree.depth() <= depth);
    }

    #[test]
    fn larger_top_b_budgets_never_hurt(data in dataset(), depth in 1usize..4, b in 1usize..4, extra in 1usize..4, at in 0usize..3, alpha in 0.0f64..0.1) {
        let small = fit_dpdt(&data.view(), &DpdtConfig::top_b(vec![b; depth], alpha)).unwrap();
        let mut budgets = vec![b; depth];
        budgets[at % depth] += extra;
        let large = fit_dpdt(&data.view(), &DpdtConfig::top_b(budgets, alpha)).unwrap();
        prop_assert!(-large.j_alpha <= -small.j_alpha + 1e-12);
    }

    #[test]
    fn exhaustive_is_never_beaten(data in dataset(), depth in 1usize..3, b in 1usize..4, alpha in 0.0f64..0.1) {
        let ex = fit_dpdt(&data.view(), &DpdtConfig::exhaustive(depth, alpha)).unwrap();
        let cart = fit_dpdt(&data.view(), &DpdtConfig::cart_call(vec![b; depth], alpha)).unwrap();
        let top = fit_dpdt(&data.view(), &DpdtConfig::top_b(vec![b; depth], alpha)).unwrap();
        prop_assert!(ex.j_alpha >= cart.j_alpha - 1e-12);
        prop_assert!(ex.j_alpha >= top.j_alpha - 1e-12);
    }

    #[test]
    fn fits_are_reproducible(data in dataset(), depth in 1usize..4, b in 1usize..4) {
        let config = DpdtConfig::cart_call(vec![b; depth], 0.0);
        let a = fit_dpdt(&data.view(), &config).unwrap();
        let c = fit_dpdt(&data.view(), &config).unwrap();
        prop_assert_eq!(a.tree, c.tree);
        prop_assert_eq!(a.ops, c.ops);
        prop_assert_eq!(a.j_alpha.to_bits(), c.j_alpha.to_bits());
    }

    #[test]
    fn recursive_and_direct_complexity_agree(tree in arb_tree(), data in dataset()) {
        let view = data.view();
        let rows: Vec<usize> = (0..data.n_samples()).collect();
        let tree = clamp_features(tree, data.n_features());
        let direct = cost(&tree, &data, &rows, 1.0) - cost(&tree, &data, &rows, 0.0);
        prop_assert!((tree.expected_splits(&view) - direct / rows.len() as f64).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn tree_json_round_trip(tree in arb_tree(), xs in prop::collection::vec(prop::collection::vec(-2e3f64..2e3, 6), 20)) {
        let back = tree_from_json(&tree_to_json(&tree)).unwrap();
        prop_assert_eq!(&back, &tree);
        for x in &xs {
            prop_assert_eq!(back.predict(x).unwrap(), tree.predict(x).unwrap());
        }
    }
}

fn clamp_features(tree: Tree, p: usize) -> Tree {
    match tree {
        Tree::Leaf(k) => Tree::Leaf(k),
        Tree::Node { split, left, right } => Tree::node(
            Split::new(split.feature % p, split.threshold),
            clamp_features(*left, p),
            clamp_features(*right, p),
        ),
    }
}

#[test]
fn model_round_trip_keeps_schema_and_predictions() {
    let data = random_classification(300, 3, 3, 11).unwrap();
    let config = DpdtConfig::cart_call(vec![4, 2, 1], 0.001);
    let tree = fit_dpdt(&data.view(), &config).unwrap().tree;
    let model = Model::new(&data, FitConfig::Dpdt(config), tree);
    let back = Model::from_json(&model.to_json()).unwrap();
    assert_eq!(back, model);
    for i in 0..data.n_samples() {
        let x = data.row(i);
        assert_eq!(back.predict(&x).unwrap(), model.predict(&x).unwrap());
    }
    assert!(back.predict(&[0.0, 0.0]).is_err());
}
