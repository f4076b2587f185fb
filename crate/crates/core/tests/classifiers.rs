use imbal_core::classifiers::ensemble::bootstrap_tree;
use imbal_core::classifiers::tree::TreeParams;
use imbal_core::classifiers::{train, ClassifierKind, ClassifierSpec};
use imbal_core::dataset::{generate_synthetic, stratified_folds, SyntheticSpec};
use imbal_core::metrics::{confusion, score};
use imbal_core::{Dataset, Label};
use proptest::prelude::*;

fn synthetic(n: usize, d: usize, sep: f64, seed: u64) -> Dataset {
    generate_synthetic(&SyntheticSpec {
        n_total: n,
        majority_fraction: 0.8,
        n_features: d,
        class_separation: sep,
        seed,
    })
    .unwrap()
}

#[test]
fn single_member_ensembles_reduce_to_one_tree() {
    let ds = synthetic(150, 4, 1.5, 2);
    let seed = 77;
    for (kind, params) in [
        (
            ClassifierKind::RandomForest,
            TreeParams {
                max_depth: None,
                min_leaf: 1,
                max_features: Some(4),
            },
        ),
        (
            ClassifierKind::Bagging,
            TreeParams {
                max_depth: Some(5),
                min_leaf: 2,
                max_features: None,
            },
        ),
    ] {
        let key = if kind == ClassifierKind::RandomForest {
            "ntree"
        } else {
            "mfinal"
        };
        let mut spec = ClassifierSpec::new(kind).with_param(key, 1.0).with_seed(seed);
        if kind == ClassifierKind::RandomForest {
            spec = spec.with_param("mtry", 4.0);
        }
        let model = train(&spec, &ds).unwrap();
        let tree = bootstrap_tree(&ds, params, seed, 0);
        for x in ds.rows() {
            assert_eq!(model.predict_row(x).unwrap(), tree.predict(x));
        }
    }
}

#[test]
fn bagging_of_identical_trees_matches_the_tree() {
    // every bootstrap of a separable stump problem yields the same decisions
    // away from the boundary
    let rows: Vec<Vec<f64>> = (0..60).map(|i| vec![if i < 30 { -10.0 } else { 10.0 }]).collect();
    let labels = (0..60)
        .map(|i| if i < 30 { Label::Negative } else { Label::Positive })
        .collect();
    let ds = Dataset::from_rows(rows, labels).unwrap();
    let bag = train(&ClassifierSpec::new(ClassifierKind::Bagging).with_seed(4), &ds).unwrap();
    let tree = train(&ClassifierSpec::new(ClassifierKind::Tree), &ds).unwrap();
    assert_eq!(bag.predict(&ds).unwrap(), tree.predict(&ds).unwrap());
}

#[test]
fn forest_separates_well_separated_classes() {
    let ds = generate_synthetic(&SyntheticSpec {
        n_total: 600,
        majority_fraction: 0.6,
        n_features: 20,
        class_separation: 6.0,
        seed: 21,
    })
    .unwrap();
    let plan = stratified_folds(&ds, 2, 1).unwrap();
    let train_set = ds.subset(&plan.train_indices(0));
    let test_set = ds.subset(&plan.test_indices(0));
    let spec = ClassifierSpec::new(ClassifierKind::RandomForest)
        .with_param("ntree", 200.0)
        .with_seed(3);
    let model = train(&spec, &train_set).unwrap();
    let pred = model.predict(&test_set).unwrap();
    let report = score(&confusion(&pred, test_set.labels()).unwrap()).unwrap();
    assert!(report.gmean > 0.9, "held-out gmean {}", report.gmean);
}

#[test]
fn default_hyperparameters_are_accepted() {
    for kind in ClassifierKind::ALL {
        ClassifierSpec::new(kind).validate().unwrap();
    }
}

fn quick(kind: ClassifierKind) -> ClassifierSpec {
    match kind {
        ClassifierKind::Bagging | ClassifierKind::AdaBoost => ClassifierSpec::new(kind).with_param("mfinal", 5.0),
        ClassifierKind::RandomForest => ClassifierSpec::new(kind).with_param("ntree", 5.0),
        ClassifierKind::Knn => ClassifierSpec::new(kind).with_param("k", 3.0),
        _ => ClassifierSpec::new(kind),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn predictions_on_training_data_never_fail(seed in 0u64..1000, kind in 0usize..6) {
        let ds = synthetic(40, 3, 1.0, seed);
        let kind = ClassifierKind::ALL[kind];
        let model = train(&quick(kind).with_seed(seed), &ds).unwrap();
        let pred = model.predict(&ds).unwrap();
        prop_assert_eq!(pred.len(), ds.len());
        let again = train(&quick(kind).with_seed(seed), &ds).unwrap().predict(&ds).unwrap();
        prop_assert_eq!(pred, again);
    }

    #[test]
    fn gnb_posteriors_sum_to_one(seed in 0u64..1000, x in prop::collection::vec(-20f64..20.0, 3)) {
        let ds = synthetic(40, 3, 1.0, seed);
        let model = train(&ClassifierSpec::new(ClassifierKind::Gnb), &ds).unwrap();
        let p = model.score_row(&x).unwrap();
        prop_assert!((0.0..=1.0).contains(&p));
    }
}
