use std::path::Path;

use imbal_core::classifiers::train;
use imbal_core::dataset::{stratified_folds, write_csv};
use imbal_core::experiment::runner::{classifier_seed, fold_seed, prepare_fold, write_outputs};
use imbal_core::experiment::tables::emit_tables;
use imbal_core::experiment::{report, run_experiment, ExperimentConfig, Strategy};
use imbal_core::metrics::{aggregate_folds, confusion, score, Metric, MetricReport};

const SYNTHETIC: &str =
    "synthetic = { n_total = 300, majority_fraction = 0.85, n_features = 4, separation = 1.5, seed = 3 }";

fn config(strategies: &str, classifiers: &str, extra: &str) -> ExperimentConfig {
    let text = format!(
        r#"
[experiment]
master_seed = 11
output_dir = "out"
strategies = [{strategies}]
{extra}

[[dataset]]
name = "syn"
{SYNTHETIC}

{classifiers}

[pso]
swarm_size = 8
max_iterations = 5
"#
    );
    ExperimentConfig::parse(&text, Path::new("/nonexistent")).unwrap()
}

const THREE: &str = r#"
[[classifier]]
kind = "knn"
k = 5

[[classifier]]
kind = "gnb"

[[classifier]]
kind = "tree"
"#;

#[test]
fn grid_has_one_report_per_cell_and_fold() {
    let text = format!(
        r#"
[experiment]
master_seed = 5
output_dir = "out"
strategies = ["ori", "ru"]

[[dataset]]
name = "big"
synthetic = {{ n_total = 2000, majority_fraction = 0.9, n_features = 5, separation = 2.0, seed = 1 }}
{THREE}
"#
    );
    let cfg = ExperimentConfig::parse(&text, Path::new("")).unwrap();
    let result = run_experiment(&cfg).unwrap();
    assert_eq!(result.fold_records.len(), 60);
    assert_eq!(result.means.len(), 6);
    for m in &result.means {
        let folds: Vec<MetricReport> = result
            .folds_of(&m.dataset, &m.classifier, m.strategy)
            .into_iter()
            .copied()
            .collect();
        assert_eq!(folds.len(), 10);
        assert_eq!(aggregate_folds(&folds).unwrap(), m.report);
    }
}

#[test]
fn ori_matches_direct_cross_validation() {
    let cfg = config("\"ori\", \"smote\"", THREE, "");
    let result = run_experiment(&cfg).unwrap();
    let ds = cfg.datasets[0].load().unwrap();
    let plan = stratified_folds(&ds, 10, fold_seed(11, "syn")).unwrap();
    for spec in &cfg.classifiers {
        let mut direct = Vec::new();
        for f in 0..10 {
            let fold = prepare_fold(&ds, &plan, f).unwrap();
            let spec = spec.clone().with_seed(classifier_seed(11, "syn", f, &spec.name));
            let model = train(&spec, &fold.train).unwrap();
            let pred = model.predict(&fold.test).unwrap();
            direct.push(score(&confusion(&pred, fold.test.labels()).unwrap()).unwrap());
        }
        let ran: Vec<MetricReport> = result
            .folds_of("syn", &spec.name, Strategy::Ori)
            .into_iter()
            .copied()
            .collect();
        assert_eq!(ran, direct, "{}", spec.name);
        let table = emit_tables(&result, Metric::GMean).unwrap();
        let row = table
            .row_labels()
            .iter()
            .position(|l| l == &format!("syn/{}", spec.name))
            .unwrap();
        assert_eq!(table.values()[row][0], aggregate_folds(&direct).unwrap().gmean);
    }
}

#[test]
fn test_rows_never_feed_training() {
    let cfg = config("\"ori\", \"ru\", \"ro\", \"smote\", \"pso\", \"integrated\"", THREE, "");
    let result = run_experiment(&cfg).unwrap();
    assert_eq!(result.lineage.len(), 60);
    for l in &result.lineage {
        assert!(!l.test_rows.is_empty());
        assert!(l.test_rows.iter().all(|r| l.train_sources.binary_search(r).is_err()));
        if matches!(l.strategy, Strategy::Smote | Strategy::Integrated) {
            assert!(l.synthetic_rows > 0);
        }
    }
    let table = emit_tables(&result, Metric::Auc).unwrap();
    let names: Vec<&str> = table.column_names().iter().map(String::as_str).collect();
    assert_eq!(names, ["Ori", "RU", "RO", "SMOTE", "PSO", "Integrated"]);
    assert_eq!((table.n_rows(), table.n_cols()), (3, 6));
}

#[test]
fn column_order_follows_config_and_single_cell_works() {
    let knn = "[[classifier]]\nkind = \"knn\"\nk = 3\n";
    let result = run_experiment(&config("\"ru\", \"ori\"", knn, "")).unwrap();
    let names = emit_tables(&result, Metric::FMeasure).unwrap().column_names().to_vec();
    assert_eq!(names, ["RU", "Ori"]);
    let single = emit_tables(&run_experiment(&config("\"ori\"", knn, "")).unwrap(), Metric::GMean).unwrap();
    assert_eq!((single.n_rows(), single.n_cols()), (1, 1));
}

#[test]
fn outputs_are_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mut bytes = Vec::new();
    for threads in [1, 4] {
        let cfg = config(
            "\"ori\", \"smote\", \"integrated\"",
            THREE,
            &format!("threads = {threads}"),
        );
        let out = dir.path().join(format!("t{threads}"));
        write_outputs(&run_experiment(&cfg).unwrap(), &out).unwrap();
        let files: Vec<Vec<u8>> = [
            "results_folds.csv",
            "results_mean.csv",
            "table_fm.csv",
            "table_gmean.csv",
            "table_auc.csv",
        ]
        .iter()
        .map(|f| std::fs::read(out.join(f)).unwrap())
        .collect();
        bytes.push(files);
    }
    assert_eq!(bytes[0], bytes[1]);
}

#[test]
fn outputs_and_report_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("\"ori\", \"ro\"", THREE, "");
    let result = run_experiment(&cfg).unwrap();
    write_outputs(&result, dir.path()).unwrap();
    let folds = std::fs::read_to_string(dir.path().join("results_folds.csv")).unwrap();
    assert_eq!(folds.lines().count(), 1 + 3 * 2 * 10);
    assert!(folds.starts_with("dataset,classifier,strategy,fold,"));
    assert!(folds.lines().nth(1).unwrap().starts_with("syn,knn,ori,1,"));
    let mean = std::fs::read_to_string(dir.path().join("results_mean.csv")).unwrap();
    assert_eq!(mean.lines().count(), 1 + 6);
    assert!(mean.lines().nth(1).unwrap().starts_with("syn,knn,ori,mean,"));
    let md = std::fs::read_to_string(dir.path().join("table_gmean.md")).unwrap();
    assert!(md.contains("| syn/gnb |"));
    let prov = std::fs::read_to_string(dir.path().join("provenance.txt")).unwrap();
    assert!(prov.contains("master_seed = 11"));

    let out = dir.path().join("summary.md");
    report::write_report(dir.path(), &out).unwrap();
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.contains("improvement over Ori"));
    assert!(text.contains("mean ranks"));
    let csv = std::fs::read_to_string(dir.path().join("summary_improvement.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 3 * 3);
}

#[test]
fn csv_datasets_and_error_coordinates() {
    let dir = tempfile::tempdir().unwrap();
    let ds = config("\"ori\"", THREE, "").datasets[0].load().unwrap();
    write_csv(&ds, &dir.path().join("d.csv")).unwrap();
    let header = std::fs::read_to_string(dir.path().join("d.csv")).unwrap();
    let label_col = header
        .lines()
        .next()
        .unwrap()
        .split(',')
        .next_back()
        .unwrap()
        .to_string();
    let text = format!(
        r#"
[experiment]
master_seed = 1
output_dir = "out"
strategies = ["ori", "ru"]

[[dataset]]
name = "file"
csv = "d.csv"
label_column = "{label_col}"
positive = "malicious"

[[classifier]]
kind = "knn"
k = 200
"#
    );
    let cfg = ExperimentConfig::parse(&text, dir.path()).unwrap();
    let err = run_experiment(&cfg).unwrap_err().to_string();
    assert!(
        err.contains("dataset file") && err.contains("strategy ru") && err.contains("classifier knn"),
        "{err}"
    );
    assert!(err.contains("fold"), "{err}");
}
