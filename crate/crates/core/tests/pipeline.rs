use procbench::benchmarks::{build_model, ModelId};
use procbench::eventlog::{build_vocabulary, prefixes};
use procbench::harness::{self, read_folds_csv, ExperimentConfig};
use procbench::petrinet::playout;
use procbench::predictor::{predict_next, simulate_log, train};
use procbench::split::{self, validation_split};
use procbench::{PlayoutConfig, PredictorConfig, TrainedPredictor};

#[test]
fn checkpoint_round_trip_preserves_behaviour() {
    let net = build_model(ModelId::new(6).unwrap());
    let log = playout(&net, &PlayoutConfig::new(200, 1000, 3)).unwrap();
    let vocab = build_vocabulary(&log);
    let samples = prefixes(&log, &vocab, 10).unwrap();
    let (tr, val) = validation_split(&samples, 0.2, 1).unwrap();
    let cfg = PredictorConfig {
        hidden_size: 16,
        max_epochs: 3,
        ..PredictorConfig::default()
    };
    let p = train(&cfg, &tr, &val, &vocab).unwrap();

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ck.json");
    p.save(&path).unwrap();
    let q = TrainedPredictor::load(&path).unwrap();

    let prefix = log.traces()[0].activities()[..2].to_vec();
    assert_eq!(
        predict_next(&p, &prefix).unwrap(),
        predict_next(&q, &prefix).unwrap()
    );
    assert_eq!(
        simulate_log(&p, 50, 100, 9).unwrap().0,
        simulate_log(&q, 50, 100, 9).unwrap().0
    );
}

#[test]
fn experiment_rows_match_a_manual_fold() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::from_toml(&format!(
        "model = 2\nn_traces = 800\noutput_dir = {:?}\nmarkov_order = 2\n\
         split = {{ mode = \"lovocv-k-folds\", k = 2 }}\n",
        dir.path().join("exp")
    ))
    .unwrap();
    let out = harness::run_experiment(&cfg).unwrap();
    assert!(out.errors.is_empty());
    let rows = read_folds_csv(&out.output_dir.join("folds.csv")).unwrap();
    assert_eq!(rows, out.folds);

    // Recompute fold 0 from the same play-out with the library pieces.
    let prepared = harness::prepare(&cfg).unwrap();
    let part = split::apply(&prepared.log, &prepared.folds[0]).unwrap();
    assert_eq!(rows[0].size_tr, part.train.len());
    assert_eq!(rows[0].size_te, part.test.len());
    assert_eq!(
        rows[0].test_variants,
        harness::describe_variants(&prepared.folds[0].test_variants)
    );
}
