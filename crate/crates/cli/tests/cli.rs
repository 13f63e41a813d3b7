use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn procbench(args: &[&str], cwd: &Path) -> Output {
    let out = Command::new(env!("CARGO_BIN_EXE_procbench"))
        .args(args)
        .current_dir(cwd)
        .env_remove("PROCBENCH_OUTPUT_ROOT")
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "procbench {args:?} failed\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn step_by_step_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    procbench(
        &[
            "playout", "--model", "1", "--traces", "600", "--seed", "2", "-o", "m1.log",
        ],
        d,
    );
    assert_eq!(
        fs::read_to_string(d.join("m1.log"))
            .unwrap()
            .lines()
            .count(),
        600
    );

    procbench(
        &[
            "split", "--log", "m1.log", "--k", "2", "--seed", "4", "-o", "folds",
        ],
        d,
    );
    let manifest = fs::read_to_string(d.join("folds/splits.tsv")).unwrap();
    assert_eq!(manifest.lines().count(), 3);
    let fold = d.join("folds/fold_000");
    let train_lines = fs::read_to_string(fold.join("train.log"))
        .unwrap()
        .lines()
        .count();
    let test_lines = fs::read_to_string(fold.join("test.log"))
        .unwrap()
        .lines()
        .count();
    assert_eq!(train_lines + test_lines, 600);

    procbench(
        &[
            "train",
            "--train",
            "folds/fold_000/train.log",
            "--markov",
            "full",
            "-o",
            "ck.json",
        ],
        d,
    );
    procbench(
        &[
            "simulate",
            "--checkpoint",
            "ck.json",
            "--traces",
            "600",
            "--max-len",
            "12",
            "-o",
            "sim.log",
        ],
        d,
    );
    assert!(d.join("sim.log.report.txt").exists());

    let eval = procbench(
        &[
            "evaluate",
            "--sim",
            "sim.log",
            "--train",
            "folds/fold_000/train.log",
            "--test",
            "folds/fold_000/test.log",
            "--json",
        ],
        d,
    );
    let r: serde_json::Value = serde_json::from_str(&stdout(&eval)).unwrap();
    assert_eq!(r["generalisation"], 0.0);
    assert_eq!(r["size_sim"], 600);
}

#[test]
fn train_network_from_toml() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    procbench(
        &["playout", "--model", "6", "--traces", "200", "-o", "m6.log"],
        d,
    );
    fs::write(
        d.join("p.toml"),
        "hidden_size = 4\nmax_epochs = 2\nbatch_size = 32\n",
    )
    .unwrap();
    procbench(
        &[
            "train", "--train", "m6.log", "--config", "p.toml", "-o", "ck.json",
        ],
        d,
    );
    let ck: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d.join("ck.json")).unwrap()).unwrap();
    assert_eq!(ck["model"]["kind"], "recurrent");
}

#[test]
fn run_writes_tables_under_output_root() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(
        d.join("exp.toml"),
        "model = 4\nn_traces = 500\noutput_dir = \"exp\"\nmarkov_order = 1\n\
         split = { mode = \"lovocv-k-folds\", k = 3 }\n",
    )
    .unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_procbench"))
        .args(["run", "exp.toml", "--quiet"])
        .current_dir(d)
        .env("PROCBENCH_OUTPUT_ROOT", d.join("root"))
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(stdout(&out).contains("lovocv-k3"));
    let root = d.join("root/exp");
    for f in [
        "folds.csv",
        "aggregate.csv",
        "table.md",
        "splits.tsv",
        "config.toml",
    ] {
        assert!(root.join(f).exists(), "missing {f}");
    }
    assert_eq!(
        fs::read_to_string(root.join("folds.csv"))
            .unwrap()
            .lines()
            .count(),
        4
    );
}

#[test]
fn grid_ranks_configurations() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(
        d.join("grid.toml"),
        "model = 1\nn_traces = 300\noutput_dir = \"grid\"\n\
         split = { mode = \"lovocv-k-folds\", k = 1 }\n\
         [grid]\nuse_embedding = [false]\nn_layers = [1]\nhidden_size = [16, 32]\nl1_l2 = [0.0]\ndropout = [0.0]\n\
         [grid.base]\nmax_epochs = 2\n",
    )
    .unwrap();
    let out = procbench(&["grid", "grid.toml", "--quiet"], d);
    let lines: Vec<String> = stdout(&out).lines().map(String::from).collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("1\t") && lines[1].starts_with("2\t"));
    assert!(d.join("grid/ranking.csv").exists());
}

#[test]
fn models_exports_six_nets() {
    let dir = tempfile::tempdir().unwrap();
    let out = procbench(&["models", "--out", "nets"], dir.path());
    assert_eq!(stdout(&out).lines().count(), 6);
    assert!(stdout(&out).contains("reported 126\tenumerated 252"));
}

#[test]
fn bad_arguments_fail() {
    let dir = tempfile::tempdir().unwrap();
    let st = Command::new(env!("CARGO_BIN_EXE_procbench"))
        .args(["playout", "--model", "7", "-o", "x.log"])
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert!(!st.status.success());
    let st = Command::new(env!("CARGO_BIN_EXE_procbench"))
        .args(["playout", "--model", "1", "--net", "n.json", "-o", "x.log"])
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert!(!st.status.success());
}
