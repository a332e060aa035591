//! The command-line interface, driven as a subprocess.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rb2::dataset::load_dataset;
use rb2::model::{parse_model, write_model};
use rb2::roundlog::{read_round_log, CONTEXT_SEPARATOR};
use rb2_core::boosting::BoostedModel;
use rb2_core::tilde::RelationalTree;

fn rb2(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rb2")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = rb2(args);
    assert!(out.status.success(), "rb2 {}: {}", args.join(" "), String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn generated(dir: &Path, users: usize) -> PathBuf {
    let data = dir.join("data");
    ok(&["generate", "--out", s(&data), "--users", &users.to_string(), "--seed", "2"]);
    data
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let data = generated(dir.path(), 30);
    for args in [
        vec!["run", "--dataset", s(&data), "--algo", "ucb1"],
        vec!["run", "--algo", "rb2-informed"],
        vec!["run", "--dataset", s(&data), "--coldstart-frac", "1.5"],
        vec!["run", "--dataset", s(&data), "--batch-size", "many"],
        vec!["frobnicate"],
    ] {
        assert_eq!(rb2(&args).status.code(), Some(2), "rb2 {}", args.join(" "));
    }
    let missing = dir.path().join("nowhere");
    assert_eq!(rb2(&["run", "--dataset", s(&missing)]).status.code(), Some(1));
}

#[test]
fn run_writes_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let data = generated(dir.path(), 120);
    let out = dir.path().join("out");
    let summary = ok(&[
        "run",
        "--dataset",
        s(&data),
        "--algo",
        "rb2-greedy,linucb",
        "--seeds",
        "4",
        "--batch-size",
        "16",
        "--batches",
        "2",
        "--alpha",
        "0.1",
        "--checkpoints",
        "--out-dir",
        s(&out),
    ]);
    assert!(summary.contains("rb2-greedy") && summary.contains("linucb-alpha0.1"));
    for f in [
        "rb2-greedy-seed4.csv",
        "rb2-greedy-seed4.model",
        "linucb-alpha0.1-seed4.csv",
        "linucb-alpha0.1-seed4.vocab",
        "summary.txt",
        "checkpoints/rb2-greedy-seed4-batch0.model",
        "checkpoints/rb2-greedy-seed4-batch2.model",
    ] {
        assert!(out.join(f).is_file(), "missing {f}");
    }
    assert_eq!(std::fs::read_to_string(out.join("summary.txt")).unwrap(), summary);
    let vocab = std::fs::read_to_string(out.join("linucb-alpha0.1-seed4.vocab")).unwrap();
    assert_eq!(vocab.lines().last().and_then(|l| l.split('\t').next_back()), Some("bias"));
}

#[test]
fn per_arm_runs_write_one_model_per_arm() {
    let dir = tempfile::tempdir().unwrap();
    let data = generated(dir.path(), 80);
    let out = dir.path().join("out");
    ok(&[
        "run",
        "--dataset",
        s(&data),
        "--algo",
        "rb2-informed",
        "--seeds",
        "1",
        "--batch-size",
        "8",
        "--batches",
        "2",
    ]
    .into_iter()
    .chain(["--per-arm-models", "--checkpoints", "--out-dir", s(&out)])
    .collect::<Vec<_>>());
    let ds = load_dataset(&data).unwrap();
    let schema = ds.store.schema();
    for &arm in &ds.arms() {
        let name = schema.constant_name(arm);
        for f in
            [format!("rb2-informed-seed1-{name}.model"), format!("checkpoints/rb2-informed-seed1-{name}-batch2.model")]
        {
            let p = out.join(&f);
            parse_model(&std::fs::read_to_string(&p).unwrap_or_else(|_| panic!("missing {f}")), &f, schema).unwrap();
        }
    }
    assert!(!out.join("rb2-informed-seed1.model").exists());
    let log = read_round_log(&out.join("rb2-informed-seed1.csv")).unwrap();
    assert_eq!(log.meta("per-arm-models"), Some("true"));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let data = generated(dir.path(), 80);
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        format!("dataset = {}\nbatch_size = 8\nbatches = 2\nseeds = 1\nalgo = rb2-informed\n", s(&data)),
    )
    .unwrap();
    let out = dir.path().join("out");
    ok(&["run", "--config", s(&cfg), "--batches", "3", "--out-dir", s(&out)]);
    let log = read_round_log(&out.join("rb2-informed-seed1.csv")).unwrap();
    assert_eq!(log.rows.len(), 24);
    assert_eq!(log.meta("batch-size"), Some("8"));
}

/// Every logged probability is reproduced by the checkpoint the decision
/// was made with.
#[test]
fn replayed_probabilities_match_checkpoints() {
    let dir = tempfile::tempdir().unwrap();
    let data = generated(dir.path(), 200);
    let out = dir.path().join("out");
    ok(&[
        "run",
        "--dataset",
        s(&data),
        "--algo",
        "rb2-informed",
        "--seeds",
        "3",
        "--batch-size",
        "20",
        "--batches",
        "4",
        "--checkpoints",
        "--out-dir",
        s(&out),
    ]);
    let ds = load_dataset(&data).unwrap();
    let schema = ds.store.schema();
    let models: Vec<BoostedModel> = (0..4)
        .map(|b| {
            let p = out.join(format!("checkpoints/rb2-informed-seed3-batch{b}.model"));
            parse_model(&std::fs::read_to_string(&p).unwrap(), s(&p), schema).unwrap()
        })
        .collect();
    let log = read_round_log(&out.join("rb2-informed-seed3.csv")).unwrap();
    assert_eq!(log.rows.len(), 80);
    for row in &log.rows {
        let context: Vec<_> = row.context_id.split(CONTEXT_SEPARATOR).map(|n| schema.constant_id(n).unwrap()).collect();
        let arm = schema.constant_id(&row.chosen_arm).unwrap();
        let p = models[row.batch - 1].predict_prob(&ds.query(&context, arm), &ds.store).unwrap();
        assert_eq!(p, row.p_chosen, "round {}", row.t);
        let ex = ds.examples.iter().find(|e| e.context == context).unwrap();
        assert_eq!(row.reward, ex.labels.contains(&arm));
    }
}

#[test]
fn plot_accepts_header_only_logs() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.csv");
    std::fs::write(&empty, "# label=nothing\nt,batch,context_id,chosen_arm,reward,regret_cum,p_chosen\n").unwrap();
    let svg = dir.path().join("plot.svg");
    ok(&["plot", s(&empty), "--out", s(&svg)]);
    let text = std::fs::read_to_string(&svg).unwrap();
    assert!(text.starts_with("<svg") || text.starts_with("<?xml"));
    assert!(!text.contains("<polyline"));

    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "t,regret\n1,0\n").unwrap();
    assert_eq!(rb2(&["plot", s(&bad), "--out", s(&svg)]).status.code(), Some(1));
}

fn write_constant_model(dir: &Path, data: &Path) -> PathBuf {
    let ds = load_dataset(data).unwrap();
    let mut m = BoostedModel::new(ds.target(), 0.4);
    m.push_stage(RelationalTree::constant(ds.target(), -0.1), 1.0).unwrap();
    let path = dir.join("constant.model");
    std::fs::write(&path, write_model(&m, ds.store.schema())).unwrap();
    path
}

#[test]
fn distilling_a_constant_model_prints_one_leaf() {
    let dir = tempfile::tempdir().unwrap();
    let data = generated(dir.path(), 40);
    let model = write_constant_model(dir.path(), &data);
    let text = ok(&["distill", "--model", s(&model), "--dataset", s(&data)]);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3, "{text}");
    assert_eq!(lines[0], "willclick(A,B)");
    assert!(lines[1].starts_with("value 0.5744"), "{}", lines[1]);
    assert!(lines[2].starts_with("fidelity 1.0000"));
}

#[test]
fn delta_one_collapses_the_distilled_tree() {
    let dir = tempfile::tempdir().unwrap();
    let data = generated(dir.path(), 150);
    let out = dir.path().join("out");
    ok(&[
        "run",
        "--dataset",
        s(&data),
        "--algo",
        "rb2-informed",
        "--seeds",
        "0",
        "--batch-size",
        "32",
        "--batches",
        "3",
        "--out-dir",
        s(&out),
    ]);
    let model = out.join("rb2-informed-seed0.model");
    let full = ok(&["distill", "--model", s(&model), "--dataset", s(&data)]);
    assert!(full.contains("if "), "{full}");
    let collapsed = ok(&["distill", "--model", s(&model), "--dataset", s(&data), "--delta", "1"]);
    assert_eq!(collapsed.lines().filter(|l| l.trim_start().starts_with("value")).count(), 1, "{collapsed}");
    assert!(!collapsed.contains("if "));
}

#[test]
fn corrupt_checkpoints_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let data = generated(dir.path(), 40);
    let model = write_constant_model(dir.path(), &data);
    let good = std::fs::read_to_string(&model).unwrap();
    let cases = [
        good.replace("rb2-model 1", "rb2-model 9"),
        good.replace("leaf", "leef"),
        good.lines().take(good.lines().count() - 1).collect::<Vec<_>>().join("\n"),
        good.replace("willclick", "likesgenre"),
        String::new(),
    ];
    for (k, text) in cases.iter().enumerate() {
        let p = dir.path().join(format!("bad{k}.model"));
        std::fs::write(&p, text).unwrap();
        let out = rb2(&["distill", "--model", s(&p), "--dataset", s(&data)]);
        assert_eq!(out.status.code(), Some(1), "case {k} accepted:\n{text}");
        assert!(!out.stderr.is_empty());
    }
}
