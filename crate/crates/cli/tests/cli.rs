use std::path::Path;
use std::process::{Command, Output};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_assignforest")).args(args).output().expect("spawn assignforest")
}

fn ok(args: &[&str]) -> Output {
    let out = bin(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn help_lists_every_flag() {
    let cmd = assignforest_cli::command();
    for sub in cmd.get_subcommands() {
        let name = sub.get_name();
        if name == "help" {
            continue;
        }
        let help = String::from_utf8(ok(&[name, "--help"]).stdout).unwrap();
        for arg in sub.get_arguments() {
            if let Some(long) = arg.get_long() {
                assert!(help.contains(&format!("--{long}")), "`{name} --help` omits --{long}");
            }
        }
    }
}

#[test]
fn gen_corrupt_train_predict_round() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data.csv");
    let masked = dir.path().join("masked.csv");
    let forest = dir.path().join("forest.txt");
    let (p1, p2) = (dir.path().join("p1.csv"), dir.path().join("p2.csv"));

    ok(&["gen", "--n", "200", "--seed", "3", "--out", s(&data)]);
    let text = std::fs::read_to_string(&data).unwrap();
    assert_eq!(text.lines().count(), 201);
    assert!(text.starts_with("x1,x2,x3,x4,x5,y"));

    ok(&[
        "corrupt", "--in", s(&data), "--out", s(&masked), "--mechanism", "MAR1", "--col", "1", "--rate", "0.2",
        "--determining", "2", "--seed", "5",
    ]);
    let masked_text = std::fs::read_to_string(&masked).unwrap();
    let na = masked_text.lines().skip(1).filter(|l| l.split(',').next() == Some("NA")).count();
    assert_eq!(na, 40);
    assert_eq!(masked_text.matches("NA").count(), 40);

    ok(&["train", "--in", s(&masked), "--out", s(&forest), "--trees", "20", "--seed", "7"]);
    for p in [&p1, &p2] {
        ok(&["predict", "--forest", s(&forest), "--in", s(&masked), "--out", s(p), "--seed", "1"]);
    }
    let a = std::fs::read_to_string(&p1).unwrap();
    assert_eq!(a, std::fs::read_to_string(&p2).unwrap());
    assert_eq!(a.lines().count(), 201);
    assert_eq!(a.lines().next(), Some("prediction"));
}

#[test]
fn impute_fills_every_cell() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data.csv");
    let masked = dir.path().join("masked.csv");
    let filled = dir.path().join("filled.csv");
    let trace = dir.path().join("trace.csv");
    ok(&["gen", "--n", "60", "--out", s(&data)]);
    ok(&["corrupt", "--in", s(&data), "--out", s(&masked), "--mechanism", "mcar", "--col", "4", "--rate", "0.3"]);
    ok(&[
        "impute", "--in", s(&masked), "--out", s(&filled), "--method", "breiman", "--iterations", "2", "--trees", "10",
        "--trace", s(&trace),
    ]);
    assert!(!std::fs::read_to_string(&filled).unwrap().contains("NA"));
    let t = std::fs::read_to_string(&trace).unwrap();
    assert!(t.starts_with("iteration,row,column,value"));
    assert!(t.lines().count() > 1);
}

#[test]
fn exit_codes() {
    assert_eq!(bin(&["train", "--bogus"]).status.code(), Some(2));
    assert_eq!(bin(&["gen"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.csv");
    let out = dir.path().join("f.txt");
    assert_eq!(bin(&["train", "--in", s(&missing), "--out", s(&out)]).status.code(), Some(1));
}

#[test]
fn study_outputs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("study.toml");
    std::fs::write(
        &config,
        "n_train = 60\nn_test = 80\nreplicates = 2\nn_trees = 6\nmechanisms = [\"MCAR\", \"MAR2\"]\nmethods = [\"OURS\", \"MEDIAN\"]\n",
    )
    .unwrap();
    let runs: Vec<_> = ["a", "b"]
        .iter()
        .map(|sub| {
            let out = dir.path().join(sub);
            ok(&["study-mechanisms", "--config", s(&config), "--out", s(&out), "--seed", "9"]);
            ["results_long.csv", "results_summary.csv", "fig_mse.svg", "fig_bias.svg"]
                .map(|f| std::fs::read_to_string(out.join(f)).unwrap())
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
    assert_eq!(runs[0][0].lines().count(), 1 + 2 * 2 * 2);
}

#[test]
fn failed_cells_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("study.toml");
    std::fs::write(
        &config,
        "n_train = 40\nn_test = 40\nreplicates = 1\nn_trees = 4\nmechanisms = [\"MCAR\"]\nmethods = [\"LISTWISE\"]\nrates = [0.9, 0.9, 0.95]\n",
    )
    .unwrap();
    let out = dir.path().join("o");
    assert_eq!(bin(&["study-mechanisms", "--config", s(&config), "--out", s(&out)]).status.code(), Some(1));
    assert!(std::fs::read_to_string(out.join("results_long.csv")).unwrap().contains("failed: listwise"));
}
