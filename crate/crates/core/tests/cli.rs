use std::path::Path;
use std::process::{Command, Output};

fn forge(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_regret-forge"))
        .args(args)
        .env("REGRET_FORGE_OUT", out)
        .env("RUST_BACKTRACE", "0")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn stats_prints_table_rows() {
    let dir = tempfile::tempdir().unwrap();
    let text = stdout(&forge(&["stats", "--game", "leduc"], dir.path()));
    assert_eq!(
        text,
        "game,histories,infosets,terminals,depth,max_infoset_size\nleduc,9457,936,5520,12,5\n"
    );
}

#[test]
fn tabular_then_eval_and_h2h() {
    let dir = tempfile::tempdir().unwrap();
    let text = stdout(&forge(&["tabular", "--game", "kuhn", "--algo", "cfr+", "--iters", "64"], dir.path()));
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("game,algo,seed,iteration,episodes,exploitability,wall_time_s"));
    let last: Vec<&str> = lines.last().unwrap().split(',').collect();
    assert_eq!(&last[..5], &["kuhn", "cfr+", "0", "64", "128"]);
    let policy = dir.path().join("kuhn__cfr+__seed0.policy");
    let e = stdout(&forge(&["eval", "--game", "kuhn", "--policy", policy.to_str().unwrap()], dir.path()));
    assert_eq!(e.trim(), last[5]);

    stdout(&forge(&["tabular", "--game", "leduc", "--algo", "cfr+", "--iters", "20"], dir.path()));
    let a = format!("policy:{}", dir.path().join("leduc__cfr+__seed0.policy").display());
    let row = stdout(&forge(&["h2h", "--a", &a, "--b", "rule:loose_passive", "--n", "500", "--seed", "4"], dir.path()));
    let fields: Vec<&str> = row.trim().split(',').collect();
    assert_eq!(fields.len(), 5);
    assert_eq!((fields[1], fields[4]), ("rule:loose_passive", "500"));
    let again = stdout(&forge(&["h2h", "--a", &a, "--b", "rule:loose_passive", "--n", "500", "--seed", "4"], dir.path()));
    assert_eq!(row, again);
}

#[test]
fn deep_and_experiment_write_under_the_output_root() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("tiny.toml");
    std::fs::write(
        &cfg,
        "num_iterations = 2\nnum_traversals = 30\nadvantage_network_train_steps = 5\nhistory_value_network_train_steps = 5\nave_policy_network_train_steps = 20\nnum_hiddens = 8\n",
    )
    .unwrap();
    let args = ["deep", "--game", "kuhn", "--algo", "vr_deep_cfr", "--config", cfg.to_str().unwrap(), "--seed", "2", "--no-wall-time"];
    let first = stdout(&forge(&args, dir.path()));
    assert_eq!(first.lines().count(), 3);
    assert!(first.lines().skip(1).all(|l| l.starts_with("kuhn,vr_deep_cfr,2,")));
    assert_eq!(first, stdout(&forge(&args, dir.path())));
    assert!(dir.path().join("kuhn__vr_deep_cfr__seed2.rfnn").exists());

    let spec = dir.path().join("spec.toml");
    std::fs::write(
        &spec,
        "out_dir = \"ignored\"\n[[run]]\ngame = \"kuhn\"\nalgo = \"linear\"\nseeds = [0, 1]\niterations = 8\n",
    )
    .unwrap();
    let out = dir.path().join("exp");
    let listed = stdout(&forge(&["experiment", spec.to_str().unwrap(), "--jobs", "2"], &out));
    assert_eq!(listed.trim(), out.join("kuhn__linear.csv").to_str().unwrap());
}

#[test]
fn bad_input_fails_with_a_message() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["tabular", "--game", "chess", "--algo", "cfr"],
        vec!["tabular", "--game", "kuhn", "--algo", "cfr3"],
        vec!["h2h", "--a", "uniform", "--b", "rule:nobody"],
        vec!["eval", "--game", "kuhn", "--policy", "/no/such/file"],
    ] {
        let o = forge(&args, dir.path());
        assert!(!o.status.success(), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}
