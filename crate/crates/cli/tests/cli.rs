use std::collections::HashSet;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn emoflow(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_emoflow"))
        .args(args)
        .current_dir(dir)
        .env_remove("EMOFLOW_THREADS")
        .output()
        .expect("binary should run")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

#[test]
fn help_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = emoflow(dir.path(), &["--help"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8_lossy(&out.stdout);
    for sub in ["ties", "contagion", "simulate", "analyze", "fit", "synth"] {
        assert!(text.contains(sub), "help lacks {sub}");
    }

    let out = emoflow(dir.path(), &["simulate", "--help"]);
    assert_eq!(code(&out), 0);
}

#[test]
fn missing_inputs_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = emoflow(dir.path(), &["ties"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("--graph"), "{}", stderr(&out));

    let out = emoflow(dir.path(), &["analyze"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("--events"), "{}", stderr(&out));
}

#[test]
fn unreadable_input_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = emoflow(
        dir.path(),
        &["ties", "--graph", "missing.csv", "--tweets", "missing.csv"],
    );
    assert_eq!(code(&out), 3);
}

#[test]
fn malformed_graph_is_domain_error() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("graph.csv"), "a b 3\nc d notanumber\n").unwrap();
    fs::write(dir.path().join("tweets.csv"), "t1,a,0,anger\n").unwrap();
    let out = emoflow(
        dir.path(),
        &["ties", "--graph", "graph.csv", "--tweets", "tweets.csv"],
    );
    assert_eq!(code(&out), 4);
    assert!(stderr(&out).contains("line 2"), "{}", stderr(&out));
}

#[test]
fn empty_retweet_set_is_domain_error() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("graph.csv"), "a b 1\n").unwrap();
    // Originals only: no provenance columns, so no retweet records at all.
    fs::write(
        dir.path().join("tweets.csv"),
        "t1,a,0,anger\nt2,b,10,joy\n",
    )
    .unwrap();
    let out = emoflow(
        dir.path(),
        &["ties", "--graph", "graph.csv", "--tweets", "tweets.csv"],
    );
    assert_eq!(code(&out), 4);
    assert!(
        stderr(&out).contains("no usable emotional retweet records"),
        "{}",
        stderr(&out)
    );
}

/// One followee posting one tweet of each emotion, one watcher whose four
/// tweets all see that same exposure: every per-emotion baseline equals the
/// overall baseline, so the significance gap is exactly zero.
#[test]
fn constant_exposure_fixture_has_zero_significance() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("graph.csv"), "w f 1\n").unwrap();
    fs::write(
        dir.path().join("tweets.csv"),
        "f1,f,0,anger\nf2,f,1,disgust\nf3,f,2,joy\nf4,f,3,sadness\n\
         w1,w,3600,anger\nw2,w,3600,disgust\nw3,w,3600,joy\nw4,w,3600,sadness\n",
    )
    .unwrap();
    let out = emoflow(
        dir.path(),
        &[
            "contagion",
            "--graph",
            "graph.csv",
            "--tweets",
            "tweets.csv",
            "--threshold",
            "4",
            "--no-susceptibility",
            "--out",
            "out",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));

    let table = fs::read_to_string(dir.path().join("out/significance.csv")).unwrap();
    let rows: Vec<&str> = table.lines().skip(1).collect();
    // Default Δ grid 1..8 → one row per (emotion, Δ).
    assert_eq!(rows.len(), 32);
    for row in rows {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields[2], "0", "significance should be exactly 0: {row}");
        assert_eq!(fields[5], "1", "one qualifying tweet per emotion: {row}");
    }
}

#[test]
fn synth_is_deterministic_and_seed_sensitive() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &str, seed: &str| {
        [
            "synth",
            "--blocks",
            "20,20",
            "--intra-p",
            "0.2",
            "--inter-p",
            "0.02",
            "--mean-tweets",
            "4",
            "--span-hours",
            "48",
            "--n-events",
            "3",
            "--seed",
            seed,
            "--out",
            out,
        ]
        .map(String::from)
        .to_vec()
    };
    for (out_dir, seed) in [("a", "9"), ("b", "9"), ("c", "10")] {
        let argv: Vec<String> = args(out_dir, seed);
        let argv: Vec<&str> = argv.iter().map(String::as_str).collect();
        let out = emoflow(dir.path(), &argv);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
    }
    for name in ["graph.csv", "tweets.csv", "events.csv", "events_truth.csv"] {
        let a = fs::read(dir.path().join("a").join(name)).unwrap();
        let b = fs::read(dir.path().join("b").join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical seeds");
    }
    let a = fs::read(dir.path().join("a/tweets.csv")).unwrap();
    let c = fs::read(dir.path().join("c/tweets.csv")).unwrap();
    assert_ne!(a, c, "different seeds should differ somewhere");
}

#[test]
fn synth_default_blocks_materialize_all_nodes() {
    let dir = tempfile::tempdir().unwrap();
    let out = emoflow(
        dir.path(),
        &["synth", "--mean-tweets", "0.2", "--n-events", "1", "--out", "out"],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let table = fs::read_to_string(dir.path().join("out/graph.csv")).unwrap();
    let mut labels: HashSet<&str> = HashSet::new();
    for row in table.lines().skip(1) {
        let mut fields = row.split(',');
        labels.insert(fields.next().unwrap());
        labels.insert(fields.next().unwrap());
    }
    assert_eq!(labels.len(), 1000, "4 default blocks of 250 nodes");
}

#[test]
fn analyze_omits_linear_event_with_reason_code() {
    let dir = tempfile::tempdir().unwrap();
    let mut events = String::from("event_id,hour_index,anger,disgust,joy,sadness\n");
    for h in 0..10 {
        events.push_str(&format!("lin,{h},2,0,0,0\n"));
    }
    fs::write(dir.path().join("events.csv"), events).unwrap();
    let out = emoflow(
        dir.path(),
        &["analyze", "--events", "events.csv", "--out", "out"],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let omitted = fs::read_to_string(dir.path().join("out/omitted.csv")).unwrap();
    assert_eq!(omitted, "event_id,reason\nlin,no_point_above\n");
    let markers = fs::read_to_string(dir.path().join("out/markers.csv")).unwrap();
    assert_eq!(markers.lines().count(), 1, "header only");
}

#[test]
fn fit_clamps_top_k_with_warning() {
    let dir = tempfile::tempdir().unwrap();
    // A dense two-block graph whose ensemble curves actually carry a burst;
    // tiny hand graphs saturate in a step or two and leave no usable cell.
    let synth = emoflow(
        dir.path(),
        &[
            "synth",
            "--blocks",
            "15,15",
            "--intra-p",
            "0.25",
            "--inter-p",
            "0.05",
            "--mean-tweets",
            "0.1",
            "--n-events",
            "1",
            "--seed",
            "5",
            "--out",
            "data",
        ],
    );
    assert_eq!(code(&synth), 0, "{}", stderr(&synth));
    // S-shaped hourly counts: cumulative curve dips below the diagonal
    // early and rises above it late, so markers exist.
    let mut events = String::from("event_id,hour_index,anger,disgust,joy,sadness\n");
    for (h, y) in [1u64, 1, 2, 5, 14, 30, 14, 5, 2, 1, 1].iter().enumerate() {
        events.push_str(&format!("ev,{h},{y},0,0,0\n"));
    }
    fs::write(dir.path().join("events.csv"), events).unwrap();
    let out = emoflow(
        dir.path(),
        &[
            "fit",
            "--graph",
            "data/graph.csv",
            "--events",
            "events.csv",
            "--alphas",
            "0",
            "--gammas",
            "0.8",
            "--runs",
            "5",
            "--top-k",
            "20",
            "--out",
            "out",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stderr(&out).contains("clamping"), "{}", stderr(&out));
    let fits = fs::read_to_string(dir.path().join("out/fits.csv")).unwrap();
    let rows: Vec<&str> = fits.lines().collect();
    assert_eq!(rows.len(), 2, "single usable cell → single row: {fits}");
    assert!(rows[1].starts_with("ev,1,0,0.8,"), "{fits}");
}

#[test]
fn fit_with_no_events_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("graph.csv"), "a b 1\nb a 1\n").unwrap();
    fs::write(
        dir.path().join("events.csv"),
        "event_id,hour_index,anger,disgust,joy,sadness\n",
    )
    .unwrap();
    let out = emoflow(
        dir.path(),
        &[
            "fit",
            "--graph",
            "graph.csv",
            "--events",
            "events.csv",
            "--out",
            "out",
        ],
    );
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("no events"), "{}", stderr(&out));
}

#[test]
fn config_file_supplies_paths_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("graph.csv"), "w f 1\n").unwrap();
    fs::write(
        dir.path().join("tweets.csv"),
        "f1,f,0,anger\nr1,w,100,anger,f1,f\n",
    )
    .unwrap();
    fs::write(
        dir.path().join("pipeline.cfg"),
        "# fixture pipeline\ngraph = graph.csv\ntweets = tweets.csv\nout = cfg_out\n",
    )
    .unwrap();

    let out = emoflow(dir.path(), &["ties", "--config", "pipeline.cfg"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(dir.path().join("cfg_out/ties.csv").exists());

    let out = emoflow(
        dir.path(),
        &["ties", "--config", "pipeline.cfg", "--out", "flag_out"],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(dir.path().join("flag_out/ties.csv").exists());
}

#[test]
fn invalid_parameters_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("graph.csv"), "a b 1\n").unwrap();
    fs::write(dir.path().join("tweets.csv"), "t1,a,0,anger\n").unwrap();

    let cases: Vec<Vec<&str>> = vec![
        vec![
            "contagion", "--graph", "graph.csv", "--tweets", "tweets.csv", "--threshold", "0",
        ],
        vec![
            "contagion", "--graph", "graph.csv", "--tweets", "tweets.csv", "--fraction", "0.6",
        ],
        vec!["simulate", "--graph", "graph.csv", "--runs", "0"],
        vec!["simulate", "--graph", "graph.csv", "--gammas", "-0.5"],
        vec!["analyze", "--events", "tweets.csv", "--dominant-threshold", "0.5"],
        vec!["analyze", "--events", "tweets.csv", "--curve", "sideways"],
    ];
    for argv in cases {
        let out = emoflow(dir.path(), &argv);
        assert_eq!(code(&out), 2, "{argv:?} → {}", stderr(&out));
    }
}

#[test]
fn threads_env_fallback_is_validated_and_harmless() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("graph.csv"), "a b 2\nb a 1\nb c 1\nc a 3\n").unwrap();

    let run = |env: Option<&str>, extra: &[&str], out_dir: &str| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_emoflow"));
        cmd.current_dir(dir.path())
            .args([
                "simulate",
                "--graph",
                "graph.csv",
                "--alphas",
                "0,1",
                "--gammas",
                "0.5",
                "--runs",
                "6",
                "--seed",
                "4",
                "--out",
                out_dir,
            ])
            .args(extra);
        match env {
            Some(v) => cmd.env("EMOFLOW_THREADS", v),
            None => cmd.env_remove("EMOFLOW_THREADS"),
        };
        cmd.output().expect("binary should run")
    };

    let bad = run(Some("soon"), &[], "x");
    assert_eq!(code(&bad), 2, "{}", stderr(&bad));

    let a = run(Some("1"), &[], "a");
    assert_eq!(code(&a), 0, "{}", stderr(&a));
    let b = run(Some("3"), &[], "b");
    assert_eq!(code(&b), 0, "{}", stderr(&b));
    // Flag wins over env: a zero flag must fail even with a valid env var.
    let c = run(Some("2"), &["--threads", "0"], "c");
    assert_eq!(code(&c), 2, "{}", stderr(&c));

    let stats_a = fs::read(dir.path().join("a/ensemble_stats.csv")).unwrap();
    let stats_b = fs::read(dir.path().join("b/ensemble_stats.csv")).unwrap();
    assert_eq!(stats_a, stats_b, "thread count must not change output bytes");
}
