use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use merkle_collision::MerkleProof;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_merkle-collision"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn arg(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn theory_prints_the_exact_probability() {
    let out = run(&["theory", "--m", "4", "--k", "16"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(
        stdout(&out).contains("0.666180502701444"),
        "{}",
        stdout(&out)
    );
}

#[test]
fn theory_formats() {
    let csv = run(&["theory", "--m", "4,8", "--k", "0..2", "--format", "csv"]);
    let text = stdout(&csv);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "m,k,mode,p,log10_p");
    assert_eq!(lines.len(), 7);
    assert_eq!(lines[1], "4,0,standard,0.0625,-1.2041199826559248");

    let json = run(&[
        "theory", "--m", "16", "--k", "4", "--mode", "birthday", "--format", "json",
    ]);
    let value: serde_json::Value = serde_json::from_str(&stdout(&json)).unwrap();
    assert_eq!(value[0]["mode"], "birthday");
    let exact = value[0]["exact"].as_f64().unwrap();
    assert_eq!(
        exact,
        merkle_collision::theory::collision_prob_exact(8, 4).unwrap()
    );

    let approx = run(&[
        "theory", "--m", "64", "--k", "2^64", "--approx", "--format", "csv",
    ]);
    let p: f64 = stdout(&approx)
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .nth(3)
        .unwrap()
        .parse()
        .unwrap();
    assert!((p - (1.0 - (-1.0f64).exp())).abs() < 1e-6);
}

#[test]
fn bound_prints_sample_count() {
    let out = run(&["bound", "--p", "0.5", "--m", "16"]);
    assert_eq!(out.status.code(), Some(0));
    let v: f64 = stdout(&out).trim().parse().unwrap();
    assert!((v - 301.416_965_763_961_5).abs() < 1e-9);
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["nope"][..],
        &["theory", "--m", "4"],
        &["theory", "--m", "4", "--k", "x"],
        &["attack", "--m", "8", "--format", "xml"],
        &["tree", "build"],
    ] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn domain_errors_exit_1_with_prefix() {
    for args in [
        &["theory", "--m", "300", "--k", "1"][..],
        &["bound", "--p", "-0.1", "--m", "8"],
        &[
            "experiment",
            "--m",
            "4",
            "--k",
            "1",
            "--trials",
            "0",
            "--seed",
            "1",
        ],
        &["tree", "verify", "--proof", "/nonexistent/proof.json"],
    ] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        let err = stderr(&out);
        assert!(
            err.starts_with("error: ") && err.lines().count() == 1,
            "{err}"
        );
    }
}

#[test]
fn experiment_without_seed_reports_one() {
    let out = run(&[
        "experiment",
        "--m",
        "8",
        "--k",
        "1,2",
        "--trials",
        "10",
        "--repeats",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let seed: u64 = stderr(&out)
        .lines()
        .find_map(|l| l.strip_prefix("seed: "))
        .expect("seed line")
        .parse()
        .unwrap();
    let again = run(&[
        "experiment",
        "--m",
        "8",
        "--k",
        "1,2",
        "--trials",
        "10",
        "--repeats",
        "2",
        "--seed",
        &seed.to_string(),
    ]);
    assert_eq!(stdout(&out), stdout(&again));
}

#[test]
fn experiment_writes_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("r.csv");
    let json = dir.path().join("r.json");
    let out = run(&[
        "experiment",
        "--m",
        "4",
        "--k",
        "1..3",
        "--trials",
        "50",
        "--repeats",
        "3",
        "--seed",
        "9",
        "--out",
        arg(&csv),
        "--json",
        arg(&json),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).is_empty());
    assert_eq!(fs::read_to_string(&csv).unwrap().lines().count(), 4);
    let result =
        merkle_collision::report::parse_experiment_json(&fs::read_to_string(&json).unwrap())
            .unwrap();
    assert_eq!(result.seed, 9);
    assert_eq!(result.cells.len(), 3);
}

#[test]
fn attack_formats() {
    let out = run(&[
        "attack", "--m", "8", "--runs", "20", "--seed", "3", "--format", "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("m,runs,seed,median_trials,mean_trials,predicted_median\n8,20,3,"));
    let table = run(&["attack", "--m", "8", "--runs", "20", "--seed", "3"]);
    assert!(stdout(&table).contains("median trials"));
}

#[test]
fn tree_build_and_verify() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("leaves.txt");
    fs::write(&input, "alpha\nbeta\ngamma\ndelta\nepsilon\n").unwrap();
    let before = fs::read(&input).unwrap();

    let root = run(&["tree", "build", "--input", arg(&input)]);
    assert_eq!(root.status.code(), Some(0));
    let root_hex = stdout(&root).trim().to_string();
    assert_eq!(root_hex.len(), 64);

    let proof_path = dir.path().join("good.json");
    let built = run(&[
        "tree",
        "build",
        "--input",
        arg(&input),
        "--proof-index",
        "4",
        "--out",
        arg(&proof_path),
    ]);
    assert_eq!(built.status.code(), Some(0));
    assert_eq!(stdout(&built).trim(), root_hex);
    assert_eq!(fs::read(&input).unwrap(), before, "input must not change");

    let proof_text = fs::read_to_string(&proof_path).unwrap();
    let verify = run(&["tree", "verify", "--proof", arg(&proof_path)]);
    assert_eq!(verify.status.code(), Some(0));
    assert_eq!(fs::read_to_string(&proof_path).unwrap(), proof_text);

    // Same tree hashed with Keccak at 64 bits, proof on stdout.
    let keccak = run(&[
        "tree",
        "build",
        "--input",
        arg(&input),
        "--hash",
        "keccak256",
        "--m",
        "64",
        "--proof-index",
        "1",
    ]);
    let proof = MerkleProof::from_json(&stdout(&keccak)).unwrap();
    assert_eq!(proof.leaf.as_bytes(), b"beta");
    assert!(proof.verify().unwrap());

    let mut doc: serde_json::Value = serde_json::from_str(&proof_text).unwrap();
    doc["leaf"] = "epsilon!".into();
    let tampered = dir.path().join("tampered.json");
    fs::write(&tampered, serde_json::to_string(&doc).unwrap()).unwrap();
    let out = run(&["tree", "verify", "--proof", arg(&tampered)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).starts_with("error: "));

    fs::write(&tampered, "{ not json").unwrap();
    assert_eq!(
        run(&["tree", "verify", "--proof", arg(&tampered)])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn tree_build_rejects_empty_input_and_bad_index() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.txt");
    fs::write(&empty, "").unwrap();
    assert_eq!(
        run(&["tree", "build", "--input", arg(&empty)])
            .status
            .code(),
        Some(1)
    );
    let one = dir.path().join("one.txt");
    fs::write(&one, "only\n").unwrap();
    assert_eq!(
        run(&["tree", "build", "--input", arg(&one), "--proof-index", "1"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        run(&["tree", "build", "--input", arg(&one), "--m", "0"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn figures_write_csv_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["figures", "--which", "3", "--out", arg(dir.path())]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    for name in [
        "figure3_birthday.csv",
        "figure3_birthday.svg",
        "figure3_standard.csv",
        "figure3_standard.svg",
    ] {
        assert!(dir.path().join(name).is_file(), "{name}");
    }
    let svg = fs::read_to_string(dir.path().join("figure3_birthday.svg")).unwrap();
    roxmltree::Document::parse(&svg).unwrap();

    assert_eq!(
        run(&["figures", "--which", "1", "--seed", "3"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn figure4_from_saved_experiment() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("r.json");
    let status = run(&[
        "experiment",
        "--m",
        "4,8",
        "--k",
        "1..4",
        "--trials",
        "100",
        "--repeats",
        "2",
        "--seed",
        "1",
        "--json",
        arg(&json),
    ]);
    assert_eq!(status.status.code(), Some(0));
    let out = run(&[
        "figures",
        "--which",
        "4",
        "--from",
        arg(&json),
        "--out",
        arg(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let svg = fs::read_to_string(dir.path().join("figure4.svg")).unwrap();
    let doc = roxmltree::Document::parse(&svg).unwrap();
    assert_eq!(
        doc.descendants().filter(|n| n.has_tag_name("path")).count(),
        4
    );
    assert!(!dir.path().join("figure4.json").exists());
}
