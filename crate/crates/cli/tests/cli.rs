use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_toepquant"));
    c.env_remove("TOEPQUANT_SEED");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn tmpdir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("toepquant-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn read_csv(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

/// The value of `column` in the metrics table printed by `estimate`.
fn metric(output: &str, column: &str) -> String {
    let table: Vec<&str> = output.split("\n\n").nth(1).unwrap().lines().collect();
    let i = table[0].split(',').position(|c| c == column).unwrap();
    table[1].split(',').nth(i).unwrap().to_string()
}

fn truth_seed(dir: &Path, id: u8) -> String {
    read_csv(&dir.join(format!("exp{id}_truth.csv")))[0][1].clone()
}

#[test]
fn same_seed_gives_identical_csv() {
    let args = |dir: &Path, seed: &str| {
        let dir = dir.to_str().unwrap().to_string();
        stdout(&run(&[
            "--seed",
            seed,
            "--out",
            &dir,
            "--trials",
            "3",
            "exp",
            "--id",
            "2",
            "--n-grid",
            "100,200,400",
        ]));
    };
    let (a, b, c) = (tmpdir("same-a"), tmpdir("same-b"), tmpdir("same-c"));
    args(&a, "7");
    args(&b, "7");
    args(&c, "8");
    let bytes = |d: &Path| fs::read(d.join("exp2.csv")).unwrap();
    assert_eq!(bytes(&a), bytes(&b));
    assert_ne!(bytes(&a), bytes(&c));
    let text = String::from_utf8(bytes(&a)).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "experiment,d,alpha,delta,n,tag,trial,rel_error,seconds,seed"
    );
    assert!(a.join("exp2_fit.csv").exists());
    assert!(a.join("exp2.gp").exists());
}

#[test]
fn seed_falls_back_to_environment() {
    let a = stdout(
        &bin()
            .args(["gen", "--d", "6", "--k", "2"])
            .env("TOEPQUANT_SEED", "44")
            .output()
            .unwrap(),
    );
    let b = stdout(&run(&["--seed", "44", "gen", "--d", "6", "--k", "2"]));
    let c = stdout(&run(&["--seed", "45", "gen", "--d", "6", "--k", "2"]));
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn experiment_rows_replay_through_estimate() {
    let dir = tmpdir("replay2");
    let d = dir.to_str().unwrap();
    stdout(&run(&[
        "--seed",
        "3",
        "--out",
        d,
        "--trials",
        "2",
        "exp",
        "--id",
        "2",
        "--n-grid",
        "100,300,900",
    ]));
    let ts = truth_seed(&dir, 2);
    for row in read_csv(&dir.join("exp2.csv")).iter().step_by(5) {
        let out = stdout(&run(&[
            "--seed",
            &row[9],
            "estimate",
            "--simulate",
            "--d",
            &row[1],
            "--ruler",
            &row[2],
            "--delta",
            &row[3],
            "--n",
            &row[4],
            "--truth-seed",
            &ts,
        ]));
        assert_eq!(metric(&out, "rel_error"), row[7], "row {row:?}");
    }
}

#[test]
fn experiment_one_tags_replay() {
    let dir = tmpdir("replay1");
    let d = dir.to_str().unwrap();
    stdout(&run(&[
        "--seed", "4", "--out", d, "--trials", "2", "exp", "--id", "1", "--n-grid", "500",
    ]));
    let ts = truth_seed(&dir, 1);
    for row in read_csv(&dir.join("exp1.csv")) {
        let (dither, correction) = match row[5].as_str() {
            "hatT" => ("triangular", "quarter"),
            "dotT" => ("triangular", "none"),
            "hatTu" => ("uniform", "sixth"),
            _ => ("none", "none"),
        };
        let out = stdout(&run(&[
            "--seed",
            &row[9],
            "estimate",
            "--simulate",
            "--d",
            &row[1],
            "--k",
            "2",
            "--ruler",
            &row[2],
            "--delta",
            &row[3],
            "--n",
            &row[4],
            "--dither",
            dither,
            "--correction",
            correction,
            "--truth-seed",
            &ts,
        ]));
        assert_eq!(metric(&out, "rel_error"), row[7], "row {row:?}");
    }
}

#[test]
fn thresholded_rows_replay() {
    let dir = tmpdir("replay5");
    let d = dir.to_str().unwrap();
    stdout(&run(&[
        "--seed",
        "5",
        "--out",
        d,
        "--trials",
        "2",
        "exp",
        "--id",
        "5",
        "--dims",
        "32",
        "--calibration-trials",
        "10",
    ]));
    let ts = truth_seed(&dir, 5);
    let c = read_csv(&dir.join("exp5_summary.csv"))[0][1].clone();
    let rows = read_csv(&dir.join("exp5.csv"));
    let row = rows.iter().find(|r| r[5] == "thresh").unwrap();
    let out = stdout(&run(&[
        "--seed",
        &row[9],
        "estimate",
        "--simulate",
        "--d",
        &row[1],
        "--m",
        "5",
        "--ruler",
        &row[2],
        "--delta",
        &row[3],
        "--n",
        &row[4],
        "--threshold-c",
        &c,
        "--truth-seed",
        &ts,
    ]));
    assert_eq!(metric(&out, "rel_error"), row[7]);
}

#[test]
fn estimate_from_files() {
    let dir = tmpdir("files");
    let truth = dir.join("truth.csv");
    fs::write(
        &truth,
        stdout(&run(&["--seed", "2", "gen", "--d", "5", "--m", "2"])),
    )
    .unwrap();
    let samples = dir.join("samples.csv");
    let mut text = String::from("x0,x1,x2,x3,x4\n");
    for l in 0..40 {
        let row: Vec<String> = (0..5)
            .map(|j| (((l * 7 + j * 3) % 11) as f64 - 5.0).to_string())
            .collect();
        text.push_str(&row.join(","));
        text.push('\n');
    }
    fs::write(&samples, text).unwrap();
    let out = stdout(&run(&[
        "estimate",
        "--input",
        samples.to_str().unwrap(),
        "--ruler",
        "full",
        "--truth",
        truth.to_str().unwrap(),
    ]));
    assert!(out.starts_with("s,a_hat,a\n"));
    assert_eq!(metric(&out, "n"), "40");
    assert_eq!(metric(&out, "ruler_size"), "5");
    assert!(metric(&out, "rel_error").parse::<f64>().unwrap() > 0.0);

    let empty = dir.join("empty.csv");
    fs::write(&empty, "x0,x1\n").unwrap();
    assert_eq!(
        run(&["estimate", "--input", empty.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn ruler_and_bounds_rows() {
    let out = stdout(&run(&["ruler", "--d", "16", "--alpha", "0.5"]));
    let row = out.lines().nth(1).unwrap();
    assert!(row.starts_with("16,0.5,1 2 3 4 8 12 16,7,"));

    let out = stdout(&run(&[
        "bounds", "--d", "16,64", "--alpha", "0.5,0.75", "--delta", "2",
    ]));
    assert_eq!(out.lines().count(), 5);
    assert!(out.lines().skip(1).all(|l| l.ends_with(",true")));
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["exp", "--id", "6"]).status.code(), Some(2));
    assert_eq!(
        run(&["estimate", "--simulate", "--d", "16", "--k", "17"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["--trials", "0", "exp", "--id", "3"]).status.code(),
        Some(2)
    );
    assert_eq!(run(&["bounds", "--norm", "0"]).status.code(), Some(3));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}
