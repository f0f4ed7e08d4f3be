use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use topowarn_cli::run;

fn fixture() -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/data/synthetic_prices.csv")
        .display()
        .to_string()
}

fn cli(args: &[&str]) -> i32 {
    run(std::iter::once("topowarn").chain(args.iter().copied()))
}

fn dir_contents(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (PathBuf::from(p.file_name().unwrap()), fs::read(&p).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn no_arguments_prints_usage_and_fails() {
    let out = Command::new(env!("CARGO_BIN_EXE_topowarn")).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn help_succeeds() {
    assert_eq!(cli(&["--help"]), 0);
    assert_eq!(cli(&["analyze", "--help"]), 0);
}

#[test]
fn usage_and_input_errors_exit_1() {
    assert_eq!(cli(&["analyze", "--input", &fixture()]), 1, "missing --out");
    assert_eq!(cli(&["simulate", "--preset", "nope", "--out", "x"]), 1);
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let out = out.to_str().unwrap();
    assert_eq!(cli(&["analyze", "--input", "/no/such/file.csv", "--out", out]), 1);

    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "date,close\n2016-01-01,1\n2016-01-02,2\n2016-01-03,-1\n").unwrap();
    assert_eq!(cli(&["analyze", "--input", bad.to_str().unwrap(), "--out", out]), 1);

    assert_eq!(cli(&["analyze", "--input", &fixture(), "--window", "2", "--out", out]), 1);
    assert_eq!(cli(&["analyze", "--input", &fixture(), "--features", "volume", "--out", out]), 1);
    assert_eq!(cli(&["analyze", "--input", &fixture(), "--end-date", "2015-01-01", "--out", out]), 1);
    assert_eq!(cli(&["analyze", "--input", &fixture(), "--k", "500", "--out", out]), 1);
    assert_eq!(cli(&["simulate", "--preset", "frozen", "--m2", "3.0", "--out", out]), 1);
}

#[test]
fn unwritable_output_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let out = blocker.join("sub");
    assert_eq!(cli(&["analyze", "--input", &fixture(), "--restarts", "2", "--out", out.to_str().unwrap()]), 2);
}

#[test]
fn analyze_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let runs: Vec<PathBuf> = (0..2).map(|i| dir.path().join(format!("run{i}"))).collect();
    for out in &runs {
        let code = cli(&[
            "analyze", "--input", &fixture(), "--end-date", "2016-07-01", "--seed", "9", "--restarts", "20",
            "--diagrams", "0,3", "--out", out.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
    }
    let (a, b) = (dir_contents(&runs[0]), dir_contents(&runs[1]));
    assert_eq!(a, b);
    let names: Vec<String> = a.iter().map(|(p, _)| p.display().to_string()).collect();
    assert_eq!(
        names,
        ["clusters.csv", "diagram_2016-02-23.csv", "diagram_2016-02-26.csv", "metadata.txt", "norms.csv"]
    );
    // 183 closes through 2016-07-01, 182 returns.
    let norms = String::from_utf8(a[4].1.clone()).unwrap();
    assert_eq!(norms.lines().count(), 1 + 182 - 4 - 50 + 2);
    let metadata = String::from_utf8(a[3].1.clone()).unwrap();
    assert!(metadata.contains("end_date = 2016-07-01\n"));
    assert!(metadata.contains("seed = 9\n"));
}

#[test]
fn simulate_default_preset_writes_2100_points() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(cli(&["simulate", "--preset", "paper-lorenz", "--seed", "7", "--out", out]), 0);
    let series = fs::read_to_string(dir.path().join("series.csv")).unwrap();
    assert_eq!(series.lines().next(), Some("index,x"));
    assert_eq!(series.lines().count(), 2101);
    let metadata = fs::read_to_string(dir.path().join("metadata.txt")).unwrap();
    assert!(metadata.contains("seed = 7\n"));
    assert!(metadata.contains("delta_m2 = 0.000028\n"));

    let again = tempfile::tempdir().unwrap();
    assert_eq!(cli(&["simulate", "--seed", "7", "--out", again.path().to_str().unwrap()]), 0);
    assert_eq!(dir_contents(dir.path()), dir_contents(again.path()));
}

#[test]
fn simulated_series_feeds_the_lorenz_preset() {
    let dir = tempfile::tempdir().unwrap();
    let sim = dir.path().join("sim");
    assert_eq!(cli(&["simulate", "--steps", "300", "--out", sim.to_str().unwrap()]), 0);
    let input = sim.join("series.csv");
    let norms = dir.path().join("norms.csv");
    let code = cli(&[
        "landscape", "--preset", "lorenz", "--input", input.to_str().unwrap(), "--out", norms.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let text = fs::read_to_string(&norms).unwrap();
    assert_eq!(text.lines().next(), Some("date,l1_norm,l1_diff"));
    assert_eq!(text.lines().count(), 1 + 300 - 4 - 100 + 2);

    let out = dir.path().join("analysis");
    let code = cli(&[
        "analyze", "--preset", "lorenz", "--input", input.to_str().unwrap(), "--end-date", "250", "--restarts", "5",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let clusters = fs::read_to_string(out.join("clusters.csv")).unwrap();
    assert_eq!(clusters.lines().next(), Some("date,f1,f2,cluster"));
    assert_eq!(clusters.lines().count(), 1 + 251 - 4 - 100 + 2);
}

#[test]
fn diagram_and_scan_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("d.csv");
    let code = cli(&["diagram", "--input", &fixture(), "--index", "0", "--out", file.to_str().unwrap()]);
    assert_eq!(code, 0);
    let text = fs::read_to_string(&file).unwrap();
    assert_eq!(text.lines().next(), Some("dimension,birth,death"));
    assert!(text.contains("\n0,0,inf\n"));
    assert_eq!(cli(&["diagram", "--input", &fixture(), "--index", "147"]), 1);

    let scan = dir.path().join("scan");
    let code = cli(&[
        "simulate", "--preset", "scan", "--n-params", "5", "--steps", "10", "--out", scan.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let table = fs::read_to_string(scan.join("bifurcation.csv")).unwrap();
    assert_eq!(table.lines().next(), Some("M2,x"));
    assert_eq!(table.lines().count(), 1 + 5 * 10);
}
