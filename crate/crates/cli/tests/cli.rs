use std::fs;
use std::path::{Path, PathBuf};

use htsbayes::model::UnitKind;
use htsbayes_cli::config::RunConfig;
use htsbayes_cli::io::{
    load_plate_file, read_records, read_screen, read_summaries, read_truth, write_plate_file,
    write_screen, write_summaries, write_truth, ListRecord, RhatRecord,
};
use htsbayes_cli::{dispatch, EXIT_OK, EXIT_RUNTIME, EXIT_USAGE};
use tempfile::TempDir;

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/two_plates.csv")
}

fn run(args: &[&str]) -> i32 {
    dispatch(std::iter::once("htsbayes").chain(args.iter().copied()))
}

fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

/// The fixture with one line replaced, written into `dir`.
fn edited_fixture(dir: &Path, line: usize, edit: impl Fn(&str) -> String) -> PathBuf {
    let text = fs::read_to_string(fixture()).unwrap();
    let lines: Vec<String> = text
        .lines()
        .enumerate()
        .map(|(k, l)| {
            if k + 1 == line {
                edit(l)
            } else {
                l.to_string()
            }
        })
        .collect();
    let path = dir.join("plates.csv");
    fs::write(&path, lines.join("\n") + "\n").unwrap();
    path
}

fn files_in(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                fs::read(e.path()).unwrap(),
            )
        })
        .filter(|(name, _)| name != "manifest.txt")
        .collect();
    out.sort();
    out
}

#[test]
fn fixture_loads_with_expected_counts() {
    let set = load_plate_file(&fixture(), None).unwrap();
    assert_eq!(set.plates().len(), 2);
    assert_eq!(set.replicates(), 2);
    let wells: Vec<_> = set.wells().collect();
    assert_eq!(wells.len(), 96);
    let shrnas = wells
        .iter()
        .filter(|(_, w)| matches!(w.kind, UnitKind::Shrna { .. }))
        .count();
    assert_eq!(shrnas, 72);
    assert_eq!(wells.len() - shrnas, 24);
}

#[test]
fn declared_geometry_must_match() {
    assert!(load_plate_file(&fixture(), Some((6, 8))).is_ok());
    assert!(load_plate_file(&fixture(), Some((16, 24))).is_ok());
    assert!(load_plate_file(&fixture(), Some((4, 8))).is_err());
}

#[test]
fn negative_value_reports_its_line() {
    let dir = TempDir::new().unwrap();
    let path = edited_fixture(dir.path(), 40, |l| {
        let (head, _) = l.rsplit_once(',').unwrap();
        format!("{head},-0.5")
    });
    let err = format!("{:#}", load_plate_file(&path, None).unwrap_err());
    assert!(err.contains("line 40"), "{err}");
}

#[test]
fn malformed_row_reports_its_line() {
    let dir = TempDir::new().unwrap();
    let path = edited_fixture(dir.path(), 17, |l| l.replacen(",", ",x", 1));
    let err = format!("{:#}", load_plate_file(&path, None).unwrap_err());
    assert!(err.contains("line 17"), "{err}");
}

#[test]
fn shrna_moved_between_replicates_is_a_layout_error() {
    let dir = TempDir::new().unwrap();
    // Line 7 is replicate 1 of sh01 at (P1, 1, 2); give that replicate a
    // different shRNA so the position disagrees across replicates.
    let path = edited_fixture(dir.path(), 7, |l| l.replace("sh01", "sh02"));
    let original = fs::read_to_string(fixture()).unwrap();
    assert!(original
        .lines()
        .nth(6)
        .unwrap()
        .starts_with("P1,1,2,viability,2,shrna"));
    let err = format!("{:#}", load_plate_file(&path, None).unwrap_err());
    assert!(err.contains("plate P1, row 1, col 2"), "{err}");
}

#[test]
fn wrong_header_is_rejected() {
    let dir = TempDir::new().unwrap();
    let path = edited_fixture(dir.path(), 1, |l| l.replace("value", "reading"));
    assert!(load_plate_file(&path, None).is_err());
}

#[test]
fn plate_file_round_trips() {
    let dir = TempDir::new().unwrap();
    let set = load_plate_file(&fixture(), None).unwrap();
    let path = dir.path().join("copy.csv");
    write_plate_file(&path, &set).unwrap();
    assert_eq!(load_plate_file(&path, None).unwrap(), set);
}

#[test]
fn preprocess_writes_screen_and_manifest() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("pp");
    let code = run(&[
        "preprocess",
        "--input",
        path_str(&fixture()),
        "--out",
        path_str(&out),
    ]);
    assert_eq!(code, EXIT_OK);
    let manifest = fs::read_to_string(out.join("manifest.txt")).unwrap();
    assert!(manifest.contains("command=preprocess"));
    assert!(manifest.contains("count.input_wells=96"));
    assert!(manifest.contains("count.output_shrnas=72"));
    let data = read_screen(&out.join("screen.csv")).unwrap();
    assert_eq!(data.n_replicates(), 2);

    let copy = dir.path().join("copy.csv");
    write_screen(&copy, &data).unwrap();
    assert_eq!(read_screen(&copy).unwrap(), data);
    assert_eq!(
        fs::read(&copy).unwrap(),
        fs::read(out.join("screen.csv")).unwrap()
    );
}

#[test]
fn simulate_twice_gives_identical_files() {
    let dir = TempDir::new().unwrap();
    let outs = [dir.path().join("a"), dir.path().join("b")];
    for out in &outs {
        let code = run(&[
            "simulate",
            "--scenario",
            "s1",
            "--units",
            "1000",
            "--active",
            "50",
            "--seed",
            "7",
            "--out",
            path_str(out),
        ]);
        assert_eq!(code, EXIT_OK);
    }
    let a = files_in(&outs[0]);
    assert_eq!(a.len(), 2);
    assert_eq!(a, files_in(&outs[1]));
}

#[test]
fn simulated_csvs_round_trip() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("sim");
    let code = run(&[
        "simulate",
        "--scenario",
        "s2",
        "--units",
        "120",
        "--active",
        "12",
        "--replicates",
        "3",
        "--seed",
        "5",
        "--out",
        path_str(&out),
    ]);
    assert_eq!(code, EXIT_OK);

    let data = read_screen(&out.join("screen.csv")).unwrap();
    assert_eq!(data.n_units(), 120);
    assert_eq!(data.n_replicates(), 3);
    let copy = dir.path().join("screen.csv");
    write_screen(&copy, &data).unwrap();
    assert_eq!(
        fs::read(&copy).unwrap(),
        fs::read(out.join("screen.csv")).unwrap()
    );

    let (names, truth) = read_truth(&out.join("truth.csv")).unwrap();
    assert_eq!(truth.gamma.iter().filter(|&&g| g).count(), 12);
    let unit_names: Vec<String> = data.units().iter().map(|u| u.name.clone()).collect();
    assert_eq!(names, unit_names);
    let copy = dir.path().join("truth.csv");
    write_truth(&copy, data.units(), &truth).unwrap();
    assert_eq!(
        fs::read(&copy).unwrap(),
        fs::read(out.join("truth.csv")).unwrap()
    );
}

#[test]
fn fit_report_and_rerun_from_manifest() {
    let dir = TempDir::new().unwrap();
    let sim = dir.path().join("sim");
    let fit = dir.path().join("fit");
    let rep = dir.path().join("rep");
    assert_eq!(
        run(&[
            "simulate",
            "--scenario",
            "s3",
            "--units",
            "300",
            "--active",
            "30",
            "--seed",
            "11",
            "--out",
            path_str(&sim),
        ]),
        EXIT_OK
    );
    let screen = sim.join("screen.csv");
    assert_eq!(
        run(&[
            "fit",
            "--input",
            path_str(&screen),
            "--iterations",
            "3000",
            "--burn-in",
            "1500",
            "--chains",
            "2",
            "--out",
            path_str(&fit),
        ]),
        EXIT_OK
    );
    for name in [
        "summary.csv",
        "traces_chain0.csv",
        "traces_chain1.csv",
        "rhat.csv",
        "fit.txt",
    ] {
        assert!(fit.join(name).is_file(), "{name} missing");
    }
    let rhat: Vec<RhatRecord> = read_records(&fit.join("rhat.csv")).unwrap();
    assert!(rhat
        .iter()
        .any(|r| r.parameter == "alpha0" && r.rhat.is_some()));

    let data = read_screen(&screen).unwrap();
    let summaries = read_summaries(&fit.join("summary.csv"), data.units()).unwrap();
    let copy = dir.path().join("summary.csv");
    write_summaries(&copy, data.units(), &summaries).unwrap();
    assert_eq!(
        fs::read(&copy).unwrap(),
        fs::read(fit.join("summary.csv")).unwrap()
    );

    assert_eq!(
        run(&[
            "report",
            "--screen",
            path_str(&screen),
            "--summary",
            path_str(&fit.join("summary.csv")),
            "--fix-rate",
            "0.05",
            "--out",
            path_str(&rep),
        ]),
        EXIT_OK
    );
    let list: Vec<ListRecord> = read_records(&rep.join("list.csv")).unwrap();
    assert!(!list.is_empty());
    let pfdr = list.iter().map(|r| r.null_prob).sum::<f64>() / list.len() as f64;
    assert!(pfdr < 0.05, "recomputed PFDR {pfdr}");

    let rerun = dir.path().join("fit_again");
    assert_eq!(
        run(&[
            "fit",
            "--config",
            path_str(&fit.join("manifest.txt")),
            "--out",
            path_str(&rerun),
        ]),
        EXIT_OK
    );
    assert_eq!(files_in(&fit), files_in(&rerun));
}

#[test]
fn manifest_reproduces_configuration() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("sim");
    assert_eq!(
        run(&[
            "simulate",
            "--set",
            "units=80",
            "--set",
            "active=8",
            "--seed",
            "3",
            "--out",
            path_str(&out),
        ]),
        EXIT_OK
    );
    let manifest = out.join("manifest.txt");
    let cfg = RunConfig::from_file(&manifest).unwrap();
    assert_eq!(cfg.raw("units"), "80");
    assert_eq!(cfg.raw("seed"), "3");
    assert_eq!(cfg.raw("out"), path_str(&out));
}

#[test]
fn flags_win_over_set_and_config() {
    let dir = TempDir::new().unwrap();
    let cfg_path = dir.path().join("run.cfg");
    fs::write(&cfg_path, "# comment\nunits=50\nactive=5\nseed=1\n").unwrap();
    let out = dir.path().join("sim");
    assert_eq!(
        run(&[
            "simulate",
            "--config",
            path_str(&cfg_path),
            "--set",
            "seed=2",
            "--seed",
            "9",
            "--out",
            path_str(&out),
        ]),
        EXIT_OK
    );
    let cfg = RunConfig::from_file(&out.join("manifest.txt")).unwrap();
    assert_eq!(cfg.raw("seed"), "9");
    assert_eq!(cfg.raw("units"), "50");
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["bogus"]), EXIT_USAGE);
    assert_eq!(run(&["simulate", "--no-such-flag"]), EXIT_USAGE);
    assert_eq!(
        run(&["simulate", "--set", "no_such_key=1", "--out", "x"]),
        EXIT_USAGE
    );
    assert_eq!(run(&["fit", "--out", "x"]), EXIT_USAGE);
    assert_eq!(run(&[]), EXIT_USAGE);
}

#[test]
fn stage_failures_exit_one() {
    let dir = TempDir::new().unwrap();
    let path = edited_fixture(dir.path(), 40, |l| {
        let (head, _) = l.rsplit_once(',').unwrap();
        format!("{head},-0.5")
    });
    let code = run(&[
        "preprocess",
        "--input",
        path_str(&path),
        "--out",
        path_str(&dir.path().join("pp")),
    ]);
    assert_eq!(code, EXIT_RUNTIME);
}
