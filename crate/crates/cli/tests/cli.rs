use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/fixtures/golden")
        .join(name)
}

/// A command with every `OALENS_*` variable cleared so the host
/// environment cannot leak in.
fn oalens() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_oalens"));
    for (k, _) in std::env::vars() {
        if k.starts_with("OALENS_") {
            cmd.env_remove(k);
        }
    }
    cmd
}

fn golden_args(cmd: &mut Command, sub: &str, out: &Path) {
    inputs(
        cmd,
        sub,
        out,
        &fixture("evidence.jsonl"),
        &fixture("publications.csv"),
    );
}

fn inputs(cmd: &mut Command, sub: &str, out: &Path, evidence: &Path, publications: &Path) {
    cmd.arg(sub)
        .arg("--evidence")
        .arg(evidence)
        .arg("--publications")
        .arg(publications)
        .arg("--journals")
        .arg(fixture("journals.csv"))
        .arg("--out-dir")
        .arg(out);
    if sub != "classify" {
        cmd.arg("--institutions").arg(fixture("institutions.csv"));
    }
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn golden_bundle_through_the_binary() {
    let out = tempfile::tempdir().unwrap();
    for sub in ["report", "classify"] {
        let mut cmd = oalens();
        golden_args(&mut cmd, sub, out.path());
        cmd.args(["--min-universities", "2", "--min-universities-gold", "2"]);
        let res = cmd.output().unwrap();
        assert_eq!(code(&res), 0, "{}", stderr(&res));
    }
    assert_eq!(
        read_dir_sorted(out.path()),
        read_dir_sorted(&fixture("expected"))
    );
}

#[test]
fn environment_variables_set_flags() {
    let out = tempfile::tempdir().unwrap();
    let mut cmd = oalens();
    golden_args(&mut cmd, "aggregate", out.path());
    cmd.env("OALENS_MIN_UNIVERSITIES", "2")
        .env("OALENS_FORMAT", "jsonl");
    let res = cmd.output().unwrap();
    assert_eq!(code(&res), 0, "{}", stderr(&res));
    let medians = fs::read_to_string(out.path().join("country_medians.jsonl")).unwrap();
    assert!(medians.lines().count() > 0);
    assert!(medians.lines().all(|l| l.starts_with(r#"{"country":"BR""#)));
    assert!(!out.path().join("country_medians.csv").exists());
}

#[test]
fn flags_override_environment() {
    let out = tempfile::tempdir().unwrap();
    let mut cmd = oalens();
    golden_args(&mut cmd, "aggregate", out.path());
    cmd.env("OALENS_FORMAT", "jsonl").args(["--format", "csv"]);
    let res = cmd.output().unwrap();
    assert_eq!(code(&res), 0, "{}", stderr(&res));
    assert!(out.path().join("overlap.csv").exists());
}

#[test]
fn shard_count_does_not_change_output() {
    let dirs: Vec<_> = ["1", "2", "7"]
        .iter()
        .map(|shards| {
            let out = tempfile::tempdir().unwrap();
            for sub in ["report", "classify"] {
                let mut cmd = oalens();
                golden_args(&mut cmd, sub, out.path());
                cmd.args(["--shards", shards]);
                assert_eq!(code(&cmd.output().unwrap()), 0);
            }
            read_dir_sorted(out.path())
        })
        .collect();
    assert_eq!(dirs[0], dirs[1]);
    assert_eq!(dirs[0], dirs[2]);
}

#[test]
fn missing_input_exits_1_and_names_the_path() {
    let out = tempfile::tempdir().unwrap();
    let missing = out.path().join("no-such-dump.jsonl.gz");
    let res = oalens()
        .args(["classify", "--evidence"])
        .arg(&missing)
        .arg("--publications")
        .arg(fixture("publications.csv"))
        .arg("--out-dir")
        .arg(out.path())
        .output()
        .unwrap();
    assert_eq!(code(&res), 1);
    assert!(
        stderr(&res).contains("no-such-dump.jsonl.gz"),
        "{}",
        stderr(&res)
    );
}

#[test]
fn configuration_errors_exit_2() {
    let out = tempfile::tempdir().unwrap();

    let mut cmd = oalens();
    cmd.arg("aggregate")
        .arg("--evidence")
        .arg(fixture("evidence.jsonl"))
        .arg("--publications")
        .arg(fixture("publications.csv"))
        .arg("--out-dir")
        .arg(out.path());
    let res = cmd.output().unwrap();
    assert_eq!(code(&res), 2);
    assert!(stderr(&res).contains("--institutions"));

    for bad in [
        ["--period", "2017-2014"],
        ["--shards", "0"],
        ["--max-issue-rate", "1.5"],
        ["--format", "xml"],
    ] {
        let mut cmd = oalens();
        golden_args(&mut cmd, "report", out.path());
        cmd.args(bad);
        assert_eq!(code(&cmd.output().unwrap()), 2, "{bad:?}");
    }
}

#[test]
fn schema_violations_above_ceiling_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let evidence = dir.path().join("evidence.jsonl");
    let good = fs::read_to_string(fixture("evidence.jsonl")).unwrap();
    fs::write(&evidence, format!("{good}{}", "{not json\n".repeat(10))).unwrap();

    let mut cmd = oalens();
    inputs(
        &mut cmd,
        "report",
        &dir.path().join("out"),
        &evidence,
        &fixture("publications.csv"),
    );
    let res = cmd.output().unwrap();
    assert_eq!(code(&res), 3, "{}", stderr(&res));
    assert!(stderr(&res).contains("evidence"));

    // The same input passes with a looser ceiling.
    let mut cmd = oalens();
    inputs(
        &mut cmd,
        "report",
        &dir.path().join("out"),
        &evidence,
        &fixture("publications.csv"),
    );
    cmd.args(["--max-issue-rate", "0.5"]);
    assert_eq!(code(&cmd.output().unwrap()), 0);
}

#[test]
fn missing_required_column_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let pubs = dir.path().join("publications.csv");
    fs::write(&pubs, "pub_id,doi,year,doc_type\np1,10.1/x,2015,article\n").unwrap();
    let mut cmd = oalens();
    inputs(
        &mut cmd,
        "classify",
        &dir.path().join("out"),
        &fixture("evidence.jsonl"),
        &pubs,
    );
    let res = cmd.output().unwrap();
    assert_eq!(code(&res), 3);
    assert!(stderr(&res).contains("field_ids"), "{}", stderr(&res));
}

#[test]
fn empty_publication_table_gives_empty_tables() {
    let dir = tempfile::tempdir().unwrap();
    let pubs = dir.path().join("publications.csv");
    fs::write(
        &pubs,
        "pub_id,doi,year,doc_type,language,journal_id,institution_ids,field_ids\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    for sub in ["report", "classify"] {
        let mut cmd = oalens();
        inputs(&mut cmd, sub, &out, &fixture("evidence.jsonl"), &pubs);
        let res = cmd.output().unwrap();
        assert_eq!(code(&res), 0, "{}", stderr(&res));
    }
    let classifications = fs::read_to_string(out.join("classifications.csv")).unwrap();
    assert_eq!(
        classifications,
        "pub_id,doi,gold,green,hybrid,bronze,any_oa\r\n"
    );
    let indicators = fs::read_to_string(out.join("university_indicators.csv")).unwrap();
    assert_eq!(indicators.lines().count(), 1);
    let overlap = fs::read_to_string(out.join("overlap.csv")).unwrap();
    assert!(overlap.contains("gold,0,,0,,0"), "{overlap}");
}
