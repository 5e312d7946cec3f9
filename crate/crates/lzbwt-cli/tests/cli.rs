use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use tempfile::TempDir;

const FIG1: &str = "bbabaababababaababa$";

fn lzbwt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lzbwt"))
        .args(args)
        .env_remove("LZBWT_SEED")
        .env_remove("LZBWT_FORMAT")
        .output()
        .expect("binary runs")
}

fn path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).display().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &TempDir, name: &str, body: &str) -> String {
    let p = path(dir, name);
    fs::write(&p, body).unwrap();
    p
}

#[test]
fn measure_figure_one() {
    let dir = TempDir::new().unwrap();
    let t = write(&dir, "fig1.txt", FIG1);
    let o = lzbwt(&["measure", &t]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let line = stdout(&o);
    assert!(line.contains("r=8") && line.contains("z=8"), "{line}");

    let o = lzbwt(&["--format", "json", "measure", &t]);
    let rows: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(rows[0]["report"]["r"], 8);
    assert_eq!(rows[0]["report"]["z"], 8);
}

#[test]
fn measure_empty_file_is_rejected() {
    let dir = TempDir::new().unwrap();
    let t = write(&dir, "empty.txt", "");
    let o = lzbwt(&["measure", &t]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("empty input"));
}

#[test]
fn measure_directory() {
    let dir = TempDir::new().unwrap();
    for i in 0..10u64 {
        let t = lzbwt::corpus::random_text(i, 100 + 10 * i as usize, 4);
        fs::write(dir.path().join(format!("t{i:02}.txt")), t.to_raw()).unwrap();
    }
    let o = lzbwt(&["--format", "csv", "measure", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let texts: std::collections::BTreeSet<&str> = out.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(texts.len(), 10);
    let o = lzbwt(&["measure", dir.path().to_str().unwrap()]);
    assert_eq!(stdout(&o).lines().count(), 10);
}

#[test]
fn gen_small_delta_length() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "small.txt");
    let o = lzbwt(&["gen", "--family", "small", "--delta", "4", "--n", "16", "--out", &out]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(fs::read(&out).unwrap().len(), 41);
    let o = lzbwt(&["gen", "--family", "small", "--delta", "5", "--n", "16", "--out", &out]);
    assert_eq!(o.status.code(), Some(3));
    let db = path(&dir, "db.txt");
    let o = lzbwt(&["gen", "--family", "debruijn", "--sigma", "2", "--k", "3", "--out", &db]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(fs::read(&db).unwrap().len(), 9);
}

fn parse_file(dir: &TempDir, body: &str) -> String {
    let t = write(dir, "text.txt", body);
    let p = path(dir, "text.lz77");
    assert_eq!(lzbwt(&["parse", "--text", &t, "--out", &p]).status.code(), Some(0));
    p
}

#[test]
fn convert_figure_one_verifies() {
    let dir = TempDir::new().unwrap();
    let p = parse_file(&dir, FIG1);
    assert_eq!(fs::read_to_string(&p).unwrap().lines().count(), 8);
    let out = path(&dir, "fig1.rlbwt");
    let o = lzbwt(&["convert", "--parse", &p, "--out", &out, "--verify"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read_to_string(&out).unwrap(), "1 a\n6 b\n1 a\n2 b\n6 a\n1 b\n2 a\n1 $\n");
}

#[test]
fn convert_is_deterministic_for_a_seed() {
    let dir = TempDir::new().unwrap();
    let body = String::from_utf8(lzbwt::corpus::fibonacci_word(400)).unwrap() + "$";
    let p = parse_file(&dir, &body);
    let (a, b) = (path(&dir, "a.rlbwt"), path(&dir, "b.rlbwt"));
    for (out, seed) in [(&a, "7"), (&b, "7")] {
        assert_eq!(lzbwt(&["--seed", seed, "convert", "--parse", &p, "--out", out, "--verify"]).status.code(), Some(0));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn convert_verify_catches_corruption() {
    let dir = TempDir::new().unwrap();
    let p = parse_file(&dir, FIG1);
    let out = path(&dir, "bad.rlbwt");
    let o = lzbwt(&["convert", "--parse", &p, "--out", &out, "--verify", "--inject-fault"]);
    assert_eq!(o.status.code(), Some(2));
    let o = lzbwt(&["convert", "--parse", &p, "--out", &out, "--inject-fault"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn convert_rejects_bad_parse() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "bad.lz77", "L a\nC 5 2\n");
    let o = lzbwt(&["convert", "--parse", &p, "--out", &path(&dir, "x")]);
    assert_eq!(o.status.code(), Some(3));
    let o = lzbwt(&["convert", "--parse", &path(&dir, "missing.lz77"), "--out", &path(&dir, "x")]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn index_queries() {
    let dir = TempDir::new().unwrap();
    let t = write(&dir, "fig1.txt", FIG1);
    let g = path(&dir, "fig1.g");
    assert_eq!(lzbwt(&["index", "build", &t, "--out", &g]).status.code(), Some(0));
    let q = |op: &str, start: &str, len: &str| -> serde_json::Value {
        let o = lzbwt(&["index", "query", &g, "--op", op, "--pat-start", start, "--pat-len", len]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        serde_json::from_slice(&o.stdout).unwrap()
    };
    assert_eq!(q("count", "1", "20")["count"], 1);
    assert_eq!(q("count", "3", "2")["count"], 7);
    assert_eq!(q("report", "3", "2")["occurrences"], serde_json::json!([3, 6, 8, 10, 12, 15, 17]));
    assert_eq!(q("leftmost", "10", "2")["position"], 3);
    assert_eq!(q("rightmost", "3", "2")["position"], 17);

    let p = parse_file(&dir, FIG1);
    let g2 = path(&dir, "fig1-from-parse.g");
    assert_eq!(lzbwt(&["index", "build", &p, "--parse", "--out", &g2]).status.code(), Some(0));
    assert_eq!(fs::read(&g).unwrap(), fs::read(&g2).unwrap());

    let o = lzbwt(&["index", "query", &g, "--op", "count", "--pat-start", "19", "--pat-len", "5"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn usage_errors_exit_three() {
    assert_eq!(lzbwt(&["frobnicate"]).status.code(), Some(3));
    assert_eq!(lzbwt(&["--help"]).status.code(), Some(0));
    let o = Command::new(env!("CARGO_BIN_EXE_lzbwt"))
        .args(["measure", "x"])
        .env("LZBWT_RETRY_LIMIT", "0")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
    assert!(Path::new(env!("CARGO_BIN_EXE_lzbwt")).exists());
}
