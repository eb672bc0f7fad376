use std::path::Path;
use std::process::{Command, Output};

use morrey_bilinear::grid::{read_mgf, write_mgf, Grid, GridFunction};

fn morrey(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_morrey")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write_ones(path: &Path, depth: u32) {
    let f = GridFunction::inferred(Grid::unit(1, depth).unwrap(), vec![1.0; 1 << depth]).unwrap();
    write_mgf(&f, std::fs::File::create(path).unwrap()).unwrap();
}

#[test]
fn help_exits_zero() {
    assert_eq!(morrey(&["--help"]).status.code(), Some(0));
}

#[test]
fn bad_usage_exits_two() {
    assert_eq!(morrey(&[]).status.code(), Some(2));
    assert_eq!(morrey(&["norm", "--morrey", "--weak"]).status.code(), Some(2));
    assert_eq!(morrey(&["norm", "--morrey", "--p", "2", "--q", "1"]).status.code(), Some(2));
}

#[test]
fn failed_hypothesis_names_the_relation() {
    let o = morrey(&["experiment", "sharpness", "--alpha", "0.3", "--p1", "4", "--q1", "2", "--p2", "4", "--q2", "2", "--t", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("t/s"));
}

#[test]
fn norm_of_constant_function() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("f.mgf");
    write_ones(&f, 5);
    let o = morrey(&["norm", "--morrey", "--p", "2", "--q", "1", "--in", f.to_str().unwrap(), "--family", "all"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains('1'));

    let o = morrey(&["norm", "--lebesgue", "--p", "2", "--in", f.to_str().unwrap(), "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim().lines().last().unwrap()).unwrap();
    assert!(v.is_object());
}

#[test]
fn operator_output_round_trips_through_mgf() {
    let dir = tempfile::tempdir().unwrap();
    let (f, out) = (dir.path().join("f.mgf"), dir.path().join("b.mgf"));
    write_ones(&f, 6);
    let fs = f.to_str().unwrap();
    let o = morrey(&["op", "--op", "b-alpha", "--alpha", "0.5", "--in", fs, "--in2", fs, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let b = read_mgf(std::io::BufReader::new(std::fs::File::open(&out).unwrap())).unwrap();
    let mid = b.value_at(&[0.5]);
    assert!((mid - 8f64.sqrt()).abs() < 0.02 * 8f64.sqrt(), "{mid}");

    let mut again = Vec::new();
    write_mgf(&b, &mut again).unwrap();
    assert_eq!(again, std::fs::read(&out).unwrap());
}

#[test]
fn experiment_csv_is_deterministic_and_mirrored_as_json() {
    let args = ["experiment", "sharpness", "--alpha", "0.3", "--p1", "4", "--q1", "2", "--p2", "4", "--q2", "2", "--t", "5"];
    let a = morrey(&args);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(stdout(&a), stdout(&morrey(&args)));
    let header = stdout(&a).lines().next().unwrap().to_string();
    assert!(header.contains(','), "{header}");

    let mut json = args.to_vec();
    json.push("--json");
    let j = morrey(&json);
    assert_eq!(j.status.code(), Some(0));
    let rows = stdout(&j).lines().filter(|l| l.starts_with('{')).count();
    assert!(rows >= 5);
}

#[test]
fn saved_config_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["char", "--weights", "random", "--dim", "1", "--depth", "4", "--seed", "3", "--alpha", "1/2", "--q1", "6/5", "--q2", "6/5", "--p", "5/8", "--s", "5/7", "--t", "24/35", "--r", "10/3", "--a", "51/50"];
    let direct = morrey(&args);
    assert_eq!(direct.status.code(), Some(0), "{}", String::from_utf8_lossy(&direct.stderr));
    let mut print = args.to_vec();
    print.insert(0, "--print-config");
    let cfg = morrey(&print);
    assert_eq!(cfg.status.code(), Some(0), "{}", String::from_utf8_lossy(&cfg.stderr));
    let path = dir.path().join("run.json");
    std::fs::write(&path, cfg.stdout).unwrap();
    let replay = morrey(&["--config", path.to_str().unwrap()]);
    assert_eq!(replay.status.code(), direct.status.code());
    assert_eq!(stdout(&replay), stdout(&direct));
}
