use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use proptest::prelude::*;
use siet_cli::spec::{emit_spec, parse_spec};

fn spec_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../specs")
        .join(name)
}

fn siet(args: &[&str], spec: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_siet"))
        .args(args)
        .arg(spec)
        .arg("--out")
        .arg(out)
        .output()
        .expect("spawn siet")
}

fn write_spec(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("spec.toml");
    std::fs::write(&path, text).unwrap();
    path
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(str::to_owned).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(str::to_owned).collect())
        .collect();
    (header, rows)
}

const SINGLE: &str = "task = \"pp\"\nenergy = \"hamming\"\n\n[[channels]]\nkind = \"bsc\"\neps = 0.12\n\n[constraints]\n";

#[test]
fn plot_capacity_is_the_smallest_rate() {
    let tmp = tempfile::tempdir().unwrap();
    let out = siet(&["run"], &spec_path("two-receiver.toml"), tmp.path());
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let (header, rows) = read_csv(&tmp.path().join("plot.csv"));
    assert_eq!(header, ["B", "C", "I_1", "I_2"]);
    assert_eq!(rows.len(), 71);
    for row in rows {
        let v: Vec<f64> = row.iter().map(|s| s.parse().unwrap()).collect();
        assert!((v[1] - v[2].min(v[3])).abs() <= 1e-12, "{row:?}");
    }
    let meta: serde_json::Value =
        serde_json::from_slice(&std::fs::read(tmp.path().join("run.json")).unwrap()).unwrap();
    assert_eq!(meta["task"], "multicast");
    assert!(meta.get("wall_time_s").is_none());
}

#[test]
fn segmentation_table_lists_every_partition() {
    let tmp = tempfile::tempdir().unwrap();
    let out = siet(&["run"], &spec_path("segmentation.toml"), tmp.path());
    assert_eq!(out.status.code(), Some(0));
    let (header, rows) = read_csv(&tmp.path().join("segmentation.csv"));
    let partition = header.iter().position(|h| h == "partition").unwrap();
    let winner = header.iter().position(|h| h == "winner").unwrap();
    assert_eq!(rows.len(), 3 * 8);
    for chunk in rows.chunks(3) {
        let names: Vec<&str> = chunk.iter().map(|r| r[partition].as_str()).collect();
        assert_eq!(names, ["{1,2}{3}", "{1,3}{2}", "{1}{2,3}"]);
        assert_eq!(chunk.iter().filter(|r| r[winner] == "*").count(), 1);
    }
}

#[test]
fn infeasible_constraint_exits_with_2() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = write_spec(tmp.path(), &format!("{SINGLE}b = 0.95\n"));
    let out = siet(&["run"], &spec, &tmp.path().join("out"));
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("0.88"));
}

#[test]
fn malformed_spec_exits_with_3() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = write_spec(tmp.path(), &format!("{SINGLE}b = -1.0\n"));
    assert_eq!(
        siet(&["run"], &spec, &tmp.path().join("o")).status.code(),
        Some(3)
    );

    let spec = write_spec(tmp.path(), "task = \"pp\"\nenergy = [\n");
    let out = siet(&["run"], &spec, &tmp.path().join("o"));
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));

    let missing = tmp.path().join("absent.toml");
    assert_eq!(
        siet(&["run"], &missing, &tmp.path().join("o"))
            .status
            .code(),
        Some(3)
    );
}

#[test]
fn verify_reports_every_probe() {
    let tmp = tempfile::tempdir().unwrap();
    let text = format!(
        "{}grid = {{ start = 0.0, stop = 0.8, steps = 3 }}\n\n[verify]\ntrials = 50\nproduct_step = 0.01\n",
        SINGLE.replace("\"pp\"", "\"verify\"")
    );
    let spec = write_spec(tmp.path(), &text);
    let out = siet(&["verify"], &spec, &tmp.path().join("out"));
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let (header, rows) = read_csv(&tmp.path().join("out/verify.csv"));
    let passed = header.iter().position(|h| h == "passed").unwrap();
    assert!(rows.iter().all(|r| r[passed] == "true"), "{rows:?}");
    for probe in ["grid_oracle", "upper_bound", "concavity", "letterization"] {
        assert!(rows.iter().any(|r| r[0] == probe), "missing {probe}");
    }
}

fn channel() -> impl Strategy<Value = String> {
    prop_oneof![
        (0.0..0.5f64).prop_map(|e| format!("kind = \"bsc\"\neps = {e:?}\n")),
        (0.0..1.0f64).prop_map(|e| format!("kind = \"z\"\neps0 = {e:?}\n")),
        (0.0..1.0f64, 0.0..1.0f64).prop_map(|(a, b)| format!(
            "kind = \"matrix\"\nrows = [[{a:?}, {:?}], [{b:?}, {:?}]]\n",
            1.0 - a,
            1.0 - b
        )),
    ]
}

fn constraints() -> impl Strategy<Value = String> {
    prop_oneof![
        (0.0..1.0f64).prop_map(|b| format!("b = {b:?}\n")),
        (0.0..0.5f64, 0.5..1.0f64, 2usize..100).prop_map(|(a, b, n)| format!(
            "grid = {{ start = {a:?}, stop = {b:?}, steps = {n} }}\n"
        )),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn emitted_specs_parse_back(chs in prop::collection::vec(channel(), 1..4), c in constraints(), k in 0usize..3) {
        let k = 1 + k % chs.len();
        let mut text = String::from("task = \"segment\"\nenergy = \"hamming\"\n");
        for ch in &chs {
            text.push_str("\n[[channels]]\n");
            text.push_str(ch);
        }
        text.push_str("\n[constraints]\n");
        text.push_str(&c);
        text.push_str(&format!("\n[segment]\nk = {k}\nobjective = \"loss\"\n"));
        let spec = parse_spec(&text).unwrap();
        prop_assert_eq!(parse_spec(&emit_spec(&spec)).unwrap(), spec);
    }
}
