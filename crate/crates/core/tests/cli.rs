use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use degseq::io::{parse_degrees, parse_edges, parse_family, read_matrix_file};

fn degseq(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_degseq"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("DEGSEQ_ORACLE_CAP")
        .output()
        .expect("binary runs")
}

fn metadata(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("metadata.json")).unwrap()).unwrap()
}

#[test]
fn oracle_writes_family_and_exact_marginals() {
    let dir = tempfile::tempdir().unwrap();
    let out = degseq(&["oracle", "--degrees", "list:2,2,2,2"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let fam = parse_family(4, &fs::read_to_string(dir.path().join("family.txt")).unwrap()).unwrap();
    assert_eq!(fam.len(), 3);
    let w = read_matrix_file(&dir.path().join("w_star.csv"), 4).unwrap();
    assert!(w.upper().iter().all(|&x| (x - 2.0 / 3.0).abs() < 1e-12));
    assert_eq!(metadata(dir.path())["family_size"], 3);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = degseq(&["sample-gnd", "--degrees", "list:3,3,1,1"], dir.path());
    assert_eq!(out.status.code(), Some(2));

    let out = degseq(&["sample-gnd", "--mode", "exact", "--degrees", "regular:14,2"], dir.path());
    assert_eq!(out.status.code(), Some(3));

    let out = Command::new(env!("CARGO_BIN_EXE_degseq"))
        .args(["oracle", "--degrees", "list:1,1,1,1", "--out", dir.path().to_str().unwrap()])
        .env("DEGSEQ_ORACLE_CAP", "3")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));

    let out = degseq(&["sample-gnd", "--degrees", "/nonexistent/degrees.txt"], dir.path());
    assert_eq!(out.status.code(), Some(4));

    let out = degseq(&["sample-gnd", "--bogus"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn couple_emits_one_trace_per_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = degseq(
        &["couple", "--degrees", "regular:60,6", "--runs", "5", "--seed", "3", "--write-graphs"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.path().join("traces.ndjson")).unwrap();
    let lines: Vec<serde_json::Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 5);
    for (i, t) in lines.iter().enumerate() {
        assert_eq!(t["run"], i);
        assert!(t["I"].as_u64().is_some());
        assert!(t["fallback"].is_boolean());
        assert!(t["eta_min"].is_number());
        if t["fallback"] == false {
            assert_eq!(t["contained"], true);
        }
    }
    let meta = metadata(dir.path());
    assert!(meta["fallback_fraction"].as_f64().is_some());
    assert!(meta["wall_time_s"].as_f64().is_some());
    let g = parse_edges(60, &fs::read_to_string(dir.path().join("graphs/run_00000_G.txt")).unwrap()).unwrap();
    assert_eq!(g.degrees(), vec![6; 60]);
}

fn strip_wall_time(dir: &Path) -> String {
    let mut m = metadata(dir);
    m.as_object_mut().unwrap().remove("wall_time_s");
    m["config"].as_object_mut().unwrap().remove("out");
    m.to_string()
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["couple", "--degrees", "powerlaw:200,2.5,3,12", "--runs", "8", "--seed", "11"];
    assert!(degseq(&args, a.path()).status.success());
    assert!(degseq(&args, b.path()).status.success());
    for name in ["traces.ndjson", "marginals.csv"] {
        assert_eq!(
            fs::read(a.path().join(name)).unwrap(),
            fs::read(b.path().join(name)).unwrap(),
            "{name}"
        );
    }
    assert_eq!(strip_wall_time(a.path()), strip_wall_time(b.path()));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    fs::write(
        &cfg,
        "kind = \"sample-gnd\"\nruns = 3\nseed = 1\nmode = \"exact\"\n\n[degrees]\nkind = \"list\"\ndegrees = [2, 2, 2, 1, 1]\n",
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = degseq(
        &["sample-gnd", "--config", cfg.to_str().unwrap(), "--runs", "200", "--checkpoints", "1,2"],
        &out_dir,
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let meta = metadata(&out_dir);
    assert_eq!(meta["runs"], 200);
    assert_eq!(meta["marginal_reference"], "exact");
    assert!(meta["gof_p_value"].as_f64().is_some());
    assert!(out_dir.join("concentration.json").exists());
    let csv = fs::read_to_string(out_dir.join("marginals.csv")).unwrap();
    assert!(csv.starts_with("j,k,frequency,reference,z\n"));
}

#[test]
fn degree_file_input_and_gnw_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let dpath = dir.path().join("d.txt");
    fs::write(&dpath, "2\n2\n2\n").unwrap();
    assert_eq!(parse_degrees("2\n2\n2\n").unwrap().degrees(), &[2, 2, 2]);
    let mpath = dir.path().join("w.csv");
    fs::write(&mpath, "i,j,value\n0,1,1\n0,2,0\n1,2,1\n").unwrap();
    let out_dir = dir.path().join("out");
    let out = degseq(
        &[
            "sample-gnw",
            "--degrees",
            dpath.to_str().unwrap(),
            "--matrix",
            mpath.to_str().unwrap(),
            "--runs",
            "100",
            "--write-graphs",
        ],
        &out_dir,
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let g = parse_edges(3, &fs::read_to_string(out_dir.join("graphs/run_00042.txt")).unwrap()).unwrap();
    assert_eq!(g.edge_count(), 2);
    assert_eq!(metadata(&out_dir)["marginals"]["exact_mismatches"], 0);
}

#[test]
fn seq_approx_p_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let out = degseq(
        &["seq-approx-p", "--degrees", "regular:10,3", "--runs", "500", "--zeta", "0.2", "--zeta-prime", "0.1"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let meta = metadata(dir.path());
    assert_eq!(meta["params"]["zeta"], 0.2);
    assert!((meta["params"]["lambda"].as_f64().unwrap() - 0.9 * 15.0).abs() < 1e-12);
    assert!(meta["marginals"]["worst_abs_z"].as_f64().unwrap() < 4.5);
}
