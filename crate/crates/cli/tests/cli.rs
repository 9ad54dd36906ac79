use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

fn qconv(args: &[&str], stdin: Option<&[u8]>) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_qconv"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    {
        let mut pipe = child.stdin.take().unwrap();
        if let Some(bytes) = stdin {
            pipe.write_all(bytes).unwrap();
        }
    }
    child.wait_with_output().unwrap()
}

fn ok(args: &[&str], stdin: Option<&[u8]>) -> Vec<u8> {
    let o = qconv(args, stdin);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    o.stdout
}

fn error_code(o: &Output) -> String {
    let v: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    v["error"].as_str().unwrap().to_string()
}

#[test]
fn d6_pipeline_prints_entangling_power() {
    let u = ok(&["family", "d6"], None);
    let text = String::from_utf8(ok(&["metrics", "gate"], Some(&u))).unwrap();
    let line = text.lines().find(|l| l.starts_with("e_p\t")).unwrap();
    let cols: Vec<&str> = line.split('\t').collect();
    let v: f64 = cols[1].parse().unwrap();
    assert!((v - (208.0 + 3f64.sqrt()) / 210.0).abs() < 1e-12);
    assert_eq!(cols[2], "0.998724");
    // 17 significant digits
    assert_eq!(cols[1].trim_start_matches("0.").len(), 17);
}

#[test]
fn no_orthogonal_pair_at_two() {
    let o = qconv(&["latin", "mols", "--d", "2"], None);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_code(&o), "NO_CONSTRUCTION");
}

#[test]
fn io_failure_exits_one() {
    let o = qconv(&["metrics", "gate", "--in", "/nonexistent/U.json"], None);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(error_code(&o), "IO");
}

#[test]
fn malformed_and_nonunitary_inputs_exit_two() {
    let o = qconv(&["metrics", "gate"], Some(br#"{"rows": 2, "cols": 2, "re": [1, 0, 0], "im": [0, 0, 0, 0]}"#));
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_code(&o), "PARSE");
    let o = qconv(&["metrics", "gate"], Some(br#"{"rows": 4, "cols": 4, "re": [2,0,0,0,0,1,0,0,0,0,1,0,0,0,0,1], "im": [0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0]}"#));
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_code(&o), "UNITARITY");
    let o = qconv(&["repro", "nope"], None);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn scatter_points_respect_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ep_gt.csv");
    ok(&["metrics", "scatter", "--d", "3", "--n", "5000", "--out", out.to_str().unwrap()], None);
    let csv = std::fs::read_to_string(&out).unwrap();
    let mut rows = 0;
    for l in csv.lines().skip(1) {
        let c: Vec<&str> = l.split(',').collect();
        let (e, g): (f64, f64) = (c[1].parse().unwrap(), c[2].parse().unwrap());
        assert!((0.75 - 1e-12..=1.0 + 1e-12).contains(&e), "{l}");
        assert!((0.375 - 1e-12..=0.625 + 1e-12).contains(&g), "{l}");
        rows += 1;
    }
    assert!(rows >= 5000);
    assert!(dir.path().join("manifest.json").exists());
}

#[test]
fn deterministic_outputs_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let d = dir.path().join(name);
        let u = d.join("U.json");
        ok(&["family", "u81", "--seed", "4", "--out", u.to_str().unwrap()], None);
        let cmp = d.join("cmp.json");
        let hist = d.join("hist.csv");
        let p = d.join("P.json");
        ok(&["latin", "perm", "--d", "9", "--out", p.to_str().unwrap()], None);
        ok(
            &[
                "stats", "compare", "--a", u.to_str().unwrap(), "--b", p.to_str().unwrap(), "--n", "500", "--seed", "5",
                "--out", cmp.to_str().unwrap(), "--hist", hist.to_str().unwrap(),
            ],
            None,
        );
        (std::fs::read(&cmp).unwrap(), std::fs::read(&hist).unwrap(), d)
    };
    let (c1, h1, d1) = run("one");
    let (c2, h2, _) = run("two");
    assert_eq!(c1, c2);
    assert_eq!(h1, h2);
    let manifests: Vec<_> = std::fs::read_dir(&d1).unwrap().filter(|e| e.as_ref().unwrap().file_name() == "manifest.json").collect();
    assert_eq!(manifests.len(), 1);
    let m: serde_json::Value = serde_json::from_slice(&std::fs::read(d1.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["input_hashes"].as_object().unwrap().len(), 2);
    assert_eq!(m["seeds"][0], 5);
    let hist = String::from_utf8(h1).unwrap();
    assert!(hist.starts_with("bin_lo,bin_hi,count_a,count_b\n"));
    assert_eq!(hist.lines().count(), 201);
}

#[test]
fn stdin_round_trip_is_identity() {
    let p = ok(&["latin", "perm", "--d", "3"], None);
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("basis.json");
    let b = ok(&["family", "u81", "--symmetric"], None);
    let v: serde_json::Value = serde_json::from_slice(&b).unwrap();
    assert_eq!(v["rows"], 81);
    std::fs::write(&f, &p).unwrap();
    let inv = ok(&["invariant", "eval", "--in", f.to_str().unwrap()], None);
    let v: serde_json::Value = serde_json::from_slice(&inv).unwrap();
    assert_eq!(v["exact"], 9);
}

#[test]
fn coherify_build_and_check() {
    let dir = tempfile::tempdir().unwrap();
    let sq = ok(&["latin", "mols", "--d", "3"], None);
    let v: serde_json::Value = serde_json::from_slice(&sq).unwrap();
    let t = dir.path().join("L.json");
    std::fs::write(&t, serde_json::to_vec(&v[0]).unwrap()).unwrap();
    let u = ok(&["coherify", "build", "--tensor", t.to_str().unwrap(), "--bases", "mub"], None);
    let rep = ok(&["coherify", "check", "--tensor", t.to_str().unwrap()], Some(&u));
    let r: serde_json::Value = serde_json::from_slice(&rep).unwrap();
    assert_eq!(r["holds"], false);
    let u = ok(&["coherify", "build", "--tensor", "cyclic", "--bases", "computational", "--d", "3"], None);
    let o = qconv(&["coherify", "build", "--tensor", "cyclic", "--bases", "mub"], None);
    assert_eq!(o.status.code(), Some(2));
    let m: serde_json::Value = serde_json::from_slice(&ok(&["metrics", "gate", "--json"], Some(&u))).unwrap();
    assert!((m["e_p"].as_f64().unwrap() - 0.75).abs() < 1e-12);
}

#[test]
fn search_run_writes_logs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    ok(&["search", "run", "--d", "3", "--restarts", "2", "--seed", "3", "--out", out.to_str().unwrap()], None);
    for r in 0..2 {
        let log: serde_json::Value =
            serde_json::from_slice(&std::fs::read(out.join(format!("restart_{r:03}.json"))).unwrap()).unwrap();
        assert_eq!(log["converged"], true);
        assert!(log["residual_trace"].as_array().unwrap().len() as u64 == log["sweeps"].as_u64().unwrap());
        assert!((log["e_p"].as_f64().unwrap() - 1.0).abs() < 1e-8);
    }
    assert!(Path::new(&out.join("manifest.json")).exists());
}

#[test]
fn coherence_range_and_repro_table() {
    let p = ok(&["latin", "perm", "--d", "3"], None);
    let r: serde_json::Value =
        serde_json::from_slice(&ok(&["coherence", "range", "--budget", "2000", "--seed", "7"], Some(&p))).unwrap();
    assert!((r["lo"].as_f64().unwrap() - 1.0 / 9.0).abs() < 1e-12);
    assert!((r["hi"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    let dir = tempfile::tempdir().unwrap();
    let text = String::from_utf8(ok(&["repro", "tableA", "--out", dir.path().to_str().unwrap()], None)).unwrap();
    assert!(text.contains("PASS S_2:"));
    assert!(dir.path().join("tableA.csv").exists());
}

#[test]
fn p16_verification() {
    let o = qconv(&["family", "p16", "--verify-circuit"], None);
    assert!(o.status.success());
    let rep: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(rep["circuit_max_abs_diff"], 0.0);
    assert_eq!(rep["gates"], 18);
}
