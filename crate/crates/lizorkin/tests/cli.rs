use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lizorkin"))
}

#[test]
fn terms_lists_the_expansion() {
    let out = bin().args(["terms", "--order", "3"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.trim_end().ends_with("3 terms"), "{text}");
}

#[test]
fn sample_then_norm() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("f.json");
    let st = bin()
        .args(["sample", "--fn", "sin", "--domain", "square", "--h", "1/32", "--out"])
        .arg(&f)
        .status()
        .unwrap();
    assert!(st.success());
    let out = bin().arg("norm").arg("--fn").arg(&f).args(["--s", "0.5"]).output().unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let (total, wkp, semi) = (
        v["total"].as_f64().unwrap(),
        v["wkp"].as_f64().unwrap(),
        v["seminorm"].as_f64().unwrap(),
    );
    assert!(semi > 0.0 && (total - wkp - semi).abs() < 1e-12);
}

#[test]
fn whitney_writes_cubes() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("cov.jsonl");
    let out = bin()
        .args(["whitney", "--domain", "lshape", "--max-gen", "6", "--out"])
        .arg(&out_path)
        .output()
        .unwrap();
    assert!(out.status.success());
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let lines = std::fs::read_to_string(&out_path).unwrap().lines().count() as u64;
    let cubes = summary["interior_cubes"].as_u64().unwrap() + summary["exterior_cubes"].as_u64().unwrap();
    assert!(lines >= cubes && cubes > 0);
}

#[test]
fn verify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("interp.cfg");
    std::fs::write(&cfg, "study = interpolation\nresolutions = 1/256, 1/512, 1/1024\n").unwrap();
    let prefix = dir.path().join("report");
    let out = bin()
        .args(["verify", "--study", "interpolation", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&prefix)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("report.csv").exists());
    assert!(dir.path().join("report.json").exists());

    let out = bin().args(["verify", "--study", "no-such-study"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    // a config naming another study is rejected
    std::fs::write(&cfg, "study = holder\n").unwrap();
    let out = bin().args(["verify", "--study", "interpolation", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}
