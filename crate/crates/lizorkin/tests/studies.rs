use lizorkin::experiments::{run_study, Study, StudyConfig, StudyReport};

#[test]
fn holder_study_passes_and_round_trips() {
    let report = run_study(&StudyConfig::defaults(Study::Holder)).unwrap();
    assert!(report.all_passed(), "{}", report.summary());
    let dir = tempfile::tempdir().unwrap();
    let written = report.emit(&dir.path().join("holder")).unwrap();
    assert_eq!(written.len(), 3);
    let back = StudyReport::from_json(&std::fs::read_to_string(dir.path().join("holder.json")).unwrap()).unwrap();
    assert_eq!(back.rows.len(), report.rows.len());
    assert_eq!(back.all_passed(), report.all_passed());
}

#[test]
fn reduced_inverse_study() {
    let cfg = StudyConfig::parse_for("maps = cubic(0.1)\nresolutions = 1/1024, 1/2048, 1/4096\n", Some(Study::Inverse)).unwrap();
    let report = run_study(&cfg).unwrap();
    assert!(report.all_passed(), "{}", report.summary());
    // the closed-form cross-check row is present and scored
    assert!(report.rows.iter().any(|r| r.case.contains("closed form") && r.scored && r.passed));
}
