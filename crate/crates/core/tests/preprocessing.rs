use std::path::Path;

use corrgan::data::{
    active_tokens, build_dictionaries, load_profiles, parse_profiles, preprocess_profiles, vectorize_profiles,
    ProfileRecord,
};
use corrgan::Error;

fn fixture() -> Vec<ProfileRecord> {
    load_profiles(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/profiles.json")).unwrap()
}

#[test]
fn fixture_drops_narrative_and_empty_profiles() {
    let raw = fixture();
    assert_eq!(raw.len(), 8);
    assert_eq!(raw[0].skills.len(), 7);
    let (kept, report) = preprocess_profiles(&raw);
    assert_eq!(report.kept, 6);
    assert_eq!(report.long_token, 1);
    assert_eq!(report.empty_skills, 1);
    assert!(kept.iter().all(|r| r.profession != "database administrator"));
    assert!(kept.iter().all(|r| !r.skills.iter().any(|s| s.contains("gathering"))));
    assert_eq!(kept[0].skills, ["java", "j2ee", "servlets", "jsp", "jquery", "spring 2.5", "spring mvc"]);
}

#[test]
fn preprocessing_is_idempotent() {
    let (once, _) = preprocess_profiles(&fixture());
    let (twice, report) = preprocess_profiles(&once);
    assert_eq!(once, twice);
    assert_eq!(report.dropped(), 0);
}

#[test]
fn vectorize_round_trips_kept_skill_sets() {
    let (kept, _) = preprocess_profiles(&fixture());
    let vocab = build_dictionaries(&kept).unwrap();
    let data = vectorize_profiles(&kept, &vocab).unwrap();
    assert_eq!(data.x.nrows(), kept.len());
    for (record, row) in kept.iter().zip(data.x.rows()) {
        let mut expected = record.skills.clone();
        expected.sort();
        expected.dedup();
        assert_eq!(active_tokens(row, &vocab.skills, 0.5), expected);
    }
    for row in data.y.rows() {
        assert_eq!(row.sum(), 1.0);
    }
    let tokens = vocab.skills.tokens();
    assert!(tokens.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn toy_dictionary_encoding() {
    let records = vec![
        ProfileRecord::new("java developer", &["java", "sql"]),
        ProfileRecord::new("net developer", &["c#", "sql", "sql"]),
    ];
    let vocab = build_dictionaries(&records).unwrap();
    assert_eq!(vocab.skills.tokens(), ["c#", "java", "sql"]);
    let data = vectorize_profiles(&records, &vocab).unwrap();
    assert_eq!(data.x.row(0).to_vec(), [0.0, 1.0, 1.0]);
    assert_eq!(data.x.row(1).to_vec(), [1.0, 0.0, 1.0]);
    assert_eq!(data.y.row(0).to_vec(), [1.0, 0.0]);
}

#[test]
fn truncated_json_reports_offset() {
    let text = r#"[{"profession": "java developer", "skills": ["java""#;
    match parse_profiles(text, Path::new("t.json")) {
        Err(Error::Json { offset, .. }) => assert!(offset > 0 && offset <= text.len()),
        other => panic!("expected a JSON error, got {other:?}"),
    }
    match parse_profiles(r#"[{"skills": []}]"#, Path::new("t.json")) {
        Err(Error::MissingKey { index: 0, key: "profession" }) => {}
        other => panic!("expected a missing key, got {other:?}"),
    }
    assert!(parse_profiles("[]", Path::new("t.json")).unwrap().is_empty());
}
