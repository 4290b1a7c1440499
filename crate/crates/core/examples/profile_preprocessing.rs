//! Cleans a handful of profiles, builds dictionaries and vectorizes them.

use corrgan::data::{
    active_tokens, build_dictionaries, corpus_stats, parse_profiles, preprocess_profiles, vectorize_profiles,
};
use std::path::Path;

const PROFILES: &str = r#"[
  {"profession": "Java Developer", "skills": ["Java", "J2EE", "Servlets", "JSP", "Spring", "Hibernate", "SQL"]},
  {"profession": ".Net Developer", "skills": ["C#", "ASP.NET", "SQL Server", "JavaScript"]},
  {"profession": "Java Developer", "skills": ["Gathering and analysis of requirements", "Java"]},
  {"profession": "Database Administrator", "skills": []}
]"#;

fn main() -> corrgan::Result<()> {
    let raw = parse_profiles(PROFILES, Path::new("inline.json"))?;
    let (kept, report) = preprocess_profiles(&raw);
    println!("{report:?}");
    let vocab = build_dictionaries(&kept)?;
    let data = vectorize_profiles(&kept, &vocab)?;
    println!("{}", corpus_stats(&data));
    for (i, row) in data.x.rows().into_iter().enumerate() {
        println!("{}: {}", kept[i].profession, active_tokens(row, &vocab.skills, 0.5).join(", "));
    }
    Ok(())
}
