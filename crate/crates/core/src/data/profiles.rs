use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::corrnn::RecordBatch;
use crate::error::{Error, Result};

/// Profiles whose skill list holds a token longer than this are dropped.
pub const MAX_SKILL_CHARS: usize = 15;

/// A candidate profile: current profession plus skill tokens.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileRecord {
    pub profession: String,
    pub skills: Vec<String>,
}

impl ProfileRecord {
    pub fn new(profession: impl Into<String>, skills: &[&str]) -> Self {
        Self {
            profession: profession.into(),
            skills: skills.iter().map(|s| s.to_string()).collect(),
        }
    }
}

/// Reads a JSON array of `{"profession": ..., "skills": [...]}` objects.
pub fn load_profiles(path: impl AsRef<Path>) -> Result<Vec<ProfileRecord>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_profiles(&text, path)
}

/// Parses profile JSON. `origin` only labels error messages.
pub fn parse_profiles(text: &str, origin: &Path) -> Result<Vec<ProfileRecord>> {
    let value: Value = serde_json::from_str(text).map_err(|e| json_error(text, origin, &e))?;
    let Value::Array(items) = value else {
        return Err(Error::Format(format!(
            "{}: expected a JSON array of profiles",
            origin.display()
        )));
    };
    items
        .iter()
        .enumerate()
        .map(|(index, item)| {
            let profession = item
                .get("profession")
                .and_then(Value::as_str)
                .ok_or(Error::MissingKey { index, key: "profession" })?;
            let skills = item
                .get("skills")
                .and_then(Value::as_array)
                .ok_or(Error::MissingKey { index, key: "skills" })?
                .iter()
                .map(|s| s.as_str().map(str::to_owned))
                .collect::<Option<Vec<_>>>()
                .ok_or(Error::MissingKey { index, key: "skills" })?;
            Ok(ProfileRecord {
                profession: profession.to_owned(),
                skills,
            })
        })
        .collect()
}

pub(crate) fn json_error(text: &str, origin: &Path, e: &serde_json::Error) -> Error {
    let (line, column) = (e.line(), e.column());
    Error::Json {
        path: origin.to_path_buf(),
        line,
        column,
        offset: byte_offset(text, line, column),
        message: e.to_string(),
    }
}

fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    if line == 0 {
        return 0;
    }
    let line_start: usize = text
        .split_inclusive('\n')
        .take(line - 1)
        .map(str::len)
        .sum();
    (line_start + column).min(text.len())
}

/// Why profiles were removed during preprocessing.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct DropReport {
    pub kept: usize,
    /// At least one token exceeded [`MAX_SKILL_CHARS`].
    pub long_token: usize,
    pub empty_skills: usize,
    pub empty_profession: usize,
}

impl DropReport {
    pub fn dropped(&self) -> usize {
        self.long_token + self.empty_skills + self.empty_profession
    }
}

fn normalize(token: &str) -> String {
    token.trim().to_lowercase()
}

/// Lowercases and trims tokens and drops unusable profiles.
///
/// A profile is dropped when its profession is blank, when it has no
/// non-blank skill, or when any skill is longer than [`MAX_SKILL_CHARS`]
/// characters (narrative skill sections).
pub fn preprocess_profiles(records: &[ProfileRecord]) -> (Vec<ProfileRecord>, DropReport) {
    let mut report = DropReport::default();
    let mut kept = Vec::with_capacity(records.len());
    for record in records {
        let profession = normalize(&record.profession);
        let skills: Vec<String> = record
            .skills
            .iter()
            .map(|s| normalize(s))
            .filter(|s| !s.is_empty())
            .collect();
        if profession.is_empty() {
            report.empty_profession += 1;
        } else if skills.iter().any(|s| s.chars().count() > MAX_SKILL_CHARS) {
            report.long_token += 1;
        } else if skills.is_empty() {
            report.empty_skills += 1;
        } else {
            kept.push(ProfileRecord { profession, skills });
        }
    }
    report.kept = kept.len();
    (kept, report)
}

/// Sorted set of tokens with a reverse index.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(from = "Vec<String>", into = "Vec<String>")]
pub struct Dictionary {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
}

impl Dictionary {
    pub fn from_tokens<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let set: BTreeSet<String> = tokens.into_iter().map(Into::into).collect();
        Self::from(set.into_iter().collect::<Vec<_>>())
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn token(&self, index: usize) -> Option<&str> {
        self.tokens.get(index).map(String::as_str)
    }
}

impl From<Vec<String>> for Dictionary {
    /// Keeps the given order; duplicates keep their first index.
    fn from(tokens: Vec<String>) -> Self {
        let mut index = HashMap::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            index.entry(t.clone()).or_insert(i);
        }
        Self { tokens, index }
    }
}

impl From<Dictionary> for Vec<String> {
    fn from(d: Dictionary) -> Self {
        d.tokens
    }
}

/// Skill and profession dictionaries.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Vocabulary {
    pub skills: Dictionary,
    pub professions: Dictionary,
}

/// Union of all (cleaned) skills and professions, each sorted.
pub fn build_dictionaries(records: &[ProfileRecord]) -> Result<Vocabulary> {
    if records.is_empty() {
        return Err(Error::Empty("profile corpus"));
    }
    Ok(Vocabulary {
        skills: Dictionary::from_tokens(records.iter().flat_map(|r| r.skills.iter().cloned())),
        professions: Dictionary::from_tokens(records.iter().map(|r| r.profession.clone())),
    })
}

/// Binary skill vectors with one-hot profession vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedDataset {
    /// `n x |skills|`
    pub x: Array2<f64>,
    /// `n x |professions|`, one 1 per row
    pub y: Array2<f64>,
    pub vocab: Vocabulary,
}

impl EncodedDataset {
    pub fn len(&self) -> usize {
        self.x.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn records(&self) -> RecordBatch {
        RecordBatch {
            x: self.x.clone(),
            y: self.y.clone(),
        }
    }

    /// Profession index of every row.
    pub fn labels(&self) -> Vec<usize> {
        self.y
            .rows()
            .into_iter()
            .map(|r| r.iter().position(|&v| v == 1.0).unwrap_or(0))
            .collect()
    }

    pub fn to_profiles(&self) -> Vec<ProfileRecord> {
        self.labels()
            .into_iter()
            .zip(self.x.rows())
            .map(|(p, row)| ProfileRecord {
                profession: self.vocab.professions.tokens()[p].clone(),
                skills: active_tokens(row, &self.vocab.skills, 0.5),
            })
            .collect()
    }
}

/// Tokens of the coordinates with value `>= threshold`, in dictionary order.
pub fn active_tokens(row: ArrayView1<f64>, dict: &Dictionary, threshold: f64) -> Vec<String> {
    row.iter()
        .enumerate()
        .filter(|(_, &v)| v >= threshold)
        .filter_map(|(i, _)| dict.token(i).map(str::to_owned))
        .collect()
}

pub fn vectorize_profiles(records: &[ProfileRecord], vocab: &Vocabulary) -> Result<EncodedDataset> {
    let n = records.len();
    let mut x = Array2::zeros((n, vocab.skills.len()));
    let mut y = Array2::zeros((n, vocab.professions.len()));
    for (index, record) in records.iter().enumerate() {
        let p = vocab
            .professions
            .index_of(&record.profession)
            .ok_or_else(|| Error::UnknownToken {
                index,
                token: record.profession.clone(),
                dictionary: "profession",
            })?;
        y[[index, p]] = 1.0;
        for skill in &record.skills {
            let s = vocab.skills.index_of(skill).ok_or_else(|| Error::UnknownToken {
                index,
                token: skill.clone(),
                dictionary: "skill",
            })?;
            x[[index, s]] = 1.0;
        }
    }
    Ok(EncodedDataset {
        x,
        y,
        vocab: vocab.clone(),
    })
}

/// Corpus summary in the shape of a training-data statistics table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusStats {
    pub professions: usize,
    pub candidates: usize,
    pub skills: usize,
    pub avg_profiles_per_profession: f64,
    pub max_profiles_per_profession: usize,
    pub min_profiles_per_profession: usize,
    pub avg_skills_per_candidate: f64,
    pub max_skills_per_candidate: usize,
    pub min_skills_per_candidate: usize,
    pub median_skills_per_candidate: f64,
}

pub fn corpus_stats(data: &EncodedDataset) -> CorpusStats {
    let per_prof: Vec<usize> = data
        .y
        .columns()
        .into_iter()
        .map(|c| c.iter().filter(|&&v| v == 1.0).count())
        .collect();
    let mut per_cand: Vec<usize> = data
        .x
        .rows()
        .into_iter()
        .map(|r| r.iter().filter(|&&v| v == 1.0).count())
        .collect();
    per_cand.sort_unstable();
    let n = per_cand.len();
    let median = match n {
        0 => 0.0,
        _ if n % 2 == 1 => per_cand[n / 2] as f64,
        _ => (per_cand[n / 2 - 1] + per_cand[n / 2]) as f64 / 2.0,
    };
    let mean = |v: &[usize]| {
        if v.is_empty() {
            0.0
        } else {
            v.iter().sum::<usize>() as f64 / v.len() as f64
        }
    };
    CorpusStats {
        professions: data.vocab.professions.len(),
        candidates: n,
        skills: data.vocab.skills.len(),
        avg_profiles_per_profession: mean(&per_prof),
        max_profiles_per_profession: per_prof.iter().copied().max().unwrap_or(0),
        min_profiles_per_profession: per_prof.iter().copied().min().unwrap_or(0),
        avg_skills_per_candidate: mean(&per_cand),
        max_skills_per_candidate: per_cand.last().copied().unwrap_or(0),
        min_skills_per_candidate: per_cand.first().copied().unwrap_or(0),
        median_skills_per_candidate: median,
    }
}

impl std::fmt::Display for CorpusStats {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let rows = [
            ("Total different job profiles", self.professions.to_string()),
            ("Total candidates", self.candidates.to_string()),
            ("Total skills", self.skills.to_string()),
            ("Avg number of profiles per job", format!("{:.0}", self.avg_profiles_per_profession)),
            ("Max number of profiles of a job", self.max_profiles_per_profession.to_string()),
            ("Min number of profiles of a job", self.min_profiles_per_profession.to_string()),
            ("Avg number of skills per candidate", format!("{:.0}", self.avg_skills_per_candidate)),
            ("Max number of skills of a candidate", self.max_skills_per_candidate.to_string()),
            ("Min number of skills of a candidate", self.min_skills_per_candidate.to_string()),
            ("Median number of skills", format!("{}", self.median_skills_per_candidate)),
        ];
        for (k, v) in rows {
            writeln!(f, "{k:<38}{v}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn java_row() -> &'static str {
        r#"[{"profession": "Java Developer",
             "skills": ["Java", "J2EE", "Servlets", "Jsp", "JQuery", "Spring 2.5", "Spring MVC"]}]"#
    }

    #[test]
    fn parses_a_profile() {
        let recs = parse_profiles(java_row(), Path::new("t.json")).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].profession, "Java Developer");
        assert_eq!(recs[0].skills.len(), 7);
    }

    #[test]
    fn empty_array() {
        assert!(parse_profiles("[]", Path::new("t.json")).unwrap().is_empty());
    }

    #[test]
    fn truncated_file_reports_offset() {
        let text = java_row();
        let cut = &text[..60];
        match parse_profiles(cut, Path::new("t.json")).unwrap_err() {
            Error::Json { offset, .. } => assert_eq!(offset, cut.len()),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn missing_key_names_record() {
        let text = r#"[{"profession": "a", "skills": []}, {"skills": ["x"]}]"#;
        match parse_profiles(text, Path::new("t.json")).unwrap_err() {
            Error::MissingKey { index, key } => {
                assert_eq!(index, 1);
                assert_eq!(key, "profession");
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn lowercases_and_drops() {
        let recs = vec![
            ProfileRecord::new("Java Developer", &["Java", " SQL "]),
            ProfileRecord::new("Net Developer", &[]),
            ProfileRecord::new("Net Developer", &["Gathering and analysis of requirements"]),
            ProfileRecord::new("  ", &["java"]),
        ];
        let (kept, report) = preprocess_profiles(&recs);
        assert_eq!(kept, vec![ProfileRecord::new("java developer", &["java", "sql"])]);
        assert_eq!(report.empty_skills, 1);
        assert_eq!(report.long_token, 1);
        assert_eq!(report.empty_profession, 1);
        assert_eq!(report.dropped(), 3);
    }

    #[test]
    fn fifteen_chars_is_kept_sixteen_dropped() {
        let ok = "a".repeat(15);
        let long = "a".repeat(16);
        let (kept, _) = preprocess_profiles(&[
            ProfileRecord::new("p", &[ok.as_str()]),
            ProfileRecord::new("p", &[long.as_str()]),
        ]);
        assert_eq!(kept.len(), 1);
    }

    #[test]
    fn dictionaries_are_sorted_unions() {
        let recs = vec![
            ProfileRecord::new("java developer", &["sql", "java"]),
            ProfileRecord::new("net developer", &["java", "c#"]),
        ];
        let vocab = build_dictionaries(&recs).unwrap();
        assert_eq!(vocab.skills.tokens(), &["c#", "java", "sql"]);
        assert_eq!(vocab.professions.tokens(), &["java developer", "net developer"]);
        assert!(build_dictionaries(&[]).is_err());
    }

    #[test]
    fn vectorizes_with_sorted_layout() {
        let recs = vec![
            ProfileRecord::new("java developer", &["java", "sql", "java"]),
            ProfileRecord::new("net developer", &["c#"]),
        ];
        let vocab = build_dictionaries(&recs).unwrap();
        let data = vectorize_profiles(&recs, &vocab).unwrap();
        assert_eq!(data.x, array![[0.0, 1.0, 1.0], [1.0, 0.0, 0.0]]);
        assert_eq!(data.y, array![[1.0, 0.0], [0.0, 1.0]]);
        assert_eq!(data.to_profiles()[0].skills, vec!["java", "sql"]);
    }

    #[test]
    fn unknown_token_is_reported() {
        let vocab = build_dictionaries(&[ProfileRecord::new("a", &["x"])]).unwrap();
        let err = vectorize_profiles(&[ProfileRecord::new("a", &["y"])], &vocab).unwrap_err();
        assert!(matches!(err, Error::UnknownToken { index: 0, .. }));
    }

    #[test]
    fn stats_table() {
        let recs = vec![
            ProfileRecord::new("a", &["x", "y", "z"]),
            ProfileRecord::new("a", &["x"]),
            ProfileRecord::new("b", &["y", "z"]),
        ];
        let vocab = build_dictionaries(&recs).unwrap();
        let stats = corpus_stats(&vectorize_profiles(&recs, &vocab).unwrap());
        assert_eq!(stats.professions, 2);
        assert_eq!(stats.candidates, 3);
        assert_eq!(stats.skills, 3);
        assert_eq!(stats.max_profiles_per_profession, 2);
        assert_eq!(stats.median_skills_per_candidate, 2.0);
        assert!(stats.to_string().contains("Total skills"));
    }
}
