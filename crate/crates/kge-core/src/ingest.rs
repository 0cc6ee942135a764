//! Input parsing: triple TSV files, newline-delimited user records, and a
//! declarative column mapping that turns simple tables into label triples.
//!
//! All parsers are pure functions over their inputs with deterministic output
//! order, so independent files can be parsed in parallel without changing
//! results.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A triple of labels, not yet dictionary-encoded.
pub type LabelTriple = (String, String, String);

/// Parse a TSV of label triples: one per non-comment, non-blank line, three
/// TAB-separated columns, cells trimmed. Lines starting with `#` are comments.
pub fn parse_triples_tsv(path: &Path) -> Result<Vec<LabelTriple>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let text = String::from_utf8(bytes).map_err(|e| Error::InvalidRecord {
        path: path.to_path_buf(),
        line: 0,
        message: format!("invalid UTF-8: {e}"),
    })?;
    let mut triples = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 3 {
            return Err(Error::MalformedLine {
                path: path.to_path_buf(),
                line: lineno + 1,
                expected: 3,
                found: cols.len(),
            });
        }
        let cells: Vec<&str> = cols.iter().map(|c| c.trim()).collect();
        if let Some(pos) = cells.iter().position(|c| c.is_empty()) {
            return Err(Error::InvalidRecord {
                path: path.to_path_buf(),
                line: lineno + 1,
                message: format!("column {} is empty", pos + 1),
            });
        }
        triples.push((
            cells[0].to_string(),
            cells[1].to_string(),
            cells[2].to_string(),
        ));
    }
    Ok(triples)
}

/// Write label triples back out in the same TSV dialect `parse_triples_tsv`
/// reads, so parse -> write -> parse is the identity.
pub fn write_triples_tsv(path: &Path, triples: &[LabelTriple]) -> Result<()> {
    let mut out = String::new();
    for (s, p, o) in triples {
        out.push_str(s);
        out.push('\t');
        out.push_str(p);
        out.push('\t');
        out.push_str(o);
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// One reply to a tweet, with its sentiment score in [-1, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reply {
    #[serde(default)]
    pub text: String,
    pub sentiment: f64,
}

/// A (domain, score) pair with score in [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainScore {
    pub domain: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tweet {
    #[serde(default)]
    pub text: String,
    #[serde(default)]
    pub urls: Vec<String>,
    #[serde(default)]
    pub retweets: i64,
    #[serde(default)]
    pub likes: i64,
    #[serde(default)]
    pub replies: Vec<Reply>,
    #[serde(default)]
    pub domain_scores: Vec<DomainScore>,
    #[serde(default)]
    pub url_domain_scores: Vec<DomainScore>,
}

/// One user's social record: profile counts plus tweets with their
/// per-domain scores, as supplied by an external domain-score provider.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserRecord {
    pub user_id: String,
    pub handle: String,
    pub followers: i64,
    pub friends: i64,
    pub age_years: f64,
    #[serde(default)]
    pub tweets: Vec<Tweet>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chunk: Option<String>,
}

fn validate_record(record: &UserRecord, path: &Path, line: usize) -> Result<()> {
    let fail = |field: String, message: String| -> Result<()> {
        Err(Error::InvalidRecord {
            path: path.to_path_buf(),
            line,
            message: format!("{field}: {message}"),
        })
    };
    if record.followers < 0 {
        return fail(
            "followers".into(),
            format!("negative count {}", record.followers),
        );
    }
    if record.friends < 0 {
        return fail(
            "friends".into(),
            format!("negative count {}", record.friends),
        );
    }
    if record.age_years.is_nan() || record.age_years <= 0.0 {
        return fail(
            "age_years".into(),
            format!("must be > 0, got {}", record.age_years),
        );
    }
    for (ti, tweet) in record.tweets.iter().enumerate() {
        if tweet.retweets < 0 {
            return fail(
                format!("tweets[{ti}].retweets"),
                format!("negative count {}", tweet.retweets),
            );
        }
        if tweet.likes < 0 {
            return fail(
                format!("tweets[{ti}].likes"),
                format!("negative count {}", tweet.likes),
            );
        }
        for (ri, reply) in tweet.replies.iter().enumerate() {
            if !(-1.0..=1.0).contains(&reply.sentiment) {
                return fail(
                    format!("tweets[{ti}].replies[{ri}].sentiment"),
                    format!("must be in [-1, 1], got {}", reply.sentiment),
                );
            }
        }
        for (name, scores) in [
            ("domain_scores", &tweet.domain_scores),
            ("url_domain_scores", &tweet.url_domain_scores),
        ] {
            for (si, ds) in scores.iter().enumerate() {
                if !(0.0..=1.0).contains(&ds.score) {
                    return fail(
                        format!("tweets[{ti}].{name}[{si}].score"),
                        format!("must be in [0, 1], got {}", ds.score),
                    );
                }
            }
        }
    }
    Ok(())
}

/// Parse newline-delimited JSON user records, validating every count and
/// score range. Errors carry the line number and the offending field path.
pub fn parse_user_records(path: &Path) -> Result<Vec<UserRecord>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut records = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: UserRecord = serde_json::from_str(line).map_err(|e| Error::InvalidRecord {
            path: path.to_path_buf(),
            line: lineno + 1,
            message: e.to_string(),
        })?;
        validate_record(&record, path, lineno + 1)?;
        records.push(record);
    }
    Ok(records)
}

pub fn write_user_records(path: &Path, records: &[UserRecord]) -> Result<()> {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("user record serializes"));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Where a mapped triple's object comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ObjectSource {
    #[serde(rename = "object_column")]
    Column(String),
    #[serde(rename = "object_constant")]
    Constant(String),
}

/// One column-mapping rule: subject cell (optionally URI-prefixed), a fixed
/// predicate, and an object drawn from a column or a constant. This is a
/// deliberately small mapping language: column references and constants only,
/// no joins, no nested iterators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MappingRule {
    pub subject_column: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subject_prefix: Option<String>,
    pub predicate: String,
    #[serde(flatten)]
    pub object: ObjectSource,
}

/// Load mapping rules from a JSON array.
pub fn load_mapping_rules(path: &Path) -> Result<Vec<MappingRule>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Json {
        path: path.to_path_buf(),
        source: e,
    })
}

/// Parse a rectangular TSV table; the first line is the header. Cells are
/// trimmed; blank lines and `#` comments are skipped.
pub fn parse_table_tsv(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim().starts_with('#'));
    let Some((_, header_line)) = lines.next() else {
        return Err(Error::invalid(format!("{}: empty table", path.display())));
    };
    let header: Vec<String> = header_line
        .split('\t')
        .map(|c| c.trim().to_string())
        .collect();
    let mut rows = Vec::new();
    for (_, line) in lines {
        let cells: Vec<String> = line.split('\t').map(|c| c.trim().to_string()).collect();
        if cells.len() != header.len() {
            return Err(Error::RaggedTable {
                row: rows.len() + 1,
                found: cells.len(),
                expected: header.len(),
            });
        }
        rows.push(cells);
    }
    Ok((header, rows))
}

/// Apply mapping rules to a table. Output is row-major, rule order within a
/// row; a (row, rule) pair whose subject or object cell is empty produces no
/// triple. Rules referencing a missing column fail before any output.
pub fn map_tabular(
    header: &[String],
    rows: &[Vec<String>],
    rules: &[MappingRule],
) -> Result<Vec<LabelTriple>> {
    let col = |name: &str| header.iter().position(|h| h == name);
    let mut resolved = Vec::with_capacity(rules.len());
    for (i, rule) in rules.iter().enumerate() {
        let subject = col(&rule.subject_column).ok_or_else(|| Error::UnknownColumn {
            rule: i,
            column: rule.subject_column.clone(),
        })?;
        let object = match &rule.object {
            ObjectSource::Column(name) => Some(col(name).ok_or_else(|| Error::UnknownColumn {
                rule: i,
                column: name.clone(),
            })?),
            ObjectSource::Constant(_) => None,
        };
        resolved.push((subject, object));
    }

    let mut triples = Vec::new();
    for row in rows {
        for (rule, (subj_col, obj_col)) in rules.iter().zip(&resolved) {
            let subject_cell = row[*subj_col].trim();
            if subject_cell.is_empty() {
                continue;
            }
            let object = match (&rule.object, obj_col) {
                (ObjectSource::Column(_), Some(c)) => {
                    let cell = row[*c].trim();
                    if cell.is_empty() {
                        continue;
                    }
                    cell.to_string()
                }
                (ObjectSource::Constant(value), _) => value.clone(),
                _ => unreachable!("column rules always resolve"),
            };
            let subject = match &rule.subject_prefix {
                Some(prefix) => format!("{prefix}{subject_cell}"),
                None => subject_cell.to_string(),
            };
            triples.push((subject, rule.predicate.clone(), object));
        }
    }
    Ok(triples)
}
