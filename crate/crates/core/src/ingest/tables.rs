//! Tabular inputs: publications, institutions and journals.
//!
//! Each table is read either as CSV with a header row or as JSON lines with
//! one object per line. In CSV, list-valued columns are semicolon-separated;
//! in JSON lines they may be arrays or semicolon-separated strings.
//!
//! | table        | required columns                          | optional columns |
//! |--------------|-------------------------------------------|------------------|
//! | publications | pub_id, year, doc_type, field_ids         | doi, language, journal_id, institution_ids |
//! | institutions | inst_id, country, regions                 | name, repo_url_patterns |
//! | journals     | journal_id                                | issns, country, is_fully_oa, has_apc, publisher_address |

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::io::{BufRead, Read};
use std::ops::RangeInclusive;
use std::path::Path;

use super::{open_reader, IssueKind, ParseIssue};
use crate::error::IngestError;
use crate::model::{ApcStatus, DocType, Doi, Field, Institution, JournalRecord, PublicationRecord};
use crate::repo::normalize_url;

pub type InstitutionTable = BTreeMap<String, Institution>;
pub type JournalTable = BTreeMap<String, JournalRecord>;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum TableFormat {
    #[default]
    Csv,
    JsonLines,
}

impl TableFormat {
    /// JSON lines for `.jsonl`, `.ndjson` and `.json` (optionally `.gz`),
    /// CSV otherwise.
    pub fn from_path(path: &Path) -> Self {
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().to_ascii_lowercase())
            .unwrap_or_default();
        let name = name.strip_suffix(".gz").unwrap_or(&name);
        if [".jsonl", ".ndjson", ".json"]
            .iter()
            .any(|ext| name.ends_with(ext))
        {
            TableFormat::JsonLines
        } else {
            TableFormat::Csv
        }
    }
}

/// Accepted records of one table plus everything that was rejected.
#[derive(Debug, Clone, PartialEq)]
pub struct TableParse<T> {
    pub records: Vec<T>,
    pub issues: Vec<ParseIssue>,
    /// Data rows read, excluding the header and blank lines.
    pub lines: u64,
}

impl<T> TableParse<T> {
    /// Rows rejected for schema reasons (out-of-scope rows excluded).
    pub fn rejected(&self) -> u64 {
        self.issues.iter().filter(|i| i.kind.is_violation()).count() as u64
    }
}

struct RawRow {
    line_no: u64,
    values: BTreeMap<String, String>,
}

impl RawRow {
    fn get(&self, column: &str) -> Option<&str> {
        self.values
            .get(column)
            .map(|v| v.trim())
            .filter(|v| !v.is_empty())
    }

    fn list(&self, column: &str) -> Vec<String> {
        self.get(column)
            .map(|v| {
                v.split(';')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(str::to_owned)
                    .collect()
            })
            .unwrap_or_default()
    }
}

/// Feeds every row to `visit`; unreadable rows become issues.
fn for_each_row<'a, R: Read + Send + 'a>(
    reader: R,
    format: TableFormat,
    source: &str,
    required: &[&str],
    issues: &mut Vec<ParseIssue>,
    mut visit: impl FnMut(RawRow, &mut Vec<ParseIssue>),
) -> Result<u64, IngestError> {
    let reader = open_reader(reader, source)?;
    match format {
        TableFormat::Csv => csv_rows(reader, source, required, issues, &mut visit),
        TableFormat::JsonLines => json_rows(reader, source, issues, &mut visit),
    }
}

fn csv_rows(
    reader: Box<dyn BufRead + Send + '_>,
    source: &str,
    required: &[&str],
    issues: &mut Vec<ParseIssue>,
    visit: &mut dyn FnMut(RawRow, &mut Vec<ParseIssue>),
) -> Result<u64, IngestError> {
    let mut csv = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(false)
        .from_reader(reader);
    let header: Vec<String> = match csv.headers() {
        Ok(h) => h.iter().map(|c| c.trim().to_ascii_lowercase()).collect(),
        Err(e) => return Err(csv_fatal(source, e)),
    };
    if header.iter().all(String::is_empty) {
        // Zero-byte file.
        return Ok(0);
    }
    if let Some(missing) = required.iter().find(|c| !header.iter().any(|h| h == *c)) {
        return Err(IngestError::MissingColumn {
            source_name: source.to_owned(),
            column: (*missing).to_owned(),
        });
    }
    let mut lines = 0;
    let mut record = csv::StringRecord::new();
    loop {
        match csv.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {
                lines += 1;
                let line_no = record.position().map_or(lines + 1, |p| p.line());
                let values = header
                    .iter()
                    .cloned()
                    .zip(record.iter().map(str::to_owned))
                    .collect();
                visit(RawRow { line_no, values }, issues);
            }
            Err(e) => {
                if matches!(e.kind(), csv::ErrorKind::Io(_)) {
                    return Err(csv_fatal(source, e));
                }
                lines += 1;
                let line_no = e.position().map_or(lines + 1, |p| p.line());
                issues.push(ParseIssue::new(
                    source,
                    line_no,
                    IssueKind::Malformed,
                    e.to_string(),
                ));
            }
        }
    }
    Ok(lines)
}

fn csv_fatal(source: &str, e: csv::Error) -> IngestError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => IngestError::io(source, io),
        other => IngestError::Header {
            source_name: source.to_owned(),
            detail: format!("{other:?}"),
        },
    }
}

fn json_scalar(v: &serde_json::Value) -> String {
    match v {
        serde_json::Value::Null => String::new(),
        serde_json::Value::String(s) => s.clone(),
        serde_json::Value::Array(items) => {
            items.iter().map(json_scalar).collect::<Vec<_>>().join(";")
        }
        other => other.to_string(),
    }
}

fn json_rows(
    mut reader: Box<dyn BufRead + Send + '_>,
    source: &str,
    issues: &mut Vec<ParseIssue>,
    visit: &mut dyn FnMut(RawRow, &mut Vec<ParseIssue>),
) -> Result<u64, IngestError> {
    let mut buf = Vec::new();
    let mut line_no = 0;
    let mut lines = 0;
    loop {
        buf.clear();
        if reader
            .read_until(b'\n', &mut buf)
            .map_err(|e| IngestError::io(source, e))?
            == 0
        {
            break;
        }
        line_no += 1;
        let text = match std::str::from_utf8(&buf) {
            Ok(t) => t.trim(),
            Err(e) => {
                lines += 1;
                issues.push(ParseIssue::new(
                    source,
                    line_no,
                    IssueKind::Malformed,
                    format!("invalid UTF-8: {e}"),
                ));
                continue;
            }
        };
        if text.is_empty() {
            continue;
        }
        lines += 1;
        match serde_json::from_str::<serde_json::Value>(text) {
            Ok(serde_json::Value::Object(map)) => {
                let values = map
                    .iter()
                    .map(|(k, v)| (k.to_ascii_lowercase(), json_scalar(v)))
                    .collect();
                visit(RawRow { line_no, values }, issues);
            }
            Ok(_) => issues.push(ParseIssue::new(
                source,
                line_no,
                IssueKind::Malformed,
                "expected a JSON object",
            )),
            Err(e) => issues.push(ParseIssue::new(
                source,
                line_no,
                IssueKind::Malformed,
                format!("invalid record: {e}"),
            )),
        }
    }
    Ok(lines)
}

fn require<'r>(row: &'r RawRow, source: &str, column: &str) -> Result<&'r str, ParseIssue> {
    row.get(column).ok_or_else(|| {
        ParseIssue::new(
            source,
            row.line_no,
            IssueKind::MissingRequiredField,
            format!("missing {column}"),
        )
    })
}

fn malformed(row: &RawRow, source: &str, detail: impl Into<String>) -> ParseIssue {
    ParseIssue::new(source, row.line_no, IssueKind::Malformed, detail)
}

fn publication_from_row(
    row: &RawRow,
    source: &str,
    period: &RangeInclusive<i32>,
) -> Result<PublicationRecord, ParseIssue> {
    let pub_id = require(row, source, "pub_id")?.to_owned();
    let year_raw = require(row, source, "year")?;
    let year: i32 = year_raw
        .parse()
        .map_err(|_| malformed(row, source, format!("invalid year {year_raw:?}")))?;
    let doc_type_raw = require(row, source, "doc_type")?;
    let field_list = row.list("field_ids");
    if field_list.is_empty() {
        return Err(ParseIssue::new(
            source,
            row.line_no,
            IssueKind::MissingRequiredField,
            "missing field_ids",
        ));
    }
    let field_ids = field_list
        .iter()
        .map(|f| f.parse::<Field>())
        .collect::<Result<BTreeSet<_>, _>>()
        .map_err(|e| malformed(row, source, e))?;
    let doc_type = doc_type_raw.parse::<DocType>().map_err(|e| {
        ParseIssue::new(
            source,
            row.line_no,
            IssueKind::OutOfScope,
            format!("{pub_id}: {e}"),
        )
    })?;
    if !period.contains(&year) {
        return Err(ParseIssue::new(
            source,
            row.line_no,
            IssueKind::OutOfScope,
            format!(
                "{pub_id}: year {year} outside {}-{}",
                period.start(),
                period.end()
            ),
        ));
    }
    Ok(PublicationRecord {
        pub_id,
        doi: row.get("doi").and_then(Doi::parse),
        year,
        doc_type,
        language: row
            .get("language")
            .map(str::to_ascii_lowercase)
            .unwrap_or_else(|| "unknown".to_owned()),
        journal_id: row.get("journal_id").map(str::to_owned),
        institution_ids: row.list("institution_ids").into_iter().collect(),
        field_ids,
    })
}

/// Read the publication table, keeping citable items inside `period`.
///
/// A DOI that does not normalize is treated as absent.
pub fn parse_publications<'a, R: Read + Send + 'a>(
    reader: R,
    format: TableFormat,
    period: &RangeInclusive<i32>,
    source: &str,
) -> Result<TableParse<PublicationRecord>, IngestError> {
    let mut records = Vec::new();
    let mut issues = Vec::new();
    let mut seen = HashSet::new();
    let lines = for_each_row(
        reader,
        format,
        source,
        &["pub_id", "year", "doc_type", "field_ids"],
        &mut issues,
        |row, issues| match publication_from_row(&row, source, period) {
            Ok(record) if seen.contains(&record.pub_id) => issues.push(ParseIssue::new(
                source,
                row.line_no,
                IssueKind::DuplicateKey,
                format!("duplicate pub_id {}", record.pub_id),
            )),
            Ok(record) => {
                seen.insert(record.pub_id.clone());
                records.push(record);
            }
            Err(issue) => issues.push(issue),
        },
    )?;
    Ok(TableParse {
        records,
        issues,
        lines,
    })
}

fn institution_from_row(row: &RawRow, source: &str) -> Result<Institution, ParseIssue> {
    let inst_id = require(row, source, "inst_id")?.to_owned();
    let country = require(row, source, "country")?.to_ascii_uppercase();
    let regions: BTreeSet<String> = row.list("regions").into_iter().collect();
    if regions.is_empty() {
        return Err(ParseIssue::new(
            source,
            row.line_no,
            IssueKind::MissingRequiredField,
            format!("{inst_id}: missing regions"),
        ));
    }
    let mut repo_url_patterns: Vec<String> = row
        .list("repo_url_patterns")
        .iter()
        .map(|p| normalize_url(p))
        .filter(|p| !p.is_empty())
        .collect();
    repo_url_patterns.dedup();
    Ok(Institution {
        name: row.get("name").unwrap_or(&inst_id).to_owned(),
        inst_id,
        country,
        regions,
        repo_url_patterns,
    })
}

pub fn parse_institutions<'a, R: Read + Send + 'a>(
    reader: R,
    format: TableFormat,
    source: &str,
) -> Result<TableParse<Institution>, IngestError> {
    parse_keyed(
        reader,
        format,
        source,
        &["inst_id", "country", "regions"],
        institution_from_row,
        |i| &i.inst_id,
    )
}

fn parse_flag(row: &RawRow, source: &str, column: &str) -> Result<bool, ParseIssue> {
    match row.get(column).map(str::to_ascii_lowercase).as_deref() {
        None | Some("false" | "no" | "n" | "0") => Ok(false),
        Some("true" | "yes" | "y" | "1") => Ok(true),
        Some(other) => Err(malformed(
            row,
            source,
            format!("invalid {column} {other:?}"),
        )),
    }
}

fn journal_from_row(row: &RawRow, source: &str) -> Result<JournalRecord, ParseIssue> {
    let journal_id = require(row, source, "journal_id")?.to_owned();
    let has_apc = row
        .get("has_apc")
        .unwrap_or("")
        .parse::<ApcStatus>()
        .map_err(|e| malformed(row, source, e))?;
    Ok(JournalRecord {
        journal_id,
        issns: row
            .list("issns")
            .into_iter()
            .map(|s| s.to_ascii_uppercase())
            .collect(),
        country: row.get("country").map(str::to_ascii_uppercase),
        is_fully_oa: parse_flag(row, source, "is_fully_oa")?,
        has_apc,
        publisher_address: row.get("publisher_address").map(str::to_owned),
    })
}

/// Read the journal registry. An empty `has_apc` cell means the journal is
/// not covered by the APC source and reads as unknown.
pub fn parse_journals<'a, R: Read + Send + 'a>(
    reader: R,
    format: TableFormat,
    source: &str,
) -> Result<TableParse<JournalRecord>, IngestError> {
    parse_keyed(
        reader,
        format,
        source,
        &["journal_id"],
        journal_from_row,
        |j| &j.journal_id,
    )
}

fn parse_keyed<'a, R: Read + Send + 'a, T>(
    reader: R,
    format: TableFormat,
    source: &str,
    required: &[&str],
    convert: fn(&RawRow, &str) -> Result<T, ParseIssue>,
    key: fn(&T) -> &String,
) -> Result<TableParse<T>, IngestError> {
    let mut records = Vec::new();
    let mut issues = Vec::new();
    let mut seen = HashSet::new();
    let lines = for_each_row(
        reader,
        format,
        source,
        required,
        &mut issues,
        |row, issues| match convert(&row, source) {
            Ok(rec) if seen.contains(key(&rec)) => issues.push(ParseIssue::new(
                source,
                row.line_no,
                IssueKind::DuplicateKey,
                format!("duplicate key {}", key(&rec)),
            )),
            Ok(rec) => {
                seen.insert(key(&rec).clone());
                records.push(rec);
            }
            Err(issue) => issues.push(issue),
        },
    )?;
    Ok(TableParse {
        records,
        issues,
        lines,
    })
}

/// Both lookup tables plus their parse outcome.
#[derive(Debug, Clone, Default)]
pub struct Registries {
    pub institutions: InstitutionTable,
    pub journals: JournalTable,
    pub issues: Vec<ParseIssue>,
    pub institution_lines: u64,
    pub journal_lines: u64,
}

pub fn parse_registries<'a, R1, R2>(
    institutions: R1,
    institutions_format: TableFormat,
    journals: R2,
    journals_format: TableFormat,
) -> Result<Registries, IngestError>
where
    R1: Read + Send + 'a,
    R2: Read + Send + 'a,
{
    let inst = parse_institutions(institutions, institutions_format, "institutions")?;
    let jour = parse_journals(journals, journals_format, "journals")?;
    let mut issues = inst.issues;
    issues.extend(jour.issues);
    Ok(Registries {
        institutions: inst
            .records
            .into_iter()
            .map(|i| (i.inst_id.clone(), i))
            .collect(),
        journals: jour
            .records
            .into_iter()
            .map(|j| (j.journal_id.clone(), j))
            .collect(),
        issues,
        institution_lines: inst.lines,
        journal_lines: jour.lines,
    })
}
