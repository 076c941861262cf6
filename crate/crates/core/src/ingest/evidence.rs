//! Line-delimited evidence dump reader.
//!
//! One JSON object per line, shaped like an Unpaywall snapshot row:
//!
//! ```text
//! {"doi": "10.1/a", "journal_is_oa": true, "journal_issns": "1234-5678",
//!  "oa_locations": [{"host_type": "publisher", "url": "...", "license": "cc-by"}]}
//! ```
//!
//! `doi` and `journal_is_oa` are required. `oa_locations` (alias `locations`)
//! may be missing or null, which reads as no evidence. Unknown keys are
//! ignored. A location whose `url` is empty falls back to
//! `url_for_landing_page`, then `url_for_pdf`.

use std::io::{BufRead, Read};

use serde::Deserialize;

use super::{open_reader, IssueKind, ParseIssue};
use crate::error::IngestError;
use crate::model::{Doi, HostType, OaEvidenceRecord, OaLocation};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EvidenceItem {
    Record(OaEvidenceRecord),
    Issue(ParseIssue),
}

#[derive(Deserialize)]
struct RawEvidence {
    doi: Option<String>,
    journal_is_oa: Option<bool>,
    #[serde(alias = "journal_issns")]
    journal_issn: Option<String>,
    #[serde(alias = "locations")]
    oa_locations: Option<Vec<RawLocation>>,
}

#[derive(Deserialize)]
struct RawLocation {
    host_type: Option<String>,
    url: Option<String>,
    url_for_landing_page: Option<String>,
    url_for_pdf: Option<String>,
    license: Option<String>,
    #[serde(alias = "endpoint_hint")]
    endpoint_id: Option<String>,
}

fn non_blank(s: Option<String>) -> Option<String> {
    s.map(|s| s.trim().to_owned()).filter(|s| !s.is_empty())
}

/// Parse a single dump line. `Ok(None)` for blank lines.
pub fn parse_evidence_line(
    line: &[u8],
    source: &str,
    line_no: u64,
) -> Result<Option<OaEvidenceRecord>, ParseIssue> {
    let issue = |kind, detail: String| ParseIssue::new(source, line_no, kind, detail);
    let text = std::str::from_utf8(line)
        .map_err(|e| issue(IssueKind::Malformed, format!("invalid UTF-8: {e}")))?;
    let text = text.trim();
    if text.is_empty() {
        return Ok(None);
    }
    let raw: RawEvidence = serde_json::from_str(text)
        .map_err(|e| issue(IssueKind::Malformed, format!("invalid record: {e}")))?;

    let raw_doi = non_blank(raw.doi)
        .ok_or_else(|| issue(IssueKind::MissingRequiredField, "missing doi".into()))?;
    let doi = Doi::parse(&raw_doi).ok_or_else(|| {
        issue(
            IssueKind::Malformed,
            format!("unrecognized DOI {raw_doi:?}"),
        )
    })?;
    let journal_is_oa = raw.journal_is_oa.ok_or_else(|| {
        issue(
            IssueKind::MissingRequiredField,
            "missing journal_is_oa".into(),
        )
    })?;

    let mut locations = Vec::new();
    for (i, loc) in raw.oa_locations.unwrap_or_default().into_iter().enumerate() {
        let host_type = match non_blank(loc.host_type)
            .map(|h| h.to_ascii_lowercase())
            .as_deref()
        {
            Some("publisher") => HostType::Publisher,
            Some("repository") => HostType::Repository,
            Some(other) => {
                return Err(issue(
                    IssueKind::Malformed,
                    format!("location {i}: unknown host_type {other:?}"),
                ))
            }
            None => {
                return Err(issue(
                    IssueKind::MissingRequiredField,
                    format!("location {i}: missing host_type"),
                ))
            }
        };
        let url = non_blank(loc.url)
            .or_else(|| non_blank(loc.url_for_landing_page))
            .or_else(|| non_blank(loc.url_for_pdf))
            .ok_or_else(|| {
                issue(
                    IssueKind::MissingRequiredField,
                    format!("location {i}: missing url"),
                )
            })?;
        locations.push(OaLocation {
            host_type,
            url,
            license: non_blank(loc.license),
            endpoint_hint: non_blank(loc.endpoint_id),
        });
    }

    Ok(Some(OaEvidenceRecord {
        doi,
        journal_is_oa,
        journal_issn: non_blank(raw.journal_issn),
        locations,
    }))
}

/// Iterator over an evidence dump. Holds one line in memory at a time.
pub struct EvidenceStream<R> {
    reader: R,
    buf: Vec<u8>,
    line_no: u64,
    non_blank_lines: u64,
    rejected: u64,
    source: String,
    failed: bool,
}

impl<R: BufRead> EvidenceStream<R> {
    pub fn new(reader: R, source: &str) -> Self {
        EvidenceStream {
            reader,
            buf: Vec::with_capacity(4096),
            line_no: 0,
            non_blank_lines: 0,
            rejected: 0,
            source: source.to_owned(),
            failed: false,
        }
    }

    /// Non-blank lines read so far.
    pub fn lines_read(&self) -> u64 {
        self.non_blank_lines
    }

    /// Lines rejected so far.
    pub fn rejected(&self) -> u64 {
        self.rejected
    }
}

impl<R: BufRead> Iterator for EvidenceStream<R> {
    type Item = Result<EvidenceItem, IngestError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        loop {
            self.buf.clear();
            match self.reader.read_until(b'\n', &mut self.buf) {
                Ok(0) => return None,
                Ok(_) => {}
                Err(e) => {
                    self.failed = true;
                    return Some(Err(IngestError::io(&self.source, e)));
                }
            }
            self.line_no += 1;
            // Keep very long lines from pinning a large buffer for the rest of the stream.
            let parsed = parse_evidence_line(&self.buf, &self.source, self.line_no);
            if self.buf.capacity() > 1 << 20 {
                self.buf = Vec::with_capacity(4096);
            }
            match parsed {
                Ok(None) => continue,
                Ok(Some(record)) => {
                    self.non_blank_lines += 1;
                    return Some(Ok(EvidenceItem::Record(record)));
                }
                Err(issue) => {
                    self.non_blank_lines += 1;
                    self.rejected += 1;
                    return Some(Ok(EvidenceItem::Issue(issue)));
                }
            }
        }
    }
}

/// Open an evidence dump, plain or gzip-compressed.
pub fn parse_evidence_stream<'a, R: Read + Send + 'a>(
    reader: R,
    source: &str,
) -> Result<EvidenceStream<Box<dyn BufRead + Send + 'a>>, IngestError> {
    Ok(EvidenceStream::new(open_reader(reader, source)?, source))
}
