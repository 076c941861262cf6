//! Parsers for the four inputs: the evidence dump, the publication table, the
//! institution roster and the journal registry.
//!
//! All parsers skip and report defective lines instead of aborting. Only
//! unreadable input (or a table header lacking a required column) is fatal.

mod evidence;
mod tables;

use std::fmt;
use std::io::{BufRead, BufReader, Read};

use flate2::bufread::MultiGzDecoder;

use crate::error::IngestError;

pub use evidence::{parse_evidence_line, parse_evidence_stream, EvidenceItem, EvidenceStream};
pub use tables::{
    parse_institutions, parse_journals, parse_publications, parse_registries, InstitutionTable,
    JournalTable, Registries, TableFormat, TableParse,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum IssueKind {
    Malformed,
    MissingRequiredField,
    DuplicateKey,
    /// Well-formed but outside the analysed set (non-citable type, year
    /// outside the period). Not counted as a schema violation.
    OutOfScope,
}

impl IssueKind {
    pub const ALL: [IssueKind; 4] = [
        IssueKind::Malformed,
        IssueKind::MissingRequiredField,
        IssueKind::DuplicateKey,
        IssueKind::OutOfScope,
    ];

    pub fn label(self) -> &'static str {
        match self {
            IssueKind::Malformed => "malformed",
            IssueKind::MissingRequiredField => "missing_required_field",
            IssueKind::DuplicateKey => "duplicate_key",
            IssueKind::OutOfScope => "out_of_scope",
        }
    }

    pub fn is_violation(self) -> bool {
        self != IssueKind::OutOfScope
    }
}

impl fmt::Display for IssueKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// A rejected or filtered input line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseIssue {
    pub source: String,
    /// 1-based.
    pub line_no: u64,
    pub kind: IssueKind,
    pub detail: String,
}

impl ParseIssue {
    pub(crate) fn new(
        source: &str,
        line_no: u64,
        kind: IssueKind,
        detail: impl Into<String>,
    ) -> Self {
        ParseIssue {
            source: source.to_owned(),
            line_no: line_no.max(1),
            kind,
            detail: detail.into(),
        }
    }
}

impl fmt::Display for ParseIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}: {}: {}",
            self.source, self.line_no, self.kind, self.detail
        )
    }
}

const GZIP_MAGIC: [u8; 2] = [0x1f, 0x8b];

/// Wrap a byte source in a buffered reader, transparently decompressing
/// gzip input (detected by its magic bytes).
pub fn open_reader<'a, R: Read + Send + 'a>(
    inner: R,
    source_name: &str,
) -> Result<Box<dyn BufRead + Send + 'a>, IngestError> {
    let mut buffered = BufReader::with_capacity(64 * 1024, inner);
    let head = buffered
        .fill_buf()
        .map_err(|e| IngestError::io(source_name, e))?;
    if head.starts_with(&GZIP_MAGIC) {
        Ok(Box::new(BufReader::with_capacity(
            64 * 1024,
            MultiGzDecoder::new(buffered),
        )))
    } else {
        Ok(Box::new(buffered))
    }
}
