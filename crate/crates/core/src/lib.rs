//! Open Access classification and institutional OA indicators.
//!
//! The pipeline reads an Unpaywall-style evidence dump together with a
//! publication table, an institution roster and a journal registry, labels
//! every publication as gold, green, hybrid and/or bronze OA, and aggregates
//! the labels into university, country, region and field tables.
//!
//! ```no_run
//! use oalens::{pipeline::{run_pipeline, BundlePart, InputPaths}, PipelineConfig, ReportFormat};
//!
//! let inputs = InputPaths {
//!     evidence: "unpaywall.jsonl.gz".into(),
//!     publications: "publications.csv".into(),
//!     institutions: Some("institutions.csv".into()),
//!     journals: Some("journals.csv".into()),
//!     issue_log: None,
//! };
//! let bundle = run_pipeline(&PipelineConfig::default(), &inputs)?;
//! bundle.write("out".as_ref(), BundlePart::Report, ReportFormat::Csv)?;
//! # Ok::<(), oalens::PipelineError>(())
//! ```

pub mod classify;
pub mod error;
pub mod gold;
pub mod indicators;
pub mod ingest;
pub mod model;
pub mod pipeline;
pub mod repo;
pub mod report;

pub use classify::{classify, classify_stream, ClassifiedPublication};
pub use error::{ConfigError, IngestError, PipelineError};
pub use model::{
    normalize_doi, ApcStatus, DenominatorMode, DocType, Doi, Field, FieldScope, HostType,
    IndicatorCell, Institution, JournalRecord, OaEvidenceRecord, OaLocation, OaType, OaTypeSet,
    PipelineConfig, PublicationRecord, Scope, Share, Stat, TypeScope,
};
pub use pipeline::{run_pipeline, BundlePart, InputPaths, ReportBundle};
pub use report::{emit_report, ReportFormat};
