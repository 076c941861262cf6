//! End-to-end run: ingest, classify, aggregate, emit.
//!
//! The evidence dump is streamed once and only records whose DOI occurs in
//! the publication table are kept, so memory grows with the publication set
//! and not with the dump. Classification and counting fan out over shards;
//! everything downstream works on merged aggregates and sorted tables, so
//! output bytes do not depend on the shard count.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::thread;

use crate::classify::{classify_publication, ClassifiedPublication};
use crate::error::PipelineError;
use crate::gold::{gold_country_model, CountryLookup, GoldModelTable};
use crate::indicators::{
    field_profile, median_share_by_country, region_rollup, university_indicators, world_summary,
    FullCounts, GroupSummary, OverlapMatrix, ProfileRow,
};
use crate::ingest::{
    parse_evidence_stream, parse_institutions, parse_journals, parse_publications, EvidenceItem,
    InstitutionTable, IssueKind, JournalTable, ParseIssue, TableFormat,
};
use crate::model::{Doi, IndicatorCell, OaEvidenceRecord, PipelineConfig, PublicationRecord};
use crate::repo::{pmc_overlap_table, repo_table, PmcRow, RepoShare};
use crate::report::{
    classifications_table, emit_report, gold_table, issues_table, overlap_table, pmc_table,
    profile_table, repo_bounds_table, summary_table, university_table, ReportFormat, Table,
};

/// Input files of a run. Registries may be omitted when only classifying.
#[derive(Debug, Clone, Default)]
pub struct InputPaths {
    pub evidence: PathBuf,
    pub publications: PathBuf,
    pub institutions: Option<PathBuf>,
    pub journals: Option<PathBuf>,
    /// Where to write every parse issue, one per line.
    pub issue_log: Option<PathBuf>,
}

/// Everything a run produces.
#[derive(Debug, Clone)]
pub struct ReportBundle {
    pub classified: Vec<ClassifiedPublication>,
    pub overlap: OverlapMatrix,
    pub university_cells: Vec<IndicatorCell>,
    pub country_medians: Vec<GroupSummary>,
    pub field_medians: Vec<GroupSummary>,
    pub region_medians: Vec<GroupSummary>,
    pub profiles: Vec<ProfileRow>,
    pub repo_bounds: Vec<RepoShare>,
    pub pmc: Vec<PmcRow>,
    pub gold: GoldModelTable,
    /// Issue counts per (source, kind).
    pub issue_counts: BTreeMap<(String, IssueKind), u64>,
}

/// Which tables to write; one per CLI subcommand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BundlePart {
    Classify,
    Aggregate,
    RepoMatch,
    PmcReport,
    GoldModel,
    /// Every table except the per-publication classifications.
    Report,
}

impl ReportBundle {
    pub fn tables(&self, part: BundlePart) -> Vec<Table> {
        let mut out = Vec::new();
        let all = part == BundlePart::Report;
        if part == BundlePart::Classify {
            out.push(classifications_table(&self.classified));
        }
        if all || part == BundlePart::Aggregate {
            out.push(overlap_table(&self.overlap));
            out.push(university_table(&self.university_cells));
            out.push(profile_table(&self.profiles));
            let displayed: Vec<GroupSummary> = self
                .country_medians
                .iter()
                .filter(|r| r.displayed)
                .cloned()
                .collect();
            out.push(summary_table(
                "country_medians",
                "country",
                &displayed,
                false,
            ));
            out.push(summary_table(
                "country_medians_all",
                "country",
                &self.country_medians,
                true,
            ));
            out.push(summary_table(
                "field_medians",
                "scope",
                &self.field_medians,
                false,
            ));
            out.push(summary_table(
                "region_medians",
                "region",
                &self.region_medians,
                false,
            ));
        }
        if all || part == BundlePart::RepoMatch {
            out.push(repo_bounds_table(&self.repo_bounds));
        }
        if all || part == BundlePart::PmcReport {
            out.push(pmc_table(&self.pmc));
        }
        if all || part == BundlePart::GoldModel {
            out.push(gold_table("gold_model", self.gold.displayed(), None));
            out.push(gold_table(
                "gold_model_all",
                &self.gold.rows,
                Some(self.gold.min_universities),
            ));
        }
        out.push(issues_table(&self.issue_counts));
        out
    }

    /// Write the selected tables into `dir`, creating it if needed.
    pub fn write(
        &self,
        dir: &Path,
        part: BundlePart,
        format: ReportFormat,
    ) -> Result<Vec<PathBuf>, PipelineError> {
        fs::create_dir_all(dir).map_err(|error| PipelineError::Write {
            path: dir.to_owned(),
            error,
        })?;
        let mut written = Vec::new();
        for table in self.tables(part) {
            let path = dir.join(format!("{}.{}", table.name, format.extension()));
            fs::write(&path, emit_report(&table, format)).map_err(|error| {
                PipelineError::Write {
                    path: path.clone(),
                    error,
                }
            })?;
            written.push(path);
        }
        Ok(written)
    }
}

struct IssueSink {
    counts: BTreeMap<(String, IssueKind), u64>,
    log: Option<(PathBuf, BufWriter<File>)>,
}

impl IssueSink {
    fn new(log: Option<&Path>) -> Result<Self, PipelineError> {
        let log = match log {
            Some(path) => {
                let file = File::create(path).map_err(|error| PipelineError::Write {
                    path: path.to_owned(),
                    error,
                })?;
                Some((path.to_owned(), BufWriter::new(file)))
            }
            None => None,
        };
        Ok(IssueSink {
            counts: BTreeMap::new(),
            log,
        })
    }

    fn record(&mut self, issue: &ParseIssue) -> Result<(), PipelineError> {
        *self
            .counts
            .entry((issue.source.clone(), issue.kind))
            .or_default() += 1;
        if let Some((path, w)) = &mut self.log {
            writeln!(w, "{issue}").map_err(|error| PipelineError::Write {
                path: path.clone(),
                error,
            })?;
        }
        Ok(())
    }

    fn finish(mut self) -> Result<BTreeMap<(String, IssueKind), u64>, PipelineError> {
        if let Some((path, w)) = &mut self.log {
            w.flush().map_err(|error| PipelineError::Write {
                path: path.clone(),
                error,
            })?;
        }
        Ok(self.counts)
    }
}

fn open(path: &Path) -> Result<File, PipelineError> {
    File::open(path).map_err(|error| PipelineError::Open {
        path: path.to_owned(),
        error,
    })
}

fn check_ceiling(
    source: &str,
    rejected: u64,
    lines: u64,
    ceiling: f64,
) -> Result<(), PipelineError> {
    if lines > 0 && rejected as f64 > ceiling * lines as f64 {
        return Err(PipelineError::IssueCeiling {
            source_name: source.to_owned(),
            rejected,
            lines,
            ceiling,
        });
    }
    Ok(())
}

fn load_registries(
    inputs: &InputPaths,
    config: &PipelineConfig,
    sink: &mut IssueSink,
) -> Result<(InstitutionTable, JournalTable), PipelineError> {
    let mut institutions = InstitutionTable::new();
    if let Some(path) = &inputs.institutions {
        let t = parse_institutions(open(path)?, TableFormat::from_path(path), "institutions")?;
        for i in &t.issues {
            sink.record(i)?;
        }
        check_ceiling("institutions", t.rejected(), t.lines, config.max_issue_rate)?;
        institutions = t
            .records
            .into_iter()
            .map(|i| (i.inst_id.clone(), i))
            .collect();
    }
    let mut journals = JournalTable::new();
    if let Some(path) = &inputs.journals {
        let t = parse_journals(open(path)?, TableFormat::from_path(path), "journals")?;
        for i in &t.issues {
            sink.record(i)?;
        }
        check_ceiling("journals", t.rejected(), t.lines, config.max_issue_rate)?;
        journals = t
            .records
            .into_iter()
            .map(|j| (j.journal_id.clone(), j))
            .collect();
    }
    Ok((institutions, journals))
}

/// Stream the dump, keeping the first record of every wanted DOI.
fn load_evidence(
    path: &Path,
    wanted: &HashSet<Doi>,
    config: &PipelineConfig,
    sink: &mut IssueSink,
) -> Result<HashMap<Doi, OaEvidenceRecord>, PipelineError> {
    let mut stream = parse_evidence_stream(open(path)?, "evidence")?;
    let mut index = HashMap::with_capacity(wanted.len());
    for item in stream.by_ref() {
        match item? {
            EvidenceItem::Record(record) => {
                if !wanted.contains(&record.doi) {
                    continue;
                }
                if index.contains_key(&record.doi) {
                    sink.record(&ParseIssue::new(
                        "evidence",
                        0,
                        IssueKind::DuplicateKey,
                        format!("duplicate evidence for {}", record.doi),
                    ))?;
                    continue;
                }
                index.insert(record.doi.clone(), record);
            }
            EvidenceItem::Issue(issue) => sink.record(&issue)?,
        }
    }
    check_ceiling(
        "evidence",
        stream.rejected(),
        stream.lines_read(),
        config.max_issue_rate,
    )?;
    Ok(index)
}

struct ShardOutput {
    classified: Vec<ClassifiedPublication>,
    counts: FullCounts,
    overlap: OverlapMatrix,
}

fn classify_shard(
    pubs: Vec<PublicationRecord>,
    evidence: &HashMap<Doi, OaEvidenceRecord>,
    journals: &JournalTable,
) -> ShardOutput {
    let mut out = ShardOutput {
        classified: Vec::with_capacity(pubs.len()),
        counts: FullCounts::default(),
        overlap: OverlapMatrix::default(),
    };
    for p in pubs {
        let c = classify_publication(p, evidence, journals);
        out.counts.add(&c);
        out.overlap.add(&c);
        out.classified.push(c);
    }
    out
}

fn classify_sharded(
    pubs: Vec<PublicationRecord>,
    evidence: &HashMap<Doi, OaEvidenceRecord>,
    journals: &JournalTable,
    shards: usize,
) -> ShardOutput {
    let chunk = pubs.len().div_ceil(shards.max(1)).max(1);
    let mut parts: Vec<Vec<PublicationRecord>> = Vec::new();
    let mut rest = pubs;
    while rest.len() > chunk {
        let tail = rest.split_off(chunk);
        parts.push(rest);
        rest = tail;
    }
    parts.push(rest);

    let outputs: Vec<ShardOutput> = if parts.len() == 1 {
        parts
            .into_iter()
            .map(|p| classify_shard(p, evidence, journals))
            .collect()
    } else {
        thread::scope(|s| {
            let handles: Vec<_> = parts
                .into_iter()
                .map(|p| s.spawn(move || classify_shard(p, evidence, journals)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("classification shard panicked"))
                .collect()
        })
    };

    let mut merged = ShardOutput {
        classified: Vec::new(),
        counts: FullCounts::default(),
        overlap: OverlapMatrix::default(),
    };
    for o in outputs {
        merged.classified.extend(o.classified);
        merged.counts.merge(o.counts);
        merged.overlap.merge(&o.overlap);
    }
    merged
}

/// Run the whole pipeline and return the bundle without writing it.
pub fn run_pipeline(
    config: &PipelineConfig,
    inputs: &InputPaths,
) -> Result<ReportBundle, PipelineError> {
    config.validate()?;
    let mut sink = IssueSink::new(inputs.issue_log.as_deref())?;

    // Open every input up front so a missing path fails before any work.
    for path in [
        Some(&inputs.evidence),
        Some(&inputs.publications),
        inputs.institutions.as_ref(),
        inputs.journals.as_ref(),
    ]
    .into_iter()
    .flatten()
    {
        open(path)?;
    }

    let (institutions, journals) = load_registries(inputs, config, &mut sink)?;

    let pubs = parse_publications(
        open(&inputs.publications)?,
        TableFormat::from_path(&inputs.publications),
        &config.period,
        "publications",
    )?;
    for i in &pubs.issues {
        sink.record(i)?;
    }
    check_ceiling(
        "publications",
        pubs.rejected(),
        pubs.lines,
        config.max_issue_rate,
    )?;
    let publications = pubs.records;

    let wanted: HashSet<Doi> = publications.iter().filter_map(|p| p.doi.clone()).collect();
    let evidence = load_evidence(&inputs.evidence, &wanted, config, &mut sink)?;
    drop(wanted);

    // Barrier 1: the evidence join is complete.
    let ShardOutput {
        classified,
        mut counts,
        overlap,
    } = classify_sharded(publications, &evidence, &journals, config.shards);
    drop(evidence);

    // Barrier 2: all per-university shares exist before any median.
    counts.retain_institutions(|id| institutions.contains_key(id));
    let university_cells = university_indicators(&counts, config.denominator_mode);
    let country_medians = median_share_by_country(
        &university_cells,
        &institutions,
        config.min_universities_country,
    );
    let field_medians = world_summary(&university_cells);
    let region_medians = region_rollup(&university_cells, &institutions);
    let profiles = university_cells
        .chunk_by(|a, b| a.scope_id == b.scope_id)
        .flat_map(|cells| field_profile(cells, &cells[0].scope_id))
        .collect();

    let repo_bounds = repo_table(&classified, &institutions, &config.handle_pattern);
    let pmc = pmc_overlap_table(&classified, &institutions, &config.pmc_url_patterns);
    let gold = gold_country_model(
        &classified,
        &journals,
        &institutions,
        &CountryLookup::builtin(),
        config.min_universities_gold_model,
    );

    Ok(ReportBundle {
        classified,
        overlap,
        university_cells,
        country_medians,
        field_medians,
        region_medians,
        profiles,
        repo_bounds,
        pmc,
        gold,
        issue_counts: sink.finish()?,
    })
}
