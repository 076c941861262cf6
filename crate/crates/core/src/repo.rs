//! Institutional repository matching and PubMed Central accounting.

use std::collections::{BTreeMap, BTreeSet};

use crate::classify::ClassifiedPublication;
use crate::ingest::InstitutionTable;
use crate::model::{share, HostType, Institution, OaLocation, Share};

/// Lowercase, drop the scheme, any leading `www.` and trailing slashes.
/// Idempotent.
pub fn normalize_url(url: &str) -> String {
    let lowered = url.trim().to_lowercase();
    let mut rest = lowered.as_str();
    loop {
        let before = rest.len();
        if let Some((scheme, tail)) = rest.split_once("://") {
            if !scheme.is_empty()
                && scheme
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.'))
            {
                rest = tail;
            }
        }
        if let Some(tail) = rest.strip_prefix("www.") {
            rest = tail;
        }
        rest = rest.trim_end_matches('/').trim();
        if rest.len() == before {
            return rest.to_owned();
        }
    }
}

fn repository_urls(locations: &[OaLocation]) -> impl Iterator<Item = String> + '_ {
    locations
        .iter()
        .filter(|l| l.host_type == HostType::Repository)
        .map(|l| normalize_url(&l.url))
}

/// Whether a publication's evidence points at one institution's repository.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RepoMatch {
    /// Repository URL contains one of the institution's patterns.
    pub lower: bool,
    /// `lower`, or a repository URL contains the handle pattern.
    pub upper: bool,
}

pub fn match_repository(
    locations: &[OaLocation],
    inst: &Institution,
    handle_pattern: &str,
) -> RepoMatch {
    let handle = normalize_url(handle_pattern);
    let mut m = RepoMatch::default();
    for url in repository_urls(locations) {
        if inst
            .repo_url_patterns
            .iter()
            .any(|p| !p.is_empty() && url.contains(p.as_str()))
        {
            m.lower = true;
        }
        if !handle.is_empty() && url.contains(&handle) {
            m.upper = true;
        }
    }
    m.upper |= m.lower;
    m
}

/// Repository coverage of one university's green output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepoShare {
    pub inst_id: String,
    pub name: String,
    pub country: String,
    pub pubs: u64,
    pub green_count: u64,
    pub matched_lower: u64,
    pub matched_upper: u64,
}

impl RepoShare {
    /// `(lower, upper)` share of green publications found in the
    /// university's repository; `None` without green publications.
    pub fn interval(&self) -> Option<(Share, Share)> {
        Some((
            share(self.matched_lower, self.green_count)?,
            share(self.matched_upper, self.green_count)?,
        ))
    }
}

/// Count green publications of `inst` and how many of them sit in its
/// repository. `pubs` must all be affiliated to `inst`.
pub fn repo_share_bounds<'a>(
    pubs: impl IntoIterator<Item = &'a ClassifiedPublication>,
    inst: &Institution,
    handle_pattern: &str,
) -> RepoShare {
    let mut out = RepoShare {
        inst_id: inst.inst_id.clone(),
        name: inst.name.clone(),
        country: inst.country.clone(),
        pubs: 0,
        green_count: 0,
        matched_lower: 0,
        matched_upper: 0,
    };
    for p in pubs {
        out.pubs += 1;
        if !p.types.green() {
            continue;
        }
        out.green_count += 1;
        let m = match_repository(&p.locations_used, inst, handle_pattern);
        out.matched_lower += u64::from(m.lower);
        out.matched_upper += u64::from(m.upper);
    }
    out
}

/// Repository bounds for every roster institution, sorted by `inst_id`.
pub fn repo_table(
    pubs: &[ClassifiedPublication],
    institutions: &InstitutionTable,
    handle_pattern: &str,
) -> Vec<RepoShare> {
    let mut by_inst: BTreeMap<&str, Vec<&ClassifiedPublication>> = BTreeMap::new();
    for p in pubs {
        for id in &p.publication.institution_ids {
            if institutions.contains_key(id) {
                by_inst.entry(id.as_str()).or_default().push(p);
            }
        }
    }
    institutions
        .values()
        .map(|inst| {
            let affiliated = by_inst
                .get(inst.inst_id.as_str())
                .map(Vec::as_slice)
                .unwrap_or(&[]);
            repo_share_bounds(affiliated.iter().copied(), inst, handle_pattern)
        })
        .collect()
}

/// True when a repository location matches a PMC pattern.
pub fn detect_pmc(locations: &[OaLocation], pmc_url_patterns: &[String]) -> bool {
    let patterns: Vec<String> = pmc_url_patterns.iter().map(|p| normalize_url(p)).collect();
    repository_urls(locations).any(|url| {
        patterns
            .iter()
            .any(|p| !p.is_empty() && url.contains(p.as_str()))
    })
}

/// Green output of one country and its PMC component.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PmcRow {
    pub country: String,
    pub green_count: u64,
    pub pmc_count: u64,
    /// PMC publications without any other repository copy.
    pub pmc_only_count: u64,
    pub pmc_gold: u64,
    pub pmc_bronze: u64,
    pub pmc_hybrid: u64,
}

impl PmcRow {
    fn empty(country: &str) -> Self {
        PmcRow {
            country: country.to_owned(),
            green_count: 0,
            pmc_count: 0,
            pmc_only_count: 0,
            pmc_gold: 0,
            pmc_bronze: 0,
            pmc_hybrid: 0,
        }
    }

    pub fn pmc_share(&self) -> Option<Share> {
        share(self.pmc_count, self.green_count)
    }

    /// Share of PMC publications that are also gold.
    pub fn pct_gold(&self) -> Option<Share> {
        share(self.pmc_gold, self.pmc_count)
    }

    pub fn pct_bronze(&self) -> Option<Share> {
        share(self.pmc_bronze, self.pmc_count)
    }

    pub fn pct_hybrid(&self) -> Option<Share> {
        share(self.pmc_hybrid, self.pmc_count)
    }
}

/// Per-country PMC accounting over distinct publications.
///
/// Rows are sorted by PMC share of green output, highest first; ties and
/// countries without green output follow by country code.
pub fn pmc_overlap_table(
    pubs: &[ClassifiedPublication],
    institutions: &InstitutionTable,
    pmc_url_patterns: &[String],
) -> Vec<PmcRow> {
    let patterns: Vec<String> = pmc_url_patterns.iter().map(|p| normalize_url(p)).collect();
    let mut rows: BTreeMap<&str, PmcRow> = institutions
        .values()
        .map(|i| (i.country.as_str(), PmcRow::empty(&i.country)))
        .collect();
    for p in pubs {
        if !p.types.green() {
            continue;
        }
        let countries: BTreeSet<&str> = p
            .publication
            .institution_ids
            .iter()
            .filter_map(|id| institutions.get(id))
            .map(|i| i.country.as_str())
            .collect();
        if countries.is_empty() {
            continue;
        }
        let (mut pmc, mut other_repo) = (false, false);
        for url in repository_urls(&p.locations_used) {
            if patterns
                .iter()
                .any(|pat| !pat.is_empty() && url.contains(pat.as_str()))
            {
                pmc = true;
            } else {
                other_repo = true;
            }
        }
        for c in countries {
            let row = rows.get_mut(c).expect("row per roster country");
            row.green_count += 1;
            if pmc {
                row.pmc_count += 1;
                row.pmc_only_count += u64::from(!other_repo);
                row.pmc_gold += u64::from(p.types.gold());
                row.pmc_bronze += u64::from(p.types.bronze());
                row.pmc_hybrid += u64::from(p.types.hybrid());
            }
        }
    }
    let mut out: Vec<PmcRow> = rows.into_values().collect();
    out.sort_by(|a, b| match (a.pmc_share(), b.pmc_share()) {
        (Some(x), Some(y)) => y.cmp(&x).then_with(|| a.country.cmp(&b.country)),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => a.country.cmp(&b.country),
    });
    out
}
