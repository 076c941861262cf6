//! Domain types shared by every stage of the pipeline.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

/// Exact share of a count over another count.
pub type Share = Ratio<u64>;

/// Exact statistic over many shares (mean, median).
pub type Stat = num_rational::BigRational;

pub fn share_to_stat(s: Share) -> Stat {
    Stat::new((*s.numer()).into(), (*s.denom()).into())
}

/// Build a share, or `None` when the denominator is zero.
pub fn share(numerator: u64, denominator: u64) -> Option<Share> {
    (denominator > 0).then(|| Ratio::new(numerator, denominator))
}

const DOI_PREFIXES: &[&str] = &[
    "https://doi.org/",
    "http://doi.org/",
    "https://dx.doi.org/",
    "http://dx.doi.org/",
    "doi.org/",
    "dx.doi.org/",
    "doi:",
];

/// Normalize a raw DOI string.
///
/// Lowercases, trims and strips one resolver prefix. Anything that does not
/// start with `10.` afterwards is rejected.
pub fn normalize_doi(raw: &str) -> Option<String> {
    let lowered = raw.trim().to_lowercase();
    let mut rest = lowered.as_str();
    for prefix in DOI_PREFIXES {
        if let Some(stripped) = rest.strip_prefix(prefix) {
            rest = stripped;
            break;
        }
    }
    let rest = rest.trim();
    if rest.starts_with("10.") && rest.len() > 3 {
        Some(rest.to_owned())
    } else {
        None
    }
}

/// A normalized DOI.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct Doi(String);

impl Doi {
    pub fn parse(raw: &str) -> Option<Self> {
        normalize_doi(raw).map(Doi)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Doi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DocType {
    Article,
    Review,
    Letter,
}

impl FromStr for DocType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "article" => Ok(DocType::Article),
            "review" => Ok(DocType::Review),
            "letter" => Ok(DocType::Letter),
            other => Err(format!("document type {other:?} is not citable")),
        }
    }
}

/// The five main fields publications are assigned to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Field {
    BiomedicalHealth,
    LifeEarth,
    MathComputer,
    PhysicalEngineering,
    SocialHumanities,
}

impl Field {
    pub const ALL: [Field; 5] = [
        Field::BiomedicalHealth,
        Field::LifeEarth,
        Field::MathComputer,
        Field::PhysicalEngineering,
        Field::SocialHumanities,
    ];

    /// Short code used in input and output files.
    pub fn code(self) -> &'static str {
        match self {
            Field::BiomedicalHealth => "BHS",
            Field::LifeEarth => "LES",
            Field::MathComputer => "MCS",
            Field::PhysicalEngineering => "PSE",
            Field::SocialHumanities => "SSH",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Field::BiomedicalHealth => "Biomedical and Health Sciences",
            Field::LifeEarth => "Life and Earth Sciences",
            Field::MathComputer => "Mathematics and Computer Science",
            Field::PhysicalEngineering => "Physical Sciences and Engineering",
            Field::SocialHumanities => "Social Sciences and Humanities",
        }
    }
}

impl FromStr for Field {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        Field::ALL
            .into_iter()
            .find(|f| f.code().eq_ignore_ascii_case(s) || f.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown field {s:?}"))
    }
}

/// A field or the "All sciences" rollup.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FieldScope {
    Field(Field),
    AllSciences,
}

impl FieldScope {
    /// The five fields in declared order followed by the rollup.
    pub const ALL: [FieldScope; 6] = [
        FieldScope::Field(Field::BiomedicalHealth),
        FieldScope::Field(Field::LifeEarth),
        FieldScope::Field(Field::MathComputer),
        FieldScope::Field(Field::PhysicalEngineering),
        FieldScope::Field(Field::SocialHumanities),
        FieldScope::AllSciences,
    ];

    pub fn code(self) -> &'static str {
        match self {
            FieldScope::Field(f) => f.code(),
            FieldScope::AllSciences => "ALL",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OaType {
    Gold,
    Green,
    Hybrid,
    Bronze,
}

impl OaType {
    pub const ALL: [OaType; 4] = [OaType::Gold, OaType::Green, OaType::Hybrid, OaType::Bronze];

    pub fn label(self) -> &'static str {
        match self {
            OaType::Gold => "gold",
            OaType::Green => "green",
            OaType::Hybrid => "hybrid",
            OaType::Bronze => "bronze",
        }
    }
}

/// One OA type or any of them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TypeScope {
    Type(OaType),
    Any,
}

impl TypeScope {
    pub const ALL: [TypeScope; 5] = [
        TypeScope::Type(OaType::Gold),
        TypeScope::Type(OaType::Green),
        TypeScope::Type(OaType::Hybrid),
        TypeScope::Type(OaType::Bronze),
        TypeScope::Any,
    ];

    pub fn label(self) -> &'static str {
        match self {
            TypeScope::Type(t) => t.label(),
            TypeScope::Any => "any",
        }
    }
}

/// One citable publication.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublicationRecord {
    pub pub_id: String,
    pub doi: Option<Doi>,
    pub year: i32,
    pub doc_type: DocType,
    /// ISO-639-1 code, or `"unknown"`.
    pub language: String,
    pub journal_id: Option<String>,
    pub institution_ids: BTreeSet<String>,
    /// Never empty.
    pub field_ids: BTreeSet<Field>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HostType {
    Publisher,
    Repository,
}

/// A single piece of OA evidence for a DOI.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OaLocation {
    pub host_type: HostType,
    pub url: String,
    pub license: Option<String>,
    pub endpoint_hint: Option<String>,
}

impl OaLocation {
    pub fn publisher(url: impl Into<String>, license: Option<&str>) -> Self {
        OaLocation {
            host_type: HostType::Publisher,
            url: url.into(),
            license: license.map(str::to_owned),
            endpoint_hint: None,
        }
    }

    pub fn repository(url: impl Into<String>) -> Self {
        OaLocation {
            host_type: HostType::Repository,
            url: url.into(),
            license: None,
            endpoint_hint: None,
        }
    }

    /// A license of any non-blank value counts.
    pub fn is_licensed(&self) -> bool {
        self.license
            .as_deref()
            .is_some_and(|l| !l.trim().is_empty())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OaEvidenceRecord {
    pub doi: Doi,
    pub journal_is_oa: bool,
    pub journal_issn: Option<String>,
    pub locations: Vec<OaLocation>,
}

/// Outcome of classifying one publication.
///
/// At most one of gold, hybrid and bronze can be set; green combines with
/// any of them.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct OaTypeSet {
    gold: bool,
    green: bool,
    hybrid: bool,
    bronze: bool,
}

impl OaTypeSet {
    pub const CLOSED: OaTypeSet = OaTypeSet {
        gold: false,
        green: false,
        hybrid: false,
        bronze: false,
    };

    /// Returns `None` when more than one publisher-side type is set.
    pub fn try_new(gold: bool, green: bool, hybrid: bool, bronze: bool) -> Option<Self> {
        let publisher_side = u8::from(gold) + u8::from(hybrid) + u8::from(bronze);
        (publisher_side <= 1).then_some(OaTypeSet {
            gold,
            green,
            hybrid,
            bronze,
        })
    }

    /// Panics if the exclusivity invariant is violated.
    pub fn new(gold: bool, green: bool, hybrid: bool, bronze: bool) -> Self {
        Self::try_new(gold, green, hybrid, bronze)
            .expect("gold, hybrid and bronze are mutually exclusive")
    }

    pub fn gold(&self) -> bool {
        self.gold
    }

    pub fn green(&self) -> bool {
        self.green
    }

    pub fn hybrid(&self) -> bool {
        self.hybrid
    }

    pub fn bronze(&self) -> bool {
        self.bronze
    }

    pub fn any_oa(&self) -> bool {
        self.gold || self.green || self.hybrid || self.bronze
    }

    pub fn has(&self, t: OaType) -> bool {
        match t {
            OaType::Gold => self.gold,
            OaType::Green => self.green,
            OaType::Hybrid => self.hybrid,
            OaType::Bronze => self.bronze,
        }
    }

    pub fn matches(&self, scope: TypeScope) -> bool {
        match scope {
            TypeScope::Type(t) => self.has(t),
            TypeScope::Any => self.any_oa(),
        }
    }

    /// The publisher-side type, if any.
    pub fn publisher_type(&self) -> Option<OaType> {
        if self.gold {
            Some(OaType::Gold)
        } else if self.hybrid {
            Some(OaType::Hybrid)
        } else if self.bronze {
            Some(OaType::Bronze)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Institution {
    pub inst_id: String,
    pub name: String,
    pub country: String,
    /// Never empty. A country can belong to several regions.
    pub regions: BTreeSet<String>,
    /// Already passed through [`crate::repo::normalize_url`].
    pub repo_url_patterns: Vec<String>,
}

/// APC status of a journal; DOAJ does not cover every OA journal.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub enum ApcStatus {
    Yes,
    No,
    #[default]
    Unknown,
}

impl FromStr for ApcStatus {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "yes" | "y" | "true" | "1" => Ok(ApcStatus::Yes),
            "no" | "n" | "false" | "0" => Ok(ApcStatus::No),
            "" | "unknown" | "na" | "n/a" => Ok(ApcStatus::Unknown),
            other => Err(format!("invalid APC flag {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JournalRecord {
    pub journal_id: String,
    pub issns: BTreeSet<String>,
    pub country: Option<String>,
    pub is_fully_oa: bool,
    pub has_apc: ApcStatus,
    pub publisher_address: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Scope {
    University,
    Country,
    Region,
    World,
}

/// One aggregated indicator value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndicatorCell {
    pub scope: Scope,
    pub scope_id: String,
    pub field: FieldScope,
    pub oa_type: TypeScope,
    pub numerator: u64,
    pub denominator: u64,
}

impl IndicatorCell {
    pub fn share(&self) -> Option<Share> {
        share(self.numerator, self.denominator)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum DenominatorMode {
    /// Every publication, with or without DOI.
    #[default]
    AllPubs,
    /// Only publications carrying a DOI.
    DoiPubs,
}

impl FromStr for DenominatorMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "all" | "all_pubs" => Ok(DenominatorMode::AllPubs),
            "doi" | "doi_pubs" => Ok(DenominatorMode::DoiPubs),
            other => Err(format!("unknown denominator mode {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub min_universities_country: usize,
    pub min_universities_gold_model: usize,
    pub denominator_mode: DenominatorMode,
    pub pmc_url_patterns: Vec<String>,
    pub handle_pattern: String,
    pub period: RangeInclusive<i32>,
    /// Fraction of rejected lines per input above which a run fails.
    pub max_issue_rate: f64,
    pub shards: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            min_universities_country: 10,
            min_universities_gold_model: 5,
            denominator_mode: DenominatorMode::AllPubs,
            pmc_url_patterns: vec!["ncbi.nlm.nih.gov/pmc".to_owned()],
            handle_pattern: "hdl.handle.net".to_owned(),
            period: 2014..=2017,
            max_issue_rate: 0.1,
            shards: 1,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.min_universities_country == 0 || self.min_universities_gold_model == 0 {
            return Err(ConfigError::Invalid(
                "university thresholds must be at least 1".into(),
            ));
        }
        if self.period.is_empty() {
            return Err(ConfigError::Invalid(format!(
                "empty period {}-{}",
                self.period.start(),
                self.period.end()
            )));
        }
        if self.shards == 0 {
            return Err(ConfigError::Invalid(
                "shard count must be at least 1".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.max_issue_rate) {
            return Err(ConfigError::Invalid(
                "issue rate ceiling must lie in [0, 1]".into(),
            ));
        }
        if self.handle_pattern.trim().is_empty() {
            return Err(ConfigError::Invalid(
                "handle pattern must not be empty".into(),
            ));
        }
        if self.pmc_url_patterns.iter().any(|p| p.trim().is_empty()) {
            return Err(ConfigError::Invalid(
                "PMC patterns must not be empty".into(),
            ));
        }
        Ok(())
    }
}

/// Parse a `START-END` (or single `YEAR`) period.
pub fn parse_period(s: &str) -> Result<RangeInclusive<i32>, ConfigError> {
    let bad = || ConfigError::Invalid(format!("invalid period {s:?}, expected START-END"));
    let (start, end) = match s.trim().split_once('-') {
        Some((a, b)) => (
            a.trim().parse().map_err(|_| bad())?,
            b.trim().parse().map_err(|_| bad())?,
        ),
        None => {
            let y = s.trim().parse().map_err(|_| bad())?;
            (y, y)
        }
    };
    if start > end {
        return Err(bad());
    }
    Ok(start..=end)
}
