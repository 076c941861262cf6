//! Full-counting aggregation and the indicator tables built on it.
//!
//! Counting produces mergeable partial aggregates, so shards can be counted
//! independently and combined in any order. Medians and means are computed
//! from the merged per-university shares.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::classify::ClassifiedPublication;
use crate::ingest::InstitutionTable;
use crate::model::{
    share, share_to_stat, DenominatorMode, Field, FieldScope, IndicatorCell, OaType, Scope, Share,
    Stat, TypeScope,
};

/// Publication counts of one (institution, field) pair.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TypeCounts {
    pub pubs: u64,
    pub doi_pubs: u64,
    pub gold: u64,
    pub green: u64,
    pub hybrid: u64,
    pub bronze: u64,
    pub any: u64,
}

impl TypeCounts {
    fn add(&mut self, p: &ClassifiedPublication) {
        let t = &p.types;
        self.pubs += 1;
        self.doi_pubs += u64::from(p.publication.doi.is_some());
        self.gold += u64::from(t.gold());
        self.green += u64::from(t.green());
        self.hybrid += u64::from(t.hybrid());
        self.bronze += u64::from(t.bronze());
        self.any += u64::from(t.any_oa());
    }

    fn merge(&mut self, o: &TypeCounts) {
        self.pubs += o.pubs;
        self.doi_pubs += o.doi_pubs;
        self.gold += o.gold;
        self.green += o.green;
        self.hybrid += o.hybrid;
        self.bronze += o.bronze;
        self.any += o.any;
    }

    pub fn numerator(&self, t: TypeScope) -> u64 {
        match t {
            TypeScope::Type(OaType::Gold) => self.gold,
            TypeScope::Type(OaType::Green) => self.green,
            TypeScope::Type(OaType::Hybrid) => self.hybrid,
            TypeScope::Type(OaType::Bronze) => self.bronze,
            TypeScope::Any => self.any,
        }
    }

    pub fn denominator(&self, mode: DenominatorMode) -> u64 {
        match mode {
            DenominatorMode::AllPubs => self.pubs,
            DenominatorMode::DoiPubs => self.doi_pubs,
        }
    }
}

/// Full-counting partial aggregate keyed by (institution, field).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FullCounts {
    cells: BTreeMap<(String, FieldScope), TypeCounts>,
}

impl FullCounts {
    /// Credit `p` to each distinct affiliated institution, once per field
    /// and once for the all-sciences rollup.
    pub fn add(&mut self, p: &ClassifiedPublication) {
        for inst in &p.publication.institution_ids {
            let fields = p
                .publication
                .field_ids
                .iter()
                .map(|f| FieldScope::Field(*f))
                .chain([FieldScope::AllSciences]);
            for field in fields {
                self.cells.entry((inst.clone(), field)).or_default().add(p);
            }
        }
    }

    /// Associative and commutative.
    pub fn merge(&mut self, other: FullCounts) {
        for (key, counts) in other.cells {
            self.cells.entry(key).or_default().merge(&counts);
        }
    }

    pub fn get(&self, inst: &str, field: FieldScope) -> Option<&TypeCounts> {
        self.cells.get(&(inst.to_owned(), field))
    }

    /// Distinct institutions, ascending.
    pub fn institutions(&self) -> impl Iterator<Item = &str> {
        let mut last: Option<&str> = None;
        self.cells.keys().filter_map(move |(inst, _)| {
            if last == Some(inst.as_str()) {
                None
            } else {
                last = Some(inst.as_str());
                last
            }
        })
    }

    pub fn retain_institutions(&mut self, mut keep: impl FnMut(&str) -> bool) {
        self.cells.retain(|(inst, _), _| keep(inst));
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, FieldScope, &TypeCounts)> {
        self.cells.iter().map(|((i, f), c)| (i.as_str(), *f, c))
    }
}

pub fn count_full<'a>(pubs: impl IntoIterator<Item = &'a ClassifiedPublication>) -> FullCounts {
    let mut counts = FullCounts::default();
    for p in pubs {
        counts.add(p);
    }
    counts
}

/// One cell per (university, field or rollup, type or any), sorted by
/// university, then field, then type.
pub fn university_indicators(counts: &FullCounts, mode: DenominatorMode) -> Vec<IndicatorCell> {
    let empty = TypeCounts::default();
    let mut cells = Vec::new();
    for inst in counts.institutions() {
        for field in FieldScope::ALL {
            let c = counts.get(inst, field).unwrap_or(&empty);
            for oa_type in TypeScope::ALL {
                cells.push(IndicatorCell {
                    scope: Scope::University,
                    scope_id: inst.to_owned(),
                    field,
                    oa_type,
                    numerator: c.numerator(oa_type),
                    denominator: c.denominator(mode),
                });
            }
        }
    }
    cells
}

/// Middle element for odd counts, mean of the two middle elements for even
/// counts. Sorts in place.
pub fn median(values: &mut [Share]) -> Option<Stat> {
    values.sort_unstable();
    let n = values.len();
    match n {
        0 => None,
        _ if n % 2 == 1 => Some(share_to_stat(values[n / 2])),
        _ => {
            let sum = share_to_stat(values[n / 2 - 1]) + share_to_stat(values[n / 2]);
            Some(sum / Stat::from_integer(2.into()))
        }
    }
}

pub fn mean(values: &[Share]) -> Option<Stat> {
    if values.is_empty() {
        return None;
    }
    let sum = values
        .iter()
        .fold(Stat::zero(), |acc, s| acc + share_to_stat(*s));
    Some(sum / Stat::from_integer(values.len().into()))
}

/// Distribution summary of university shares within one group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupSummary {
    pub group: String,
    pub field: FieldScope,
    pub oa_type: TypeScope,
    /// Universities contributing a share.
    pub universities: usize,
    pub median: Option<Stat>,
    pub mean: Option<Stat>,
    /// Whether the group passes the display threshold.
    pub displayed: bool,
}

type GroupedShares = BTreeMap<(String, FieldScope, TypeScope), Vec<Share>>;

/// Group university cells. `groups_of` maps a university to the groups it
/// contributes to (none for universities outside the roster).
fn summarize(
    cells: &[IndicatorCell],
    mut groups_of: impl FnMut(&str) -> Vec<String>,
) -> (GroupedShares, BTreeMap<String, usize>) {
    let mut shares = GroupedShares::new();
    let mut members: BTreeMap<String, std::collections::BTreeSet<&str>> = BTreeMap::new();
    for cell in cells.iter().filter(|c| c.scope == Scope::University) {
        for group in groups_of(&cell.scope_id) {
            members
                .entry(group.clone())
                .or_default()
                .insert(&cell.scope_id);
            let entry = shares.entry((group, cell.field, cell.oa_type)).or_default();
            if let Some(s) = cell.share() {
                entry.push(s);
            }
        }
    }
    let sizes = members.into_iter().map(|(g, m)| (g, m.len())).collect();
    (shares, sizes)
}

fn finish(shares: GroupedShares, mut displayed: impl FnMut(&str) -> bool) -> Vec<GroupSummary> {
    shares
        .into_iter()
        .map(|((group, field, oa_type), mut values)| GroupSummary {
            displayed: displayed(&group),
            universities: values.len(),
            mean: mean(&values),
            median: median(&mut values),
            group,
            field,
            oa_type,
        })
        .collect()
}

/// Per-country median and mean of university shares for every field and
/// type. Every country is kept; `displayed` is set when it has at least
/// `min_universities` universities in the analysed set.
pub fn median_share_by_country(
    cells: &[IndicatorCell],
    institutions: &InstitutionTable,
    min_universities: usize,
) -> Vec<GroupSummary> {
    let (shares, sizes) = summarize(cells, |inst| {
        institutions
            .get(inst)
            .map(|i| vec![i.country.clone()])
            .unwrap_or_default()
    });
    finish(shares, |country| {
        sizes.get(country).copied().unwrap_or(0) >= min_universities
    })
}

/// Per-region summaries. A university counts in every region it belongs to.
pub fn region_rollup(
    cells: &[IndicatorCell],
    institutions: &InstitutionTable,
) -> Vec<GroupSummary> {
    let (shares, _) = summarize(cells, |inst| {
        institutions
            .get(inst)
            .map(|i| i.regions.iter().cloned().collect())
            .unwrap_or_default()
    });
    finish(shares, |_| true)
}

/// Worldwide distribution of university shares per field and type.
pub fn world_summary(cells: &[IndicatorCell]) -> Vec<GroupSummary> {
    let (shares, _) = summarize(cells, |_| vec!["World".to_owned()]);
    finish(shares, |_| true)
}

/// Type counts over distinct publications.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OverlapMatrix {
    pub total_pubs: u64,
    pub doi_pubs: u64,
    pub total_oa: u64,
    pub per_type_count: BTreeMap<OaType, u64>,
    /// Publications that are green and also the given type.
    pub pairwise_green: BTreeMap<OaType, u64>,
    pub green_only: u64,
}

impl OverlapMatrix {
    pub fn add(&mut self, p: &ClassifiedPublication) {
        let t = p.types;
        self.total_pubs += 1;
        self.doi_pubs += u64::from(p.publication.doi.is_some());
        if !t.any_oa() {
            return;
        }
        self.total_oa += 1;
        for ty in OaType::ALL {
            if t.has(ty) {
                *self.per_type_count.entry(ty).or_default() += 1;
                if t.green() {
                    *self.pairwise_green.entry(ty).or_default() += 1;
                }
            }
        }
        if t.green() && t.publisher_type().is_none() {
            self.green_only += 1;
        }
    }

    pub fn merge(&mut self, o: &OverlapMatrix) {
        self.total_pubs += o.total_pubs;
        self.doi_pubs += o.doi_pubs;
        self.total_oa += o.total_oa;
        for (k, v) in &o.per_type_count {
            *self.per_type_count.entry(*k).or_default() += v;
        }
        for (k, v) in &o.pairwise_green {
            *self.pairwise_green.entry(*k).or_default() += v;
        }
        self.green_only += o.green_only;
    }

    pub fn count(&self, t: OaType) -> u64 {
        self.per_type_count.get(&t).copied().unwrap_or(0)
    }

    pub fn also_green(&self, t: OaType) -> u64 {
        self.pairwise_green.get(&t).copied().unwrap_or(0)
    }

    /// Share of all OA publications that carry type `t`.
    pub fn share_of_oa(&self, t: OaType) -> Option<Share> {
        share(self.count(t), self.total_oa)
    }

    /// Share of type-`t` publications that are also green.
    pub fn share_also_green(&self, t: OaType) -> Option<Share> {
        share(self.also_green(t), self.count(t))
    }

    /// Exclusive partition of OA publications: green only, then gold,
    /// hybrid and bronze (each with or without green). Sums to `total_oa`.
    pub fn partition(&self) -> [(OaType, u64); 4] {
        [
            (OaType::Green, self.green_only),
            (OaType::Gold, self.count(OaType::Gold)),
            (OaType::Hybrid, self.count(OaType::Hybrid)),
            (OaType::Bronze, self.count(OaType::Bronze)),
        ]
    }
}

pub fn overlap_matrix<'a>(
    pubs: impl IntoIterator<Item = &'a ClassifiedPublication>,
) -> OverlapMatrix {
    let mut m = OverlapMatrix::default();
    for p in pubs {
        m.add(p);
    }
    m
}

/// One field of a university's OA profile.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProfileRow {
    pub inst_id: String,
    pub field: Field,
    /// Indexed like [`OaType::ALL`].
    pub shares: [Option<Share>; 4],
}

/// Field-by-type share table of one university, in declared field order.
/// `cells` may contain other universities; only `inst_id` is used.
pub fn field_profile(cells: &[IndicatorCell], inst_id: &str) -> Vec<ProfileRow> {
    let lookup: BTreeMap<(FieldScope, TypeScope), &IndicatorCell> = cells
        .iter()
        .filter(|c| c.scope == Scope::University && c.scope_id == inst_id)
        .map(|c| ((c.field, c.oa_type), c))
        .collect();
    Field::ALL
        .iter()
        .map(|&field| {
            let mut shares = [None; 4];
            for (slot, ty) in shares.iter_mut().zip(OaType::ALL) {
                *slot = lookup
                    .get(&(FieldScope::Field(field), TypeScope::Type(ty)))
                    .and_then(|c| c.share());
            }
            ProfileRow {
                inst_id: inst_id.to_owned(),
                field,
                shares,
            }
        })
        .collect()
}
