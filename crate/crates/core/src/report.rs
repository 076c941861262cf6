//! Output tables and their CSV / JSON-lines encodings.
//!
//! Shares stay exact until they are written here; this is the only place
//! where values are rounded (percentages with one decimal, half up).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive};

use crate::classify::ClassifiedPublication;
use crate::gold::GoldModelRow;
use crate::indicators::{GroupSummary, OverlapMatrix, ProfileRow};
use crate::ingest::IssueKind;
use crate::model::{share_to_stat, IndicatorCell, OaType, Share, Stat};
use crate::repo::{PmcRow, RepoShare};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum ReportFormat {
    #[default]
    Csv,
    JsonLines,
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Csv => "csv",
            ReportFormat::JsonLines => "jsonl",
        }
    }
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "jsonl" | "json-lines" | "jsonlines" => Ok(ReportFormat::JsonLines),
            other => Err(format!("unknown format {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Value {
    Text(String),
    Count(u64),
    Flag(bool),
    /// A share, written as a percentage. `None` is written empty / null.
    Percent(Option<Stat>),
}

impl Value {
    fn share(s: Option<Share>) -> Self {
        Value::Percent(s.map(share_to_stat))
    }

    fn text(s: impl Into<String>) -> Self {
        Value::Text(s.into())
    }

    /// Text written to CSV.
    pub fn render(&self) -> String {
        match self {
            Value::Text(s) => s.clone(),
            Value::Count(n) => n.to_string(),
            Value::Flag(b) => b.to_string(),
            Value::Percent(Some(s)) => format_percent(s),
            Value::Percent(None) => String::new(),
        }
    }

    fn json(&self) -> String {
        match self {
            Value::Text(s) => serde_json::Value::String(s.clone()).to_string(),
            Value::Percent(None) => "null".to_owned(),
            other => other.render(),
        }
    }
}

/// Percentage with one decimal, rounded half up. Negative input is clamped
/// to zero; shares are never negative.
pub fn format_percent(share: &Stat) -> String {
    if share.is_negative() {
        return "0.0".to_owned();
    }
    let n: &BigInt = share.numer();
    let d: &BigInt = share.denom();
    let tenths: BigInt = (n * BigInt::from(2000) + d).div_floor(&(d * BigInt::from(2)));
    let (whole, frac) = tenths.div_rem(&BigInt::from(10));
    format!("{whole}.{}", frac.to_u8().unwrap_or(0))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub name: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    fn new(name: &'static str, columns: &[&'static str]) -> Self {
        Table {
            name,
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len(), "table {}", self.name);
        self.rows.push(row);
    }

    /// Rows as the strings that CSV emission writes.
    pub fn rendered_rows(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| r.iter().map(Value::render).collect())
            .collect()
    }
}

/// Encode a table. CSV gets a header row and RFC 4180 quoting; JSON lines
/// get one object per row with keys in column order.
pub fn emit_report(table: &Table, format: ReportFormat) -> Vec<u8> {
    match format {
        ReportFormat::Csv => {
            let mut w = csv::WriterBuilder::new()
                .terminator(csv::Terminator::CRLF)
                .from_writer(Vec::new());
            w.write_record(&table.columns).expect("write to memory");
            for row in table.rendered_rows() {
                w.write_record(&row).expect("write to memory");
            }
            w.into_inner().expect("flush to memory")
        }
        ReportFormat::JsonLines => {
            let mut out = String::new();
            for row in &table.rows {
                out.push('{');
                for (i, (col, value)) in table.columns.iter().zip(row).enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    let _ = write!(out, "{}:{}", serde_json::Value::from(*col), value.json());
                }
                out.push_str("}\n");
            }
            out.into_bytes()
        }
    }
}

/// Read back an emitted table as `(columns, rendered rows)`.
pub fn parse_report(
    bytes: &[u8],
    format: ReportFormat,
) -> Result<(Vec<String>, Vec<Vec<String>>), String> {
    match format {
        ReportFormat::Csv => {
            let mut r = csv::ReaderBuilder::new().from_reader(bytes);
            let columns = r
                .headers()
                .map_err(|e| e.to_string())?
                .iter()
                .map(str::to_owned)
                .collect();
            let rows = r
                .records()
                .map(|rec| rec.map(|rec| rec.iter().map(str::to_owned).collect()))
                .collect::<Result<_, _>>()
                .map_err(|e| e.to_string())?;
            Ok((columns, rows))
        }
        ReportFormat::JsonLines => {
            let mut columns: Vec<String> = Vec::new();
            let mut rows = Vec::new();
            for line in std::str::from_utf8(bytes)
                .map_err(|e| e.to_string())?
                .lines()
            {
                let obj: serde_json::Map<String, serde_json::Value> =
                    serde_json::from_str(line).map_err(|e| e.to_string())?;
                if columns.is_empty() {
                    columns = obj.keys().cloned().collect();
                }
                rows.push(
                    columns
                        .iter()
                        .map(|c| match obj.get(c) {
                            None | Some(serde_json::Value::Null) => String::new(),
                            Some(serde_json::Value::String(s)) => s.clone(),
                            Some(v) => v.to_string(),
                        })
                        .collect(),
                );
            }
            Ok((columns, rows))
        }
    }
}

pub fn classifications_table(pubs: &[ClassifiedPublication]) -> Table {
    let mut t = Table::new(
        "classifications",
        &[
            "pub_id", "doi", "gold", "green", "hybrid", "bronze", "any_oa",
        ],
    );
    let mut sorted: Vec<&ClassifiedPublication> = pubs.iter().collect();
    sorted.sort_by(|a, b| a.publication.pub_id.cmp(&b.publication.pub_id));
    for p in sorted {
        let ty = p.types;
        t.push(vec![
            Value::text(&p.publication.pub_id),
            Value::text(p.publication.doi.as_ref().map(|d| d.as_str()).unwrap_or("")),
            Value::Flag(ty.gold()),
            Value::Flag(ty.green()),
            Value::Flag(ty.hybrid()),
            Value::Flag(ty.bronze()),
            Value::Flag(ty.any_oa()),
        ]);
    }
    t
}

pub fn overlap_table(m: &OverlapMatrix) -> Table {
    let mut t = Table::new(
        "overlap",
        &[
            "oa_type",
            "count",
            "pct_of_oa",
            "also_green",
            "pct_also_green",
            "exclusive",
        ],
    );
    let partition: BTreeMap<OaType, u64> = m.partition().into_iter().collect();
    for ty in OaType::ALL {
        t.push(vec![
            Value::text(ty.label()),
            Value::Count(m.count(ty)),
            Value::share(m.share_of_oa(ty)),
            Value::Count(m.also_green(ty)),
            Value::share(m.share_also_green(ty)),
            Value::Count(partition[&ty]),
        ]);
    }
    let green = m.count(OaType::Green);
    t.push(vec![
        Value::text("any"),
        Value::Count(m.total_oa),
        Value::share(crate::model::share(m.total_oa, m.total_oa)),
        Value::Count(green),
        Value::share(crate::model::share(green, m.total_oa)),
        Value::Count(partition.values().sum()),
    ]);
    t
}

pub fn university_table(cells: &[IndicatorCell]) -> Table {
    let mut t = Table::new(
        "university_indicators",
        &[
            "inst_id",
            "field",
            "oa_type",
            "numerator",
            "denominator",
            "pct",
        ],
    );
    let mut sorted: Vec<&IndicatorCell> = cells.iter().collect();
    sorted
        .sort_by(|a, b| (&a.scope_id, a.field, a.oa_type).cmp(&(&b.scope_id, b.field, b.oa_type)));
    for c in sorted {
        t.push(vec![
            Value::text(&c.scope_id),
            Value::text(c.field.code()),
            Value::text(c.oa_type.label()),
            Value::Count(c.numerator),
            Value::Count(c.denominator),
            Value::share(c.share()),
        ]);
    }
    t
}

/// Summary rows; `with_display` adds the display flag column.
pub fn summary_table(
    name: &'static str,
    group_column: &'static str,
    rows: &[GroupSummary],
    with_display: bool,
) -> Table {
    let mut columns = vec![
        group_column,
        "field",
        "oa_type",
        "universities",
        "median_pct",
        "mean_pct",
    ];
    if with_display {
        columns.push("displayed");
    }
    let mut t = Table::new(name, &columns);
    let mut sorted: Vec<&GroupSummary> = rows.iter().collect();
    sorted.sort_by(|a, b| (&a.group, a.field, a.oa_type).cmp(&(&b.group, b.field, b.oa_type)));
    for r in sorted {
        let mut row = vec![
            Value::text(&r.group),
            Value::text(r.field.code()),
            Value::text(r.oa_type.label()),
            Value::Count(r.universities as u64),
            Value::Percent(r.median.clone()),
            Value::Percent(r.mean.clone()),
        ];
        if with_display {
            row.push(Value::Flag(r.displayed));
        }
        t.push(row);
    }
    t
}

pub fn profile_table(rows: &[ProfileRow]) -> Table {
    let mut t = Table::new(
        "university_profiles",
        &["inst_id", "field", "gold", "green", "hybrid", "bronze"],
    );
    let mut sorted: Vec<&ProfileRow> = rows.iter().collect();
    sorted.sort_by(|a, b| (&a.inst_id, a.field).cmp(&(&b.inst_id, b.field)));
    for r in sorted {
        let mut row = vec![Value::text(&r.inst_id), Value::text(r.field.code())];
        row.extend(r.shares.iter().map(|s| Value::share(*s)));
        t.push(row);
    }
    t
}

pub fn repo_bounds_table(rows: &[RepoShare]) -> Table {
    let mut t = Table::new(
        "repository_bounds",
        &[
            "inst_id",
            "university",
            "country",
            "pubs",
            "green_pubs",
            "repo_lower",
            "repo_upper",
            "pct_lower",
            "pct_upper",
        ],
    );
    let mut sorted: Vec<&RepoShare> = rows.iter().collect();
    sorted.sort_by(|a, b| a.inst_id.cmp(&b.inst_id));
    for r in sorted {
        let interval = r.interval();
        t.push(vec![
            Value::text(&r.inst_id),
            Value::text(&r.name),
            Value::text(&r.country),
            Value::Count(r.pubs),
            Value::Count(r.green_count),
            Value::Count(r.matched_lower),
            Value::Count(r.matched_upper),
            Value::share(interval.map(|i| i.0)),
            Value::share(interval.map(|i| i.1)),
        ]);
    }
    t
}

/// Rows keep the order given (PMC share of green output, descending).
pub fn pmc_table(rows: &[PmcRow]) -> Table {
    let mut t = Table::new(
        "pmc_overlap",
        &[
            "country",
            "green_oa",
            "pmc",
            "pmc_only",
            "pct_pmc",
            "pct_gold",
            "pct_bronze",
            "pct_hybrid",
        ],
    );
    for r in rows {
        t.push(vec![
            Value::text(&r.country),
            Value::Count(r.green_count),
            Value::Count(r.pmc_count),
            Value::Count(r.pmc_only_count),
            Value::share(r.pmc_share()),
            Value::share(r.pct_gold()),
            Value::share(r.pct_bronze()),
            Value::share(r.pct_hybrid()),
        ]);
    }
    t
}

/// The gold model plot data. `full` adds the university count and display
/// flag.
pub fn gold_table<'a>(
    name: &'static str,
    rows: impl IntoIterator<Item = &'a GoldModelRow>,
    min_universities: Option<usize>,
) -> Table {
    let mut columns = vec![
        "country",
        "gold_total",
        "national_share",
        "apc_share",
        "english_share",
        "apc_known",
    ];
    if min_universities.is_some() {
        columns.extend(["universities", "displayed"]);
    }
    let mut t = Table::new(name, &columns);
    let mut sorted: Vec<&GoldModelRow> = rows.into_iter().collect();
    sorted.sort_by(|a, b| a.country.cmp(&b.country));
    for r in sorted {
        let mut row = vec![
            Value::text(&r.country),
            Value::Count(r.gold_total),
            Value::share(r.national_share()),
            Value::share(r.apc_share()),
            Value::share(r.english_share()),
            Value::Count(r.apc_known),
        ];
        if let Some(min) = min_universities {
            row.push(Value::Count(r.universities as u64));
            row.push(Value::Flag(r.universities >= min));
        }
        t.push(row);
    }
    t
}

pub fn issues_table(counts: &BTreeMap<(String, IssueKind), u64>) -> Table {
    let mut t = Table::new("issues", &["source", "kind", "count"]);
    for ((source, kind), n) in counts {
        t.push(vec![
            Value::text(source),
            Value::text(kind.label()),
            Value::Count(*n),
        ]);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{FieldScope, Scope, TypeScope};
    use proptest::prelude::*;

    fn pct(n: i64, d: i64) -> String {
        format_percent(&Stat::new(n.into(), d.into()))
    }

    #[test]
    fn percent_rounding() {
        assert_eq!(pct(2, 5), "40.0");
        assert_eq!(pct(1815, 1858), "97.7");
        assert_eq!(pct(1858, 2008), "92.5");
        assert_eq!(pct(1, 1), "100.0");
        assert_eq!(pct(0, 1), "0.0");
        assert_eq!(pct(1, 2000), "0.1");
        assert_eq!(pct(1, 2001), "0.0");
        assert_eq!(pct(2, 3), "66.7");
    }

    fn cell(share_num: u64, den: u64) -> IndicatorCell {
        IndicatorCell {
            scope: Scope::University,
            scope_id: "u1".into(),
            field: FieldScope::AllSciences,
            oa_type: TypeScope::Type(OaType::Green),
            numerator: share_num,
            denominator: den,
        }
    }

    #[test]
    fn empty_table_is_header_only() {
        let bytes = emit_report(&university_table(&[]), ReportFormat::Csv);
        assert_eq!(
            String::from_utf8(bytes).unwrap(),
            "inst_id,field,oa_type,numerator,denominator,pct\r\n"
        );
        assert!(emit_report(&university_table(&[]), ReportFormat::JsonLines).is_empty());
    }

    #[test]
    fn single_cell_row() {
        let bytes = emit_report(&university_table(&[cell(4, 10)]), ReportFormat::Csv);
        assert_eq!(
            String::from_utf8(bytes).unwrap(),
            "inst_id,field,oa_type,numerator,denominator,pct\r\nu1,ALL,green,4,10,40.0\r\n"
        );
        let json = emit_report(
            &university_table(&[cell(4, 10), cell(0, 0)]),
            ReportFormat::JsonLines,
        );
        assert_eq!(
            String::from_utf8(json).unwrap(),
            "{\"inst_id\":\"u1\",\"field\":\"ALL\",\"oa_type\":\"green\",\"numerator\":4,\"denominator\":10,\"pct\":40.0}\n\
             {\"inst_id\":\"u1\",\"field\":\"ALL\",\"oa_type\":\"green\",\"numerator\":0,\"denominator\":0,\"pct\":null}\n"
        );
    }

    #[test]
    fn csv_quoting() {
        let mut t = Table::new("x", &["a", "b"]);
        t.push(vec![
            Value::text("Universidade de São Paulo, USP"),
            Value::text("say \"hi\""),
        ]);
        let s = String::from_utf8(emit_report(&t, ReportFormat::Csv)).unwrap();
        assert_eq!(
            s,
            "a,b\r\n\"Universidade de São Paulo, USP\",\"say \"\"hi\"\"\"\r\n"
        );
    }

    proptest! {
        #[test]
        fn emitted_tables_parse_back(cells in prop::collection::vec((0u64..50, 0u64..50, "[a-z ,\"]{1,6}"), 0..12),
                                     json in any::<bool>()) {
            let cells: Vec<IndicatorCell> = cells.into_iter().map(|(n, d, id)| IndicatorCell {
                scope_id: id,
                ..cell(n.min(d), d)
            }).collect();
            let table = university_table(&cells);
            let format = if json { ReportFormat::JsonLines } else { ReportFormat::Csv };
            let (columns, rows) = parse_report(&emit_report(&table, format), format).unwrap();
            if !rows.is_empty() || !json {
                prop_assert_eq!(columns, table.columns.iter().map(|c| c.to_string()).collect::<Vec<_>>());
            }
            prop_assert_eq!(rows, table.rendered_rows());
        }
    }
}
