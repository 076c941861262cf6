//! Country profiles of gold OA publishing: national journals, English
//! language and APC-charging journals.

use std::collections::{BTreeMap, BTreeSet};

use crate::classify::ClassifiedPublication;
use crate::ingest::{InstitutionTable, JournalTable};
use crate::model::{share, ApcStatus, JournalRecord, Share};

/// Uppercase country or constituent name to ISO 3166 alpha-2 code.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CountryLookup {
    names: BTreeMap<String, String>,
}

const UK_CONSTITUENTS: &[&str] = &[
    "ENGLAND",
    "SCOTLAND",
    "WALES",
    "NORTHERN IRELAND",
    "NORTH IRELAND",
];

// Country spellings as they appear at the end of journal publisher addresses.
const BUILTIN_NAMES: &[(&str, &str)] = &[
    ("ARGENTINA", "AR"),
    ("AUSTRALIA", "AU"),
    ("AUSTRIA", "AT"),
    ("BANGLADESH", "BD"),
    ("BELGIUM", "BE"),
    ("BRAZIL", "BR"),
    ("BULGARIA", "BG"),
    ("CANADA", "CA"),
    ("CHILE", "CL"),
    ("CHINA", "CN"),
    ("PEOPLES R CHINA", "CN"),
    ("COLOMBIA", "CO"),
    ("COSTA RICA", "CR"),
    ("CROATIA", "HR"),
    ("CUBA", "CU"),
    ("CYPRUS", "CY"),
    ("CZECH REPUBLIC", "CZ"),
    ("CZECHIA", "CZ"),
    ("DENMARK", "DK"),
    ("ECUADOR", "EC"),
    ("EGYPT", "EG"),
    ("ESTONIA", "EE"),
    ("ETHIOPIA", "ET"),
    ("FINLAND", "FI"),
    ("FRANCE", "FR"),
    ("GERMANY", "DE"),
    ("GHANA", "GH"),
    ("GREECE", "GR"),
    ("HUNGARY", "HU"),
    ("ICELAND", "IS"),
    ("INDIA", "IN"),
    ("INDONESIA", "ID"),
    ("IRAN", "IR"),
    ("IRELAND", "IE"),
    ("ISRAEL", "IL"),
    ("ITALY", "IT"),
    ("JAPAN", "JP"),
    ("JORDAN", "JO"),
    ("KENYA", "KE"),
    ("LATVIA", "LV"),
    ("LEBANON", "LB"),
    ("LITHUANIA", "LT"),
    ("LUXEMBOURG", "LU"),
    ("MALAYSIA", "MY"),
    ("MEXICO", "MX"),
    ("MOROCCO", "MA"),
    ("NETHERLANDS", "NL"),
    ("NEW ZEALAND", "NZ"),
    ("NIGERIA", "NG"),
    ("NORWAY", "NO"),
    ("PAKISTAN", "PK"),
    ("PERU", "PE"),
    ("PHILIPPINES", "PH"),
    ("POLAND", "PL"),
    ("PORTUGAL", "PT"),
    ("QATAR", "QA"),
    ("ROMANIA", "RO"),
    ("RUSSIA", "RU"),
    ("SAUDI ARABIA", "SA"),
    ("SERBIA", "RS"),
    ("SINGAPORE", "SG"),
    ("SLOVAKIA", "SK"),
    ("SLOVENIA", "SI"),
    ("SOUTH AFRICA", "ZA"),
    ("SOUTH KOREA", "KR"),
    ("KOREA", "KR"),
    ("SPAIN", "ES"),
    ("SWEDEN", "SE"),
    ("SWITZERLAND", "CH"),
    ("TAIWAN", "TW"),
    ("TANZANIA", "TZ"),
    ("THAILAND", "TH"),
    ("TUNISIA", "TN"),
    ("TURKEY", "TR"),
    ("U ARAB EMIRATES", "AE"),
    ("UNITED ARAB EMIRATES", "AE"),
    ("UGANDA", "UG"),
    ("UKRAINE", "UA"),
    ("UNITED KINGDOM", "GB"),
    ("UK", "GB"),
    ("URUGUAY", "UY"),
    ("USA", "US"),
    ("UNITED STATES", "US"),
    ("VENEZUELA", "VE"),
    ("VIETNAM", "VN"),
];

impl CountryLookup {
    pub fn new<K: AsRef<str>, V: AsRef<str>>(entries: impl IntoIterator<Item = (K, V)>) -> Self {
        CountryLookup {
            names: entries
                .into_iter()
                .map(|(k, v)| {
                    (
                        k.as_ref().trim().to_uppercase(),
                        v.as_ref().trim().to_uppercase(),
                    )
                })
                .collect(),
        }
    }

    /// Table covering the country spellings common in publisher addresses.
    pub fn builtin() -> Self {
        Self::new(BUILTIN_NAMES.iter().copied())
    }

    pub fn get(&self, name: &str) -> Option<&str> {
        self.names.get(name).map(String::as_str)
    }
}

/// Country of a journal from its publisher address.
///
/// Takes the last comma-separated part, drops postal-code words (any word
/// with a digit), and matches the longest trailing run of words against the
/// lookup. UK constituent countries resolve to `GB`.
pub fn resolve_journal_country(publisher_address: &str, lookup: &CountryLookup) -> Option<String> {
    let upper = publisher_address.to_uppercase();
    let last = upper.rsplit(',').next()?;
    let words: Vec<&str> = last
        .split_whitespace()
        .map(|w| w.trim_matches(|c: char| c == '.' || c == ';'))
        .filter(|w| !w.is_empty() && !w.chars().any(|c| c.is_ascii_digit()))
        .collect();
    for start in 0..words.len() {
        let candidate = words[start..].join(" ");
        if UK_CONSTITUENTS.contains(&candidate.as_str()) {
            return Some("GB".to_owned());
        }
        if let Some(code) = lookup.get(&candidate) {
            return Some(code.to_owned());
        }
    }
    None
}

/// Gold OA profile of one country.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoldModelRow {
    pub country: String,
    /// Universities of the country in the analysed set.
    pub universities: usize,
    pub gold_total: u64,
    pub national: u64,
    pub english: u64,
    pub apc: u64,
    /// Gold publications whose journal has a known APC status.
    pub apc_known: u64,
}

impl GoldModelRow {
    fn empty(country: &str) -> Self {
        GoldModelRow {
            country: country.to_owned(),
            universities: 0,
            gold_total: 0,
            national: 0,
            english: 0,
            apc: 0,
            apc_known: 0,
        }
    }

    pub fn national_share(&self) -> Option<Share> {
        share(self.national, self.gold_total)
    }

    pub fn english_share(&self) -> Option<Share> {
        share(self.english, self.gold_total)
    }

    /// Lower bound: journals with unknown APC status count as non-APC.
    pub fn apc_share(&self) -> Option<Share> {
        share(self.apc, self.gold_total)
    }

    /// APC share among journals with known status.
    pub fn apc_share_known(&self) -> Option<Share> {
        share(self.apc, self.apc_known)
    }
}

/// Gold models for every roster country, sorted by country code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoldModelTable {
    pub rows: Vec<GoldModelRow>,
    pub min_universities: usize,
}

impl GoldModelTable {
    /// Countries with at least `min_universities` universities.
    pub fn displayed(&self) -> impl Iterator<Item = &GoldModelRow> {
        self.rows
            .iter()
            .filter(|r| r.universities >= self.min_universities)
    }
}

fn journal_country(journal: &JournalRecord, lookup: &CountryLookup) -> Option<String> {
    journal.country.clone().or_else(|| {
        journal
            .publisher_address
            .as_deref()
            .and_then(|a| resolve_journal_country(a, lookup))
    })
}

/// Attribute gold publications to the countries of their universities (full
/// counting) and split them by journal nationality, language and APC.
pub fn gold_country_model(
    pubs: &[ClassifiedPublication],
    journals: &JournalTable,
    institutions: &InstitutionTable,
    lookup: &CountryLookup,
    min_universities: usize,
) -> GoldModelTable {
    let mut rows: BTreeMap<&str, GoldModelRow> = institutions
        .values()
        .map(|i| (i.country.as_str(), GoldModelRow::empty(&i.country)))
        .collect();
    let mut active: BTreeSet<&str> = BTreeSet::new();
    let mut countries_of_journal: BTreeMap<&str, Option<String>> = BTreeMap::new();

    for p in pubs {
        let insts: Vec<_> = p
            .publication
            .institution_ids
            .iter()
            .filter_map(|id| institutions.get(id))
            .collect();
        active.extend(insts.iter().map(|i| i.inst_id.as_str()));
        if !p.types.gold() {
            continue;
        }
        let journal = p
            .publication
            .journal_id
            .as_deref()
            .and_then(|j| journals.get(j));
        let j_country = journal.and_then(|j| {
            countries_of_journal
                .entry(j.journal_id.as_str())
                .or_insert_with(|| journal_country(j, lookup))
                .clone()
        });
        let apc = journal.map_or(ApcStatus::Unknown, |j| j.has_apc);
        let countries: BTreeSet<&str> = insts.iter().map(|i| i.country.as_str()).collect();
        for c in countries {
            let row = rows.get_mut(c).expect("row per roster country");
            row.gold_total += 1;
            row.national += u64::from(j_country.as_deref() == Some(c));
            row.english += u64::from(p.publication.language == "en");
            row.apc += u64::from(apc == ApcStatus::Yes);
            row.apc_known += u64::from(apc != ApcStatus::Unknown);
        }
    }
    for inst_id in active {
        let country = institutions[inst_id].country.as_str();
        rows.get_mut(country)
            .expect("row per roster country")
            .universities += 1;
    }
    GoldModelTable {
        rows: rows.into_values().collect(),
        min_universities,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DocType, Field, Institution, OaTypeSet, PublicationRecord};
    use num_rational::Ratio;

    #[test]
    fn address_examples() {
        let lookup = CountryLookup::builtin();
        assert_eq!(
            resolve_journal_country("NEW YORK, NY 10013 USA", &lookup).as_deref(),
            Some("US")
        );
        assert_eq!(
            resolve_journal_country("LONDON, ENGLAND", &lookup).as_deref(),
            Some("GB")
        );
        assert_eq!(resolve_journal_country("UNKNOWN PLACE", &lookup), None);
        assert_eq!(resolve_journal_country("", &lookup), None);
    }

    #[test]
    fn address_is_case_insensitive() {
        let lookup = CountryLookup::builtin();
        for addr in [
            "Cape Town 8001, South Africa",
            "CAPE TOWN 8001, SOUTH AFRICA",
            "cape town, south africa.",
        ] {
            assert_eq!(
                resolve_journal_country(addr, &lookup).as_deref(),
                Some("ZA")
            );
        }
        assert_eq!(
            resolve_journal_country("Auckland 1010, New Zealand", &lookup).as_deref(),
            Some("NZ")
        );
        assert_eq!(
            resolve_journal_country("EDINBURGH EH1 1AA, SCOTLAND", &lookup).as_deref(),
            Some("GB")
        );
        assert_eq!(
            resolve_journal_country("BEIJING 100864, PEOPLES R CHINA", &lookup).as_deref(),
            Some("CN")
        );
    }

    #[test]
    fn custom_lookup() {
        let lookup = CountryLookup::new([("ATLANTIS", "at")]);
        assert_eq!(
            resolve_journal_country("x, Atlantis", &lookup).as_deref(),
            Some("AT")
        );
        assert_eq!(resolve_journal_country("x, USA", &lookup), None);
    }

    fn journal(id: &str, country: Option<&str>, apc: ApcStatus) -> JournalRecord {
        JournalRecord {
            journal_id: id.into(),
            issns: Default::default(),
            country: country.map(str::to_owned),
            is_fully_oa: true,
            has_apc: apc,
            publisher_address: None,
        }
    }

    fn gold_pub(id: &str, insts: &[&str], journal: &str, lang: &str) -> ClassifiedPublication {
        ClassifiedPublication {
            publication: PublicationRecord {
                pub_id: id.into(),
                doi: None,
                year: 2016,
                doc_type: DocType::Article,
                language: lang.into(),
                journal_id: Some(journal.into()),
                institution_ids: insts.iter().map(|s| s.to_string()).collect(),
                field_ids: [Field::LifeEarth].into(),
            },
            types: OaTypeSet::new(true, false, false, false),
            locations_used: vec![],
        }
    }

    fn inst(id: &str, country: &str) -> (String, Institution) {
        (
            id.into(),
            Institution {
                inst_id: id.into(),
                name: id.into(),
                country: country.into(),
                regions: ["South America".to_owned()].into(),
                repo_url_patterns: vec![],
            },
        )
    }

    #[test]
    fn shares_and_lower_bound() {
        let institutions: InstitutionTable =
            [inst("usp", "BR"), inst("uw", "PL")].into_iter().collect();
        let mut journals = JournalTable::new();
        journals.insert("br1".into(), journal("br1", Some("BR"), ApcStatus::No));
        journals.insert("us1".into(), {
            let mut j = journal("us1", None, ApcStatus::Yes);
            j.publisher_address = Some("NEW YORK, NY 10013 USA".into());
            j
        });
        journals.insert("xx".into(), journal("xx", None, ApcStatus::Unknown));
        let pubs = vec![
            gold_pub("1", &["usp"], "br1", "pt"),
            gold_pub("2", &["usp"], "br1", "en"),
            gold_pub("3", &["usp", "uw"], "us1", "en"),
            gold_pub("4", &["usp"], "xx", "en"),
        ];
        let table = gold_country_model(
            &pubs,
            &journals,
            &institutions,
            &CountryLookup::builtin(),
            1,
        );
        let br = &table.rows[0];
        assert_eq!(br.country, "BR");
        assert_eq!(br.gold_total, 4);
        assert_eq!(br.national_share(), Some(Ratio::new(1, 2)));
        assert_eq!(br.english_share(), Some(Ratio::new(3, 4)));
        assert_eq!(br.apc_share(), Some(Ratio::new(1, 4)));
        assert_eq!(br.apc_known, 3);
        assert!(br.apc_share() <= br.apc_share_known());
        let pl = &table.rows[1];
        assert_eq!((pl.gold_total, pl.national, pl.apc), (1, 0, 1));
        assert_eq!(table.displayed().count(), 2);

        let strict = gold_country_model(
            &pubs[..2],
            &journals,
            &institutions,
            &CountryLookup::builtin(),
            1,
        );
        let pl = &strict.rows[1];
        assert_eq!(
            (pl.universities, pl.gold_total, pl.national_share()),
            (0, 0, None)
        );
        assert_eq!(strict.displayed().count(), 1);
    }
}
