//! Assigns OA types to publications from their evidence.
//!
//! Rules, applied to the whole evidence record of a DOI:
//!
//! * green when any location is hosted by a repository;
//! * gold when the journal is OA (per the dump or the registry) and the DOI
//!   has at least one location;
//! * otherwise hybrid when a publisher location carries a license;
//! * otherwise bronze when there is any publisher location.
//!
//! Gold, hybrid and bronze are mutually exclusive. Green combines with each.

use std::collections::HashMap;

use crate::model::{
    Doi, HostType, JournalRecord, OaEvidenceRecord, OaLocation, OaTypeSet, PublicationRecord,
};

/// Classify one DOI's evidence. Total and independent of location order.
pub fn classify(evidence: Option<&OaEvidenceRecord>, journal: Option<&JournalRecord>) -> OaTypeSet {
    let Some(evidence) = evidence else {
        return OaTypeSet::CLOSED;
    };
    if evidence.locations.is_empty() {
        return OaTypeSet::CLOSED;
    }
    let green = evidence
        .locations
        .iter()
        .any(|l| l.host_type == HostType::Repository);
    let oa_journal = evidence.journal_is_oa || journal.is_some_and(|j| j.is_fully_oa);
    let mut publisher = evidence
        .locations
        .iter()
        .filter(|l| l.host_type == HostType::Publisher);

    let (gold, hybrid, bronze) = if oa_journal {
        (true, false, false)
    } else if publisher.clone().any(OaLocation::is_licensed) {
        (false, true, false)
    } else if publisher.next().is_some() {
        (false, false, true)
    } else {
        (false, false, false)
    };
    OaTypeSet::new(gold, green, hybrid, bronze)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassifiedPublication {
    pub publication: PublicationRecord,
    pub types: OaTypeSet,
    /// Every location of the matched evidence record; empty when the
    /// publication has no DOI or no evidence.
    pub locations_used: Vec<OaLocation>,
}

/// Classify a single publication against the evidence index.
pub fn classify_publication(
    publication: PublicationRecord,
    evidence_by_doi: &HashMap<Doi, OaEvidenceRecord>,
    journals: &crate::ingest::JournalTable,
) -> ClassifiedPublication {
    let evidence = publication
        .doi
        .as_ref()
        .and_then(|d| evidence_by_doi.get(d));
    let journal = publication
        .journal_id
        .as_ref()
        .and_then(|j| journals.get(j));
    let types = classify(evidence, journal);
    let locations_used = evidence.map(|e| e.locations.clone()).unwrap_or_default();
    ClassifiedPublication {
        publication,
        types,
        locations_used,
    }
}

/// Classify every publication once, in input order.
pub fn classify_stream<'a, I>(
    publications: I,
    evidence_by_doi: &'a HashMap<Doi, OaEvidenceRecord>,
    journals: &'a crate::ingest::JournalTable,
) -> impl Iterator<Item = ClassifiedPublication> + 'a
where
    I: IntoIterator<Item = PublicationRecord>,
    I::IntoIter: 'a,
{
    publications
        .into_iter()
        .map(move |p| classify_publication(p, evidence_by_doi, journals))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ApcStatus, DocType, Field};
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn evidence(journal_is_oa: bool, locations: Vec<OaLocation>) -> OaEvidenceRecord {
        OaEvidenceRecord {
            doi: Doi::parse("10.1/x").unwrap(),
            journal_is_oa,
            journal_issn: None,
            locations,
        }
    }

    fn set(gold: bool, green: bool, hybrid: bool, bronze: bool) -> OaTypeSet {
        OaTypeSet::new(gold, green, hybrid, bronze)
    }

    #[test]
    fn examples() {
        let e = evidence(true, vec![OaLocation::publisher("u", Some("cc-by"))]);
        assert_eq!(classify(Some(&e), None), set(true, false, false, false));

        assert_eq!(classify(None, None), OaTypeSet::CLOSED);

        let e = evidence(
            true,
            vec![
                OaLocation::publisher("u", Some("cc-by")),
                OaLocation::repository("r"),
            ],
        );
        assert_eq!(classify(Some(&e), None), set(true, true, false, false));

        let e = evidence(false, vec![OaLocation::publisher("u", None)]);
        assert_eq!(classify(Some(&e), None), set(false, false, false, true));

        let e = evidence(false, vec![OaLocation::publisher("u", Some("cc-by-nc"))]);
        assert_eq!(classify(Some(&e), None), set(false, false, true, false));
    }

    #[test]
    fn oa_journal_without_locations_is_closed() {
        assert_eq!(
            classify(Some(&evidence(true, vec![])), None),
            OaTypeSet::CLOSED
        );
    }

    #[test]
    fn registry_flag_promotes_to_gold() {
        let journal = JournalRecord {
            journal_id: "j".into(),
            issns: BTreeSet::new(),
            country: None,
            is_fully_oa: true,
            has_apc: ApcStatus::Unknown,
            publisher_address: None,
        };
        let e = evidence(false, vec![OaLocation::publisher("u", None)]);
        assert_eq!(
            classify(Some(&e), Some(&journal)),
            set(true, false, false, false)
        );
    }

    #[test]
    fn blank_license_is_unlicensed() {
        let e = evidence(false, vec![OaLocation::publisher("u", Some("  "))]);
        assert_eq!(classify(Some(&e), None), set(false, false, false, true));
    }

    fn publication(id: &str, doi: Option<&str>) -> PublicationRecord {
        PublicationRecord {
            pub_id: id.into(),
            doi: doi.and_then(Doi::parse),
            year: 2015,
            doc_type: DocType::Article,
            language: "en".into(),
            journal_id: None,
            institution_ids: BTreeSet::new(),
            field_ids: [Field::LifeEarth].into(),
        }
    }

    #[test]
    fn stream_keeps_every_publication() {
        let pubs = vec![
            publication("p1", Some("10.1/a")),
            publication("p2", Some("10.1/b")),
            publication("p3", Some("10.1/c")),
            publication("p4", None),
            publication("p5", Some("10.1/e")),
        ];
        let mut index = HashMap::new();
        for (doi, locs) in [
            ("10.1/a", vec![OaLocation::repository("r")]),
            ("10.1/e", vec![OaLocation::publisher("p", None)]),
            ("10.1/zzz", vec![OaLocation::repository("r")]),
        ] {
            let mut e = evidence(false, locs);
            e.doi = Doi::parse(doi).unwrap();
            index.insert(e.doi.clone(), e);
        }
        let journals = Default::default();
        let out: Vec<_> = classify_stream(pubs, &index, &journals).collect();
        assert_eq!(out.len(), 5);
        let ids: Vec<_> = out.iter().map(|c| c.publication.pub_id.as_str()).collect();
        assert_eq!(ids, ["p1", "p2", "p3", "p4", "p5"]);
        assert_eq!(out.iter().filter(|c| !c.types.any_oa()).count(), 3);
        assert!(out[0].types.green());
        assert!(out[4].types.bronze());
        assert!(out[3].locations_used.is_empty());
    }

    #[test]
    fn empty_evidence_is_closed() {
        let mut index = HashMap::new();
        let e = evidence(true, vec![]);
        index.insert(e.doi.clone(), e);
        let journals = Default::default();
        let c = classify_publication(publication("p", Some("10.1/x")), &index, &journals);
        assert_eq!(c.types, OaTypeSet::CLOSED);
    }

    fn arb_location() -> impl Strategy<Value = OaLocation> {
        prop_oneof![
            prop::option::of(prop::sample::select(vec!["cc-by", "cc0", "", "other"]))
                .prop_map(|l| OaLocation::publisher("https://pub.example/x", l)),
            "[a-z]{1,8}".prop_map(|u| OaLocation::repository(format!("https://{u}.org/1"))),
        ]
    }

    proptest! {
        #[test]
        fn location_order_is_irrelevant(oa in any::<bool>(),
                                        locs in prop::collection::vec(arb_location(), 0..6)
                                            .prop_shuffle()) {
            let e = evidence(oa, locs.clone());
            let mut reversed = locs;
            reversed.reverse();
            prop_assert_eq!(classify(Some(&e), None), classify(Some(&evidence(oa, reversed)), None));
        }

        #[test]
        fn adding_a_repository_only_sets_green(oa in any::<bool>(),
                                              locs in prop::collection::vec(arb_location(), 0..6)) {
            let before = classify(Some(&evidence(oa, locs.clone())), None);
            let mut more = locs;
            more.push(OaLocation::repository("https://repo.example/2"));
            let after = classify(Some(&evidence(oa, more)), None);
            prop_assert!(after.green());
            if before.any_oa() {
                prop_assert_eq!(before.publisher_type(), after.publisher_type());
            } else {
                // A repository copy is the first location, which may make an OA journal gold.
                prop_assert_eq!(after.gold(), oa);
                prop_assert!(!after.hybrid() && !after.bronze());
            }
        }
    }
}
