//! Target and activity maps on random small teams: structural validity,
//! node/edge census against an enumeration oracle, DOT output and the
//! mutation property of `validate_map`.

mod common;

use std::collections::{BTreeMap, BTreeSet};

use chrono::NaiveTime;
use common::dot;
use flowkit_core::flow_model::{
    has_errors, validate_map, Document, FlowMap, Person, Role, SolidityCriteria, StoreRef,
};
use flowkit_core::map_builder::{
    activity_sites, assign_missing_media, build_activity_maps, build_target_map, validate_plan, DocumentSpec, TeamSpec,
};
use flowkit_core::render::to_graph_description;
use flowkit_core::strategy::{
    default_catalog, Cadence, CommunicationActivity, CommunicationStrategy, EventKind, ParticipantScope,
    ScheduledSession, Trigger,
};
use flowkit_core::{PersonId, SiteId};
use proptest::prelude::*;

#[derive(Debug, Clone)]
struct Plan {
    team: TeamSpec,
    strategy: CommunicationStrategy,
}

const ROLE_SETS: [&[Role]; 6] = [
    &[Role::Developer],
    &[Role::Developer],
    &[Role::Developer],
    &[Role::Coordinator],
    &[Role::Customer],
    &[Role::Coordinator, Role::Moderator],
];

fn roles() -> impl Strategy<Value = BTreeSet<Role>> {
    proptest::collection::btree_set(proptest::sample::select(&[Role::Developer, Role::Coordinator, Role::Customer][..]), 0..=2)
}

fn plan() -> impl Strategy<Value = Plan> {
    let site_people = proptest::collection::vec(proptest::collection::vec(0usize..ROLE_SETS.len(), 1..=5), 1..=3);
    let docs = proptest::collection::vec((any::<proptest::sample::Index>(), roles(), roles()), 0..=2);
    let activities = proptest::collection::vec(
        (0u8..4, 0u8..4, proptest::collection::vec(any::<proptest::sample::Index>(), 1..4)),
        0..=4,
    );
    (site_people, docs, activities).prop_map(|(site_people, docs, activities)| {
        let mut team = TeamSpec::default();
        for (s, people) in site_people.iter().enumerate() {
            let site = format!("s{s}");
            team.sites.push(common::site(&site));
            let mut devs = Vec::new();
            for (k, &r) in people.iter().enumerate() {
                let id = format!("s{s}p{k}");
                team.persons.push(common::person(&id, &site, ROLE_SETS[r]));
                if ROLE_SETS[r] == [Role::Developer] {
                    devs.push(id);
                }
            }
            for (k, two) in devs.chunks_exact(2).enumerate() {
                team.pairs.push(common::pair(&format!("s{s}pair{k}"), &two[0], &two[1]));
            }
        }
        for (k, (site, writers, readers)) in docs.into_iter().enumerate() {
            let site = team.sites[site.index(team.sites.len())].id.clone();
            team.documents.push(DocumentSpec {
                document: Document {
                    id: format!("doc{k}").into(),
                    name: format!("Document {k}"),
                    responsible_site_id: site,
                    criteria: SolidityCriteria::SOLID,
                },
                access_medium: Some("personal-document".into()),
                writers,
                readers,
            });
        }

        let mut catalog = default_catalog();
        for m in &mut catalog {
            m.available_at = team.sites.iter().map(|s| s.id.clone()).collect();
        }
        let everyone: Vec<PersonId> = team.persons.iter().map(|p| p.id.clone()).collect();
        let activities = activities
            .into_iter()
            .enumerate()
            .map(|(k, (scope, trigger, picks))| CommunicationActivity {
                id: format!("a{k}").into(),
                name: format!("Activity {k}"),
                goal: String::new(),
                trigger: match trigger {
                    0 => Trigger::Scheduled {
                        sessions: vec![ScheduledSession {
                            name: format!("session {k}"),
                            cadence: Cadence::EveryMorning,
                            time_of_day: NaiveTime::from_hms_opt(9, 0, 0).unwrap(),
                            days: [1].into(),
                        }],
                    },
                    1 => Trigger::EventDriven { event_kind: EventKind::AdHoc },
                    2 => Trigger::EventDriven { event_kind: EventKind::StatusChange },
                    _ => Trigger::EventDriven { event_kind: EventKind::StoryCompleted },
                },
                participants: match scope {
                    0 => ParticipantScope::WholeTeam,
                    1 => ParticipantScope::Pair,
                    2 => ParticipantScope::PairPlusCustomer,
                    _ => ParticipantScope::Custom(picks.iter().map(|i| everyone[i.index(everyone.len())].clone()).collect()),
                },
                required_channels: BTreeSet::new(),
                artifacts: Vec::new(),
            })
            .filter(|a| !activity_sites(&team, a).is_empty())
            .collect();
        let mut strategy = CommunicationStrategy {
            activities,
            assignments: Vec::new(),
            catalog,
        };
        assign_missing_media(&team, &mut strategy).expect("default catalog covers every site");
        Plan { team, strategy }
    })
}

// --- enumeration oracle ----------------------------------------------------

fn in_scope(team: &TeamSpec, scope: &ParticipantScope) -> BTreeSet<PersonId> {
    let paired = |p: &Person| team.pairs.iter().any(|x| x.member_ids.contains(&p.id));
    team.persons
        .iter()
        .filter(|p| match scope {
            ParticipantScope::WholeTeam => true,
            ParticipantScope::Pair => paired(p),
            ParticipantScope::PairPlusCustomer => paired(p) || p.roles.contains(&Role::Customer),
            ParticipantScope::Custom(ids) => ids.contains(&p.id),
        })
        .map(|p| p.id.clone())
        .collect()
}

/// A person is drawn as their pair when their partner takes part too.
fn store_of(team: &TeamSpec, present: &BTreeSet<PersonId>, id: &PersonId) -> StoreRef {
    for pair in &team.pairs {
        if pair.member_ids.contains(id) && pair.member_ids.iter().all(|m| present.contains(m)) {
            return StoreRef::Pair(pair.id.clone());
        }
    }
    StoreRef::Person(id.clone())
}

fn has(team: &TeamSpec, id: &PersonId, role: Role) -> bool {
    team.persons.iter().any(|p| &p.id == id && p.roles.contains(&role))
}

/// Undirected store pairs among people who talk in some activity, plus
/// one write and one read flow per document and store holding the role.
fn oracle_flows(plan: &Plan) -> (BTreeSet<(StoreRef, StoreRef)>, usize) {
    let team = &plan.team;
    let mut links = BTreeSet::new();
    for activity in &plan.strategy.activities {
        let present = in_scope(team, &activity.participants);
        let moderated = present.iter().any(|p| has(team, p, Role::Moderator));
        for p in &present {
            for q in &present {
                let talk = if moderated {
                    has(team, p, Role::Moderator)
                } else if activity.participants == ParticipantScope::PairPlusCustomer {
                    matches!(store_of(team, &present, p), StoreRef::Pair(_)) && has(team, q, Role::Customer)
                } else {
                    true
                };
                let (a, b) = (store_of(team, &present, p), store_of(team, &present, q));
                if talk && a != b {
                    links.insert(if a < b { (a, b) } else { (b, a) });
                }
            }
        }
    }
    let everyone: BTreeSet<PersonId> = team.persons.iter().map(|p| p.id.clone()).collect();
    let mut doc_flows = 0;
    for doc in &team.documents {
        for roles in [&doc.writers, &doc.readers] {
            let stores: BTreeSet<StoreRef> = team
                .persons
                .iter()
                .filter(|p| p.roles.iter().any(|r| roles.contains(r)))
                .map(|p| {
                    let holders: BTreeSet<PersonId> = everyone
                        .iter()
                        .filter(|id| team.persons.iter().any(|x| &x.id == *id && x.roles.iter().any(|r| roles.contains(r))))
                        .cloned()
                        .collect();
                    store_of(team, &holders, &p.id)
                })
                .collect();
            doc_flows += stores.len();
        }
    }
    (links, doc_flows)
}

fn undirected(map: &FlowMap) -> BTreeSet<(StoreRef, StoreRef)> {
    map.flows
        .iter()
        .filter(|f| !matches!(f.from, StoreRef::Document(_)) && !matches!(f.to, StoreRef::Document(_)))
        .map(|f| if f.from < f.to { (f.from.clone(), f.to.clone()) } else { (f.to.clone(), f.from.clone()) })
        .collect()
}

fn dot_id(store: &StoreRef) -> String {
    store.to_string()
}

// --- mutations -------------------------------------------------------------

fn mutate(map: &mut FlowMap, which: u8, pick: usize) {
    let ghost = "ghost";
    match which {
        0 => {
            // a site somebody lives on
            let site = map.persons[pick % map.persons.len()].site_id.clone();
            map.sites.retain(|s| s.id != site);
        }
        1 if !map.flows.is_empty() => {
            let k = pick % map.flows.len();
            map.flows[k].to = StoreRef::Person(ghost.into());
        }
        2 if !map.pairs.is_empty() => {
            let k = pick % map.pairs.len();
            map.pairs[k].member_ids[1] = ghost.into();
        }
        3 => {
            let k = pick % map.persons.len();
            map.persons[k].site_id = SiteId::from(ghost);
        }
        4 => {
            let p = map.persons[pick % map.persons.len()].clone();
            map.persons.push(p);
        }
        5 if map.flows.iter().any(|f| f.medium_id.is_some()) => {
            let f = map.flows.iter_mut().find(|f| f.medium_id.is_some()).unwrap();
            f.medium_id = Some(ghost.into());
        }
        6 if !map.documents.is_empty() => {
            let k = pick % map.documents.len();
            map.documents[k].responsible_site_id = ghost.into();
        }
        7 if !map.pairs.is_empty() => {
            // a pair member removed from the roster
            let gone = map.pairs[pick % map.pairs.len()].member_ids[0].clone();
            map.persons.retain(|p| p.id != gone);
        }
        _ => {
            let k = pick % map.persons.len();
            map.persons[k].yellow_pages.contact.insert("carrier-pigeon".into(), "coo".into());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn target_map_census_matches_oracle(plan in plan()) {
        prop_assert!(!has_errors(&validate_plan(&plan.team, &plan.strategy)), "{:?}", validate_plan(&plan.team, &plan.strategy));
        let map = build_target_map(&plan.team, &plan.strategy).unwrap();
        prop_assert_eq!(validate_map(&map), vec![]);
        prop_assert_eq!(map.sites.len(), plan.team.sites.len());
        prop_assert_eq!(map.persons.len(), plan.team.persons.len());
        prop_assert_eq!(map.pairs.len(), plan.team.pairs.len());
        prop_assert_eq!(map.documents.len(), plan.team.documents.len());

        let (links, doc_flows) = oracle_flows(&plan);
        prop_assert_eq!(undirected(&map), links.clone());
        prop_assert_eq!(map.flows.len(), links.len() + doc_flows);

        // the DOT text has one node per store and one edge per flow
        let text = to_graph_description(&map).unwrap();
        let census = dot::parse(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(census.nodes.len(), map.persons.len() + map.pairs.len() + map.documents.len());
        prop_assert_eq!(census.edges.len(), map.flows.len());
        prop_assert_eq!(census.clusters.len(), map.sites.len());
        let from_flows: BTreeMap<(String, String), usize> = map.flows.iter().fold(BTreeMap::new(), |mut acc, f| {
            *acc.entry((dot_id(&f.from), dot_id(&f.to))).or_default() += 1;
            acc
        });
        let from_dot: BTreeMap<(String, String), usize> = census.edges.iter().fold(BTreeMap::new(), |mut acc, (a, b, _)| {
            *acc.entry((a.clone(), b.clone())).or_default() += 1;
            acc
        });
        prop_assert_eq!(from_flows, from_dot);
        prop_assert_eq!(text, to_graph_description(&map).unwrap());
    }

    #[test]
    fn activity_maps_validate_and_render(plan in plan()) {
        let maps = build_activity_maps(&plan.team, &plan.strategy).unwrap();
        prop_assert_eq!(maps.len(), plan.strategy.activities.len());
        for map in &maps {
            prop_assert_eq!(validate_map(map), vec![]);
            let census = dot::parse(&to_graph_description(map).unwrap()).map_err(TestCaseError::fail)?;
            prop_assert_eq!(census.edges.len(), map.flows.len());
            for flow in &map.flows {
                let cross = map.is_cross_site(flow) == Some(true);
                prop_assert!(!cross || flow.medium_id.is_some());
            }
        }
    }

    #[test]
    fn every_mutation_is_reported(plan in plan(), which in 0u8..9, pick in 0usize..64) {
        let mut map = build_target_map(&plan.team, &plan.strategy).unwrap();
        mutate(&mut map, which, pick);
        prop_assert!(!validate_map(&map).is_empty(), "mutation {} went unnoticed", which);
        prop_assert!(to_graph_description(&map).is_err());
    }
}

#[test]
fn single_person_map() {
    let team = TeamSpec {
        sites: vec![common::site("here")],
        persons: vec![common::person("solo", "here", &[Role::Developer])],
        ..TeamSpec::default()
    };
    let strategy = CommunicationStrategy {
        catalog: default_catalog(),
        ..CommunicationStrategy::default()
    };
    let map = build_target_map(&team, &strategy).unwrap();
    assert_eq!((map.sites.len(), map.persons.len(), map.flows.len()), (1, 1, 0));
    let census = dot::parse(&to_graph_description(&map).unwrap()).unwrap();
    assert_eq!(census.nodes.len(), 1);
    assert!(census.edges.is_empty());
}

#[test]
fn dot_checker_rejects_broken_text() {
    assert!(dot::parse("digraph g { \"a\" -> \"b\"; }").is_err());
    assert!(dot::parse("digraph g { \"a\"; ").is_err());
    assert!(dot::parse("digraph g { \"a\" [label=\"x]; }").is_err());
    assert!(dot::parse("digraph g { \"a\"; \"b\"; \"a\" -> \"b\" [style=dashed]; }").is_ok());
}
