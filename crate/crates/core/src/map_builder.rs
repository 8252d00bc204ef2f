//! Compiles a team declaration and a communication strategy into the
//! overall target map and one map per communication activity.
//!
//! Target map construction follows six steps: one region per site, one
//! fluid store per person, one solid store per declared document, fluid
//! flows between people who talk regularly, solid flows from documents to
//! their regular readers, and yellow pages for everybody.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::flow_model::{
    check_contacts, check_roster, check_unique, has_errors, Direction, Document, Flow, FlowMap,
    InformationState, Issue, IssueCode, MapKind, PairStore, Person, Role, Site, StoreRef, Strength,
};
use crate::strategy::{
    choose_medium, validate_strategy, StrategyError, CommunicationActivity, CommunicationStrategy, Medium, MediumAssignment,
    ParticipantScope,
};
use crate::{MediumId, PairId, PersonId, SiteId, WorkstationId};

/// A document declared by the team together with who fills and reads it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocumentSpec {
    #[serde(flatten)]
    pub document: Document,
    /// Medium used to reach the document from other sites.
    #[serde(default)]
    pub access_medium: Option<MediumId>,
    #[serde(default)]
    pub writers: BTreeSet<Role>,
    #[serde(default)]
    pub readers: BTreeSet<Role>,
}

/// A developer machine whose status messages describe the pair working at it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Workstation {
    pub id: WorkstationId,
    pub site_id: SiteId,
    #[serde(default)]
    pub pair_id: Option<PairId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TeamSpec {
    pub sites: Vec<Site>,
    pub persons: Vec<Person>,
    #[serde(default)]
    pub pairs: Vec<PairStore>,
    #[serde(default)]
    pub documents: Vec<DocumentSpec>,
    #[serde(default)]
    pub workstations: Vec<Workstation>,
    #[serde(default)]
    pub common_language: String,
}

impl TeamSpec {
    pub fn person(&self, id: &PersonId) -> Option<&Person> {
        self.persons.iter().find(|p| &p.id == id)
    }

    pub fn site(&self, id: &SiteId) -> Option<&Site> {
        self.sites.iter().find(|s| &s.id == id)
    }

    pub fn pair_of(&self, person: &PersonId) -> Option<&PairStore> {
        self.pairs.iter().find(|p| p.member_ids.contains(person))
    }

    /// Resolves a name as written in a status or commit message: matches
    /// a person's id or display name, ignoring ASCII case.
    pub fn person_by_name(&self, name: &str) -> Option<&Person> {
        let name = name.trim();
        self.persons
            .iter()
            .find(|p| p.id.as_str().eq_ignore_ascii_case(name))
            .or_else(|| self.persons.iter().find(|p| p.name.eq_ignore_ascii_case(name)))
    }

    /// Resolves a messaging handle through the yellow-pages contact table.
    pub fn person_by_handle(&self, handle: &str) -> Option<&Person> {
        self.persons
            .iter()
            .find(|p| p.yellow_pages.contact.values().any(|h| h == handle))
    }

    pub fn site_of(&self, person: &PersonId) -> Option<&SiteId> {
        self.person(person).map(|p| &p.site_id)
    }

    pub fn developer_count(&self) -> usize {
        self.persons.iter().filter(|p| p.has_role(Role::Developer)).count()
    }

    fn store_site(&self, store: &StoreRef) -> Option<&SiteId> {
        match store {
            StoreRef::Person(id) => self.site_of(id),
            StoreRef::Pair(id) => self
                .pairs
                .iter()
                .find(|p| &p.id == id)
                .and_then(|p| self.site_of(&p.member_ids[0])),
            StoreRef::Document(id) => self
                .documents
                .iter()
                .find(|d| &d.document.id == id)
                .map(|d| &d.document.responsible_site_id),
        }
    }

    /// People in an activity's scope.
    pub fn scope_members(&self, scope: &ParticipantScope) -> BTreeSet<PersonId> {
        let paired: BTreeSet<&PersonId> = self.pairs.iter().flat_map(|p| p.member_ids.iter()).collect();
        self.persons
            .iter()
            .filter(|p| match scope {
                ParticipantScope::WholeTeam => true,
                ParticipantScope::Pair => paired.contains(&p.id),
                ParticipantScope::PairPlusCustomer => {
                    paired.contains(&p.id) || p.has_role(Role::Customer)
                }
                ParticipantScope::Custom(ids) => ids.contains(&p.id),
            })
            .map(|p| p.id.clone())
            .collect()
    }

    /// Collapses people into stores: a pair whose members are both present
    /// becomes its pair store, everyone else stays a person store.
    pub fn stores_for(&self, members: &BTreeSet<PersonId>) -> Vec<StoreRef> {
        let mut stores = BTreeSet::new();
        for id in members {
            match self.pair_of(id) {
                Some(pair) if pair.member_ids.iter().all(|m| members.contains(m)) => {
                    stores.insert(StoreRef::Pair(pair.id.clone()));
                }
                _ => {
                    stores.insert(StoreRef::Person(id.clone()));
                }
            }
        }
        stores.into_iter().collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MapBuildError {
    #[error("input does not validate ({} issue(s))", .0.len())]
    InvalidInput(Vec<Issue>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WidthClass {
    Thin,
    Medium,
    Thick,
}

impl WidthClass {
    pub fn pen_width(self) -> u8 {
        match self {
            WidthClass::Thin => 1,
            WidthClass::Medium => 2,
            WidthClass::Thick => 3,
        }
    }
}

/// Line width from flow strength and the richness rank of its medium.
/// Rich media (rank 1 or 2) widen regular and weak flows by one class.
pub fn flow_width(strength: Strength, medium_richness_rank: u32) -> WidthClass {
    let rich = medium_richness_rank <= 2;
    match (strength, rich) {
        (Strength::Strong, _) => WidthClass::Thick,
        (Strength::Regular, true) => WidthClass::Thick,
        (Strength::Regular, false) => WidthClass::Medium,
        (Strength::Weak, true) => WidthClass::Medium,
        (Strength::Weak, false) => WidthClass::Thin,
    }
}

/// Team-level invariants checked against the media catalog.
pub fn validate_team(team: &TeamSpec, catalog: &[Medium]) -> Vec<Issue> {
    let mut issues = Vec::new();
    check_roster(&mut issues, &team.sites, &team.persons, &team.pairs);
    check_unique(
        &mut issues,
        "document",
        team.documents.iter().map(|d| d.document.id.as_str()),
    );
    check_unique(
        &mut issues,
        "workstation",
        team.workstations.iter().map(|w| w.id.as_str()),
    );

    let mut channels: BTreeSet<&str> = BTreeSet::new();
    for m in catalog {
        channels.insert(m.id.as_str());
        channels.extend(m.extra_channels.iter().map(|c| c.as_str()));
    }
    check_contacts(&mut issues, &team.persons, &channels);

    for spec in &team.documents {
        let doc = &spec.document;
        if team.site(&doc.responsible_site_id).is_none() {
            issues.push(Issue::error(
                IssueCode::DanglingSite,
                doc.id.as_str(),
                format!("responsible site `{}` does not exist", doc.responsible_site_id),
            ));
            continue;
        }
        match &spec.access_medium {
            Some(m) if !catalog.iter().any(|c| &c.id == m) => issues.push(Issue::error(
                IssueCode::DanglingMedium,
                doc.id.as_str(),
                format!("access medium `{m}` is not in the catalog"),
            )),
            Some(_) => {}
            None => {
                let remote = team.persons.iter().any(|p| {
                    p.site_id != doc.responsible_site_id
                        && p.roles.iter().any(|r| spec.writers.contains(r) || spec.readers.contains(r))
                });
                if remote {
                    issues.push(Issue::error(
                        IssueCode::MissingMedium,
                        doc.id.as_str(),
                        "document is used from other sites but has no access medium",
                    ));
                }
            }
        }
    }

    for ws in &team.workstations {
        if team.site(&ws.site_id).is_none() {
            issues.push(Issue::error(
                IssueCode::DanglingSite,
                ws.id.as_str(),
                format!("site `{}` does not exist", ws.site_id),
            ));
        }
        if let Some(pair) = &ws.pair_id {
            if !team.pairs.iter().any(|p| &p.id == pair) {
                issues.push(Issue::error(
                    IssueCode::DanglingPair,
                    ws.id.as_str(),
                    format!("pair `{pair}` does not exist"),
                ));
            }
        }
    }
    issues
}

/// Team and strategy checked individually and against each other.
pub fn validate_plan(team: &TeamSpec, strategy: &CommunicationStrategy) -> Vec<Issue> {
    let mut issues = validate_team(team, &strategy.catalog);
    issues.extend(validate_strategy(strategy));
    for m in &strategy.catalog {
        for site in &m.available_at {
            if team.site(site).is_none() {
                issues.push(Issue::error(
                    IssueCode::DanglingSite,
                    m.id.as_str(),
                    format!("medium is available at unknown site `{site}`"),
                ));
            }
        }
    }
    for activity in &strategy.activities {
        if let ParticipantScope::Custom(ids) = &activity.participants {
            for id in ids {
                if team.person(id).is_none() {
                    issues.push(Issue::error(
                        IssueCode::UnresolvedScope,
                        activity.id.as_str(),
                        format!("participant `{id}` is not a team member"),
                    ));
                }
            }
        }
        for artifact in &activity.artifacts {
            if team.site(&artifact.site_id).is_none() {
                issues.push(Issue::error(
                    IssueCode::DanglingSite,
                    artifact.id.as_str(),
                    format!("artifact site `{}` does not exist", artifact.site_id),
                ));
            }
        }
    }
    issues
}

fn ordered(a: StoreRef, b: StoreRef) -> (StoreRef, StoreRef) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Who talks to whom within an activity. A moderator steers the meeting
/// and exchanges information with everybody; without one, pairs talk to
/// the customer when the scope pairs them with one, otherwise everybody in
/// scope talks to everybody.
pub fn activity_links(
    team: &TeamSpec,
    activity: &CommunicationActivity,
) -> BTreeSet<(StoreRef, StoreRef)> {
    let members = team.scope_members(&activity.participants);
    let stores = team.stores_for(&members);
    let has_role = |store: &StoreRef, role: Role| match store {
        StoreRef::Person(id) => team.person(id).is_some_and(|p| p.has_role(role)),
        _ => false,
    };
    let moderators: Vec<&StoreRef> = stores.iter().filter(|s| has_role(s, Role::Moderator)).collect();

    let mut links = BTreeSet::new();
    if !moderators.is_empty() {
        for m in &moderators {
            for s in &stores {
                if s != *m {
                    links.insert(ordered((*m).clone(), s.clone()));
                }
            }
        }
    } else if activity.participants == ParticipantScope::PairPlusCustomer {
        for pair in stores.iter().filter(|s| matches!(s, StoreRef::Pair(_))) {
            for customer in stores.iter().filter(|s| has_role(s, Role::Customer)) {
                links.insert(ordered(pair.clone(), customer.clone()));
            }
        }
    } else {
        for (i, a) in stores.iter().enumerate() {
            for b in &stores[i + 1..] {
                links.insert(ordered(a.clone(), b.clone()));
            }
        }
    }
    links
}

/// Co-located pairs communicate strongly; otherwise strength follows the
/// activity's trigger.
fn link_strength(team: &TeamSpec, a: &StoreRef, b: &StoreRef, regular: bool) -> Strength {
    let colocated_pairs = matches!((a, b), (StoreRef::Pair(_), StoreRef::Pair(_)))
        && team.store_site(a) == team.store_site(b);
    if colocated_pairs {
        Strength::Strong
    } else if regular {
        Strength::Regular
    } else {
        Strength::Weak
    }
}

fn is_cross(team: &TeamSpec, a: &StoreRef, b: &StoreRef) -> bool {
    team.store_site(a) != team.store_site(b)
}

fn yellow_paged(team: &TeamSpec, ids: &BTreeSet<PersonId>) -> Vec<Person> {
    team.persons
        .iter()
        .filter(|p| ids.contains(&p.id))
        .map(|p| {
            let mut p = p.clone();
            p.yellow_pages.local_time_offset_minutes =
                team.site(&p.site_id).map_or(0, |s| s.timezone_offset_minutes);
            if p.yellow_pages.current_work_item.is_none() {
                p.yellow_pages.current_work_item =
                    team.pair_of(&p.id).and_then(|pair| pair.current_work_item.clone());
            }
            p
        })
        .collect()
}

/// Stores holding any of `roles`, among `members`.
fn role_stores(team: &TeamSpec, members: &BTreeSet<PersonId>, roles: &BTreeSet<Role>) -> Vec<StoreRef> {
    let holders: BTreeSet<PersonId> = members
        .iter()
        .filter(|id| {
            team.person(id)
                .is_some_and(|p| p.roles.iter().any(|r| roles.contains(r)))
        })
        .cloned()
        .collect();
    team.stores_for(&holders)
}

struct Contribution<'a> {
    strength: Strength,
    medium: Option<&'a Medium>,
    label: &'a str,
}

fn merge_contributions(from: StoreRef, to: StoreRef, mut contribs: Vec<Contribution<'_>>) -> Flow {
    let strength = contribs.iter().map(|c| c.strength).max().unwrap_or(Strength::Weak);
    contribs.sort_by_key(|c| (core::cmp::Reverse(c.strength), c.medium.map_or(u32::MAX, |m| m.richness_rank)));
    let medium_id = contribs.first().and_then(|c| c.medium).map(|m| m.id.clone());
    let mut labels: Vec<&str> = Vec::new();
    for c in &contribs {
        if !labels.contains(&c.label) {
            labels.push(c.label);
        }
    }
    labels.sort_unstable();
    Flow {
        from,
        to,
        state: InformationState::Fluid,
        direction: Direction::BothWays,
        strength,
        medium_id,
        label: Some(labels.join(", ")),
    }
}

/// Overall target map for a validated team and strategy.
pub fn build_target_map(
    team: &TeamSpec,
    strategy: &CommunicationStrategy,
) -> Result<FlowMap, MapBuildError> {
    let issues = validate_plan(team, strategy);
    if has_errors(&issues) {
        return Err(MapBuildError::InvalidInput(issues));
    }

    let mut map = FlowMap::empty(MapKind::OverallTarget);
    map.title = Some("Overall target map".to_string());
    // sites, people, pairs, documents
    map.sites = team.sites.clone();
    let everyone: BTreeSet<PersonId> = team.persons.iter().map(|p| p.id.clone()).collect();
    map.persons = yellow_paged(team, &everyone);
    map.pairs = team.pairs.clone();
    map.documents = team.documents.iter().map(|d| d.document.clone()).collect();
    map.media = strategy.catalog.clone();

    // people who communicate regularly, one flow per store pair
    let mut contributions: BTreeMap<(StoreRef, StoreRef), Vec<Contribution<'_>>> = BTreeMap::new();
    for activity in &strategy.activities {
        let medium = strategy
            .assignment_for(&activity.id)
            .and_then(|a| strategy.medium(&a.medium_id));
        let regular = activity.trigger.is_regular();
        for (a, b) in activity_links(team, activity) {
            let cross = is_cross(team, &a, &b);
            let strength = link_strength(team, &a, &b, regular);
            contributions.entry((a, b)).or_default().push(Contribution {
                strength,
                medium: if cross { medium } else { None },
                label: &activity.name,
            });
        }
    }
    let mut flows: Vec<Flow> = contributions
        .into_iter()
        .map(|((a, b), c)| merge_contributions(a, b, c))
        .collect();

    // writing to and reading from documents
    for spec in &team.documents {
        let doc = StoreRef::Document(spec.document.id.clone());
        let doc_site = &spec.document.responsible_site_id;
        let medium_for = |store: &StoreRef| {
            (team.store_site(store) != Some(doc_site))
                .then(|| spec.access_medium.clone())
                .flatten()
        };
        for writer in role_stores(team, &everyone, &spec.writers) {
            flows.push(Flow {
                medium_id: medium_for(&writer),
                from: writer,
                to: doc.clone(),
                state: InformationState::Fluid,
                direction: Direction::OneWay,
                strength: Strength::Regular,
                label: Some(format!("solidifies {}", spec.document.name)),
            });
        }
        for reader in role_stores(team, &everyone, &spec.readers) {
            flows.push(Flow {
                medium_id: medium_for(&reader),
                from: doc.clone(),
                to: reader,
                state: InformationState::Solid,
                direction: Direction::OneWay,
                strength: Strength::Regular,
                label: Some(format!("reads {}", spec.document.name)),
            });
        }
    }
    map.flows = flows;
    Ok(map)
}

/// Map of a single activity: its participants, its artifacts and the
/// assigned medium on every cross-site flow.
pub fn build_activity_map(
    activity: &CommunicationActivity,
    assignment: &MediumAssignment,
    team: &TeamSpec,
    catalog: &[Medium],
) -> Result<FlowMap, MapBuildError> {
    let mut issues = Vec::new();
    if assignment.activity_id != activity.id {
        issues.push(Issue::error(
            IssueCode::DanglingActivity,
            assignment.activity_id.as_str(),
            format!("assignment is for `{}`, not `{}`", assignment.activity_id, activity.id),
        ));
    }
    if !catalog.iter().any(|m| m.id == assignment.medium_id) {
        issues.push(Issue::error(
            IssueCode::DanglingMedium,
            activity.id.as_str(),
            format!("medium `{}` is not in the catalog", assignment.medium_id),
        ));
    }
    if let ParticipantScope::Custom(ids) = &activity.participants {
        for id in ids.iter().filter(|id| team.person(id).is_none()) {
            issues.push(Issue::error(
                IssueCode::UnresolvedScope,
                activity.id.as_str(),
                format!("participant `{id}` is not a team member"),
            ));
        }
    }
    for artifact in &activity.artifacts {
        if team.site(&artifact.site_id).is_none() {
            issues.push(Issue::error(
                IssueCode::DanglingSite,
                artifact.id.as_str(),
                format!("artifact site `{}` does not exist", artifact.site_id),
            ));
        }
    }
    if !issues.is_empty() {
        return Err(MapBuildError::InvalidInput(issues));
    }

    let members = team.scope_members(&activity.participants);
    let regular = activity.trigger.is_regular();
    let medium = Some(assignment.medium_id.clone());

    let mut map = FlowMap::empty(MapKind::ActivitySpecific);
    map.title = Some(activity.name.clone());
    map.persons = yellow_paged(team, &members);
    map.pairs = team
        .pairs
        .iter()
        .filter(|p| p.member_ids.iter().all(|m| members.contains(m)))
        .cloned()
        .collect();
    map.documents = activity
        .artifacts
        .iter()
        .map(|a| Document {
            id: a.id.clone(),
            name: a.name.clone(),
            responsible_site_id: a.site_id.clone(),
            criteria: a.criteria,
        })
        .collect();
    let used_sites: BTreeSet<&SiteId> = map
        .persons
        .iter()
        .map(|p| &p.site_id)
        .chain(map.documents.iter().map(|d| &d.responsible_site_id))
        .collect();
    map.sites = team
        .sites
        .iter()
        .filter(|s| used_sites.contains(&s.id))
        .cloned()
        .collect();
    map.media = catalog.to_vec();

    let mut flows: Vec<Flow> = activity_links(team, activity)
        .into_iter()
        .map(|(a, b)| Flow {
            strength: link_strength(team, &a, &b, regular),
            medium_id: if is_cross(team, &a, &b) { medium.clone() } else { None },
            from: a,
            to: b,
            state: InformationState::Fluid,
            direction: Direction::BothWays,
            label: Some(activity.name.clone()),
        })
        .collect();

    let strength = if regular { Strength::Regular } else { Strength::Weak };
    for artifact in &activity.artifacts {
        let doc = StoreRef::Document(artifact.id.clone());
        let medium_for = |store: &StoreRef| {
            (team.store_site(store) != Some(&artifact.site_id))
                .then(|| medium.clone())
                .flatten()
        };
        for writer in role_stores(team, &members, &artifact.writers) {
            flows.push(Flow {
                medium_id: medium_for(&writer),
                from: writer,
                to: doc.clone(),
                state: InformationState::Fluid,
                direction: Direction::OneWay,
                strength,
                label: Some(format!("writes {}", artifact.name)),
            });
        }
        for reader in role_stores(team, &members, &artifact.readers) {
            flows.push(Flow {
                medium_id: medium_for(&reader),
                from: doc.clone(),
                to: reader,
                state: InformationState::Solid,
                direction: Direction::OneWay,
                strength,
                label: Some(format!("reads {}", artifact.name)),
            });
        }
    }
    map.flows = flows;
    Ok(map)
}

/// Sites of everybody in an activity's scope.
pub fn activity_sites(team: &TeamSpec, activity: &CommunicationActivity) -> BTreeSet<SiteId> {
    team.scope_members(&activity.participants)
        .iter()
        .filter_map(|p| team.site_of(p).cloned())
        .collect()
}

/// Adds a richest-feasible assignment for every activity that has none.
/// Returns the assignments that were added.
pub fn assign_missing_media(
    team: &TeamSpec,
    strategy: &mut CommunicationStrategy,
) -> Result<Vec<MediumAssignment>, StrategyError> {
    let mut added = Vec::new();
    for activity in &strategy.activities {
        if strategy.assignment_for(&activity.id).is_some() {
            continue;
        }
        let sites = activity_sites(team, activity);
        added.push(choose_medium(activity, &strategy.catalog, &sites)?);
    }
    strategy.assignments.extend(added.iter().cloned());
    Ok(added)
}

/// One map per activity, in strategy order.
pub fn build_activity_maps(
    team: &TeamSpec,
    strategy: &CommunicationStrategy,
) -> Result<Vec<FlowMap>, MapBuildError> {
    let issues = validate_plan(team, strategy);
    if has_errors(&issues) {
        return Err(MapBuildError::InvalidInput(issues));
    }
    strategy
        .activities
        .iter()
        .map(|activity| {
            let assignment = strategy
                .assignment_for(&activity.id)
                .expect("validated strategies assign every activity");
            build_activity_map(activity, assignment, team, &strategy.catalog)
        })
        .collect()
}
