//! Sites, people, documents, information flows and the maps that hold them.
//!
//! A [`FlowMap`] is plain value data. Every consumer elsewhere in the crate
//! assumes [`validate_map`] returned no error-severity issues for it.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::strategy::Medium;
use crate::{DocumentId, MediumId, PairId, PersonId, SiteId, Timestamp};

/// Largest timezone offset in use anywhere (UTC+14 / UTC-14).
pub const MAX_TZ_OFFSET_MINUTES: i32 = 840;

/// The three conditions information must meet to count as solid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SolidityCriteria {
    pub long_term_accessible: bool,
    pub repeatably_accessible: bool,
    pub third_party_comprehensible: bool,
}

impl SolidityCriteria {
    pub const SOLID: Self = Self {
        long_term_accessible: true,
        repeatably_accessible: true,
        third_party_comprehensible: true,
    };
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InformationState {
    Solid,
    Fluid,
}

/// Information is solid only when every criterion holds.
pub fn classify_state(criteria: SolidityCriteria) -> InformationState {
    if criteria.long_term_accessible
        && criteria.repeatably_accessible
        && criteria.third_party_comprehensible
    {
        InformationState::Solid
    } else {
        InformationState::Fluid
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Site {
    pub id: SiteId,
    pub name: String,
    #[serde(default)]
    pub timezone_offset_minutes: i32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Developer,
    Coordinator,
    Customer,
    Moderator,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Developer => "developer",
            Role::Coordinator => "coordinator",
            Role::Customer => "customer",
            Role::Moderator => "moderator",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WorkItemRef {
    pub story_id: u32,
    #[serde(default)]
    pub title: String,
}

/// Awareness metadata shown next to each person.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct YellowPages {
    #[serde(default)]
    pub picture_ref: Option<String>,
    /// Channel name to address, e.g. `skype-call -> "anna.luh"`.
    #[serde(default)]
    pub contact: BTreeMap<String, String>,
    /// Offset of the person's local clock, copied from their site.
    #[serde(default)]
    pub local_time_offset_minutes: i32,
    #[serde(default)]
    pub status: Option<String>,
    #[serde(default)]
    pub skills: Vec<String>,
    #[serde(default)]
    pub current_work_item: Option<WorkItemRef>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Person {
    pub id: PersonId,
    pub name: String,
    pub site_id: SiteId,
    #[serde(default)]
    pub roles: BTreeSet<Role>,
    #[serde(default)]
    pub yellow_pages: YellowPages,
}

impl Person {
    pub fn has_role(&self, role: Role) -> bool {
        self.roles.contains(&role)
    }
}

/// Two co-located pair programmers sharing a work item.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairStore {
    pub id: PairId,
    pub member_ids: [PersonId; 2],
    #[serde(default)]
    pub current_work_item: Option<WorkItemRef>,
}

/// A solid store. Its site is the one responsible for the content, not
/// where it is hosted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: DocumentId,
    pub name: String,
    pub responsible_site_id: SiteId,
    pub criteria: SolidityCriteria,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "id", rename_all = "snake_case")]
pub enum StoreRef {
    Person(PersonId),
    Pair(PairId),
    Document(DocumentId),
}

impl StoreRef {
    pub fn id_str(&self) -> &str {
        match self {
            StoreRef::Person(id) => id.as_str(),
            StoreRef::Pair(id) => id.as_str(),
            StoreRef::Document(id) => id.as_str(),
        }
    }

    pub fn kind_str(&self) -> &'static str {
        match self {
            StoreRef::Person(_) => "person",
            StoreRef::Pair(_) => "pair",
            StoreRef::Document(_) => "document",
        }
    }
}

impl fmt::Display for StoreRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.kind_str(), self.id_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    OneWay,
    BothWays,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strength {
    Weak,
    Regular,
    Strong,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Flow {
    pub from: StoreRef,
    pub to: StoreRef,
    pub state: InformationState,
    pub direction: Direction,
    pub strength: Strength,
    #[serde(default)]
    pub medium_id: Option<MediumId>,
    #[serde(default)]
    pub label: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapKind {
    OverallTarget,
    ActivitySpecific,
    Current,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowMap {
    pub kind: MapKind,
    /// Optional title, e.g. the activity name for activity maps.
    #[serde(default)]
    pub title: Option<String>,
    pub sites: Vec<Site>,
    pub persons: Vec<Person>,
    #[serde(default)]
    pub pairs: Vec<PairStore>,
    #[serde(default)]
    pub documents: Vec<Document>,
    #[serde(default)]
    pub flows: Vec<Flow>,
    /// Media catalog the flows refer to.
    #[serde(default)]
    pub media: Vec<Medium>,
    #[serde(default)]
    pub as_of: Option<Timestamp>,
}

impl FlowMap {
    pub fn empty(kind: MapKind) -> Self {
        Self {
            kind,
            title: None,
            sites: Vec::new(),
            persons: Vec::new(),
            pairs: Vec::new(),
            documents: Vec::new(),
            flows: Vec::new(),
            media: Vec::new(),
            as_of: None,
        }
    }

    pub fn site(&self, id: &SiteId) -> Option<&Site> {
        self.sites.iter().find(|s| &s.id == id)
    }

    pub fn person(&self, id: &PersonId) -> Option<&Person> {
        self.persons.iter().find(|p| &p.id == id)
    }

    pub fn pair(&self, id: &PairId) -> Option<&PairStore> {
        self.pairs.iter().find(|p| &p.id == id)
    }

    pub fn document(&self, id: &DocumentId) -> Option<&Document> {
        self.documents.iter().find(|d| &d.id == id)
    }

    pub fn medium(&self, id: &MediumId) -> Option<&Medium> {
        self.media.iter().find(|m| &m.id == id)
    }

    /// Site a store is drawn in. Pairs live with their first member.
    pub fn store_site(&self, store: &StoreRef) -> Option<&SiteId> {
        match store {
            StoreRef::Person(id) => self.person(id).map(|p| &p.site_id),
            StoreRef::Pair(id) => self
                .pair(id)
                .and_then(|p| self.person(&p.member_ids[0]))
                .map(|p| &p.site_id),
            StoreRef::Document(id) => self.document(id).map(|d| &d.responsible_site_id),
        }
    }

    pub fn contains_store(&self, store: &StoreRef) -> bool {
        match store {
            StoreRef::Person(id) => self.person(id).is_some(),
            StoreRef::Pair(id) => self.pair(id).is_some(),
            StoreRef::Document(id) => self.document(id).is_some(),
        }
    }

    /// `None` if either endpoint cannot be placed.
    pub fn is_cross_site(&self, flow: &Flow) -> Option<bool> {
        Some(self.store_site(&flow.from)? != self.store_site(&flow.to)?)
    }

    /// Names usable as contact channel keys: medium ids and their channel tags.
    pub fn channel_names(&self) -> BTreeSet<&str> {
        let mut names = BTreeSet::new();
        for m in &self.media {
            names.insert(m.id.as_str());
            names.extend(m.extra_channels.iter().map(|c| c.as_str()));
        }
        names
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IssueCode {
    DuplicateId,
    TimezoneRange,
    DanglingSite,
    DanglingPerson,
    DanglingEndpoint,
    PairSelf,
    PairSplitSite,
    DoublePairing,
    MissingMedium,
    DanglingMedium,
    UnknownContactChannel,
    EmptyCatalog,
    DuplicateRank,
    UnassignedActivity,
    DuplicateAssignment,
    DanglingActivity,
    ChannelMismatch,
    UnknownChannel,
    UnresolvedTrigger,
    UnresolvedScope,
    DanglingWorkstation,
    DanglingPair,
    PaidMedium,
    HighSetupCost,
    InvalidConfig,
    UnknownRule,
}

impl IssueCode {
    pub fn as_str(self) -> &'static str {
        match self {
            IssueCode::DuplicateId => "duplicate-id",
            IssueCode::TimezoneRange => "timezone-range",
            IssueCode::DanglingSite => "dangling-site",
            IssueCode::DanglingPerson => "dangling-person",
            IssueCode::DanglingEndpoint => "dangling-endpoint",
            IssueCode::PairSelf => "pair-self",
            IssueCode::PairSplitSite => "pair-split-site",
            IssueCode::DoublePairing => "double-pairing",
            IssueCode::MissingMedium => "missing-medium",
            IssueCode::DanglingMedium => "dangling-medium",
            IssueCode::UnknownContactChannel => "unknown-contact-channel",
            IssueCode::EmptyCatalog => "empty-catalog",
            IssueCode::DuplicateRank => "duplicate-rank",
            IssueCode::UnassignedActivity => "unassigned-activity",
            IssueCode::DuplicateAssignment => "duplicate-assignment",
            IssueCode::DanglingActivity => "dangling-activity",
            IssueCode::ChannelMismatch => "channel-mismatch",
            IssueCode::UnknownChannel => "unknown-channel",
            IssueCode::UnresolvedTrigger => "unresolved-trigger",
            IssueCode::UnresolvedScope => "unresolved-scope",
            IssueCode::DanglingWorkstation => "dangling-workstation",
            IssueCode::DanglingPair => "dangling-pair",
            IssueCode::PaidMedium => "paid-medium",
            IssueCode::HighSetupCost => "high-setup-cost",
            IssueCode::InvalidConfig => "invalid-config",
            IssueCode::UnknownRule => "unknown-rule",
        }
    }
}

impl fmt::Display for IssueCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A violated invariant, naming the offending element.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Issue {
    pub code: IssueCode,
    pub severity: Severity,
    pub element: String,
    pub message: String,
}

impl Issue {
    pub fn error(code: IssueCode, element: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            code,
            severity: Severity::Error,
            element: element.into(),
            message: message.into(),
        }
    }

    pub fn warning(code: IssueCode, element: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            code,
            severity: Severity::Warning,
            element: element.into(),
            message: message.into(),
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{sev}[{}] {}: {}", self.code, self.element, self.message)
    }
}

pub fn has_errors(issues: &[Issue]) -> bool {
    issues.iter().any(Issue::is_error)
}

pub(crate) fn check_unique<'a>(
    issues: &mut Vec<Issue>,
    what: &str,
    ids: impl IntoIterator<Item = &'a str>,
) {
    let mut seen = BTreeSet::new();
    for id in ids {
        if !seen.insert(id) {
            issues.push(Issue::error(
                IssueCode::DuplicateId,
                id,
                format!("{what} id `{id}` is declared more than once"),
            ));
        }
    }
}

/// Sites, people and pairs shared by maps and team declarations.
pub(crate) fn check_roster(
    issues: &mut Vec<Issue>,
    sites: &[Site],
    persons: &[Person],
    pairs: &[PairStore],
) {
    check_unique(issues, "site", sites.iter().map(|s| s.id.as_str()));
    check_unique(issues, "person", persons.iter().map(|p| p.id.as_str()));
    check_unique(issues, "pair", pairs.iter().map(|p| p.id.as_str()));

    for site in sites {
        if site.timezone_offset_minutes.abs() > MAX_TZ_OFFSET_MINUTES {
            issues.push(Issue::error(
                IssueCode::TimezoneRange,
                site.id.as_str(),
                format!(
                    "timezone offset {} is outside [-{MAX_TZ_OFFSET_MINUTES}, {MAX_TZ_OFFSET_MINUTES}]",
                    site.timezone_offset_minutes
                ),
            ));
        }
    }
    let site_ids: BTreeSet<&str> = sites.iter().map(|s| s.id.as_str()).collect();
    for person in persons {
        if !site_ids.contains(person.site_id.as_str()) {
            issues.push(Issue::error(
                IssueCode::DanglingSite,
                person.id.as_str(),
                format!("site `{}` does not exist", person.site_id),
            ));
        }
    }

    let person_site: BTreeMap<&str, &str> = persons
        .iter()
        .map(|p| (p.id.as_str(), p.site_id.as_str()))
        .collect();
    let mut pair_of: BTreeMap<&str, &str> = BTreeMap::new();
    for pair in pairs {
        let [a, b] = &pair.member_ids;
        if a == b {
            issues.push(Issue::error(
                IssueCode::PairSelf,
                pair.id.as_str(),
                format!("pair lists `{a}` twice"),
            ));
        }
        let mut sites_seen = BTreeSet::new();
        let mut resolved = true;
        for member in &pair.member_ids {
            match person_site.get(member.as_str()) {
                Some(site) => {
                    sites_seen.insert(*site);
                }
                None => {
                    resolved = false;
                    issues.push(Issue::error(
                        IssueCode::DanglingPerson,
                        pair.id.as_str(),
                        format!("pair member `{member}` does not exist"),
                    ));
                }
            }
        }
        if resolved && sites_seen.len() > 1 {
            issues.push(Issue::error(
                IssueCode::PairSplitSite,
                pair.id.as_str(),
                "pair members are on different sites",
            ));
        }
        let members: BTreeSet<&str> = pair.member_ids.iter().map(|m| m.as_str()).collect();
        for member in members {
            if let Some(other) = pair_of.insert(member, pair.id.as_str()) {
                issues.push(Issue::error(
                    IssueCode::DoublePairing,
                    member,
                    format!("`{member}` belongs to pairs `{other}` and `{}`", pair.id),
                ));
            }
        }
    }
}

pub(crate) fn check_contacts(issues: &mut Vec<Issue>, persons: &[Person], channels: &BTreeSet<&str>) {
    for person in persons {
        for key in person.yellow_pages.contact.keys() {
            if !channels.contains(key.as_str()) {
                issues.push(Issue::error(
                    IssueCode::UnknownContactChannel,
                    person.id.as_str(),
                    format!("contact channel `{key}` is not a catalog channel"),
                ));
            }
        }
    }
}

/// All structural problems of a map. Empty means every invariant holds.
pub fn validate_map(map: &FlowMap) -> Vec<Issue> {
    let mut issues = Vec::new();
    check_roster(&mut issues, &map.sites, &map.persons, &map.pairs);
    check_unique(&mut issues, "document", map.documents.iter().map(|d| d.id.as_str()));
    check_unique(&mut issues, "medium", map.media.iter().map(|m| m.id.as_str()));

    for doc in &map.documents {
        if map.site(&doc.responsible_site_id).is_none() {
            issues.push(Issue::error(
                IssueCode::DanglingSite,
                doc.id.as_str(),
                format!("responsible site `{}` does not exist", doc.responsible_site_id),
            ));
        }
    }

    check_contacts(&mut issues, &map.persons, &map.channel_names());

    for (i, flow) in map.flows.iter().enumerate() {
        let element = format!("flow#{i} {}->{}", flow.from, flow.to);
        let mut endpoints_ok = true;
        for end in [&flow.from, &flow.to] {
            if !map.contains_store(end) {
                endpoints_ok = false;
                issues.push(Issue::error(
                    IssueCode::DanglingEndpoint,
                    element.clone(),
                    format!("endpoint `{end}` does not exist"),
                ));
            }
        }
        if let Some(medium) = &flow.medium_id {
            if map.medium(medium).is_none() {
                issues.push(Issue::error(
                    IssueCode::DanglingMedium,
                    element.clone(),
                    format!("medium `{medium}` is not in the catalog"),
                ));
            }
        }
        if endpoints_ok && flow.medium_id.is_none() && map.is_cross_site(flow) == Some(true) {
            issues.push(Issue::error(
                IssueCode::MissingMedium,
                element.to_string(),
                "cross-site flow has no medium",
            ));
        }
    }
    issues
}
