//! Communication activities, the media catalog and the richest-feasible
//! medium policy.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use chrono::NaiveTime;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::flow_model::{check_unique, Issue, IssueCode, Role, SolidityCriteria};
use crate::{ActivityId, DocumentId, MediumId, PersonId, SiteId};

/// A content channel tag such as `shared-desktop` or `text`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Channel(pub String);

impl Channel {
    pub fn new(tag: impl Into<String>) -> Self {
        Self(tag.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Channel {
    fn from(s: &str) -> Self {
        Self(s.into())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SetupCost {
    Low,
    Medium,
    High,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MonetaryCost {
    Free,
    Paid,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Medium {
    pub id: MediumId,
    pub name: String,
    /// 1 is the richest medium.
    pub richness_rank: u32,
    #[serde(default)]
    pub requires_colocation: bool,
    #[serde(default)]
    pub available_at: BTreeSet<SiteId>,
    #[serde(default)]
    pub extra_channels: BTreeSet<Channel>,
    #[serde(default = "default_setup")]
    pub setup_cost: SetupCost,
    #[serde(default = "default_monetary")]
    pub monetary_cost: MonetaryCost,
}

fn default_setup() -> SetupCost {
    SetupCost::Low
}

fn default_monetary() -> MonetaryCost {
    MonetaryCost::Free
}

impl Medium {
    pub fn supports(&self, channel: &Channel) -> bool {
        self.extra_channels.contains(channel)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cadence {
    EveryMorning,
    EveryEvening,
    StartOfIteration,
    Custom,
}

/// One recurring meeting of a scheduled activity. A combined row such as
/// "stand-up / wrap-up" is a single activity with two sessions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduledSession {
    /// Name meeting events use to refer to this session.
    pub name: String,
    pub cadence: Cadence,
    pub time_of_day: NaiveTime,
    /// 1-based project days on which the session is expected.
    pub days: BTreeSet<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    StoryCompleted,
    IterationCompleted,
    StatusChange,
    AdHoc,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Trigger {
    Scheduled { sessions: Vec<ScheduledSession> },
    EventDriven { event_kind: EventKind },
}

impl Trigger {
    /// Whether the activity makes its participants communicate on a regular
    /// basis. Only ad-hoc activities are irregular.
    pub fn is_regular(&self) -> bool {
        !matches!(
            self,
            Trigger::EventDriven {
                event_kind: EventKind::AdHoc
            }
        )
    }

    pub fn sessions(&self) -> &[ScheduledSession] {
        match self {
            Trigger::Scheduled { sessions } => sessions,
            Trigger::EventDriven { .. } => &[],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParticipantScope {
    WholeTeam,
    Pair,
    PairPlusCustomer,
    Custom(BTreeSet<PersonId>),
}

/// A solid store an activity reads or writes, e.g. a shared mind map.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActivityArtifact {
    pub id: DocumentId,
    pub name: String,
    pub site_id: SiteId,
    #[serde(default = "solid")]
    pub criteria: SolidityCriteria,
    #[serde(default)]
    pub writers: BTreeSet<Role>,
    #[serde(default)]
    pub readers: BTreeSet<Role>,
}

fn solid() -> SolidityCriteria {
    SolidityCriteria::SOLID
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommunicationActivity {
    pub id: ActivityId,
    pub name: String,
    #[serde(default)]
    pub goal: String,
    pub trigger: Trigger,
    pub participants: ParticipantScope,
    /// Channels needed beyond plain audio/video.
    #[serde(default)]
    pub required_channels: BTreeSet<Channel>,
    #[serde(default)]
    pub artifacts: Vec<ActivityArtifact>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MediumAssignment {
    pub activity_id: ActivityId,
    pub medium_id: MediumId,
    #[serde(default)]
    pub added_channels: BTreeSet<Channel>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CommunicationStrategy {
    pub activities: Vec<CommunicationActivity>,
    pub assignments: Vec<MediumAssignment>,
    pub catalog: Vec<Medium>,
}

impl CommunicationStrategy {
    pub fn activity(&self, id: &ActivityId) -> Option<&CommunicationActivity> {
        self.activities.iter().find(|a| &a.id == id)
    }

    pub fn assignment_for(&self, id: &ActivityId) -> Option<&MediumAssignment> {
        self.assignments.iter().find(|a| &a.activity_id == id)
    }

    pub fn medium(&self, id: &MediumId) -> Option<&Medium> {
        self.catalog.iter().find(|m| &m.id == id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StrategyError {
    #[error("media catalog is empty")]
    EmptyCatalog,
    #[error("media `{first}` and `{second}` share richness rank {rank}")]
    DuplicateRank {
        rank: u32,
        first: MediumId,
        second: MediumId,
    },
    #[error("no sites given for activity `{0}`")]
    NoSites(ActivityId),
    #[error("no catalog medium is feasible for activity `{0}`")]
    NoFeasibleMedium(ActivityId),
}

/// Catalog sorted richest first. Ranks must be unique.
pub fn rank_media(catalog: &[Medium]) -> Result<Vec<Medium>, StrategyError> {
    if catalog.is_empty() {
        return Err(StrategyError::EmptyCatalog);
    }
    let mut ranked = catalog.to_vec();
    ranked.sort_by_key(|m| m.richness_rank);
    for w in ranked.windows(2) {
        if w[0].richness_rank == w[1].richness_rank {
            let (first, second) = if w[0].id <= w[1].id {
                (w[0].id.clone(), w[1].id.clone())
            } else {
                (w[1].id.clone(), w[0].id.clone())
            };
            return Err(StrategyError::DuplicateRank {
                rank: w[0].richness_rank,
                first,
                second,
            });
        }
    }
    Ok(ranked)
}

/// Every channel tag offered by some medium in the catalog. These are the
/// channels that may be added to another medium as a dedicated side channel.
pub fn catalog_channels(catalog: &[Medium]) -> BTreeSet<Channel> {
    catalog
        .iter()
        .flat_map(|m| m.extra_channels.iter().cloned())
        .collect()
}

/// Picks the richest medium that is available at every involved site, is
/// not bound to co-location when sites differ, and can carry the required
/// channels either natively or through an added side channel.
pub fn choose_medium(
    activity: &CommunicationActivity,
    catalog: &[Medium],
    sites_involved: &BTreeSet<SiteId>,
) -> Result<MediumAssignment, StrategyError> {
    if sites_involved.is_empty() {
        return Err(StrategyError::NoSites(activity.id.clone()));
    }
    let ranked = rank_media(catalog)?;
    let addable = catalog_channels(catalog);
    let chosen = ranked
        .iter()
        .find(|m| {
            sites_involved.is_subset(&m.available_at)
                && (!m.requires_colocation || sites_involved.len() == 1)
                && activity
                    .required_channels
                    .iter()
                    .all(|c| m.supports(c) || addable.contains(c))
        })
        .ok_or_else(|| StrategyError::NoFeasibleMedium(activity.id.clone()))?;
    Ok(MediumAssignment {
        activity_id: activity.id.clone(),
        medium_id: chosen.id.clone(),
        added_channels: activity
            .required_channels
            .iter()
            .filter(|c| !chosen.supports(c))
            .cloned()
            .collect(),
    })
}

pub fn validate_catalog(catalog: &[Medium]) -> Vec<Issue> {
    let mut issues = Vec::new();
    if catalog.is_empty() {
        issues.push(Issue::error(IssueCode::EmptyCatalog, "catalog", "media catalog is empty"));
        return issues;
    }
    check_unique(&mut issues, "medium", catalog.iter().map(|m| m.id.as_str()));
    let mut ranks: Vec<&Medium> = catalog.iter().collect();
    ranks.sort_by_key(|m| m.richness_rank);
    for w in ranks.windows(2) {
        if w[0].richness_rank == w[1].richness_rank {
            issues.push(Issue::error(
                IssueCode::DuplicateRank,
                w[1].id.as_str(),
                format!("shares richness rank {} with `{}`", w[1].richness_rank, w[0].id),
            ));
        }
    }
    if let Some(m) = catalog.iter().find(|m| m.richness_rank == 0) {
        issues.push(Issue::error(
            IssueCode::DuplicateRank,
            m.id.as_str(),
            "richness rank must be positive",
        ));
    }
    issues
}

/// All strategy-internal problems: unassigned or doubly assigned activities,
/// dangling references, channel mismatches and unresolvable triggers. Cost
/// fields only ever produce warnings.
pub fn validate_strategy(strategy: &CommunicationStrategy) -> Vec<Issue> {
    let mut issues = validate_catalog(&strategy.catalog);
    check_unique(
        &mut issues,
        "activity",
        strategy.activities.iter().map(|a| a.id.as_str()),
    );
    check_unique(
        &mut issues,
        "session",
        strategy
            .activities
            .iter()
            .flat_map(|a| a.trigger.sessions())
            .map(|s| s.name.as_str()),
    );
    let addable = catalog_channels(&strategy.catalog);

    for activity in &strategy.activities {
        if let Trigger::Scheduled { sessions } = &activity.trigger {
            if sessions.is_empty() {
                issues.push(Issue::error(
                    IssueCode::UnresolvedTrigger,
                    activity.id.as_str(),
                    "scheduled activity has no sessions",
                ));
            }
            for s in sessions {
                if s.days.is_empty() || s.days.contains(&0) {
                    issues.push(Issue::error(
                        IssueCode::UnresolvedTrigger,
                        activity.id.as_str(),
                        format!("session `{}` needs one or more project days (1-based)", s.name),
                    ));
                }
            }
        }

        let assigned: Vec<&MediumAssignment> = strategy
            .assignments
            .iter()
            .filter(|a| a.activity_id == activity.id)
            .collect();
        match assigned.as_slice() {
            [] => issues.push(Issue::error(
                IssueCode::UnassignedActivity,
                activity.id.as_str(),
                "activity has no medium assignment",
            )),
            [one] => {
                if let Some(medium) = strategy.medium(&one.medium_id) {
                    for c in &activity.required_channels {
                        if !medium.supports(c) && !one.added_channels.contains(c) {
                            issues.push(Issue::error(
                                IssueCode::ChannelMismatch,
                                activity.id.as_str(),
                                format!("required channel `{c}` is neither native to `{}` nor added", medium.id),
                            ));
                        }
                    }
                }
            }
            _ => issues.push(Issue::error(
                IssueCode::DuplicateAssignment,
                activity.id.as_str(),
                format!("activity has {} medium assignments", assigned.len()),
            )),
        }
    }

    for assignment in &strategy.assignments {
        let element = assignment.activity_id.as_str();
        if strategy.activity(&assignment.activity_id).is_none() {
            issues.push(Issue::error(
                IssueCode::DanglingActivity,
                element,
                "assignment names an unknown activity",
            ));
        }
        match strategy.medium(&assignment.medium_id) {
            None => issues.push(Issue::error(
                IssueCode::DanglingMedium,
                element,
                format!("assignment names unknown medium `{}`", assignment.medium_id),
            )),
            Some(medium) => {
                if medium.monetary_cost == MonetaryCost::Paid {
                    issues.push(Issue::warning(
                        IssueCode::PaidMedium,
                        element,
                        format!("medium `{}` has monetary cost", medium.id),
                    ));
                }
                if medium.setup_cost == SetupCost::High {
                    issues.push(Issue::warning(
                        IssueCode::HighSetupCost,
                        element,
                        format!("medium `{}` has high setup cost", medium.id),
                    ));
                }
            }
        }
        for c in &assignment.added_channels {
            if !addable.contains(c) {
                issues.push(Issue::error(
                    IssueCode::UnknownChannel,
                    element,
                    format!("added channel `{c}` is not offered by any catalog medium"),
                ));
            }
        }
    }
    issues
}

fn generic(id: &str, name: &str, rank: u32, colocated: bool, channels: &[&str]) -> Medium {
    Medium {
        id: id.into(),
        name: name.into(),
        richness_rank: rank,
        requires_colocation: colocated,
        available_at: BTreeSet::new(),
        extra_channels: channels.iter().map(|&c| Channel::new(c)).collect(),
        setup_cost: SetupCost::Low,
        monetary_cost: MonetaryCost::Free,
    }
}

/// The richness continuum with video conferencing placed between meeting
/// in person and a telephone call. `available_at` is left empty; callers
/// fill in their sites.
pub fn default_catalog() -> Vec<Medium> {
    alloc::vec![
        generic("face-to-face", "Face to face", 1, true, &["audio", "video"]),
        generic("hq-video", "HQ video conference", 2, false, &["audio", "video"]),
        generic("call", "Telephone call", 3, false, &["audio"]),
        generic("personal-document", "Personal document (e-mail)", 4, false, &["text"]),
        generic("impersonal-document", "Impersonal document (specification)", 5, false, &["text"]),
    ]
}
