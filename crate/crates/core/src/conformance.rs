//! Conformance analysis of a communication timeline against the strategy.
//!
//! Three analyzers are provided, one per built-in template: status-message
//! upkeep, acceptance testing of user stories, and scheduled meetings. Each
//! classifies every opportunity as OK, a temporal violation (communication
//! at the wrong time) or a qualitative violation (absent or deficient
//! communication) and reports integer compliance percentages.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use chrono::{Duration, NaiveTime};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::flow_model::{FlowMap, Issue, IssueCode, MapKind, WorkItemRef};
use crate::ingest::{CommEvent, CommKind};
use crate::map_builder::TeamSpec;
use crate::strategy::CommunicationStrategy;
use crate::{ActivityId, Calendar, PersonId, Timestamp, WorkstationId};

pub mod rules {
    pub const STATUS_STALE: &str = "status.stale";
    pub const STATUS_DOUBLE_PAIRING: &str = "status.double-pairing";
    pub const STATUS_INCOMPLETE: &str = "status.incomplete";
    pub const ACCEPTANCE_AFTER_COMMIT: &str = "acceptance.after-commit";
    pub const ACCEPTANCE_MISSING: &str = "acceptance.missing";
    pub const SCHEDULE_OFF_DAY: &str = "schedule.off-day";
    pub const SCHEDULE_NOT_HELD: &str = "schedule.not-held";
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationCategory {
    Temporal,
    Qualitative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnalyzerKind {
    StatusUpdate,
    AcceptanceTest,
    Scheduled,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViolationRule {
    pub id: String,
    pub category: ViolationCategory,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConformanceTemplate {
    pub activity_id: ActivityId,
    pub analyzer: AnalyzerKind,
    #[serde(default)]
    pub goal: String,
    #[serde(default)]
    pub definition: String,
    pub collected_data: Vec<CommKind>,
    pub rules: Vec<ViolationRule>,
}

fn rule(id: &str, category: ViolationCategory, description: &str) -> ViolationRule {
    ViolationRule {
        id: id.to_string(),
        category,
        description: description.to_string(),
    }
}

impl AnalyzerKind {
    /// Event kinds the analyzer reads.
    pub fn consumes(self) -> &'static [CommKind] {
        match self {
            AnalyzerKind::StatusUpdate => &[CommKind::StatusChange],
            AnalyzerKind::AcceptanceTest => &[CommKind::Commit, CommKind::CustomerContact],
            AnalyzerKind::Scheduled => &[CommKind::Meeting],
        }
    }

    /// Rules the analyzer can emit.
    pub fn rules(self) -> Vec<ViolationRule> {
        use ViolationCategory::*;
        match self {
            AnalyzerKind::StatusUpdate => alloc::vec![
                rule(rules::STATUS_STALE, Temporal, "status message not updated for longer than the staleness limit"),
                rule(rules::STATUS_DOUBLE_PAIRING, Temporal, "status messages place a developer in two pairs at once"),
                rule(rules::STATUS_INCOMPLETE, Qualitative, "status message lacks the user story id or the pair names"),
            ],
            AnalyzerKind::AcceptanceTest => alloc::vec![
                rule(rules::ACCEPTANCE_AFTER_COMMIT, Temporal, "story committed as done before talking to the customer"),
                rule(rules::ACCEPTANCE_MISSING, Qualitative, "story committed as done without any customer contact"),
            ],
            AnalyzerKind::Scheduled => alloc::vec![
                rule(rules::SCHEDULE_OFF_DAY, Temporal, "meeting held a day early or a day late"),
                rule(rules::SCHEDULE_NOT_HELD, Qualitative, "meeting not held at all"),
            ],
        }
    }

    pub fn template(self, activity_id: ActivityId) -> ConformanceTemplate {
        let (goal, definition) = match self {
            AnalyzerKind::StatusUpdate => (
                "Increase awareness on who is working with whom on what task",
                "Developers broadcast story id and pair names in their status message in a timely manner",
            ),
            AnalyzerKind::AcceptanceTest => (
                "Validate development outcome with customer needs",
                "Developers present a completed story to the on-site customer before committing it as done",
            ),
            AnalyzerKind::Scheduled => (
                "Distribute important information to all team members regularly",
                "Scheduled meetings take place on their scheduled day",
            ),
        };
        ConformanceTemplate {
            activity_id,
            analyzer: self,
            goal: goal.to_string(),
            definition: definition.to_string(),
            collected_data: self.consumes().to_vec(),
            rules: self.rules(),
        }
    }
}

/// Rules must be ones the analyzer emits, with their fixed category, and the
/// template must collect every event kind the analyzer reads.
pub fn validate_template(template: &ConformanceTemplate) -> Vec<Issue> {
    let mut issues = Vec::new();
    let known = template.analyzer.rules();
    let element = template.activity_id.as_str();
    for r in &template.rules {
        match known.iter().find(|k| k.id == r.id) {
            None => issues.push(Issue::error(
                IssueCode::UnknownRule,
                element,
                format!("rule `{}` is not produced by the {:?} analyzer", r.id, template.analyzer),
            )),
            Some(k) if k.category != r.category => issues.push(Issue::error(
                IssueCode::UnknownRule,
                element,
                format!("rule `{}` is {:?}, not {:?}", r.id, k.category, r.category),
            )),
            Some(_) => {}
        }
    }
    for kind in template.analyzer.consumes() {
        if !template.collected_data.contains(kind) {
            issues.push(Issue::error(
                IssueCode::UnknownRule,
                element,
                format!("rules read `{}` events, which are not collected", kind.as_str()),
            ));
        }
    }
    issues
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AcceptanceLookback {
    SameDay,
    AnyTimeBefore,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalysisConfig {
    pub workday_start: NaiveTime,
    pub workday_end: NaiveTime,
    pub slot_minutes: i64,
    pub staleness_limit_minutes: i64,
    pub acceptance_lookback: AcceptanceLookback,
    pub schedule_tolerance_days: i64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            workday_start: NaiveTime::from_hms_opt(9, 0, 0).unwrap(),
            workday_end: NaiveTime::from_hms_opt(17, 0, 0).unwrap(),
            slot_minutes: 60,
            staleness_limit_minutes: 60,
            acceptance_lookback: AcceptanceLookback::AnyTimeBefore,
            schedule_tolerance_days: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConformanceError {
    #[error("no work hours configured (workday end must be after workday start)")]
    NoWorkHoursConfigured,
    #[error("invalid analysis configuration: {0}")]
    InvalidConfig(&'static str),
}

impl AnalysisConfig {
    pub fn check(&self) -> Result<(), ConformanceError> {
        if self.workday_end <= self.workday_start {
            return Err(ConformanceError::NoWorkHoursConfigured);
        }
        if self.slot_minutes <= 0 {
            return Err(ConformanceError::InvalidConfig("slot_minutes must be positive"));
        }
        if self.staleness_limit_minutes <= 0 {
            return Err(ConformanceError::InvalidConfig("staleness_limit_minutes must be positive"));
        }
        if self.schedule_tolerance_days < 0 {
            return Err(ConformanceError::InvalidConfig("schedule_tolerance_days must not be negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", content = "id", rename_all = "snake_case")]
pub enum Subject {
    Workstation(WorkstationId),
    Story(u32),
    Session(String),
}

/// An expected occurrence that did not happen as planned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ExpectedSlot {
    pub start: Timestamp,
    pub end: Timestamp,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViolationRecord {
    pub rule_id: String,
    pub category: ViolationCategory,
    pub occurred_at: Timestamp,
    pub day: i64,
    pub subject: Subject,
    /// Indices into the analyzed timeline.
    pub evidence: Vec<usize>,
    #[serde(default)]
    pub expected_slot: Option<ExpectedSlot>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DayTally {
    pub day: i64,
    pub ok_count: u32,
    pub temporal_count: u32,
    pub qualitative_count: u32,
}

impl DayTally {
    pub fn total(&self) -> u32 {
        self.ok_count + self.temporal_count + self.qualitative_count
    }

    pub fn percentages(&self) -> Percentages {
        compliance(self.ok_count, self.temporal_count, self.qualitative_count)
    }

    fn add(&mut self, category: Option<ViolationCategory>) {
        match category {
            None => self.ok_count += 1,
            Some(ViolationCategory::Temporal) => self.temporal_count += 1,
            Some(ViolationCategory::Qualitative) => self.qualitative_count += 1,
        }
    }
}

/// Integer percentages that sum to 100.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Percentages {
    pub ok: u32,
    pub temporal: u32,
    pub qualitative: u32,
    /// No opportunities at all; reported as fully compliant.
    pub vacuous: bool,
}

impl Percentages {
    pub fn triple(&self) -> (u32, u32, u32) {
        (self.ok, self.temporal, self.qualitative)
    }
}

/// Half-up rounded percentages, reconciled to a total of 100 by the
/// largest-remainder rule. Ties go to the earlier category (OK first) when
/// adding and to the later category when removing.
pub fn compliance(ok: u32, temporal: u32, qualitative: u32) -> Percentages {
    let counts = [ok as u64, temporal as u64, qualitative as u64];
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Percentages {
            ok: 100,
            temporal: 0,
            qualitative: 0,
            vacuous: true,
        };
    }
    let mut pct = [0u64; 3];
    let mut remainder = [0u64; 3];
    for i in 0..3 {
        let scaled = counts[i] * 100;
        pct[i] = scaled / total;
        remainder[i] = scaled % total;
        if 2 * remainder[i] >= total {
            pct[i] += 1;
        }
    }
    let mut sum: u64 = pct.iter().sum();
    while sum < 100 {
        // largest remainder among those rounded down
        let i = (0..3)
            .filter(|&i| 2 * remainder[i] < total)
            .max_by(|&a, &b| remainder[a].cmp(&remainder[b]).then(b.cmp(&a)))
            .unwrap_or(0);
        pct[i] += 1;
        remainder[i] = total;
        sum += 1;
    }
    while sum > 100 {
        // smallest remainder among those rounded up
        let i = (0..3)
            .filter(|&i| pct[i] > 0 && 2 * remainder[i] >= total && remainder[i] < total)
            .min_by(|&a, &b| remainder[a].cmp(&remainder[b]).then(b.cmp(&a)))
            .or_else(|| (0..3).rev().find(|&i| pct[i] > 0))
            .unwrap_or(0);
        pct[i] -= 1;
        remainder[i] = total;
        sum -= 1;
    }
    Percentages {
        ok: pct[0] as u32,
        temporal: pct[1] as u32,
        qualitative: pct[2] as u32,
        vacuous: false,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplianceResult {
    pub activity_id: ActivityId,
    pub analyzer: AnalyzerKind,
    pub per_day: Vec<DayTally>,
    pub totals: DayTally,
    pub compliance_pct: u32,
    pub temporal_pct: u32,
    pub qualitative_pct: u32,
    pub vacuous: bool,
}

impl ComplianceResult {
    pub fn percentages(&self) -> Percentages {
        Percentages {
            ok: self.compliance_pct,
            temporal: self.temporal_pct,
            qualitative: self.qualitative_pct,
            vacuous: self.vacuous,
        }
    }

    pub fn day(&self, day: i64) -> Option<&DayTally> {
        self.per_day.iter().find(|d| d.day == day)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Analysis {
    pub result: ComplianceResult,
    pub violations: Vec<ViolationRecord>,
}

/// Accumulates per-day tallies and violations for one analyzer run.
struct Tally {
    days: BTreeMap<i64, DayTally>,
    violations: Vec<ViolationRecord>,
}

impl Tally {
    fn new(calendar: &Calendar) -> Self {
        let days = calendar
            .day_numbers()
            .map(|d| {
                let d = i64::from(d);
                (d, DayTally { day: d, ..DayTally::default() })
            })
            .collect();
        Self {
            days,
            violations: Vec::new(),
        }
    }

    fn ok(&mut self, day: i64) {
        self.days
            .entry(day)
            .or_insert(DayTally { day, ..DayTally::default() })
            .add(None);
    }

    fn violation(&mut self, v: ViolationRecord) {
        self.days
            .entry(v.day)
            .or_insert(DayTally { day: v.day, ..DayTally::default() })
            .add(Some(v.category));
        self.violations.push(v);
    }

    fn finish(mut self, activity_id: ActivityId, analyzer: AnalyzerKind) -> Analysis {
        let per_day: Vec<DayTally> = self.days.into_values().collect();
        let mut totals = DayTally { day: 0, ..DayTally::default() };
        for d in &per_day {
            totals.ok_count += d.ok_count;
            totals.temporal_count += d.temporal_count;
            totals.qualitative_count += d.qualitative_count;
        }
        let pct = totals.percentages();
        self.violations.sort_by(|a, b| {
            (a.occurred_at, &a.subject, &a.rule_id).cmp(&(b.occurred_at, &b.subject, &b.rule_id))
        });
        Analysis {
            result: ComplianceResult {
                activity_id,
                analyzer,
                per_day,
                totals,
                compliance_pct: pct.ok,
                temporal_pct: pct.temporal,
                qualitative_pct: pct.qualitative,
                vacuous: pct.vacuous,
            },
            violations: self.violations,
        }
    }
}

/// Work-hour slots of one project day as (start, end) instants.
pub fn day_slots(calendar: &Calendar, config: &AnalysisConfig, day: i64) -> Vec<ExpectedSlot> {
    let first = calendar.instant(day, config.workday_start);
    let close = calendar.instant(day, config.workday_end);
    let step = Duration::minutes(config.slot_minutes);
    let mut slots = Vec::new();
    let mut start = first;
    while start + step <= close {
        slots.push(ExpectedSlot { start, end: start + step });
        start += step;
    }
    slots
}

/// Workstations declared by the team, then any others seen in status events.
pub fn workstations(timeline: &[CommEvent], team: &TeamSpec) -> Vec<WorkstationId> {
    let mut out: Vec<WorkstationId> = team.workstations.iter().map(|w| w.id.clone()).collect();
    let seen: BTreeSet<&WorkstationId> = timeline
        .iter()
        .filter_map(|e| e.status().map(|s| &s.workstation))
        .collect();
    for ws in seen {
        if !out.contains(ws) {
            out.push(ws.clone());
        }
    }
    out
}

fn name_key(name: &str) -> String {
    name.trim().to_lowercase()
}

/// Classifies every (workstation, work-hour slot) opportunity. A slot is
/// temporal if the workstation's latest status is older than the staleness
/// limit at slot end, or if one of its names also appears in another
/// workstation's latest status; otherwise qualitative if the latest status
/// does not parse; otherwise OK.
pub fn analyze_status_update(
    activity_id: &ActivityId,
    timeline: &[CommEvent],
    team: &TeamSpec,
    calendar: &Calendar,
    config: &AnalysisConfig,
) -> Result<Analysis, ConformanceError> {
    config.check()?;
    let stations = workstations(timeline, team);
    // per workstation: status event indices ordered by start
    let mut history: BTreeMap<&WorkstationId, Vec<usize>> = BTreeMap::new();
    for (i, e) in timeline.iter().enumerate() {
        if e.kind != CommKind::StatusChange {
            continue;
        }
        if let Some(s) = e.status() {
            history.entry(&s.workstation).or_default().push(i);
        }
    }
    for list in history.values_mut() {
        list.sort_by_key(|&i| (timeline[i].start, i));
    }
    let latest_at = |ws: &WorkstationId, t: Timestamp| -> Option<usize> {
        let list = history.get(ws)?;
        let n = list.partition_point(|&i| timeline[i].start <= t);
        n.checked_sub(1).map(|k| list[k])
    };
    let limit = Duration::minutes(config.staleness_limit_minutes);

    let mut tally = Tally::new(calendar);
    for day in calendar.day_numbers().map(i64::from) {
        for slot in day_slots(calendar, config, day) {
            let latest: Vec<Option<usize>> = stations.iter().map(|ws| latest_at(ws, slot.end)).collect();
            let mut holders: BTreeMap<String, Vec<usize>> = BTreeMap::new();
            for (w, idx) in latest.iter().enumerate() {
                let Some(parsed) = idx.and_then(|i| timeline[i].status()).and_then(|s| s.parsed.as_ref()) else {
                    continue;
                };
                let names: BTreeSet<String> = parsed.pair_names.iter().map(|n| name_key(n)).collect();
                for n in names {
                    holders.entry(n).or_default().push(w);
                }
            }

            for (w, ws) in stations.iter().enumerate() {
                let record = |rule_id: &str, category, evidence: Vec<usize>, expected: bool| ViolationRecord {
                    rule_id: rule_id.to_string(),
                    category,
                    occurred_at: slot.end,
                    day,
                    subject: Subject::Workstation(ws.clone()),
                    evidence,
                    expected_slot: expected.then_some(slot),
                };
                let Some(idx) = latest[w] else {
                    tally.violation(record(rules::STATUS_STALE, ViolationCategory::Temporal, Vec::new(), true));
                    continue;
                };
                if slot.end - timeline[idx].start > limit {
                    tally.violation(record(rules::STATUS_STALE, ViolationCategory::Temporal, alloc::vec![idx], true));
                    continue;
                }
                let status = timeline[idx].status().expect("indexed status events");
                match &status.parsed {
                    Some(parsed) => {
                        let others: BTreeSet<usize> = parsed
                            .pair_names
                            .iter()
                            .flat_map(|n| holders.get(&name_key(n)).into_iter().flatten())
                            .filter(|&&o| o != w)
                            .filter_map(|&o| latest[o])
                            .collect();
                        if others.is_empty() {
                            tally.ok(day);
                        } else {
                            let mut evidence = alloc::vec![idx];
                            evidence.extend(others);
                            tally.violation(record(
                                rules::STATUS_DOUBLE_PAIRING,
                                ViolationCategory::Temporal,
                                evidence,
                                false,
                            ));
                        }
                    }
                    None => tally.violation(record(
                        rules::STATUS_INCOMPLETE,
                        ViolationCategory::Qualitative,
                        alloc::vec![idx],
                        false,
                    )),
                }
            }
        }
    }
    Ok(tally.finish(activity_id.clone(), AnalyzerKind::StatusUpdate))
}

/// Whether a customer contact counts for a completed commit: it names the
/// same story, or it names no story and involves a member of the pair.
pub fn contact_matches(commit: &CommEvent, story_id: u32, contact: &CommEvent) -> bool {
    match contact.story_id {
        Some(s) => s == story_id,
        None => !contact.participants.is_disjoint(&commit.participants),
    }
}

/// Every commit marked done must be preceded by customer contact about the
/// story. Contact only afterwards is temporal; no contact at all is
/// qualitative.
pub fn analyze_acceptance(
    activity_id: &ActivityId,
    timeline: &[CommEvent],
    calendar: &Calendar,
    config: &AnalysisConfig,
) -> Analysis {
    let mut by_story: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    let mut storyless: Vec<usize> = Vec::new();
    for (i, e) in timeline.iter().enumerate() {
        if e.kind != CommKind::CustomerContact {
            continue;
        }
        match e.story_id {
            Some(s) => by_story.entry(s).or_default().push(i),
            None => storyless.push(i),
        }
    }

    let mut tally = Tally::new(calendar);
    for (i, commit) in timeline.iter().enumerate() {
        if commit.kind != CommKind::Commit {
            continue;
        }
        let Some(payload) = commit.commit().filter(|c| c.completed_flag) else {
            continue;
        };
        let story = payload.story_id;
        let day = calendar.day_index(commit.start);
        let counted = |c: &CommEvent| match config.acceptance_lookback {
            AcceptanceLookback::AnyTimeBefore => c.start <= commit.start,
            AcceptanceLookback::SameDay => {
                c.start <= commit.start && calendar.day_index(c.start) == day
            }
        };
        let candidates: Vec<usize> = by_story
            .get(&story)
            .into_iter()
            .flatten()
            .copied()
            .chain(
                storyless
                    .iter()
                    .copied()
                    .filter(|&c| contact_matches(commit, story, &timeline[c])),
            )
            .collect();

        if candidates.iter().any(|&c| counted(&timeline[c])) {
            tally.ok(day);
            continue;
        }
        let record = |rule_id: &str, category, evidence| ViolationRecord {
            rule_id: rule_id.to_string(),
            category,
            occurred_at: commit.start,
            day,
            subject: Subject::Story(story),
            evidence,
            expected_slot: None,
        };
        let first_other = candidates
            .iter()
            .copied()
            .min_by_key(|&c| (timeline[c].start, c));
        match first_other {
            Some(c) => tally.violation(record(
                rules::ACCEPTANCE_AFTER_COMMIT,
                ViolationCategory::Temporal,
                alloc::vec![i, c],
            )),
            None => tally.violation(record(
                rules::ACCEPTANCE_MISSING,
                ViolationCategory::Qualitative,
                alloc::vec![i],
            )),
        }
    }
    tally.finish(activity_id.clone(), AnalyzerKind::AcceptanceTest)
}

/// One expected occurrence of a scheduled session.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expectation {
    pub session: String,
    pub day: i64,
    pub at: Timestamp,
}

/// Expands every scheduled session onto the project days it names,
/// in chronological order.
pub fn expected_occurrences(strategy: &CommunicationStrategy, calendar: &Calendar) -> Vec<Expectation> {
    let mut out = Vec::new();
    for activity in &strategy.activities {
        for session in activity.trigger.sessions() {
            for &day in session.days.iter().filter(|&&d| d >= 1 && d <= calendar.days) {
                let day = i64::from(day);
                out.push(Expectation {
                    session: session.name.clone(),
                    day,
                    at: calendar.instant(day, session.time_of_day),
                });
            }
        }
    }
    out.sort_by(|a, b| (a.at, &a.session).cmp(&(b.at, &b.session)));
    out
}

/// Matches expected meetings to meeting events of the same session. Same-day
/// matches are made first (nearest in time); remaining expectations then take
/// the nearest unmatched meeting within the tolerance window, which counts as
/// temporal. Unmatched expectations are qualitative.
pub fn analyze_scheduled(
    activity_id: &ActivityId,
    timeline: &[CommEvent],
    strategy: &CommunicationStrategy,
    calendar: &Calendar,
    config: &AnalysisConfig,
) -> Analysis {
    let expected = expected_occurrences(strategy, calendar);
    let mut meetings: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (i, e) in timeline.iter().enumerate() {
        if e.kind == CommKind::Meeting {
            if let Some(name) = e.meeting_name() {
                meetings.entry(name_key(name)).or_default().push(i);
            }
        }
    }
    let mut taken: BTreeSet<usize> = BTreeSet::new();
    let mut matched: Vec<Option<usize>> = alloc::vec![None; expected.len()];

    let nearest = |exp: &Expectation, taken: &BTreeSet<usize>, same_day: bool| -> Option<usize> {
        meetings
            .get(&name_key(&exp.session))?
            .iter()
            .copied()
            .filter(|i| !taken.contains(i))
            .filter(|&i| {
                let diff = (calendar.day_index(timeline[i].start) - exp.day).abs();
                if same_day {
                    diff == 0
                } else {
                    diff <= config.schedule_tolerance_days
                }
            })
            .min_by_key(|&i| ((timeline[i].start - exp.at).abs(), timeline[i].start, i))
    };
    for (k, exp) in expected.iter().enumerate() {
        if let Some(i) = nearest(exp, &taken, true) {
            taken.insert(i);
            matched[k] = Some(i);
        }
    }
    for (k, exp) in expected.iter().enumerate() {
        if matched[k].is_none() {
            if let Some(i) = nearest(exp, &taken, false) {
                taken.insert(i);
                matched[k] = Some(i);
            }
        }
    }

    let mut tally = Tally::new(calendar);
    for (exp, m) in expected.iter().zip(matched) {
        let slot = ExpectedSlot { start: exp.at, end: exp.at };
        match m {
            Some(i) if calendar.day_index(timeline[i].start) == exp.day => tally.ok(exp.day),
            Some(i) => tally.violation(ViolationRecord {
                rule_id: rules::SCHEDULE_OFF_DAY.to_string(),
                category: ViolationCategory::Temporal,
                occurred_at: exp.at,
                day: exp.day,
                subject: Subject::Session(exp.session.clone()),
                evidence: alloc::vec![i],
                expected_slot: Some(slot),
            }),
            None => tally.violation(ViolationRecord {
                rule_id: rules::SCHEDULE_NOT_HELD.to_string(),
                category: ViolationCategory::Qualitative,
                occurred_at: exp.at,
                day: exp.day,
                subject: Subject::Session(exp.session.clone()),
                evidence: Vec::new(),
                expected_slot: Some(slot),
            }),
        }
    }
    tally.finish(activity_id.clone(), AnalyzerKind::Scheduled)
}

/// The target map with pairs, work items and status texts brought up to
/// date by replaying every status message at or before `as_of` in order.
/// Unparseable messages change only the status text. Everything else is
/// copied unchanged.
pub fn update_current_map(
    target: &FlowMap,
    timeline: &[CommEvent],
    team: &TeamSpec,
    as_of: Timestamp,
) -> FlowMap {
    let mut map = target.clone();
    map.kind = MapKind::Current;
    map.as_of = Some(as_of);

    let mut updates: Vec<(&WorkstationId, &CommEvent)> = timeline
        .iter()
        .filter(|e| e.kind == CommKind::StatusChange && e.start <= as_of)
        .filter_map(|e| e.status().map(|s| (&s.workstation, e)))
        .collect();
    updates.sort_by_key(|(ws, e)| (e.start, *ws));

    for (ws, event) in updates {
        let Some(pair_id) = team
            .workstations
            .iter()
            .find(|w| &w.id == ws)
            .and_then(|w| w.pair_id.as_ref())
        else {
            continue;
        };
        let Some(pair) = map.pairs.iter_mut().find(|p| &p.id == pair_id) else {
            continue;
        };
        let status = event.status().expect("status events carry a status payload");
        if let Some(parsed) = &status.parsed {
            let a = team.person_by_name(&parsed.pair_names[0]);
            let b = team.person_by_name(&parsed.pair_names[1]);
            if let (Some(a), Some(b)) = (a, b) {
                if a.id != b.id && a.site_id == b.site_id {
                    pair.member_ids = [a.id.clone(), b.id.clone()];
                }
            }
            let title = match &pair.current_work_item {
                Some(w) if w.story_id == parsed.story_id => w.title.clone(),
                _ => String::new(),
            };
            pair.current_work_item = Some(WorkItemRef {
                story_id: parsed.story_id,
                title,
            });
        }
        let members: [PersonId; 2] = pair.member_ids.clone();
        let item = pair.current_work_item.clone();
        for person in map.persons.iter_mut().filter(|p| members.contains(&p.id)) {
            person.yellow_pages.status = Some(status.raw.clone());
            if status.parsed.is_some() {
                person.yellow_pages.current_work_item = item.clone();
            }
        }
    }
    map
}
