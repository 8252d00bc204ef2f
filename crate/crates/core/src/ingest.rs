//! Raw log adapters and the normalized communication event.
//!
//! Three line-oriented raw formats are understood:
//!
//! * status log: `<timestamp> <workstation> "<status text>"`
//! * version-control log: `<revision>\t<timestamp>\t<author>\t<message>`
//! * call/chat log: `<start>\t<end|->\t<handle>[,<handle>...]`
//!
//! Blank lines are skipped. Every other line becomes exactly one event or
//! one reported error, so `records == events + errors` always holds.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use chrono::{DateTime, FixedOffset, NaiveDateTime, TimeZone};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::map_builder::TeamSpec;
use crate::{MediumId, PersonId, SiteId, Timestamp, WorkstationId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommKind {
    Call,
    Chat,
    StatusChange,
    Commit,
    Meeting,
    CustomerContact,
    ManualObservation,
}

impl CommKind {
    pub const ALL: [CommKind; 7] = [
        CommKind::Call,
        CommKind::Chat,
        CommKind::StatusChange,
        CommKind::Commit,
        CommKind::Meeting,
        CommKind::CustomerContact,
        CommKind::ManualObservation,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CommKind::Call => "call",
            CommKind::Chat => "chat",
            CommKind::StatusChange => "status_change",
            CommKind::Commit => "commit",
            CommKind::Meeting => "meeting",
            CommKind::CustomerContact => "customer_contact",
            CommKind::ManualObservation => "manual_observation",
        }
    }

    /// Kinds that always carry an end time.
    pub fn needs_end(self) -> bool {
        matches!(self, CommKind::Call | CommKind::Meeting)
    }

    /// Kinds that never carry an end time.
    pub fn is_instant(self) -> bool {
        matches!(self, CommKind::Chat | CommKind::StatusChange | CommKind::Commit)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SiteSpan {
    #[default]
    Local,
    CrossSite,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedStatus {
    pub story_id: u32,
    pub pair_names: [String; 2],
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatusPayload {
    pub workstation: WorkstationId,
    pub raw: String,
    /// Present iff `raw` matches the status grammar.
    #[serde(default)]
    pub parsed: Option<ParsedStatus>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommitPayload {
    pub pair_names: [String; 2],
    pub story_id: u32,
    pub completed_flag: bool,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommitRecord {
    pub revision: String,
    pub author: String,
    pub message: String,
    /// Present iff the message follows the commit template.
    #[serde(default)]
    pub template: Option<CommitPayload>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Payload {
    #[default]
    None,
    Status(StatusPayload),
    Commit(CommitRecord),
    Meeting { name: String },
    Chat { messages: u32 },
    Note { text: String },
}

/// One normalized, timestamped communication fact.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommEvent {
    pub kind: CommKind,
    pub start: Timestamp,
    #[serde(default)]
    pub end: Option<Timestamp>,
    #[serde(default)]
    pub participants: BTreeSet<PersonId>,
    /// Handles or names that could not be resolved to a team member.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub unresolved: Vec<String>,
    #[serde(default)]
    pub site_span: SiteSpan,
    #[serde(default)]
    pub medium_id: Option<MediumId>,
    #[serde(default)]
    pub story_id: Option<u32>,
    #[serde(default)]
    pub payload: Payload,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EventError {
    #[error("{0:?} event ends before it starts")]
    EndBeforeStart(CommKind),
    #[error("{0:?} event needs an end time")]
    MissingEnd(CommKind),
    #[error("{0:?} event cannot have an end time")]
    UnexpectedEnd(CommKind),
}

impl CommEvent {
    pub fn new(kind: CommKind, start: Timestamp) -> Self {
        Self {
            kind,
            start,
            end: None,
            participants: BTreeSet::new(),
            unresolved: Vec::new(),
            site_span: SiteSpan::Local,
            medium_id: None,
            story_id: None,
            payload: Payload::None,
        }
    }

    pub fn check(&self) -> Result<(), EventError> {
        match self.end {
            Some(end) if end < self.start => Err(EventError::EndBeforeStart(self.kind)),
            Some(_) if self.kind.is_instant() => Err(EventError::UnexpectedEnd(self.kind)),
            None if self.kind.needs_end() => Err(EventError::MissingEnd(self.kind)),
            _ => Ok(()),
        }
    }

    pub fn duration_minutes(&self) -> Option<f64> {
        self.end
            .map(|end| (end - self.start).num_seconds() as f64 / 60.0)
    }

    pub fn status(&self) -> Option<&StatusPayload> {
        match &self.payload {
            Payload::Status(s) => Some(s),
            _ => None,
        }
    }

    pub fn commit(&self) -> Option<&CommitPayload> {
        match &self.payload {
            Payload::Commit(c) => c.template.as_ref(),
            _ => None,
        }
    }

    pub fn meeting_name(&self) -> Option<&str> {
        match &self.payload {
            Payload::Meeting { name } => Some(name),
            _ => None,
        }
    }
}

/// Local if every resolved participant sits on the same site.
pub fn derive_site_span(team: &TeamSpec, participants: &BTreeSet<PersonId>) -> SiteSpan {
    let sites: BTreeSet<&SiteId> = participants.iter().filter_map(|p| team.site_of(p)).collect();
    if sites.len() > 1 {
        SiteSpan::CrossSite
    } else {
        SiteSpan::Local
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagnosticKind {
    MalformedLine,
    MalformedTemplate,
    UnknownHandle,
    UnknownName,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    /// 1-based line number in the raw input.
    pub line: usize,
    pub kind: DiagnosticKind,
    pub message: String,
}

impl core::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "line {}: {:?}: {}", self.line, self.kind, self.message)
    }
}

/// Outcome of one adapter run. Errors drop the line; warnings keep the event.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Parsed {
    pub events: Vec<CommEvent>,
    pub errors: Vec<Diagnostic>,
    pub warnings: Vec<Diagnostic>,
    /// Number of non-blank input lines.
    pub records: usize,
}

impl Parsed {
    fn error(&mut self, line: usize, message: impl Into<String>) {
        self.errors.push(Diagnostic {
            line,
            kind: DiagnosticKind::MalformedLine,
            message: message.into(),
        });
    }

    fn warn(&mut self, line: usize, kind: DiagnosticKind, message: impl Into<String>) {
        self.warnings.push(Diagnostic {
            line,
            kind,
            message: message.into(),
        });
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ParseOptions {
    /// Offset applied to timestamps written without a zone.
    pub naive_utc_offset_minutes: i32,
    pub status_medium: Option<MediumId>,
    pub call_medium: Option<MediumId>,
    pub chat_medium: Option<MediumId>,
    pub vcs_medium: Option<MediumId>,
}

/// Accepts RFC 3339 with zone, or `YYYY-MM-DD[T ]HH:MM[:SS]` in the given offset.
pub fn parse_timestamp(text: &str, naive_offset_minutes: i32) -> Option<Timestamp> {
    let text = text.trim();
    if let Ok(t) = DateTime::parse_from_rfc3339(text) {
        return Some(t.to_utc());
    }
    let naive = ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M"]
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(text, f).ok())?;
    FixedOffset::east_opt(naive_offset_minutes * 60)?
        .from_local_datetime(&naive)
        .single()
        .map(|t| t.to_utc())
}

fn numbered_lines(raw: &str) -> impl Iterator<Item = (usize, &str)> {
    raw.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty())
}

/// `US<digits>` with a case-insensitive prefix.
fn story_prefix(text: &str) -> Option<u32> {
    let text = text.trim();
    let prefix = text.get(..2)?;
    if !prefix.eq_ignore_ascii_case("us") {
        return None;
    }
    let digits = &text[2..];
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

fn name_pair<'a>(a: &'a str, b: &'a str) -> Option<[String; 2]> {
    let (a, b) = (a.trim(), b.trim());
    (!a.is_empty() && !b.is_empty()).then(|| [a.to_string(), b.to_string()])
}

/// Status grammar: `US<digits>: <name> & <name>`.
pub fn parse_status_text(raw: &str) -> Option<ParsedStatus> {
    let (head, names) = raw.trim().split_once(':')?;
    let story_id = story_prefix(head)?;
    let (a, b) = names.split_once('&')?;
    if b.contains('&') {
        return None;
    }
    Some(ParsedStatus {
        story_id,
        pair_names: name_pair(a, b)?,
    })
}

/// Commit template: `US<digits>|<name>,<name>|[done]<text>`.
pub fn parse_commit_template(message: &str) -> Option<CommitPayload> {
    let mut parts = message.trim().splitn(3, '|');
    let story_id = story_prefix(parts.next()?)?;
    let (a, b) = parts.next()?.split_once(',')?;
    if b.contains(',') {
        return None;
    }
    let pair_names = name_pair(a, b)?;
    let rest = parts.next()?.trim_start();
    let (completed_flag, text) = match rest.strip_prefix("[done]") {
        Some(text) => (true, text),
        None => (false, rest),
    };
    Some(CommitPayload {
        pair_names,
        story_id,
        completed_flag,
        message: text.trim().to_string(),
    })
}

fn resolve_names(
    team: &TeamSpec,
    names: &[String],
    line: usize,
    out: &mut Parsed,
) -> (BTreeSet<PersonId>, Vec<String>) {
    let mut resolved = BTreeSet::new();
    let mut unresolved = Vec::new();
    for name in names {
        match team.person_by_name(name) {
            Some(p) => {
                resolved.insert(p.id.clone());
            }
            None => {
                out.warn(line, DiagnosticKind::UnknownName, format!("`{name}` is not a team member"));
                unresolved.push(name.clone());
            }
        }
    }
    (resolved, unresolved)
}

/// Status-message log, one status change per line.
pub fn parse_status_log(raw: &str, team: &TeamSpec, opts: &ParseOptions) -> Parsed {
    let mut out = Parsed::default();
    for (line, text) in numbered_lines(raw) {
        out.records += 1;
        let text = text.trim();
        let Some((stamp, rest)) = text.split_once(char::is_whitespace) else {
            out.error(line, "expected `<timestamp> <workstation> \"<status>\"`");
            continue;
        };
        let Some(start) = parse_timestamp(stamp, opts.naive_utc_offset_minutes) else {
            out.error(line, format!("bad timestamp `{stamp}`"));
            continue;
        };
        let Some((workstation, quoted)) = rest.trim_start().split_once(char::is_whitespace) else {
            out.error(line, "missing status text");
            continue;
        };
        let quoted = quoted.trim();
        if quoted.len() < 2 || !quoted.starts_with('"') || !quoted.ends_with('"') {
            out.error(line, "status text must be double-quoted");
            continue;
        }
        let status = &quoted[1..quoted.len() - 1];
        let parsed = parse_status_text(status);

        let mut event = CommEvent::new(CommKind::StatusChange, start);
        if let Some(p) = &parsed {
            let (resolved, unresolved) = resolve_names(team, &p.pair_names, line, &mut out);
            event.participants = resolved;
            event.unresolved = unresolved;
            event.story_id = Some(p.story_id);
        }
        event.site_span = derive_site_span(team, &event.participants);
        event.medium_id = opts.status_medium.clone();
        event.payload = Payload::Status(StatusPayload {
            workstation: workstation.into(),
            raw: status.to_string(),
            parsed,
        });
        out.events.push(event);
    }
    out
}

/// Version-control history export, one commit per line.
pub fn parse_vcs_log(raw: &str, team: &TeamSpec, opts: &ParseOptions) -> Parsed {
    let mut out = Parsed::default();
    for (line, text) in numbered_lines(raw) {
        out.records += 1;
        let fields: Vec<&str> = text.splitn(4, '\t').collect();
        let [revision, stamp, author, message] = fields[..] else {
            out.error(line, "expected `<revision>\\t<timestamp>\\t<author>\\t<message>`");
            continue;
        };
        let Some(start) = parse_timestamp(stamp, opts.naive_utc_offset_minutes) else {
            out.error(line, format!("bad timestamp `{stamp}`"));
            continue;
        };
        let template = parse_commit_template(message);
        let mut event = CommEvent::new(CommKind::Commit, start);
        match &template {
            Some(t) => {
                let (resolved, unresolved) = resolve_names(team, &t.pair_names, line, &mut out);
                event.participants = resolved;
                event.unresolved = unresolved;
                event.story_id = Some(t.story_id);
            }
            None => {
                out.warn(
                    line,
                    DiagnosticKind::MalformedTemplate,
                    format!("revision {revision}: message does not follow `US<id>|<name>,<name>|[done]<text>`"),
                );
                if let Some(p) = team.person_by_name(author).or_else(|| team.person_by_handle(author)) {
                    event.participants.insert(p.id.clone());
                }
            }
        }
        event.site_span = derive_site_span(team, &event.participants);
        event.medium_id = opts.vcs_medium.clone();
        event.payload = Payload::Commit(CommitRecord {
            revision: revision.trim().to_string(),
            author: author.trim().to_string(),
            message: message.trim().to_string(),
            template,
        });
        out.events.push(event);
    }
    out
}

/// Messaging-tool export. Records with an end are calls; records without
/// one are chat messages.
pub fn parse_call_log(raw: &str, team: &TeamSpec, opts: &ParseOptions) -> Parsed {
    let mut out = Parsed::default();
    for (line, text) in numbered_lines(raw) {
        out.records += 1;
        let fields: Vec<&str> = text.split('\t').collect();
        let [start, end, handles] = fields[..] else {
            out.error(line, "expected `<start>\\t<end|->\\t<handles>`");
            continue;
        };
        let Some(start) = parse_timestamp(start, opts.naive_utc_offset_minutes) else {
            out.error(line, format!("bad start timestamp `{start}`"));
            continue;
        };
        let end = match end.trim() {
            "" | "-" => None,
            e => match parse_timestamp(e, opts.naive_utc_offset_minutes) {
                Some(e) if e >= start => Some(e),
                Some(_) => {
                    out.error(line, "call ends before it starts");
                    continue;
                }
                None => {
                    out.error(line, format!("bad end timestamp `{e}`"));
                    continue;
                }
            },
        };
        let handles: Vec<&str> = handles.split(',').map(str::trim).filter(|h| !h.is_empty()).collect();
        if handles.is_empty() {
            out.error(line, "no participants");
            continue;
        }

        let kind = if end.is_some() { CommKind::Call } else { CommKind::Chat };
        let mut event = CommEvent::new(kind, start);
        event.end = end;
        for handle in handles {
            match team.person_by_handle(handle) {
                Some(p) => {
                    event.participants.insert(p.id.clone());
                }
                None => {
                    out.warn(line, DiagnosticKind::UnknownHandle, format!("handle `{handle}` is not registered"));
                    event.unresolved.push(handle.to_string());
                }
            }
        }
        event.site_span = derive_site_span(team, &event.participants);
        if kind == CommKind::Call {
            event.medium_id = opts.call_medium.clone();
        } else {
            event.medium_id = opts.chat_medium.clone();
            event.payload = Payload::Chat { messages: 1 };
        }
        out.events.push(event);
    }
    out
}

/// Single start-ordered stream. Equal starts keep stream order, then input
/// order. Nothing is deduplicated.
pub fn merge_timeline(streams: Vec<Vec<CommEvent>>) -> Vec<CommEvent> {
    let total = streams.iter().map(Vec::len).sum();
    let mut queues: Vec<alloc::collections::VecDeque<CommEvent>> = streams
        .into_iter()
        .map(|mut s| {
            s.sort_by_key(|e| e.start);
            s.into()
        })
        .collect();
    let mut merged = Vec::with_capacity(total);
    loop {
        let next = queues
            .iter()
            .enumerate()
            .filter_map(|(i, q)| q.front().map(|e| (e.start, i)))
            .min();
        let Some((_, i)) = next else { break };
        merged.extend(queues[i].pop_front());
    }
    merged
}

/// Folds chat messages between the same participants into one chat event
/// per burst. A gap of more than `gap_minutes` between consecutive messages
/// starts a new burst. Other events pass through unchanged. Input must be
/// start-ordered; output stays start-ordered.
pub fn coalesce_chat_bursts(timeline: Vec<CommEvent>, gap_minutes: i64) -> Vec<CommEvent> {
    let gap = chrono::Duration::minutes(gap_minutes);
    let mut out: Vec<CommEvent> = Vec::with_capacity(timeline.len());
    // (index into out, last message time) of the open burst per participant set
    let mut open: Vec<(usize, Timestamp)> = Vec::new();
    for event in timeline {
        if event.kind != CommKind::Chat {
            out.push(event);
            continue;
        }
        let burst = open.iter_mut().find(|(i, _)| {
            let o = &out[*i];
            o.participants == event.participants && o.unresolved == event.unresolved
        });
        match burst {
            Some((i, last)) if event.start - *last <= gap => {
                *last = event.start;
                if let Payload::Chat { messages } = &mut out[*i].payload {
                    *messages += match event.payload {
                        Payload::Chat { messages } => messages,
                        _ => 1,
                    };
                }
            }
            Some(slot) => {
                *slot = (out.len(), event.start);
                out.push(event);
            }
            None => {
                open.push((out.len(), event.start));
                out.push(event);
            }
        }
    }
    out
}
