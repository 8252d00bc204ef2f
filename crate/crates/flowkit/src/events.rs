//! Event sources named on the command line and their parsers.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use flowkit_core::ingest::{
    parse_call_log, parse_status_log, parse_vcs_log, CommEvent, Diagnostic, DiagnosticKind, ParseOptions, Parsed,
};
use flowkit_core::map_builder::TeamSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum SourceKind {
    /// Status-message log: `<timestamp> <workstation> "<text>"`.
    Status,
    /// Version-control log, tab separated: revision, timestamp, author, message.
    Vcs,
    /// Messenger call and chat log, tab separated: start, end or `-`, handles.
    Calls,
    /// Normalized events, one JSON object per line.
    Jsonl,
}

impl SourceKind {
    pub const ALL: [SourceKind; 4] = [SourceKind::Status, SourceKind::Vcs, SourceKind::Calls, SourceKind::Jsonl];

    pub fn as_str(self) -> &'static str {
        match self {
            SourceKind::Status => "status",
            SourceKind::Vcs => "vcs",
            SourceKind::Calls => "calls",
            SourceKind::Jsonl => "jsonl",
        }
    }

    /// Guesses the kind from a file extension.
    pub fn infer(path: &Path) -> Option<Self> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "jsonl" | "ndjson" | "json" => Some(SourceKind::Jsonl),
            "status" => Some(SourceKind::Status),
            "svnlog" | "gitlog" | "vcs" => Some(SourceKind::Vcs),
            "calls" | "skype" => Some(SourceKind::Calls),
            _ => None,
        }
    }
}

impl FromStr for SourceKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown event source kind `{s}`"))
    }
}

/// `kind:path`, or a bare path whose extension tells the kind.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventSource {
    pub kind: SourceKind,
    pub path: PathBuf,
}

impl FromStr for EventSource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Some((prefix, rest)) = s.split_once(':') {
            if let Ok(kind) = prefix.parse() {
                return Ok(Self {
                    kind,
                    path: PathBuf::from(rest),
                });
            }
        }
        let path = PathBuf::from(s);
        match SourceKind::infer(&path) {
            Some(kind) => Ok(Self { kind, path }),
            None => Err(format!(
                "cannot tell the kind of `{s}`; write it as kind:path with kind one of status, vcs, calls, jsonl"
            )),
        }
    }
}

impl fmt::Display for EventSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.kind.as_str(), self.path.display())
    }
}

/// Reads normalized events. A line that does not decode or fails the
/// event checks is reported and skipped.
pub fn parse_jsonl(raw: &str) -> Parsed {
    let mut out = Parsed::default();
    for (k, line) in raw.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        out.records += 1;
        let decoded = serde_json::from_str::<CommEvent>(line)
            .map_err(|e| e.to_string())
            .and_then(|e| e.check().map(|_| e).map_err(|e| e.to_string()));
        match decoded {
            Ok(event) => out.events.push(event),
            Err(message) => out.errors.push(Diagnostic {
                line: k + 1,
                kind: DiagnosticKind::MalformedLine,
                message,
            }),
        }
    }
    out
}

pub fn parse_source(kind: SourceKind, raw: &str, team: &TeamSpec, opts: &ParseOptions) -> Parsed {
    match kind {
        SourceKind::Status => parse_status_log(raw, team, opts),
        SourceKind::Vcs => parse_vcs_log(raw, team, opts),
        SourceKind::Calls => parse_call_log(raw, team, opts),
        SourceKind::Jsonl => parse_jsonl(raw),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn explicit_and_inferred_kinds() {
        let s: EventSource = "status:logs/a.txt".parse().unwrap();
        assert_eq!(s.kind, SourceKind::Status);
        assert_eq!(s.path, PathBuf::from("logs/a.txt"));
        let s: EventSource = "logs/week.svnlog".parse().unwrap();
        assert_eq!(s.kind, SourceKind::Vcs);
        let s: EventSource = "C:/x.jsonl".parse().unwrap();
        assert_eq!(s.kind, SourceKind::Jsonl);
        assert!("notes.txt".parse::<EventSource>().is_err());
    }

    #[test]
    fn jsonl_reports_bad_lines() {
        let good = r#"{"kind":"chat","start":"2010-08-23T09:00:00Z","site_span":"local"}"#;
        let ended = r#"{"kind":"chat","start":"2010-08-23T09:00:00Z","end":"2010-08-23T09:05:00Z","site_span":"local"}"#;
        let parsed = parse_jsonl(&format!("{good}\n\nnot json\n{ended}\n"));
        assert_eq!(parsed.records, 3);
        assert_eq!(parsed.events.len(), 1);
        assert_eq!(parsed.errors.iter().map(|d| d.line).collect::<Vec<_>>(), [3, 4]);
    }
}
