//! Team, strategy and configuration files (TOML), maps and analyses (JSON),
//! timelines (JSON lines).

use std::fs;
use std::path::{Path, PathBuf};

use flowkit_core::conformance::{AnalysisConfig, ConformanceTemplate};
use flowkit_core::ingest::{CommEvent, ParseOptions};
use flowkit_core::map_builder::TeamSpec;
use flowkit_core::strategy::{CommunicationActivity, CommunicationStrategy, Medium, MediumAssignment};
use flowkit_core::{Calendar, FlowMap, MediumId};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FileError {
    #[error("cannot read {}: {source}", path.display())]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {}: {source}", path.display())]
    Write { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    Toml { path: PathBuf, source: toml::de::Error },
    #[error("{}: {source}", path.display())]
    Json { path: PathBuf, source: serde_json::Error },
}

/// How raw logs are normalized.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct IngestSettings {
    pub status_medium: Option<MediumId>,
    pub call_medium: Option<MediumId>,
    pub chat_medium: Option<MediumId>,
    pub vcs_medium: Option<MediumId>,
    /// Chat messages closer together than this form one burst.
    pub chat_gap_minutes: i64,
}

impl Default for IngestSettings {
    fn default() -> Self {
        Self {
            status_medium: None,
            call_medium: None,
            chat_medium: None,
            vcs_medium: None,
            chat_gap_minutes: 15,
        }
    }
}

impl IngestSettings {
    pub fn parse_options(&self, calendar: &Calendar) -> ParseOptions {
        ParseOptions {
            naive_utc_offset_minutes: calendar.utc_offset_minutes,
            status_medium: self.status_medium.clone(),
            call_medium: self.call_medium.clone(),
            chat_medium: self.chat_medium.clone(),
            vcs_medium: self.vcs_medium.clone(),
        }
    }
}

/// The strategy file: the communication strategy plus the project calendar
/// and the settings used to ingest and analyze its logs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyFile {
    pub calendar: Calendar,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    #[serde(default)]
    pub ingest: IngestSettings,
    pub catalog: Vec<Medium>,
    pub activities: Vec<CommunicationActivity>,
    /// Activities left out here get the richest feasible medium.
    #[serde(default)]
    pub assignments: Vec<MediumAssignment>,
    #[serde(default)]
    pub templates: Vec<ConformanceTemplate>,
}

impl StrategyFile {
    pub fn strategy(&self) -> CommunicationStrategy {
        CommunicationStrategy {
            activities: self.activities.clone(),
            assignments: self.assignments.clone(),
            catalog: self.catalog.clone(),
        }
    }
}

/// Overrides for the strategy file's analysis and ingest sections.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConfigFile {
    pub analysis: Option<AnalysisConfig>,
    pub ingest: Option<IngestSettings>,
}

pub fn read_text(path: &Path) -> Result<String, FileError> {
    fs::read_to_string(path).map_err(|source| FileError::Read {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_text(path: &Path, text: &str) -> Result<(), FileError> {
    let failed = |source| FileError::Write {
        path: path.to_path_buf(),
        source,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(failed)?;
    }
    fs::write(path, text).map_err(failed)
}

fn read_toml<T: DeserializeOwned>(path: &Path) -> Result<T, FileError> {
    let text = read_text(path)?;
    toml::from_str(&text).map_err(|source| FileError::Toml {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, FileError> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|source| FileError::Json {
        path: path.to_path_buf(),
        source,
    })
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("model types serialize");
    text.push('\n');
    text
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), FileError> {
    write_text(path, &to_json(value))
}

pub fn load_team(path: &Path) -> Result<TeamSpec, FileError> {
    read_toml(path)
}

pub fn load_strategy(path: &Path) -> Result<StrategyFile, FileError> {
    read_toml(path)
}

pub fn load_config(path: &Path) -> Result<ConfigFile, FileError> {
    read_toml(path)
}

pub fn load_map(path: &Path) -> Result<FlowMap, FileError> {
    read_json(path)
}

/// One event per line.
pub fn timeline_to_jsonl(events: &[CommEvent]) -> String {
    let mut out = String::new();
    for e in events {
        out.push_str(&serde_json::to_string(e).expect("events serialize"));
        out.push('\n');
    }
    out
}
