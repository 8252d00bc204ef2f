//! The batch pipeline: validate, plan, ingest, analyze, report.
//!
//! Each stage is a function over in-memory values so the command line can
//! run stages one at a time over files or all at once with identical output.

use std::path::Path;

use flowkit_core::conformance::{
    analyze_acceptance, analyze_scheduled, analyze_status_update, update_current_map, validate_template, Analysis,
    AnalyzerKind, ConformanceError, ConformanceTemplate,
};
use flowkit_core::flow_model::{has_errors, Issue, IssueCode};
use flowkit_core::ingest::{coalesce_chat_bursts, merge_timeline, CommEvent, Parsed};
use flowkit_core::map_builder::{assign_missing_media, build_activity_maps, build_target_map, validate_plan, TeamSpec};
use flowkit_core::render::{chart_svg, render_report, to_graph_description, ReportDocument};
use flowkit_core::report::{
    communication_timeline, compliance_chart, media_usage_duration, media_usage_frequency, ChartModel,
};
use flowkit_core::strategy::{CommunicationStrategy, EventKind, MediumAssignment, Trigger};
use flowkit_core::{ActivityId, FlowMap, Timestamp};
use log::{debug, info, warn};
use thiserror::Error;

use crate::events::{parse_source, EventSource, SourceKind};
use crate::files::{self, FileError, StrategyFile};

/// Activity id of the template that checks every scheduled activity at once.
pub const SCHEDULED_MEETINGS: &str = "scheduled-meetings";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    File(#[from] FileError),
    #[error("team or strategy does not validate ({} issue(s))", .0.len())]
    Invalid(Vec<Issue>),
    #[error(transparent)]
    Conformance(#[from] ConformanceError),
}

/// A loaded team and strategy file with every activity assigned a medium.
#[derive(Debug, Clone)]
pub struct Project {
    pub team: TeamSpec,
    pub file: StrategyFile,
    pub strategy: CommunicationStrategy,
    /// Assignments chosen automatically because the file left them out.
    pub chosen: Vec<MediumAssignment>,
    pub templates: Vec<ConformanceTemplate>,
    assignment_issue: Option<Issue>,
}

impl Project {
    pub fn new(team: TeamSpec, file: StrategyFile) -> Self {
        let mut strategy = file.strategy();
        let (chosen, assignment_issue) = match assign_missing_media(&team, &mut strategy) {
            Ok(chosen) => (chosen, None),
            Err(e) => (
                Vec::new(),
                Some(Issue::error(IssueCode::UnassignedActivity, "assignments", e.to_string())),
            ),
        };
        for a in &chosen {
            info!("activity `{}` assigned richest feasible medium `{}`", a.activity_id, a.medium_id);
        }
        let templates = if file.templates.is_empty() {
            default_templates(&strategy)
        } else {
            file.templates.clone()
        };
        Self {
            team,
            file,
            strategy,
            chosen,
            templates,
            assignment_issue,
        }
    }

    pub fn load(team: &Path, strategy: &Path, config: Option<&Path>) -> Result<Self, FileError> {
        let team = files::load_team(team)?;
        let mut file = files::load_strategy(strategy)?;
        if let Some(path) = config {
            let config = files::load_config(path)?;
            if let Some(analysis) = config.analysis {
                file.analysis = analysis;
            }
            if let Some(ingest) = config.ingest {
                file.ingest = ingest;
            }
        }
        Ok(Self::new(team, file))
    }

    /// Every issue with the team, the strategy, the templates and the
    /// analysis settings. Warnings included.
    pub fn validate(&self) -> Vec<Issue> {
        let mut issues = validate_plan(&self.team, &self.strategy);
        issues.extend(self.assignment_issue.clone());
        for t in &self.templates {
            issues.extend(validate_template(t));
        }
        if let Err(e) = self.file.analysis.check() {
            issues.push(Issue::error(IssueCode::InvalidConfig, "analysis", e.to_string()));
        }
        if self.file.calendar.days == 0 {
            issues.push(Issue::error(IssueCode::InvalidConfig, "calendar", "calendar has no days"));
        }
        issues
    }

    fn checked(&self) -> Result<(), PipelineError> {
        let issues = self.validate();
        if has_errors(&issues) {
            Err(PipelineError::Invalid(issues))
        } else {
            Ok(())
        }
    }
}

/// Templates implied by the strategy: status-change and story-completed
/// activities get the status and acceptance analyzers, and all scheduled
/// activities share one schedule template.
pub fn default_templates(strategy: &CommunicationStrategy) -> Vec<ConformanceTemplate> {
    let mut out = Vec::new();
    for a in &strategy.activities {
        match a.trigger {
            Trigger::EventDriven {
                event_kind: EventKind::StatusChange,
            } => out.push(AnalyzerKind::StatusUpdate.template(a.id.clone())),
            Trigger::EventDriven {
                event_kind: EventKind::StoryCompleted,
            } => out.push(AnalyzerKind::AcceptanceTest.template(a.id.clone())),
            _ => {}
        }
    }
    if strategy.activities.iter().any(|a| !a.trigger.sessions().is_empty()) {
        out.push(AnalyzerKind::Scheduled.template(ActivityId::from(SCHEDULED_MEETINGS)));
    }
    out
}

pub struct Plan {
    pub target: FlowMap,
    pub activities: Vec<FlowMap>,
}

pub fn plan(project: &Project) -> Result<Plan, PipelineError> {
    project.checked()?;
    let invalid = |e: flowkit_core::map_builder::MapBuildError| match e {
        flowkit_core::map_builder::MapBuildError::InvalidInput(issues) => PipelineError::Invalid(issues),
    };
    let target = build_target_map(&project.team, &project.strategy).map_err(invalid)?;
    let activities = build_activity_maps(&project.team, &project.strategy).map_err(invalid)?;
    Ok(Plan { target, activities })
}

/// What one source contributed.
#[derive(Debug, Clone)]
pub struct SourceSummary {
    pub source: EventSource,
    pub parsed: Parsed,
}

pub struct Ingested {
    pub timeline: Vec<CommEvent>,
    /// Parse results per source, events included, before chat bursts are
    /// folded.
    pub sources: Vec<SourceSummary>,
}

/// Parses every source and merges them into one timeline. Chat messages
/// from messenger logs are folded into bursts; normalized event files are
/// taken as they are.
pub fn ingest(project: &Project, sources: &[EventSource]) -> Result<Ingested, PipelineError> {
    let opts = project.file.ingest.parse_options(&project.file.calendar);
    let mut streams = Vec::new();
    let mut summaries = Vec::new();
    for source in sources {
        let raw = files::read_text(&source.path)?;
        let parsed = parse_source(source.kind, &raw, &project.team, &opts);
        debug!(
            "{source}: {} records, {} events, {} errors, {} warnings",
            parsed.records,
            parsed.events.len(),
            parsed.errors.len(),
            parsed.warnings.len()
        );
        let mut events = parsed.events.clone();
        if source.kind == SourceKind::Calls {
            events = coalesce_chat_bursts(merge_timeline(vec![events]), project.file.ingest.chat_gap_minutes);
        }
        streams.push(events);
        summaries.push(SourceSummary {
            source: source.clone(),
            parsed,
        });
    }
    Ok(Ingested {
        timeline: merge_timeline(streams),
        sources: summaries,
    })
}

/// Runs every template's analyzer over the timeline.
pub fn analyze(project: &Project, timeline: &[CommEvent]) -> Result<Vec<Analysis>, PipelineError> {
    project.checked()?;
    let calendar = &project.file.calendar;
    let config = &project.file.analysis;
    let mut out = Vec::new();
    for t in &project.templates {
        let analysis = match t.analyzer {
            AnalyzerKind::StatusUpdate => {
                analyze_status_update(&t.activity_id, timeline, &project.team, calendar, config)?
            }
            AnalyzerKind::AcceptanceTest => analyze_acceptance(&t.activity_id, timeline, calendar, config),
            AnalyzerKind::Scheduled => {
                let scope = scheduled_scope(&project.strategy, &t.activity_id);
                analyze_scheduled(&t.activity_id, timeline, &scope, calendar, config)
            }
        };
        out.push(analysis);
    }
    Ok(out)
}

/// The named scheduled activity alone, or every activity when the template
/// does not name one.
fn scheduled_scope(strategy: &CommunicationStrategy, id: &ActivityId) -> CommunicationStrategy {
    match strategy.activity(id) {
        Some(a) => CommunicationStrategy {
            activities: vec![a.clone()],
            ..strategy.clone()
        },
        None => strategy.clone(),
    }
}

pub struct Report {
    pub html: String,
    /// (file stem, SVG text) per chart.
    pub charts: Vec<(String, String)>,
    pub current_map: FlowMap,
}

/// Default instant for the current map: close of the last project day.
pub fn default_as_of(project: &Project) -> Timestamp {
    let c = &project.file.calendar;
    c.instant(i64::from(c.days), project.file.analysis.workday_end)
}

pub fn report(
    project: &Project,
    timeline: &[CommEvent],
    analyses: &[Analysis],
    as_of: Option<Timestamp>,
) -> Result<Report, PipelineError> {
    let plan = plan(project)?;
    let as_of = as_of.unwrap_or_else(|| default_as_of(project));
    let current = update_current_map(&plan.target, timeline, &project.team, as_of);
    let map_text = match to_graph_description(&current) {
        Ok(text) => text,
        Err(e) => {
            warn!("current map at {as_of} does not render ({e}); showing the target map");
            to_graph_description(&plan.target).unwrap_or_default()
        }
    };

    let calendar = &project.file.calendar;
    let catalog = &project.strategy.catalog;
    let mut charts: Vec<(String, ChartModel)> = vec![
        ("media-frequency".into(), media_usage_frequency(timeline, catalog)),
        (
            "media-duration".into(),
            media_usage_duration(
                timeline,
                catalog,
                project.team.developer_count(),
                calendar.days as usize,
            ),
        ),
        ("timeline".into(), communication_timeline(timeline, calendar)),
    ];
    let shown = analyses
        .iter()
        .find(|a| a.result.analyzer == AnalyzerKind::StatusUpdate)
        .or(analyses.first());
    if let Some(a) = shown {
        let name = project
            .strategy
            .activity(&a.result.activity_id)
            .map(|x| x.name.clone())
            .unwrap_or_else(|| a.result.activity_id.to_string());
        charts.push((
            format!("compliance-{}", a.result.activity_id),
            compliance_chart(&a.result, &format!("Conformance of \"{name}\"")),
        ));
    }

    let models: Vec<ChartModel> = charts.iter().map(|(_, c)| c.clone()).collect();
    let title = format!(
        "Communication report {} to {}",
        calendar.start,
        calendar.date_of_day(i64::from(calendar.days))
    );
    let html = render_report(&ReportDocument {
        title: &title,
        map_text: &map_text,
        persons: &current.persons,
        charts: &models,
        analyses,
    });
    Ok(Report {
        html,
        charts: charts.into_iter().map(|(name, c)| (name, chart_svg(&c))).collect(),
        current_map: current,
    })
}
