//! Command-line surface.
//!
//! Exit codes: 0 on success, 1 when the inputs have validation issues,
//! 2 on unreadable or unparseable files and usage errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use chrono::DateTime;
use clap::{Args, Parser, Subcommand};
use flowkit_core::conformance::Analysis;
use flowkit_core::flow_model::{has_errors, Issue};
use flowkit_core::ingest::parse_timestamp;
use flowkit_core::render::to_graph_description;
use flowkit_core::Timestamp;
use log::info;

use crate::events::EventSource;
use crate::files::{self, timeline_to_jsonl};
use crate::pipeline::{self, PipelineError, Project};

#[derive(Debug, Parser)]
#[command(name = "flowkit", version, about = "Plan and check communication in distributed teams")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct ProjectArgs {
    /// Team file (TOML)
    #[arg(long, value_name = "FILE")]
    pub team: Option<PathBuf>,
    /// Strategy file (TOML)
    #[arg(long, value_name = "FILE")]
    pub strategy: Option<PathBuf>,
    /// Overrides for the strategy's [analysis] and [ingest] sections (TOML)
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EventArgs {
    /// Event source as kind:path or a path with a known extension
    /// (kinds: status, vcs, calls, jsonl). Repeatable.
    #[arg(long = "events", value_name = "SOURCE", required = true)]
    pub events: Vec<EventSource>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a team and strategy for consistency
    Validate {
        /// Team and strategy files, as an alternative to the flags
        #[arg(value_name = "FILE", num_args = 0..=2)]
        files: Vec<PathBuf>,
        #[command(flatten)]
        project: ProjectArgs,
    },
    /// Build the target map and one map per activity
    Plan {
        #[arg(value_name = "FILE", num_args = 0..=2)]
        files: Vec<PathBuf>,
        #[command(flatten)]
        project: ProjectArgs,
        /// Output directory
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Normalize raw logs into a timeline of events (JSON lines)
    Ingest {
        #[command(flatten)]
        project: ProjectArgs,
        #[command(flatten)]
        events: EventArgs,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Check a timeline against the strategy's conformance templates
    Analyze {
        #[command(flatten)]
        project: ProjectArgs,
        #[command(flatten)]
        events: EventArgs,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Write the HTML report with charts, maps and violations
    Report {
        #[command(flatten)]
        project: ProjectArgs,
        #[command(flatten)]
        events: EventArgs,
        /// Reuse a previous `analyze` result instead of analyzing again
        #[arg(long, value_name = "FILE")]
        analysis: Option<PathBuf>,
        /// Instant of the current map (RFC 3339, or local time of the project)
        #[arg(long, value_name = "TIMESTAMP")]
        as_of: Option<String>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Print a map file as DOT graph text
    Render {
        /// Map file (JSON)
        #[arg(long, value_name = "FILE")]
        map: PathBuf,
        /// Write `<map name>.dot` into this directory instead of printing
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Failure that maps to exit code 1.
#[derive(Debug)]
struct Invalid;

impl std::fmt::Display for Invalid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("validation failed")
    }
}

impl std::error::Error for Invalid {}

fn print_issues(issues: &[Issue]) {
    for issue in issues {
        println!("{issue}");
    }
}

fn project_paths(files: &[PathBuf], args: &ProjectArgs) -> Result<(PathBuf, PathBuf)> {
    let team = args.team.clone().or_else(|| files.first().cloned());
    let strategy = args.strategy.clone().or_else(|| files.get(1).cloned());
    match (team, strategy) {
        (Some(t), Some(s)) => Ok((t, s)),
        _ => bail!("both a team file and a strategy file are needed (--team, --strategy)"),
    }
}

fn load_project(files: &[PathBuf], args: &ProjectArgs) -> Result<Project> {
    let (team, strategy) = project_paths(files, args)?;
    Ok(Project::load(&team, &strategy, args.config.as_deref())?)
}

/// Turns pipeline validation failures into printed issues and exit code 1.
fn lift<T>(result: Result<T, PipelineError>) -> Result<T> {
    match result {
        Ok(v) => Ok(v),
        Err(PipelineError::Invalid(issues)) => {
            print_issues(&issues);
            Err(Invalid.into())
        }
        Err(e) => Err(e.into()),
    }
}

fn parse_as_of(text: &str, project: &Project) -> Result<Timestamp> {
    parse_timestamp(text, project.file.calendar.utc_offset_minutes)
        .or_else(|| DateTime::parse_from_rfc3339(text).ok().map(|t| t.to_utc()))
        .with_context(|| format!("cannot read --as-of `{text}`"))
}

fn timeline(project: &Project, events: &EventArgs) -> Result<Vec<flowkit_core::ingest::CommEvent>> {
    let ingested = lift(pipeline::ingest(project, &events.events))?;
    for s in &ingested.sources {
        for d in s.parsed.errors.iter().chain(&s.parsed.warnings) {
            eprintln!("{}:{}: {:?}: {}", s.source.path.display(), d.line, d.kind, d.message);
        }
    }
    Ok(ingested.timeline)
}

fn write(path: &Path, text: &str) -> Result<()> {
    files::write_text(path, text)?;
    info!("wrote {}", path.display());
    Ok(())
}

fn run_command(command: Command) -> Result<()> {
    match command {
        Command::Validate { files, project } => {
            let project = load_project(&files, &project)?;
            let issues = project.validate();
            print_issues(&issues);
            if has_errors(&issues) {
                return Err(Invalid.into());
            }
            let warnings = issues.len();
            println!(
                "ok: {} sites, {} persons, {} activities, {} warning(s)",
                project.team.sites.len(),
                project.team.persons.len(),
                project.strategy.activities.len(),
                warnings
            );
        }
        Command::Plan { files, project, out } => {
            let project = load_project(&files, &project)?;
            print_issues(&project.validate());
            let plan = lift(pipeline::plan(&project))?;
            files::write_json(&out.join("target.json"), &plan.target)?;
            write(&out.join("target.dot"), &to_graph_description(&plan.target)?)?;
            for (activity, map) in project.strategy.activities.iter().zip(&plan.activities) {
                let stem = out.join("activities").join(activity.id.as_str());
                files::write_json(&stem.with_extension("json"), map)?;
                write(&stem.with_extension("dot"), &to_graph_description(map)?)?;
            }
            println!("planned target map and {} activity maps", plan.activities.len());
        }
        Command::Ingest { project, events, out } => {
            let project = load_project(&[], &project)?;
            let ingested = lift(pipeline::ingest(&project, &events.events))?;
            for s in &ingested.sources {
                for d in s.parsed.errors.iter().chain(&s.parsed.warnings) {
                    eprintln!("{}:{}: {:?}: {}", s.source.path.display(), d.line, d.kind, d.message);
                }
                println!(
                    "{}: {} records, {} events, {} errors, {} warnings",
                    s.source,
                    s.parsed.records,
                    s.parsed.events.len(),
                    s.parsed.errors.len(),
                    s.parsed.warnings.len()
                );
            }
            write(&out.join("timeline.jsonl"), &timeline_to_jsonl(&ingested.timeline))?;
            println!("timeline: {} events", ingested.timeline.len());
        }
        Command::Analyze { project, events, out } => {
            let project = load_project(&[], &project)?;
            let timeline = timeline(&project, &events)?;
            let analyses = lift(pipeline::analyze(&project, &timeline))?;
            files::write_json(&out.join("analysis.json"), &analyses)?;
            for a in &analyses {
                let r = &a.result;
                println!(
                    "{}: {}% ok, {}% temporal, {}% qualitative ({} opportunities{})",
                    r.activity_id,
                    r.compliance_pct,
                    r.temporal_pct,
                    r.qualitative_pct,
                    r.totals.total(),
                    if r.vacuous { ", vacuous" } else { "" }
                );
            }
        }
        Command::Report {
            project,
            events,
            analysis,
            as_of,
            out,
        } => {
            let project = load_project(&[], &project)?;
            let timeline = timeline(&project, &events)?;
            let analyses: Vec<Analysis> = match analysis {
                Some(path) => files::read_json(&path)?,
                None => lift(pipeline::analyze(&project, &timeline))?,
            };
            let as_of = as_of.map(|t| parse_as_of(&t, &project)).transpose()?;
            let report = lift(pipeline::report(&project, &timeline, &analyses, as_of))?;
            for (name, svg) in &report.charts {
                write(&out.join("charts").join(format!("{name}.svg")), svg)?;
            }
            write(&out.join("report.html"), &report.html)?;
            println!("wrote {}", out.join("report.html").display());
        }
        Command::Render { map, out } => {
            let flow_map = files::load_map(&map)?;
            let text = match to_graph_description(&flow_map) {
                Ok(text) => text,
                Err(flowkit_core::render::RenderError::InvalidMap(issues)) => {
                    print_issues(&issues);
                    return Err(Invalid.into());
                }
            };
            match out {
                Some(dir) => {
                    let stem = map.file_stem().and_then(|s| s.to_str()).unwrap_or("map");
                    write(&dir.join(format!("{stem}.dot")), &text)?;
                }
                None => print!("{text}"),
            }
        }
    }
    Ok(())
}

pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run_command(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<Invalid>() => {
            eprintln!("error: inputs do not validate");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
