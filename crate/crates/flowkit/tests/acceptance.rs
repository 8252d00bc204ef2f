//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Built with `harness = false`.

#[allow(dead_code, unused_imports)]
#[path = "../../core/tests/analyzer_oracles.rs"]
mod analyzer_oracles;
#[allow(dead_code, unused_imports)]
#[path = "../../core/tests/media_choice.rs"]
mod media_choice;
mod common;

use std::fs;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::*;
use flowkit::events::{parse_jsonl, EventSource};
use flowkit::files::timeline_to_jsonl;
use flowkit::pipeline::{self, Project};
use flowkit_core::conformance::{Analysis, AnalyzerKind, Subject, ViolationCategory};
use flowkit_core::flow_model::validate_map;
use flowkit_core::render::to_graph_description;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn project() -> Result<Project, String> {
    Project::load(&fixture("xpweek.team"), &fixture("xpweek.strategy"), None).map_err(|e| e.to_string())
}

fn sources() -> Vec<EventSource> {
    SOURCES
        .iter()
        .map(|s| fixture(s).display().to_string().parse().unwrap())
        .collect()
}

/// Loads, ingests and analyzes the fixtures; returns the analysis of the
/// given kind and the elapsed time.
fn analyze_fixture(kind: AnalyzerKind) -> Result<(Analysis, Duration), String> {
    let start = Instant::now();
    let project = project()?;
    let timeline = pipeline::ingest(&project, &sources()).map_err(|e| e.to_string())?.timeline;
    let analyses = pipeline::analyze(&project, &timeline).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let a = analyses
        .into_iter()
        .find(|a| a.result.analyzer == kind)
        .ok_or_else(|| format!("no {kind:?} analysis"))?;
    Ok((a, elapsed))
}

fn triple(a: &Analysis) -> (u32, u32, u32) {
    (a.result.compliance_pct, a.result.temporal_pct, a.result.qualitative_pct)
}

fn criterion_1() -> Outcome {
    let (a, elapsed) = analyze_fixture(AnalyzerKind::AcceptanceTest)?;
    ensure(a.result.totals.total() == 16, || format!("{} completed commits, want 16", a.result.totals.total()))?;
    ensure(triple(&a) == (88, 6, 6), || format!("compliance {:?}, want (88, 6, 6)", triple(&a)))?;
    let by = |c| a.violations.iter().filter(|v| v.category == c).count();
    ensure(by(ViolationCategory::Qualitative) == 1 && by(ViolationCategory::Temporal) == 1, || {
        format!("violations {:?}", a.violations)
    })?;
    ensure(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!("acceptance compliance (88, 6, 6) over 16 commits in {elapsed:.2?}"))
}

fn criterion_2() -> Outcome {
    let (a, elapsed) = analyze_fixture(AnalyzerKind::Scheduled)?;
    ensure(a.result.compliance_pct == 85, || format!("compliance {:?}, want 85", triple(&a)))?;
    let mut missed: Vec<(i64, String)> = a
        .violations
        .iter()
        .filter(|v| v.category == ViolationCategory::Qualitative)
        .map(|v| match &v.subject {
            Subject::Session(s) => (v.day, s.clone()),
            other => (v.day, format!("{other:?}")),
        })
        .collect();
    missed.sort();
    let want = vec![(5, "planning game".to_string()), (5, "stand-up".to_string())];
    ensure(missed == want, || format!("qualitative violations {missed:?}, want {want:?}"))?;
    ensure(a.result.temporal_pct == 0, || format!("compliance {:?}", triple(&a)))?;
    ensure(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "schedule compliance 85% over {} sessions, day-5 stand-up and planning game missing, in {elapsed:.2?}",
        a.result.totals.total()
    ))
}

fn criterion_3() -> Outcome {
    let (a, _) = analyze_fixture(AnalyzerKind::StatusUpdate)?;
    ensure(triple(&a) == (79, 8, 13), || format!("compliance {:?}, want (79, 8, 13)", triple(&a)))?;
    let day3 = a.result.day(3).ok_or("no day 3")?;
    ensure(day3.total() > 0 && day3.ok_count == day3.total(), || format!("day 3 {day3:?}"))?;
    Ok(format!("status compliance (79, 8, 13), day 3 at 100% ({} slots)", day3.total()))
}

fn criterion_4() -> Outcome {
    analyzer_oracles::check_partition(1000)?;
    Ok("ok + temporal + qualitative = opportunities on 1000 random status logs".into())
}

fn criterion_5() -> Outcome {
    analyzer_oracles::check_oracles(150)?;
    Ok("status, acceptance and schedule analyzers equal their oracles on 150 timelines each".into())
}

fn criterion_6() -> Outcome {
    media_choice::check_media_choice(500)?;
    Ok("choose_medium equals the oracle and removal is stable on 500 catalogs".into())
}

fn criterion_7() -> Outcome {
    let project = project()?;
    let target = pipeline::plan(&project).map_err(|e| e.to_string())?.target;
    let issues = validate_map(&target);
    ensure(issues.is_empty(), || format!("validate_map: {issues:?}"))?;
    let text = to_graph_description(&target).map_err(|e| e.to_string())?;
    let census = analyzer_oracles::common::dot::parse(&text)?;
    let count = |prefix: &str| census.nodes.keys().filter(|k| k.starts_with(prefix)).count();
    let got = (
        census.clusters.len(),
        count("person:"),
        count("pair:"),
        count("document:"),
    );
    ensure(got == (2, 11, 4, 2), || format!("(regions, persons, pairs, documents) = {got:?}"))?;
    ensure(
        (target.sites.len(), target.persons.len(), target.pairs.len(), target.documents.len()) == (2, 11, 4, 2),
        || "map store counts differ from the rendered ones".into(),
    )?;
    let golden = fs::read_to_string(golden_target()).map_err(|e| e.to_string())?;
    ensure(text == golden, || "target map text differs from tests/golden/target.dot".into())?;
    let again = to_graph_description(&pipeline::plan(&project).map_err(|e| e.to_string())?.target)
        .map_err(|e| e.to_string())?;
    ensure(again == text, || "second run differs".into())?;
    Ok("2 site regions, 11 persons, 4 pairs, 2 documents; valid; DOT equals the golden file".into())
}

fn criterion_8() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut args = vec!["report".to_string()];
    args.extend(project_args());
    args.extend(event_args());
    args.extend(["--out".into(), dir.path().display().to_string()]);
    let start = Instant::now();
    let o = flowkit(&args);
    let elapsed = start.elapsed();
    ensure(o.status.success(), || format!("exit {:?}: {}", o.status.code(), stderr(&o)))?;
    ensure(elapsed < Duration::from_secs(5), || format!("took {elapsed:?}"))?;
    let doc = fs::read_to_string(dir.path().join("report.html")).map_err(|e| e.to_string())?;
    html::check(&doc)?;
    let legend = html::cells(&doc, "ok-pct");
    let mut shown: Vec<&str> = legend.iter().map(String::as_str).collect();
    shown.sort();
    ensure(shown == ["79%", "85%", "88%"], || format!("legend shows {legend:?}"))?;
    Ok(format!("report in {elapsed:.2?}, well-formed HTML, legend {}", legend.join("/")))
}

fn criterion_9() -> Outcome {
    let project = project()?;
    let ingested = pipeline::ingest(&project, &sources()).map_err(|e| e.to_string())?;
    let mut totals = Vec::new();
    for s in &ingested.sources {
        let raw = fs::read_to_string(&s.source.path).map_err(|e| e.to_string())?;
        let lines = raw.lines().filter(|l| !l.trim().is_empty()).count();
        let p = &s.parsed;
        ensure(p.records == lines && lines == p.events.len() + p.errors.len(), || {
            format!(
                "{}: {lines} lines, {} records, {} events, {} errors",
                s.source,
                p.records,
                p.events.len(),
                p.errors.len()
            )
        })?;
        totals.push(format!("{}={}+{}", s.source.path.file_name().unwrap().to_string_lossy(), p.events.len(), p.errors.len()));
    }
    let jsonl = timeline_to_jsonl(&ingested.timeline);
    let reread = parse_jsonl(&jsonl);
    ensure(reread.errors.is_empty() && reread.events == ingested.timeline, || {
        format!("JSONL round trip: {} errors", reread.errors.len())
    })?;
    ensure(jsonl.lines().count() == ingested.timeline.len(), || "line count differs".into())?;
    Ok(format!("lines = events + errors ({}); {} events round-trip", totals.join(", "), reread.events.len()))
}

fn main() -> ExitCode {
    let criteria: [(u32, fn() -> Outcome); 9] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
    ];
    let mut failed = 0;
    for (n, check) in criteria {
        match check() {
            Ok(detail) => println!("criterion {n}: PASS  {detail}"),
            Err(why) => {
                failed += 1;
                println!("criterion {n}: FAIL  {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
