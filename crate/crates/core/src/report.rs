//! Chart models aggregated from a timeline and from compliance results.
//!
//! Charts are plain data. Rendering to SVG happens in [`crate::render`].

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::conformance::ComplianceResult;
use crate::ingest::{CommEvent, CommKind, SiteSpan};
use crate::strategy::Medium;
use crate::Calendar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChartKind {
    BarFrequency,
    BarDuration,
    TimelineGantt,
    StackedCompliance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mark {
    Bar,
    /// A span from `value` to `end`.
    Range,
    /// An instant such as a chat message or commit.
    Instant,
    /// A status broadcast, drawn as a dashed tick.
    Status,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub label: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub categories: Vec<String>,
}

impl Axis {
    fn new(label: &str) -> Self {
        Self {
            label: label.to_string(),
            categories: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point {
    /// Category the point belongs to (bar or row).
    pub category: String,
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub label: String,
    pub mark: Mark,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub site_span: Option<SiteSpan>,
    /// Aggregate shown in the legend, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total: Option<f64>,
    pub points: Vec<Point>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartModel {
    pub kind: ChartKind,
    pub title: String,
    pub x_axis: Axis,
    pub y_axis: Axis,
    pub series: Vec<Series>,
}

impl ChartModel {
    pub fn point_count(&self) -> usize {
        self.series.iter().map(|s| s.points.len()).sum()
    }

    /// Value of a bar in the first series.
    pub fn bar(&self, category: &str) -> Option<f64> {
        self.series
            .first()?
            .points
            .iter()
            .find(|p| p.category == category)
            .map(|p| p.value)
    }
}

/// Medium id if the event has one, else its kind.
pub fn usage_key(event: &CommEvent) -> String {
    match &event.medium_id {
        Some(m) => m.as_str().to_string(),
        None => event.kind.as_str().to_string(),
    }
}

/// Catalog media first (by rank), then any other keys in sorted order.
fn ordered_keys<'a>(catalog: &[Medium], seen: impl Iterator<Item = &'a String>) -> Vec<String> {
    let mut media: Vec<&Medium> = catalog.iter().collect();
    media.sort_by(|a, b| (a.richness_rank, &a.id).cmp(&(b.richness_rank, &b.id)));
    let mut keys: Vec<String> = media.iter().map(|m| m.id.as_str().to_string()).collect();
    let mut extra: Vec<String> = seen.filter(|k| !keys.contains(k)).cloned().collect();
    extra.sort();
    extra.dedup();
    keys.extend(extra);
    keys
}

fn bar_chart(kind: ChartKind, title: &str, y_label: &str, label: &str, bars: Vec<(String, f64)>) -> ChartModel {
    let mut x_axis = Axis::new("medium");
    x_axis.categories = bars.iter().map(|(k, _)| k.clone()).collect();
    ChartModel {
        kind,
        title: title.to_string(),
        x_axis,
        y_axis: Axis::new(y_label),
        series: alloc::vec![Series {
            label: label.to_string(),
            mark: Mark::Bar,
            site_span: None,
            total: None,
            points: bars
                .into_iter()
                .map(|(category, value)| Point { category, value, end: None })
                .collect(),
        }],
    }
}

/// Number of events per medium (or per kind for events without a medium).
/// Every catalog medium gets a bar, even at zero.
pub fn media_usage_frequency(timeline: &[CommEvent], catalog: &[Medium]) -> ChartModel {
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    for e in timeline {
        *counts.entry(usage_key(e)).or_default() += 1;
    }
    let bars = ordered_keys(catalog, counts.keys())
        .into_iter()
        .map(|k| {
            let n = counts.get(&k).copied().unwrap_or(0);
            (k, n as f64)
        })
        .collect();
    bar_chart(ChartKind::BarFrequency, "Frequency of media usage", "events", "events", bars)
}

/// Whether an event contributes to the duration chart.
pub fn has_duration(event: &CommEvent) -> bool {
    !event.kind.is_instant() && event.end.is_some()
}

/// Minutes of communication per developer per day, per medium. Chats,
/// commits and status changes have no duration and are left out; media
/// without any timed event get no bar.
pub fn media_usage_duration(
    timeline: &[CommEvent],
    catalog: &[Medium],
    dev_count: usize,
    day_count: usize,
) -> ChartModel {
    // whole seconds, so the totals do not depend on event order
    let mut seconds: BTreeMap<String, i64> = BTreeMap::new();
    for e in timeline.iter().filter(|e| has_duration(e)) {
        let length = e.end.map_or(0, |end| (end - e.start).num_seconds());
        *seconds.entry(usage_key(e)).or_default() += length;
    }
    let divisor = (dev_count.max(1) * day_count.max(1)) as f64;
    let bars = ordered_keys(catalog, seconds.keys())
        .into_iter()
        .filter_map(|k| seconds.get(&k).map(|s| (k.clone(), *s as f64 / 60.0 / divisor)))
        .collect();
    bar_chart(
        ChartKind::BarDuration,
        "Durations of communication per developer",
        "minutes per developer per day",
        "minutes",
        bars,
    )
}

pub fn day_label(day: i64) -> String {
    format!("Day {}", day)
}

fn mark_of(event: &CommEvent) -> Mark {
    if event.kind == CommKind::StatusChange {
        Mark::Status
    } else if event.end.is_some() {
        Mark::Range
    } else {
        Mark::Instant
    }
}

/// One row per project day; every event becomes one element. Ranges run
/// from start to end in minutes since local midnight and are clipped at the
/// end of the day they start on.
pub fn communication_timeline(timeline: &[CommEvent], calendar: &Calendar) -> ChartModel {
    let mut days: Vec<i64> = calendar.day_numbers().map(i64::from).collect();
    for e in timeline {
        let d = calendar.day_index(e.start);
        if !days.contains(&d) {
            days.push(d);
        }
    }
    days.sort_unstable();

    let groups = [
        (Mark::Range, SiteSpan::Local, "local session"),
        (Mark::Range, SiteSpan::CrossSite, "cross-site session"),
        (Mark::Instant, SiteSpan::Local, "local message"),
        (Mark::Instant, SiteSpan::CrossSite, "cross-site message"),
        (Mark::Status, SiteSpan::Local, "status update"),
        (Mark::Status, SiteSpan::CrossSite, "cross-site status update"),
    ];
    let mut series: Vec<Series> = groups
        .iter()
        .map(|&(mark, span, label)| Series {
            label: label.to_string(),
            mark,
            site_span: Some(span),
            total: None,
            points: Vec::new(),
        })
        .collect();
    for e in timeline {
        let mark = mark_of(e);
        let slot = groups
            .iter()
            .position(|&(m, s, _)| m == mark && s == e.site_span)
            .expect("every mark and span has a series");
        let start = calendar.minute_of_day(e.start);
        let end = e.end.map(|end| {
            let same_day = calendar.day_index(end) == calendar.day_index(e.start);
            if same_day {
                calendar.minute_of_day(end)
            } else {
                24.0 * 60.0
            }
        });
        series[slot].points.push(Point {
            category: day_label(calendar.day_index(e.start)),
            value: start,
            end,
        });
    }
    let mut y_axis = Axis::new("day");
    y_axis.categories = days.into_iter().map(day_label).collect();
    ChartModel {
        kind: ChartKind::TimelineGantt,
        title: "Overview of communication".to_string(),
        x_axis: Axis::new("minutes since local midnight"),
        y_axis,
        series,
    }
}

/// Per-day stacked OK / temporal / qualitative shares; every stack sums
/// to 100. Series totals carry the overall percentages for the legend.
pub fn compliance_chart(result: &ComplianceResult, title: &str) -> ChartModel {
    let mut x_axis = Axis::new("day");
    x_axis.categories = result.per_day.iter().map(|d| day_label(d.day)).collect();
    let overall = result.percentages();
    let parts = [
        ("OK", overall.ok),
        ("temporal", overall.temporal),
        ("qualitative", overall.qualitative),
    ];
    let series = parts
        .iter()
        .enumerate()
        .map(|(k, &(label, total))| Series {
            label: label.to_string(),
            mark: Mark::Bar,
            site_span: None,
            total: Some(f64::from(total)),
            points: result
                .per_day
                .iter()
                .map(|d| {
                    let p = d.percentages();
                    let v = [p.ok, p.temporal, p.qualitative][k];
                    Point {
                        category: day_label(d.day),
                        value: f64::from(v),
                        end: None,
                    }
                })
                .collect(),
        })
        .collect();
    ChartModel {
        kind: ChartKind::StackedCompliance,
        title: title.to_string(),
        x_axis,
        y_axis: Axis::new("share of opportunities (%)"),
        series,
    }
}
