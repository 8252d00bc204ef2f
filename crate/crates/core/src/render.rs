//! Graph text for maps, SVG for charts, and the static HTML report.
//!
//! All output is byte-deterministic for identical input. Maps are emitted
//! in the DOT language, one cluster per site. Conventions: person stores
//! are ellipses, pair stores double ellipses, documents boxes; fluid flows
//! are dashed and solid flows are solid; pen width follows the flow's width
//! class; undirected flows have no arrowheads; cross-site flows are
//! labelled with the medium name.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;

use chrono::SecondsFormat;
use thiserror::Error;

use crate::conformance::{Analysis, Subject, ViolationCategory};
use crate::flow_model::{validate_map, Direction, Flow, FlowMap, InformationState, Issue, Person, StoreRef};
use crate::map_builder::flow_width;
use crate::report::{ChartKind, ChartModel, Mark};
use crate::ingest::SiteSpan;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RenderError {
    #[error("map is invalid ({} issue(s))", .0.len())]
    InvalidMap(Vec<Issue>),
}

/// Escapes text for a double-quoted DOT string.
pub fn dot_escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => {}
            c => out.push(c),
        }
    }
    out
}

/// Escapes text for HTML and XML content and attribute values.
pub fn html_escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            c => out.push(c),
        }
    }
    out
}

fn q(text: &str) -> String {
    format!("\"{}\"", dot_escape(text))
}

fn node_id(store: &StoreRef) -> String {
    q(&store.to_string())
}

fn flow_sort_key(flow: &Flow) -> (String, String, InformationState, Option<&str>, Option<&str>) {
    (
        flow.from.to_string(),
        flow.to.to_string(),
        flow.state,
        flow.medium_id.as_ref().map(|m| m.as_str()),
        flow.label.as_deref(),
    )
}

/// DOT text for a map. Refuses maps with validation errors; warnings are
/// tolerated.
pub fn to_graph_description(map: &FlowMap) -> Result<String, RenderError> {
    let errors: Vec<Issue> = validate_map(map).into_iter().filter(|i| i.is_error()).collect();
    if !errors.is_empty() {
        return Err(RenderError::InvalidMap(errors));
    }
    let mut out = String::new();
    let title = map.title.clone().unwrap_or_else(|| {
        match map.kind {
            crate::flow_model::MapKind::OverallTarget => "Target FLOW map",
            crate::flow_model::MapKind::ActivitySpecific => "Activity FLOW map",
            crate::flow_model::MapKind::Current => "Current FLOW map",
        }
        .to_string()
    });
    out.push_str("digraph flowmap {\n");
    let _ = writeln!(out, "  graph [label={}, labelloc=t, rankdir=LR];", q(&title));
    out.push_str("  node [fontname=\"Helvetica\"];\n");
    out.push_str("  edge [fontname=\"Helvetica\", fontsize=10];\n");

    let mut sites: Vec<_> = map.sites.iter().collect();
    sites.sort_by(|a, b| a.id.cmp(&b.id));
    for (k, site) in sites.iter().enumerate() {
        let _ = writeln!(out, "  subgraph cluster_{} {{", k);
        let _ = writeln!(out, "    label={};", q(&site.name));

        let mut persons: Vec<&Person> = map.persons.iter().filter(|p| p.site_id == site.id).collect();
        persons.sort_by(|a, b| a.id.cmp(&b.id));
        for p in persons {
            let _ = writeln!(
                out,
                "    {} [label={}, shape=ellipse];",
                node_id(&StoreRef::Person(p.id.clone())),
                q(&p.name)
            );
        }

        let mut pairs: Vec<_> = map
            .pairs
            .iter()
            .filter(|p| map.store_site(&StoreRef::Pair(p.id.clone())) == Some(&site.id))
            .collect();
        pairs.sort_by(|a, b| a.id.cmp(&b.id));
        for pair in pairs {
            let name = |id: &crate::PersonId| {
                map.person(id)
                    .map(|p| p.name.clone())
                    .unwrap_or_else(|| id.as_str().to_string())
            };
            let mut label = format!("{} & {}", name(&pair.member_ids[0]), name(&pair.member_ids[1]));
            if let Some(item) = &pair.current_work_item {
                let _ = write!(label, "\nUS{}", item.story_id);
            }
            let _ = writeln!(
                out,
                "    {} [label={}, shape=ellipse, peripheries=2];",
                node_id(&StoreRef::Pair(pair.id.clone())),
                q(&label)
            );
        }

        let mut documents: Vec<_> = map
            .documents
            .iter()
            .filter(|d| d.responsible_site_id == site.id)
            .collect();
        documents.sort_by(|a, b| a.id.cmp(&b.id));
        for d in documents {
            let _ = writeln!(
                out,
                "    {} [label={}, shape=box];",
                node_id(&StoreRef::Document(d.id.clone())),
                q(&d.name)
            );
        }
        out.push_str("  }\n");
    }

    let mut flows: Vec<&Flow> = map.flows.iter().collect();
    flows.sort_by(|a, b| flow_sort_key(a).cmp(&flow_sort_key(b)));
    for flow in flows {
        let medium = flow.medium_id.as_ref().and_then(|m| map.medium(m));
        let rank = medium.map(|m| m.richness_rank).unwrap_or(u32::MAX);
        let mut attrs: Vec<String> = Vec::new();
        attrs.push(
            match flow.state {
                InformationState::Fluid => "style=dashed",
                InformationState::Solid => "style=solid",
            }
            .to_string(),
        );
        attrs.push(format!("penwidth={}", flow_width(flow.strength, rank).pen_width()));
        if flow.direction == Direction::BothWays {
            attrs.push("dir=none".to_string());
        }
        if map.is_cross_site(flow) == Some(true) {
            let name = match (medium, &flow.medium_id) {
                (Some(m), _) => m.name.clone(),
                (None, Some(id)) => id.as_str().to_string(),
                (None, None) => String::new(),
            };
            if !name.is_empty() {
                attrs.push(format!("label={}", q(&name)));
            }
        }
        if let Some(label) = &flow.label {
            attrs.push(format!("tooltip={}", q(label)));
        }
        let _ = writeln!(
            out,
            "  {} -> {} [{}];",
            node_id(&flow.from),
            node_id(&flow.to),
            attrs.join(", ")
        );
    }
    out.push_str("}\n");
    Ok(out)
}

pub const CHART_WIDTH: u32 = 800;
pub const CHART_HEIGHT: u32 = 400;

const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 70.0;

const OK_COLOR: &str = "#4c9a2a";
const TEMPORAL_COLOR: &str = "#f0a030";
const QUALITATIVE_COLOR: &str = "#c8372d";
const BAR_COLOR: &str = "#3b6ea8";
const LOCAL_COLOR: &str = "#3b6ea8";
const CROSS_COLOR: &str = "#c8372d";

fn plot_width() -> f64 {
    f64::from(CHART_WIDTH) - LEFT - RIGHT
}

fn plot_height() -> f64 {
    f64::from(CHART_HEIGHT) - TOP - BOTTOM
}

/// A round axis maximum at or above `max`.
fn nice_max(max: f64) -> f64 {
    if max.is_nan() || max <= 0.0 {
        return 1.0;
    }
    let mut step = 1.0;
    while step * 10.0 <= max {
        step *= 10.0;
    }
    while step > max {
        step /= 10.0;
    }
    for m in [1.0, 2.0, 2.5, 5.0, 10.0] {
        if step * m >= max {
            return step * m;
        }
    }
    step * 10.0
}

fn num(value: f64) -> String {
    let text = format!("{:.1}", value);
    match text.strip_suffix(".0") {
        Some(whole) => whole.to_string(),
        None => text,
    }
}

fn svg_open(out: &mut String, chart: &ChartModel) {
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\" font-family=\"Helvetica, Arial, sans-serif\" font-size=\"12\">",
        w = CHART_WIDTH,
        h = CHART_HEIGHT
    );
    let _ = writeln!(out, "<title>{}</title>", html_escape(&chart.title));
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"20\" text-anchor=\"middle\" font-size=\"15\">{}</text>",
        CHART_WIDTH / 2,
        html_escape(&chart.title)
    );
}

fn axes(out: &mut String, chart: &ChartModel) {
    let x0 = LEFT;
    let y0 = TOP + plot_height();
    let _ = writeln!(
        out,
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#000\"/>",
        num(x0),
        num(TOP),
        num(x0),
        num(y0)
    );
    let _ = writeln!(
        out,
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#000\"/>",
        num(x0),
        num(y0),
        num(x0 + plot_width()),
        num(y0)
    );
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
        num(LEFT + plot_width() / 2.0),
        CHART_HEIGHT - 8,
        html_escape(&chart.x_axis.label)
    );
    let _ = writeln!(
        out,
        "<text x=\"14\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 14 {})\">{}</text>",
        num(TOP + plot_height() / 2.0),
        num(TOP + plot_height() / 2.0),
        html_escape(&chart.y_axis.label)
    );
}

fn y_ticks(out: &mut String, max: f64, suffix: &str) {
    for k in 0..=4 {
        let v = max * f64::from(k) / 4.0;
        let y = TOP + plot_height() - plot_height() * f64::from(k) / 4.0;
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\" font-size=\"10\">{}{}</text>",
            num(LEFT - 6.0),
            num(y + 3.0),
            num(v),
            suffix
        );
    }
}

fn bars_svg(out: &mut String, chart: &ChartModel) {
    let points = chart.series.first().map(|s| s.points.as_slice()).unwrap_or(&[]);
    if points.is_empty() {
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" fill=\"#666\">no data</text>",
            num(LEFT + plot_width() / 2.0),
            num(TOP + plot_height() / 2.0)
        );
        return;
    }
    let max = nice_max(points.iter().map(|p| p.value).fold(0.0, f64::max));
    y_ticks(out, max, "");
    let band = plot_width() / points.len() as f64;
    for (k, p) in points.iter().enumerate() {
        let h = plot_height() * p.value / max;
        let x = LEFT + band * k as f64 + band * 0.15;
        let _ = writeln!(
            out,
            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\"><title>{}: {}</title></rect>",
            num(x),
            num(TOP + plot_height() - h),
            num(band * 0.7),
            num(h),
            BAR_COLOR,
            html_escape(&p.category),
            num(p.value)
        );
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"10\">{}</text>",
            num(LEFT + band * (k as f64 + 0.5)),
            num(TOP + plot_height() + 14.0),
            html_escape(&p.category)
        );
    }
}

fn category_color(k: usize) -> &'static str {
    [OK_COLOR, TEMPORAL_COLOR, QUALITATIVE_COLOR].get(k).copied().unwrap_or(BAR_COLOR)
}

fn stacked_svg(out: &mut String, chart: &ChartModel) {
    y_ticks(out, 100.0, "%");
    let days = &chart.x_axis.categories;
    if !days.is_empty() {
        let band = plot_width() / days.len() as f64;
        for (d, day) in days.iter().enumerate() {
            let mut base = 0.0;
            for (k, series) in chart.series.iter().enumerate() {
                let Some(p) = series.points.iter().find(|p| &p.category == day) else {
                    continue;
                };
                let h = plot_height() * p.value / 100.0;
                let _ = writeln!(
                    out,
                    "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\"><title>{} {}: {}%</title></rect>",
                    num(LEFT + band * d as f64 + band * 0.2),
                    num(TOP + plot_height() - base - h),
                    num(band * 0.6),
                    num(h),
                    category_color(k),
                    html_escape(day),
                    html_escape(&series.label),
                    num(p.value)
                );
                base += h;
            }
            let _ = writeln!(
                out,
                "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"10\">{}</text>",
                num(LEFT + band * (d as f64 + 0.5)),
                num(TOP + plot_height() + 14.0),
                html_escape(day)
            );
        }
    }
    // legend with overall shares
    for (k, series) in chart.series.iter().enumerate() {
        let x = LEFT + 160.0 * k as f64;
        let y = f64::from(CHART_HEIGHT) - 32.0;
        let _ = writeln!(
            out,
            "<rect x=\"{}\" y=\"{}\" width=\"10\" height=\"10\" fill=\"{}\"/>",
            num(x),
            num(y - 9.0),
            category_color(k)
        );
        let total = series.total.map(|t| format!(" {}%", num(t))).unwrap_or_default();
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" class=\"legend\">{}{}</text>",
            num(x + 14.0),
            num(y),
            html_escape(&series.label),
            total
        );
    }
}

fn gantt_svg(out: &mut String, chart: &ChartModel) {
    let rows = &chart.y_axis.categories;
    let (mut lo, mut hi) = (8.0 * 60.0, 18.0 * 60.0);
    for p in chart.series.iter().flat_map(|s| &s.points) {
        lo = f64::min(lo, p.value);
        hi = f64::max(hi, p.end.unwrap_or(p.value));
    }
    lo = (lo / 60.0) as i64 as f64 * 60.0;
    hi = f64::min(24.0 * 60.0, ((hi + 59.999) / 60.0) as i64 as f64 * 60.0);
    let span = f64::max(hi - lo, 60.0);
    let x_of = |m: f64| LEFT + plot_width() * (m - lo) / span;

    let mut hour = lo;
    while hour <= hi {
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"10\">{:02}:00</text>",
            num(x_of(hour)),
            num(TOP + plot_height() + 14.0),
            (hour / 60.0) as i64
        );
        hour += 60.0;
    }
    if rows.is_empty() {
        return;
    }
    let band = plot_height() / rows.len() as f64;
    let row_of: BTreeMap<&str, usize> = rows.iter().enumerate().map(|(k, r)| (r.as_str(), k)).collect();
    for (k, row) in rows.iter().enumerate() {
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\" font-size=\"10\">{}</text>",
            num(LEFT - 6.0),
            num(TOP + band * (k as f64 + 0.5) + 3.0),
            html_escape(row)
        );
    }
    for series in &chart.series {
        let color = match series.site_span {
            Some(SiteSpan::CrossSite) => CROSS_COLOR,
            _ => LOCAL_COLOR,
        };
        for p in &series.points {
            let Some(&row) = row_of.get(p.category.as_str()) else {
                continue;
            };
            let top = TOP + band * row as f64;
            let mid = top + band / 2.0;
            match series.mark {
                Mark::Range | Mark::Bar => {
                    let end = p.end.unwrap_or(p.value);
                    let _ = writeln!(
                        out,
                        "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\" fill-opacity=\"0.6\"/>",
                        num(x_of(p.value)),
                        num(top + band * 0.25),
                        num(f64::max(x_of(end) - x_of(p.value), 1.0)),
                        num(band * 0.5),
                        color
                    );
                }
                Mark::Instant => {
                    let _ = writeln!(
                        out,
                        "<circle cx=\"{}\" cy=\"{}\" r=\"2\" fill=\"{}\"/>",
                        num(x_of(p.value)),
                        num(mid),
                        color
                    );
                }
                Mark::Status => {
                    let _ = writeln!(
                        out,
                        "<line x1=\"{x}\" y1=\"{}\" x2=\"{x}\" y2=\"{}\" stroke=\"{}\" stroke-dasharray=\"2,2\"/>",
                        num(top + band * 0.1),
                        num(top + band * 0.9),
                        color,
                        x = num(x_of(p.value))
                    );
                }
            }
        }
    }
}

/// An 800x400 SVG drawing of a chart model.
pub fn chart_svg(chart: &ChartModel) -> String {
    let mut out = String::new();
    svg_open(&mut out, chart);
    axes(&mut out, chart);
    match chart.kind {
        ChartKind::BarFrequency | ChartKind::BarDuration => bars_svg(&mut out, chart),
        ChartKind::StackedCompliance => stacked_svg(&mut out, chart),
        ChartKind::TimelineGantt => gantt_svg(&mut out, chart),
    }
    out.push_str("</svg>\n");
    out
}

/// Everything shown in the HTML report.
#[derive(Debug, Clone, Copy)]
pub struct ReportDocument<'a> {
    pub title: &'a str,
    /// Graph text of the map shown in the map section.
    pub map_text: &'a str,
    pub persons: &'a [Person],
    pub charts: &'a [ChartModel],
    pub analyses: &'a [Analysis],
}

fn subject_text(subject: &Subject) -> String {
    match subject {
        Subject::Workstation(ws) => format!("workstation {}", ws),
        Subject::Story(id) => format!("US{}", id),
        Subject::Session(name) => format!("session {}", name),
    }
}

fn yellow_pages_row(out: &mut String, p: &Person) {
    let yp = &p.yellow_pages;
    let roles: Vec<&str> = p.roles.iter().map(|r| r.as_str()).collect();
    let contact: Vec<String> = yp.contact.iter().map(|(k, v)| format!("{}: {}", k, v)).collect();
    let item = yp
        .current_work_item
        .as_ref()
        .map(|w| {
            if w.title.is_empty() {
                format!("US{}", w.story_id)
            } else {
                format!("US{} {}", w.story_id, w.title)
            }
        })
        .unwrap_or_default();
    let _ = writeln!(
        out,
        "<tr class=\"person\"><td>{}</td><td>{}</td><td>{}</td><td>{}</td><td>{}</td><td>{}</td><td>{}</td></tr>",
        html_escape(&p.name),
        html_escape(yp.picture_ref.as_deref().unwrap_or("")),
        html_escape(&roles.join(", ")),
        html_escape(&contact.join("; ")),
        html_escape(&yp.skills.join(", ")),
        html_escape(&item),
        html_escape(yp.status.as_deref().unwrap_or("")),
    );
}

/// A single self-contained HTML page.
pub fn render_report(doc: &ReportDocument<'_>) -> String {
    let mut out = String::new();
    out.push_str("<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n");
    let _ = writeln!(out, "<title>{}</title>", html_escape(doc.title));
    out.push_str(
        "<style>\nbody{font-family:Helvetica,Arial,sans-serif;margin:2em;}\n\
         table{border-collapse:collapse;margin-bottom:1.5em;}\n\
         td,th{border:1px solid #bbb;padding:3px 8px;text-align:left;}\n\
         pre{background:#f4f4f4;padding:1em;overflow:auto;}\n\
         .temporal{color:#b06d00;}\n.qualitative{color:#c8372d;}\n</style>\n",
    );
    out.push_str("</head>\n<body>\n");
    let _ = writeln!(out, "<h1>{}</h1>", html_escape(doc.title));

    out.push_str("<section id=\"compliance\">\n<h2>Compliance</h2>\n<table>\n");
    out.push_str("<tr><th>activity</th><th>opportunities</th><th>OK</th><th>temporal</th><th>qualitative</th></tr>\n");
    for a in doc.analyses {
        let r = &a.result;
        let _ = writeln!(
            out,
            "<tr class=\"compliance-legend\" data-activity=\"{}\"><td>{}</td><td>{}</td><td class=\"ok-pct\">{}%</td><td class=\"temporal-pct\">{}%</td><td class=\"qualitative-pct\">{}%</td></tr>",
            html_escape(r.activity_id.as_str()),
            html_escape(r.activity_id.as_str()),
            r.totals.total(),
            r.compliance_pct,
            r.temporal_pct,
            r.qualitative_pct
        );
    }
    out.push_str("</table>\n</section>\n");

    out.push_str("<section id=\"map\">\n<h2>FLOW map</h2>\n");
    let _ = writeln!(out, "<pre class=\"flowmap\">{}</pre>", html_escape(doc.map_text));
    out.push_str("</section>\n");

    out.push_str("<section id=\"yellow-pages\">\n<h2>Yellow pages</h2>\n<table>\n");
    out.push_str("<tr><th>name</th><th>picture</th><th>role</th><th>contact</th><th>skills</th><th>current work item</th><th>status</th></tr>\n");
    for p in doc.persons {
        yellow_pages_row(&mut out, p);
    }
    out.push_str("</table>\n</section>\n");

    out.push_str("<section id=\"charts\">\n<h2>Charts</h2>\n");
    for chart in doc.charts {
        out.push_str("<figure>\n");
        out.push_str(&chart_svg(chart));
        out.push_str("</figure>\n");
    }
    out.push_str("</section>\n");

    out.push_str("<section id=\"violations\">\n<h2>Violations</h2>\n<table>\n");
    out.push_str("<tr><th>activity</th><th>rule</th><th>category</th><th>day</th><th>time</th><th>subject</th><th>evidence</th></tr>\n");
    for a in doc.analyses {
        for v in &a.violations {
            let class = match v.category {
                ViolationCategory::Temporal => "temporal",
                ViolationCategory::Qualitative => "qualitative",
            };
            let evidence: Vec<String> = v.evidence.iter().map(|i| format!("#{}", i)).collect();
            let _ = writeln!(
                out,
                "<tr class=\"violation {}\"><td>{}</td><td>{}</td><td>{}</td><td>{}</td><td>{}</td><td>{}</td><td>{}</td></tr>",
                class,
                html_escape(a.result.activity_id.as_str()),
                html_escape(&v.rule_id),
                class,
                v.day,
                v.occurred_at.to_rfc3339_opts(SecondsFormat::Secs, true),
                html_escape(&subject_text(&v.subject)),
                evidence.join(" ")
            );
        }
    }
    out.push_str("</table>\n</section>\n</body>\n</html>\n");
    out
}
