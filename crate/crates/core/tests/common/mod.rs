#![allow(dead_code)]

pub mod dot;

use std::collections::BTreeSet;

use chrono::{Duration, NaiveDate, NaiveTime};
use flowkit_core::flow_model::{Person, Role, Site, YellowPages};
use flowkit_core::ingest::{
    CommEvent, CommKind, CommitPayload, CommitRecord, ParsedStatus, Payload, StatusPayload,
};
use flowkit_core::map_builder::{TeamSpec, Workstation};
use flowkit_core::{Calendar, Timestamp};

pub fn calendar() -> Calendar {
    Calendar::new(NaiveDate::from_ymd_opt(2010, 8, 23).unwrap(), 5, 120)
}

/// Local time on a project day, as a UTC instant.
pub fn at(day: i64, hour: u32, minute: u32) -> Timestamp {
    calendar().instant(day, NaiveTime::from_hms_opt(hour, minute, 0).unwrap())
}

/// Minutes after local midnight of day 0.
pub fn minutes(m: i64) -> Timestamp {
    at(0, 0, 0) + Duration::minutes(m)
}

pub fn site(id: &str) -> Site {
    Site {
        id: id.into(),
        name: id.to_uppercase(),
        timezone_offset_minutes: 0,
    }
}

pub fn person(id: &str, site: &str, roles: &[Role]) -> Person {
    let mut name = id.to_string();
    name[..1].make_ascii_uppercase();
    Person {
        id: id.into(),
        name,
        site_id: site.into(),
        roles: roles.iter().copied().collect(),
        yellow_pages: YellowPages::default(),
    }
}

/// Two sites with two pairs each and one workstation per pair.
pub fn pair_team() -> TeamSpec {
    let dev = [Role::Developer];
    TeamSpec {
        sites: vec![site("a"), site("b")],
        persons: vec![
            person("ann", "a", &dev),
            person("bob", "a", &dev),
            person("cid", "a", &dev),
            person("dan", "a", &dev),
            person("eve", "b", &dev),
            person("fay", "b", &dev),
            person("gus", "b", &dev),
            person("hal", "b", &dev),
        ],
        pairs: vec![
            pair("p1", "ann", "bob"),
            pair("p2", "cid", "dan"),
            pair("p3", "eve", "fay"),
            pair("p4", "gus", "hal"),
        ],
        documents: Vec::new(),
        workstations: (1..=4)
            .map(|k| Workstation {
                id: format!("ws{k}").into(),
                site_id: if k <= 2 { "a".into() } else { "b".into() },
                pair_id: Some(format!("p{k}").into()),
            })
            .collect(),
        common_language: String::new(),
    }
}

pub fn pair(id: &str, a: &str, b: &str) -> flowkit_core::flow_model::PairStore {
    flowkit_core::flow_model::PairStore {
        id: id.into(),
        member_ids: [a.into(), b.into()],
        current_work_item: None,
    }
}

pub fn status(t: Timestamp, ws: &str, raw: &str) -> CommEvent {
    let mut e = CommEvent::new(CommKind::StatusChange, t);
    let parsed = flowkit_core::ingest::parse_status_text(raw);
    e.story_id = parsed.as_ref().map(|p: &ParsedStatus| p.story_id);
    e.payload = Payload::Status(StatusPayload {
        workstation: ws.into(),
        raw: raw.to_string(),
        parsed,
    });
    e
}

pub fn commit(t: Timestamp, story: u32, names: [&str; 2], done: bool) -> CommEvent {
    let mut e = CommEvent::new(CommKind::Commit, t);
    e.participants = names.iter().map(|n| n.to_lowercase().into()).collect();
    e.story_id = Some(story);
    let message = format!("US{story}: {} & {}{}", names[0], names[1], if done { " [done]" } else { "" });
    e.payload = Payload::Commit(CommitRecord {
        revision: String::new(),
        author: names[0].to_lowercase(),
        message: message.clone(),
        template: Some(CommitPayload {
            pair_names: [names[0].to_string(), names[1].to_string()],
            story_id: story,
            completed_flag: done,
            message,
        }),
    });
    e
}

pub fn contact(t: Timestamp, story: Option<u32>, people: &[&str]) -> CommEvent {
    let mut e = CommEvent::new(CommKind::CustomerContact, t);
    e.end = Some(t + Duration::minutes(10));
    e.story_id = story;
    e.participants = people.iter().map(|p| (*p).into()).collect::<BTreeSet<_>>();
    e
}

pub fn meeting(t: Timestamp, name: &str) -> CommEvent {
    let mut e = CommEvent::new(CommKind::Meeting, t);
    e.end = Some(t + Duration::minutes(15));
    e.payload = Payload::Meeting { name: name.to_string() };
    e
}
