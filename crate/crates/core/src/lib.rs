//! Core model and analysis for flowkit.
//!
//! Everything here is pure data transformation over `alloc` collections:
//! declaring sites, people and documents ([`flow_model`]), choosing media
//! for communication activities ([`strategy`]), compiling target and
//! per-activity maps ([`map_builder`]), normalizing raw communication logs
//! ([`ingest`]), checking a timeline against the declared strategy
//! ([`conformance`]), aggregating chart data ([`report`]) and emitting
//! graph text, SVG and HTML ([`render`]).
//!
//! File IO, configuration files and the command-line surface live in the
//! `flowkit` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod calendar;
pub mod conformance;
pub mod flow_model;
pub mod ingest;
pub mod map_builder;
pub mod render;
pub mod report;
pub mod strategy;

mod ids;

pub use calendar::Calendar;
pub use flow_model::{FlowMap, Issue, IssueCode, Severity};
pub use ids::{ActivityId, DocumentId, MediumId, PairId, PersonId, SiteId, WorkstationId};

/// Instants are always stored in UTC.
pub type Timestamp = chrono::DateTime<chrono::Utc>;
