//! File formats, the batch pipeline and the `flowkit` command line.
//!
//! The model and all analysis live in `flowkit-core`; this crate reads and
//! writes files and wires the stages together.

pub mod cli;
pub mod events;
pub mod files;
pub mod pipeline;
