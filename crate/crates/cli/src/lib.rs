//! Reporting, lemma reproduction and batch sweeps on top of `biquad`.

pub mod config;
pub mod fixtures;
pub mod report;
pub mod sweep;
pub mod verify;
