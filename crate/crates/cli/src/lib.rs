//! Configuration, serialization and command implementations behind the
//! `otto` binary.

pub mod commands;
pub mod config;
pub mod output;
