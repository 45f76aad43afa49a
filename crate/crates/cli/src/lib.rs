//! Config parsing, output formats and the subcommands behind the `nsys` binary.

pub mod commands;
pub mod config;
pub mod output;
pub mod validate;
