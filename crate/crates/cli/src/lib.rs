//! Command-line front end: manifests, file formats and the subcommands.

pub mod cli;
pub mod fixture;
pub mod io;
pub mod manifest;
pub mod pipeline;
