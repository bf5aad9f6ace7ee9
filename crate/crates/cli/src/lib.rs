//! Front end of the `brplan` binary: file formats, CSV output and the
//! subcommands, kept in a library so tests can call them directly.

pub mod commands;
pub mod format;
pub mod output;
