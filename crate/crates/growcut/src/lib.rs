//! File formats, command-line tool and HTTP service around `growcut-core`.

pub mod cli;
pub mod io;
pub mod job;
pub mod report;
pub mod service;
