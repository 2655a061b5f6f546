//! File formats, command-line front end and acceptance table on top of `xpulse-core`.

pub mod acceptance;
pub mod cli;
pub mod formats;
