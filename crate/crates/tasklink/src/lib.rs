//! Command-line tools, configuration loading and the live WebSocket service
//! around `tasklink-core`.

pub mod cli;
pub mod config;
pub mod link;
pub mod protocol;
pub mod report;
pub mod schedule;
pub mod server;
pub mod session;
pub mod sim;
pub mod spec;
pub mod sweep;
