//! Operational surface of skillforge: the `skillforge` command line, the
//! HTTP service and a client for remote skill registries.

pub mod cli;
pub mod host;
pub mod remote;
pub mod server;
