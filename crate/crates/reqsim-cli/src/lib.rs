//! Library surface of the command-line front end, exposed so integration
//! tests can exercise configuration resolution and the command
//! implementations directly.

pub mod commands;
pub mod config;
