//! Library half of the command-line front end: the config-file dialect and
//! the CSV/metadata emitters. The binary in `main.rs` is a thin dispatcher
//! over these plus `eshg_core`.

pub mod config;
pub mod output;
