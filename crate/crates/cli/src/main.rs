//! `hgibbs`: command-line runner for the harmonic-gibbs experiments.
//!
//! Each subcommand writes `<out>/<subcommand>.json` (schema `hgibbs-report/1`)
//! and optional CSV plot data, and exits 0 on pass, 2 when an asserted claim
//! fails, 1 on usage or configuration errors.

mod app;
mod commands;
mod error;
mod report;

fn main() {
    std::process::exit(app::run(std::env::args_os()));
}
