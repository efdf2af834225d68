//! Writes the built-in request-handling sample log and its single-role
//! constraint document, for trying out the CLI.
//!
//! Usage: `cargo run -p logabs-core --example write_sample -- sample.csv rules.txt`

use std::path::PathBuf;

fn main() {
    let mut args = std::env::args().skip(1);
    let log_path = PathBuf::from(args.next().unwrap_or_else(|| "sample.csv".into()));
    let rules_path = PathBuf::from(args.next().unwrap_or_else(|| "rules.txt".into()));
    std::fs::write(&log_path, logabs_core::sample::request_handling_csv()).expect("write log");
    std::fs::write(&rules_path, logabs_core::sample::SINGLE_ROLE_CONSTRAINT).expect("write rules");
    println!("wrote {} and {}", log_path.display(), rules_path.display());
}
