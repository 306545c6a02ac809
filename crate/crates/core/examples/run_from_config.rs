//! Parse a TOML configuration, run it and write the output files.
//!
//! `cargo run --example run_from_config -- configs/compact_support.toml /tmp/out`

use std::path::PathBuf;

use ch_tails::cli_io::config::parse_config;
use ch_tails::cli_io::output::write_outputs;
use ch_tails::scenarios::run_experiment;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let path = args.next().unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/configs/optimal_tail.toml").into());
    let out = args.next().map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("ch-tails-example"));
    let cfg = parse_config(&std::fs::read_to_string(&path)?)?;
    let report = run_experiment(&cfg)?;
    for p in write_outputs(&report, &cfg, &out)? {
        println!("wrote {}", p.display());
    }
    println!("{}: {:?}", report.name, report.status);
    Ok(())
}
