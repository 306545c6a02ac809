//! Compact data: E+ starts at zero, grows, and the solution acquires exact
//! e^{-x} and e^{x} tails while the momentum stays inside the flow image.

use ch_tails::cli_io::config::{Experiment, RunConfig};
use ch_tails::scenarios::run_compact_support;

fn main() -> ch_tails::error::Result<()> {
    let report = run_compact_support(1.0, &RunConfig::reference(Experiment::CompactSupport))?;
    println!("{:>6} {:>12} {:>12} {:>12} {:>10} {:>10} {:>10}", "t", "E+", "c+", "E-", "slope+", "eta(a)", "eta(b)");
    for r in report.rows.iter().step_by(5).chain(report.rows.last()) {
        println!(
            "{:6.3} {:12.4e} {:12.4e} {:12.4e} {:10.4} {:10.5} {:10.5}",
            r.t, r.e_plus, r.c_plus, r.e_minus, r.slope_right, r.eta_a, r.eta_b
        );
    }
    for v in &report.verdicts {
        println!("{:5} {:5} {}", v.id, if v.pass { "pass" } else { "FAIL" }, v.name);
    }
    Ok(())
}
