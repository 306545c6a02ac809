//! Momentum decaying faster than e^{-(1+μ)|x|} keeps doing so while u
//! develops e^{∓x} plateaus.

use ch_tails::cli_io::config::{DataKind, Experiment, RunConfig};
use ch_tails::scenarios::run_fast_decay;

fn main() -> ch_tails::error::Result<()> {
    let cfg = RunConfig::reference(Experiment::FastDecay);
    let rep = run_fast_decay(0.5, 1.0, &cfg)?;
    println!("steepest right momentum slope {:.3}, status {:?}", rep.metrics["h_slope_right_max"], rep.status);
    let last = rep.rows.last().expect("rows");
    println!("at t = {}: c+ = {:.5e}, c- = {:.5e}", last.t, last.c_plus, last.c_minus);

    let mut slow = cfg.clone();
    slow.scenario.kind = Some(DataKind::SechTail);
    slow.scenario.theta = 0.9;
    match run_fast_decay(0.5, 1.0, &slow) {
        Err(e) => println!("sech with θ = 0.9 rejected: {e}"),
        Ok(_) => println!("unexpectedly accepted"),
    }
    Ok(())
}
