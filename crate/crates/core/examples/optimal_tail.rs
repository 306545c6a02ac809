//! Data with e^{-|x|} tails keep exactly that rate.

use ch_tails::cli_io::config::{Experiment, RunConfig};
use ch_tails::scenarios::run_optimal_tail;

fn main() -> ch_tails::error::Result<()> {
    let rep = run_optimal_tail(1.0, &RunConfig::reference(Experiment::OptimalTail))?;
    for r in &rep.rows {
        if [0.0, 0.25, 0.5, 1.0].contains(&r.t) {
            println!("t = {:4.2}: slopes {:+.6} / {:+.6}, c+ = {:.6e}, E+ = {:.6e}", r.t, r.slope_right, r.slope_left, r.c_plus, r.e_plus);
        }
    }
    println!("status {:?}", rep.status);
    Ok(())
}
