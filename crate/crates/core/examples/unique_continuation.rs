//! The tail prefactor at t1 equals the integrated source, so nonzero compact
//! data never decay faster than e^{-x} after t = 0.

use ch_tails::cli_io::config::{Experiment, RunConfig};
use ch_tails::scenarios::run_unique_continuation;

fn main() -> ch_tails::error::Result<()> {
    let mut cfg = RunConfig::reference(Experiment::UniqueContinuation);
    for amplitude in [0.0, 0.1, 0.25] {
        cfg.scenario.amplitude = amplitude;
        for t1 in [0.25, 0.5, 1.0] {
            let rep = run_unique_continuation(t1, &cfg)?;
            println!(
                "A = {amplitude:4.2} t1 = {t1:4.2}: c+(t1) = {:.6e}, ½∫e^y ρ = {:.6e}, {:?}",
                rep.metrics["c_plus_t1"], rep.metrics["c0"], rep.status
            );
        }
    }
    Ok(())
}
