//! Operator checks, order studies, drift and the kernel-weight bound.

use ch_tails::cli_io::config::{Experiment, RunConfig};
use ch_tails::scenarios::studies::convergence_suite;

fn main() -> ch_tails::error::Result<()> {
    let cfg = RunConfig::reference(Experiment::Persistence);
    let rep = convergence_suite(&cfg.grid()?, &cfg.time, cfg.tolerances.conservation_tol)?;
    for s in [&rep.temporal, &rep.spatial, &rep.flow] {
        println!("{:<14} differences {:?} orders {:.3?}", s.label, s.differences, s.orders);
    }
    for row in &rep.kernel_weight {
        println!("θ = {:4}: bound {:.4?} (exact {:.4?}), variation {:.2}%", row.theta, row.measured, row.exact, 100.0 * row.variation);
    }
    for v in &rep.verdicts {
        println!("{:5} {:5} {}", v.id, if v.pass { "pass" } else { "FAIL" }, v.name);
    }
    Ok(())
}
