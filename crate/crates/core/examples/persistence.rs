//! Data with e^{-θ|x|} tails keep them; weighted sup norms stay bounded.

use ch_tails::cli_io::config::{Experiment, RunConfig};
use ch_tails::scenarios::run_persistence;

fn main() -> ch_tails::error::Result<()> {
    let cfg = RunConfig::reference(Experiment::Persistence);
    for theta in [0.25, 0.5, 0.75] {
        let rep = run_persistence(theta, 1.0, &cfg)?;
        println!(
            "θ = {theta}: right slopes in [{:.4}, {:.4}], weighted norm ratio {:.4}, status {:?}",
            rep.metrics["slope_right_min"], rep.metrics["slope_right_max"], rep.metrics["weighted_norm_ratio"], rep.status
        );
    }
    Ok(())
}
