//! Particle paths and transport of momentum along the flow.

use ch_tails::dynamics::{evolve, TimeStepConfig};
use ch_tails::flowmap::{advance_flow_to, check_momentum_conservation, support_endpoints, FlowState, VelocityRecord};
use ch_tails::greens::apply_helmholtz;
use ch_tails::grid::Grid1D;

fn main() -> ch_tails::error::Result<()> {
    let g = Grid1D::new(-40.0, 40.0, 4001)?;
    let (a, b) = (-2.0, 2.0);
    let u0 = g.sample("u0", |x| {
        let s = x / 2.0;
        if s.abs() < 1.0 { 0.25 * (1.0 - 1.0 / (1.0 - s * s)).exp() } else { 0.0 }
    })?;
    let h0 = apply_helmholtz(&u0);

    let mut record = VelocityRecord::new();
    let cfg = TimeStepConfig { t_end: 1.0, checkpoints: vec![0.25, 0.5, 0.75], ..TimeStepConfig::default() };
    evolve(u0, &cfg, &mut [&mut record])?.outcome?;

    let mut fs = FlowState::seed(&g, &[a, b]);
    for &t in &cfg.checkpoints.iter().copied().chain([1.0]).collect::<Vec<_>>() {
        fs = advance_flow_to(&fs, &record, t)?;
        let k = record.times().iter().position(|&s| s == t).expect("checkpoint recorded");
        let h = apply_helmholtz(record.snapshot(k));
        let (ea, eb) = support_endpoints(&fs, a, b)?;
        let res = check_momentum_conservation(&fs, &h, &h0)?;
        println!("t = {t:4.2}  eta(a) = {ea:+.6}  eta(b) = {eb:+.6}  monotone {}  residual {:.2e}", fs.is_monotone(), res.max);
    }
    Ok(())
}
