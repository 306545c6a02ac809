//! Time integration with a monitor: conserved quantities along a run.

use ch_tails::diagnostics::{h1, m0};
use ch_tails::dynamics::{evolve, Snapshot, TimeStepConfig};
use ch_tails::grid::Grid1D;

fn main() -> ch_tails::error::Result<()> {
    let g = Grid1D::new(-60.0, 60.0, 8192)?;
    let u0 = g.sample("u0", |x| 0.25 * (-(x / 2.0).powi(2)).exp())?;
    let cfg = TimeStepConfig { t_end: 2.0, monitor_stride: 10, checkpoints: vec![0.5, 1.0], ..TimeStepConfig::default() };

    let mut print = |s: &Snapshot<'_>| {
        println!("t = {:6.3}  step {:4}  H1 = {:.12}  M0 = {:.12}  max u = {:.6}", s.t, s.step, h1(s.u), m0(s.u), s.u.max_abs());
    };
    let traj = evolve(u0, &cfg, &mut [&mut print])?;
    traj.outcome?;
    let (dh1, dm0) = traj.final_state.drift();
    println!("{} snapshots, relative drift H1 {dh1:.2e}, M0 {dm0:.2e}", traj.times.len());
    Ok(())
}
