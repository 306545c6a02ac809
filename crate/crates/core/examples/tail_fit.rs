//! Exponential tail fits, plateaus and tail coefficients of a static profile.

use ch_tails::diagnostics::{c_minus_estimate, c_plus_estimate, fit_tail, tail_coefficients};
use ch_tails::greens::{apply_helmholtz, conv_g};
use ch_tails::grid::{Grid1D, Side};

fn main() -> ch_tails::error::Result<()> {
    let g = Grid1D::new(-60.0, 60.0, 8192)?;
    // momentum supported in [-1, 2]
    let h = g.sample("h", |x| if (-1.0..=2.0).contains(&x) { (x + 1.0) * (2.0 - x) } else { 0.0 })?;
    let u = conv_g(&h);
    let right = g.tail_window(Side::Right, 35.0, 15.0)?;
    let left = g.tail_window(Side::Left, 35.0, 15.0)?;

    let fr = fit_tail(&u, right.clone())?;
    let fl = fit_tail(&u, left.clone())?;
    println!("right tail slope {:+.6} (r² {:.8}), left tail slope {:+.6}", fr.slope, fr.r2, fl.slope);

    let tc = tail_coefficients(&apply_helmholtz(&u), 0.0)?;
    let cp = c_plus_estimate(&u, right)?;
    let cm = c_minus_estimate(&u, left)?;
    println!("E+ = {:.10}  plateau c+ = {:.10} (spread {:.1e})", tc.e_plus, cp.value, cp.max_deviation);
    println!("E- = {:.10}  plateau c- = {:.10} (spread {:.1e})", tc.e_minus, cm.value, cm.max_deviation);

    let gauss = g.sample("gaussian", |x| (-x * x / 50.0).exp())?;
    let win = g.window_between(5.0, 20.0)?;
    let fg = fit_tail(&gauss, win)?;
    println!("Gaussian on [5, 20]: slope {:+.4}, r² {:.5} (not an exponential)", fg.slope, fg.r2);
    Ok(())
}
