//! Convolution with G(x) = ½e^{-|x|} and its inverse on a peaked profile.

use ch_tails::greens::{apply_helmholtz, conv_dg, conv_g};
use ch_tails::grid::Grid1D;

fn main() -> ch_tails::error::Result<()> {
    let g = Grid1D::new(-30.0, 30.0, 6001)?;
    let peak = g.sample("e^{-|x|}", |x| (-x.abs()).exp())?;
    let u = conv_g(&peak);
    let exact = |x: f64| 0.5 * (1.0 + x.abs()) * (-x.abs()).exp();

    println!("{:>6} {:>14} {:>14} {:>14}", "x", "G*f", "closed form", "dG*f");
    let du = conv_dg(&peak);
    for x in [-4.0, -1.0, 0.0, 0.5, 2.0, 6.0] {
        let i = ((x - g.x_min()) / g.dx()).round() as usize;
        println!("{:>6.2} {:>14.10} {:>14.10} {:>14.10}", g.node(i), u.values()[i], exact(g.node(i)), du.values()[i]);
    }

    // the kink of f at 0 keeps this residual at first order in dx
    let back = apply_helmholtz(&u);
    let err = back.values().iter().zip(peak.values()).skip(10).take(g.n() - 20).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    println!("max |(1 - d²)(G*f) - f| away from the ends: {err:.3e}");
    Ok(())
}
