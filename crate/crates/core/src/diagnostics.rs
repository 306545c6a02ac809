//! Quantities measured on snapshots: `F(u)`, exponentially weighted norms,
//! tail fits, the tail coefficients `E±`, momentum support and the
//! time-integrated source `ρ`.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::dynamics::{Monitor, Snapshot};
use crate::error::{Error, Result};
use crate::greens::{apply_helmholtz, conv_g, conv_g_extended, tails_decayed, TailExtension, TAIL_FRACTION};
use crate::grid::{derivative, integrate, Field, Grid1D};
use crate::quadrature::NeumaierSum;

/// Fits and plateaus need at least this many nodes above the floor.
pub const MIN_USABLE: usize = 8;

/// Default relative floor below which tail samples are ignored.
pub const VALUE_FLOOR: f64 = 1e-13;

/// `φ_N(x)`: 1 for `x ≤ 0`, `e^{θx}` on `(0, N)`, `e^{θN}` beyond `N`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightProfile {
    pub theta: f64,
    pub cutoff: f64,
}

impl WeightProfile {
    pub fn new(theta: f64, cutoff: f64) -> Result<Self> {
        if !(theta > 0.0 && theta < 1.0) {
            return Err(Error::Parameter { key: "theta".into(), message: "theta must be in (0,1)".into() });
        }
        if !(cutoff > 0.0 && cutoff.is_finite()) {
            return Err(Error::Parameter { key: "weight_cutoff".into(), message: "must be positive".into() });
        }
        Ok(Self { theta, cutoff })
    }

    pub fn phi(&self, x: f64) -> f64 {
        (self.theta * x.clamp(0.0, self.cutoff)).exp()
    }

    /// Derivative of `φ_N`, taken as zero at the two corners.
    pub fn phi_prime(&self, x: f64) -> f64 {
        if x > 0.0 && x < self.cutoff {
            self.theta * self.phi(x)
        } else {
            0.0
        }
    }
}

/// `F(u) = u² + ½ (∂x u)²`.
pub fn f_field(u: &Field) -> Field {
    let du = derivative(u);
    let values = u.values().iter().zip(du.values()).map(|(a, b)| a * a + 0.5 * b * b).collect();
    Field::from_raw(*u.grid(), values, &format!("F({})", u.role()))
}

/// `∫ (u² + (∂x u)²) dx`.
pub fn h1(u: &Field) -> f64 {
    let du = derivative(u);
    let sq = u.zip_map(&du, "u²+ux²", |a, b| a * a + b * b).expect("same grid");
    integrate(&sq)
}

/// `∫ (1 - ∂x²) u dx`.
pub fn m0(u: &Field) -> f64 {
    integrate(&apply_helmholtz(u))
}

/// `max_x |u(x)| φ_N(x)`.
pub fn weighted_sup(u: &Field, w: &WeightProfile) -> f64 {
    let g = u.grid();
    u.values().iter().enumerate().fold(0.0, |m, (i, v)| m.max(v.abs() * w.phi(g.node(i))))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub slope: f64,
    pub log_prefactor: f64,
    pub r2: f64,
    pub window: Range<usize>,
    /// Some window nodes fell below the floor and were left out.
    pub floor_hit: bool,
    pub used: usize,
}

fn usable(u: &Field, window: &Range<usize>, floor_rel: f64) -> Result<(Vec<(f64, f64)>, bool)> {
    let g = u.grid();
    if window.end > g.n() || window.start >= window.end {
        return Err(Error::Window(format!("window {window:?} is not inside 0..{}", g.n())));
    }
    let floor = floor_rel * u.max_abs();
    let pts: Vec<(f64, f64)> = window
        .clone()
        .filter(|&i| u.values()[i].abs() > floor && u.values()[i] != 0.0)
        .map(|i| (g.node(i), u.values()[i]))
        .collect();
    let hit = pts.len() < window.len();
    if pts.len() < MIN_USABLE {
        return Err(Error::TailBelowFloor { usable: pts.len() });
    }
    Ok((pts, hit))
}

/// Least-squares line through `(x, log|u(x)|)` with the default floor.
pub fn fit_tail(u: &Field, window: Range<usize>) -> Result<TailFit> {
    fit_tail_with_floor(u, window, VALUE_FLOOR)
}

pub fn fit_tail_with_floor(u: &Field, window: Range<usize>, floor_rel: f64) -> Result<TailFit> {
    let (pts, floor_hit) = usable(u, &window, floor_rel)?;
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1.abs().ln()).sum::<f64>() / m;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &(x, v) in &pts {
        let (dx, dy) = (x - mx, v.abs().ln() - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = pts.iter().map(|&(x, v)| (v.abs().ln() - intercept - slope * x).powi(2)).sum();
    let r2 = if syy > 0.0 { (1.0 - ss_res / syy).clamp(0.0, 1.0) } else { 1.0 };
    Ok(TailFit { slope, log_prefactor: intercept, r2, window, floor_hit, used: pts.len() })
}

/// Flat part of `e^{±x} u(x)` in a tail window.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Plateau {
    pub value: f64,
    pub max_deviation: f64,
    pub used: usize,
}

fn plateau(u: &Field, window: Range<usize>, sign: f64) -> Result<Plateau> {
    let (pts, _) = usable(u, &window, VALUE_FLOOR)?;
    let scaled: Vec<f64> = pts.iter().map(|&(x, v)| (sign * x).exp() * v).collect();
    let value = scaled.iter().sum::<f64>() / scaled.len() as f64;
    let max_deviation = scaled.iter().fold(0.0f64, |m, s| m.max((s - value).abs()));
    Ok(Plateau { value, max_deviation, used: scaled.len() })
}

/// Mean of `e^{x} u(x)` over the usable nodes of a right-tail window.
pub fn c_plus_estimate(u: &Field, window: Range<usize>) -> Result<Plateau> {
    plateau(u, window, 1.0)
}

/// Mean of `e^{-x} u(x)` over the usable nodes of a left-tail window.
pub fn c_minus_estimate(u: &Field, window: Range<usize>) -> Result<Plateau> {
    plateau(u, window, -1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailCoefficients {
    pub e_plus: f64,
    pub e_minus: f64,
    pub de_plus_dt_pred: f64,
    pub t: f64,
}

/// `½ ∫ e^{sign·y} f(y) dy` by the trapezoid rule, accumulated relative to the
/// largest term so that no exponential is ever formed at full size.
pub fn exp_weighted_integral(f: &Field, sign: f64) -> f64 {
    let g = f.grid();
    let n = g.n();
    let logs: Vec<f64> = (0..n)
        .map(|i| {
            let v = f.values()[i];
            if v == 0.0 {
                f64::NEG_INFINITY
            } else {
                sign * g.node(i) + v.abs().ln()
            }
        })
        .collect();
    let shift = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if shift == f64::NEG_INFINITY {
        return 0.0;
    }
    let mut sum = NeumaierSum::default();
    for (i, (v, l)) in f.values().iter().zip(&logs).enumerate() {
        let w = if i == 0 || i + 1 == n { 0.5 } else { 1.0 };
        sum.add(w * v.signum() * (l - shift).exp());
    }
    0.5 * g.dx() * sum.total() * shift.exp()
}

/// True when `e^{sign·y}|f|` on the outermost 1% of nodes of the growing side
/// is below `fraction` of its maximum.
fn weighted_tail_decays(f: &Field, sign: f64, fraction: f64) -> bool {
    let g = f.grid();
    let n = g.n();
    let k = (n / 100).max(1);
    let logw = |i: usize| {
        let v = f.values()[i].abs();
        if v == 0.0 {
            f64::NEG_INFINITY
        } else {
            sign * g.node(i) + v.ln()
        }
    };
    let max = (0..n).map(logw).fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return true;
    }
    let edge: Box<dyn Iterator<Item = usize>> = if sign > 0.0 { Box::new(n - k..n) } else { Box::new(0..k) };
    edge.map(logw).fold(f64::NEG_INFINITY, f64::max) <= max + fraction.ln()
}

/// `E± = ½ ∫ e^{±y} h dy` and the predicted rate `½ ∫ e^{y} F(u) dy` with
/// `u = G * h`. A side whose weighted integrand has not decayed at the domain
/// end is reported as `NaN`.
pub fn tail_coefficients(h: &Field, t: f64) -> Result<TailCoefficients> {
    if !tails_decayed(h, TAIL_FRACTION) {
        return Err(Error::TailsNotDecaying("momentum density"));
    }
    let side = |sign: f64| {
        if weighted_tail_decays(h, sign, TAIL_FRACTION) {
            exp_weighted_integral(h, sign)
        } else {
            f64::NAN
        }
    };
    let e_plus = side(1.0);
    let e_minus = side(-1.0);
    let f = f_field(&conv_g(h));
    let de_plus_dt_pred =
        if weighted_tail_decays(&f, 1.0, TAIL_FRACTION) { exp_weighted_integral(&f, 1.0) } else { f64::NAN };
    Ok(TailCoefficients { e_plus, e_minus, de_plus_dt_pred, t })
}

/// `E₊(0)` computed from `h₀ = (1 - ∂x²) u₀`. Vanishes for compactly
/// supported data.
pub fn check_e_plus_zero_initial(u0: &Field) -> f64 {
    exp_weighted_integral(&apply_helmholtz(u0), 1.0)
}

/// `½ ∫ e^{y} |u₀| dy`, the scale against which [`check_e_plus_zero_initial`]
/// is judged.
pub fn e_plus_scale(u0: &Field) -> f64 {
    exp_weighted_integral(&u0.map_with_x("|u0|", |_, v| v.abs()), 1.0)
}

/// Outermost node positions where `|h| > threshold_rel · max|h|`, or `None`
/// when no node qualifies.
pub fn momentum_support(h: &Field, threshold_rel: f64) -> Result<Option<(f64, f64)>> {
    if !(threshold_rel > 0.0 && threshold_rel < 1.0) {
        return Err(Error::Parameter {
            key: "support_threshold".into(),
            message: "must be in (0,1)".into(),
        });
    }
    let max = h.max_abs();
    if max == 0.0 {
        return Ok(None);
    }
    let cut = threshold_rel * max;
    let v = h.values();
    let first = v.iter().position(|x| x.abs() > cut);
    let last = v.iter().rposition(|x| x.abs() > cut);
    Ok(first.zip(last).map(|(a, b)| (h.grid().node(a), h.grid().node(b))))
}

/// `sup_x φ_N(x) ∫ e^{-|x-y|} / φ_N(y) dy` over the grid nodes. The weight is
/// continued as a constant beyond each end, which is exact when
/// `x_min ≤ 0` and `x_max ≥ N`.
pub fn kernel_weight_sup(grid: &Grid1D, w: &WeightProfile) -> f64 {
    let inv = grid.sample("1/φ", |x| 1.0 / w.phi(x)).expect("finite weight");
    let ext = TailExtension { left: 1.0 / w.phi(grid.x_min()), right: 1.0 / w.phi(grid.x_max()) };
    let conv = conv_g_extended(&inv, ext);
    conv.values().iter().enumerate().fold(0.0, |m, (i, c)| m.max(2.0 * w.phi(grid.node(i)) * c))
}

/// Closed form of [`kernel_weight_sup`] on the whole line.
pub fn kernel_weight_sup_exact(w: &WeightProfile) -> f64 {
    let t = w.theta;
    1.0 + (1.0 - t * (-(1.0 - t) * w.cutoff).exp()) / (1.0 - t)
}

/// Accumulates `ρ(x) = ∫₀^{t₁} F(u)(x, τ) dτ` with the trapezoid rule over
/// the observed snapshots. Snapshots after `until` are ignored.
#[derive(Clone, Debug)]
pub struct RhoAccumulator {
    until: f64,
    rho: Option<Vec<f64>>,
    last: Option<(f64, Vec<f64>)>,
    grid: Option<Grid1D>,
}

impl RhoAccumulator {
    pub fn new(until: f64) -> Self {
        Self { until, rho: None, last: None, grid: None }
    }

    /// Time reached so far.
    pub fn reached(&self) -> f64 {
        self.last.as_ref().map_or(0.0, |l| l.0)
    }

    pub fn rho(&self) -> Option<Field> {
        Some(Field::from_raw(self.grid?, self.rho.clone()?, "ρ"))
    }
}

impl Monitor for RhoAccumulator {
    fn observe(&mut self, snap: &Snapshot<'_>) {
        if snap.t > self.until * (1.0 + 1e-12) {
            return;
        }
        let f = f_field(snap.u).into_values();
        let rho = self.rho.get_or_insert_with(|| vec![0.0; f.len()]);
        if let Some((t0, f0)) = &self.last {
            let half = 0.5 * (snap.t - t0);
            for ((r, a), b) in rho.iter_mut().zip(f0).zip(&f) {
                *r += half * (a + b);
            }
        }
        self.grid = Some(*snap.u.grid());
        self.last = Some((snap.t, f));
    }
}


#[cfg(test)]
mod props {
    use super::*;
    use crate::grid::Side;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn plateau_of_compact_momentum_is_its_tail_coefficient(a in 0.05f64..1.0, c in -3.0f64..3.0, w in 0.5f64..2.0) {
            let g = Grid1D::new(-40.0, 40.0, 3201).unwrap();
            let h = g.sample("h", |x| { let s = (x - c) / w; if s.abs() < 1.0 { a * (1.0 - 1.0 / (1.0 - s * s)).exp() } else { 0.0 } }).unwrap();
            let u = conv_g(&h);
            let tc = tail_coefficients(&h, 0.0).unwrap();
            let right = g.tail_window(Side::Right, 10.0, 15.0).unwrap();
            let left = g.tail_window(Side::Left, 10.0, 15.0).unwrap();
            let cp = c_plus_estimate(&u, right).unwrap().value;
            let cm = c_minus_estimate(&u, left).unwrap().value;
            prop_assert!(cp > 0.0 && (cp - tc.e_plus).abs() < 5e-3 * tc.e_plus);
            prop_assert!(cm > 0.0 && (cm - tc.e_minus).abs() < 5e-3 * tc.e_minus);
        }

        #[test]
        fn weighted_sup_never_below_plain_sup_near_origin(theta in 0.05f64..0.95, cutoff in 1.0f64..30.0) {
            let g = Grid1D::new(-10.0, 10.0, 201).unwrap();
            let u = g.sample("u", |x| (-x.abs()).exp()).unwrap();
            let w = WeightProfile::new(theta, cutoff).unwrap();
            prop_assert!(weighted_sup(&u, &w) >= 1.0 - 1e-12);
        }
    }
}
