//! Refinement studies and operator checks that are not tied to a single run.

use serde::Serialize;

use crate::diagnostics::{h1, kernel_weight_sup, kernel_weight_sup_exact, m0, WeightProfile};
use crate::dynamics::{evolve, step_rk4_dt, SolverState, TimeStepConfig};
use crate::error::{Result, SolverError};
use crate::flowmap::{advance_flow_to, check_momentum_conservation, FlowState, VelocityRecord};
use crate::greens::{apply_helmholtz, conv_dg, conv_g};
use crate::grid::{derivative, Field, Grid1D};

use super::data::InitialData;
use super::report::Verdict;

/// Successive differences between resolutions and the orders they imply.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrderStudy {
    pub label: String,
    /// Step (`dt` or `dx`) of the coarser member of each compared pair.
    pub steps: Vec<f64>,
    pub differences: Vec<f64>,
    /// `log(d_k / d_{k+1}) / log(step_k / step_{k+1})`.
    pub orders: Vec<f64>,
}

impl OrderStudy {
    pub fn new(label: &str, steps: Vec<f64>, differences: Vec<f64>) -> Self {
        let orders = differences
            .windows(2)
            .zip(steps.windows(2))
            .map(|(d, s)| (d[0] / d[1]).ln() / (s[0] / s[1]).ln())
            .collect();
        Self { label: label.into(), steps, differences, orders }
    }

    /// Order measured on the finest pair.
    pub fn observed(&self) -> f64 {
        self.orders.last().copied().unwrap_or(f64::NAN)
    }
}

/// Max difference of two solutions at the nodes of the coarser grid, which
/// must be nodes of the finer one.
fn coarse_difference(coarse: &Field, fine: &Field) -> f64 {
    let ratio = (fine.grid().n() - 1) / (coarse.grid().n() - 1);
    coarse.values().iter().enumerate().fold(0.0, |m, (i, v)| m.max((v - fine.values()[i * ratio]).abs()))
}

fn fixed_step_solve(u0: Field, dt: f64, t_end: f64) -> std::result::Result<Field, SolverError> {
    let steps = (t_end / dt).round() as usize;
    let mut s = SolverState::new(u0);
    for _ in 0..steps {
        s = step_rk4_dt(&s, dt)?;
    }
    Ok(s.u)
}

fn study_data() -> InitialData {
    InitialData::Gaussian { amplitude: 0.5, center: 0.0, width: 2.0 }
}

/// Temporal order with fixed steps `dt, dt/2, dt/4, …` on one grid.
pub fn temporal_order(grid: &Grid1D, dts: &[f64], t_end: f64) -> Result<OrderStudy> {
    let u0 = study_data().sample(grid)?;
    let mut sols = Vec::new();
    for &dt in dts {
        sols.push(fixed_step_solve(u0.clone(), dt, t_end)?);
    }
    let diffs = sols.windows(2).map(|p| coarse_difference(&p[0], &p[1])).collect();
    Ok(OrderStudy::new("temporal", dts[..dts.len() - 1].to_vec(), diffs))
}

/// Spatial order on nested grids `[-l, l]` with `cells` intervals each, all
/// advanced with the same small fixed step.
pub fn spatial_order(half_width: f64, cells: &[usize], dt: f64, t_end: f64) -> Result<OrderStudy> {
    let mut sols = Vec::new();
    for &c in cells {
        let g = Grid1D::new(-half_width, half_width, c + 1)?;
        sols.push(fixed_step_solve(study_data().sample(&g)?, dt, t_end)?);
    }
    let diffs = sols.windows(2).map(|p| coarse_difference(&p[0], &p[1])).collect();
    let steps = cells[..cells.len() - 1].iter().map(|&c| 2.0 * half_width / c as f64).collect();
    Ok(OrderStudy::new("spatial", steps, diffs))
}

/// Momentum-transport residual of the flow map at `t_end`, refining space
/// and time together with `dt = cfl · dx / max|u|`.
pub fn flow_residual_order(half_width: f64, cells: &[usize], cfl: f64, t_end: f64) -> Result<OrderStudy> {
    let mut residuals = Vec::new();
    let mut steps = Vec::new();
    for &c in cells {
        let g = Grid1D::new(-half_width, half_width, c + 1)?;
        let u0 = study_data().sample(&g)?;
        let h0 = apply_helmholtz(&u0);
        let cfg = TimeStepConfig { cfl, dt_max: 1.0, t_end, ..TimeStepConfig::default() };
        let mut record = VelocityRecord::new();
        let traj = evolve(u0, &cfg, &mut [&mut record])?;
        traj.outcome?;
        let fs = advance_flow_to(&FlowState::identity(g.nodes().collect()), &record, t_end)?;
        let h = apply_helmholtz(&traj.final_state.u);
        residuals.push(check_momentum_conservation(&fs, &h, &h0)?.max);
        steps.push(g.dx());
    }
    Ok(OrderStudy::new("flow residual", steps, residuals))
}

/// Relative sup errors of the discrete operators on one grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OperatorCheck {
    pub label: String,
    /// `(1 - ∂²)(G * f)` against `f`.
    pub helmholtz_inverse: f64,
    /// `∂x G * f` against the derivative of `G * f`.
    pub derivative_kernel: f64,
}

impl OperatorCheck {
    pub fn worst(&self) -> f64 {
        self.helmholtz_inverse.max(self.derivative_kernel)
    }
}

/// Nodes farther than `margin` from either end; finite-difference stencils
/// at the ends see the truncation of the convolution.
fn interior_sup(a: &Field, b: &Field, margin: f64) -> f64 {
    let g = a.grid();
    let (lo, hi) = (g.x_min() + margin, g.x_max() - margin);
    let scale = b.max_abs().max(f64::MIN_POSITIVE);
    let err = (0..g.n())
        .filter(|&i| (lo..=hi).contains(&g.node(i)))
        .fold(0.0f64, |m, i| m.max((a.values()[i] - b.values()[i]).abs()));
    err / scale
}

pub fn operator_check(label: &str, f: &Field) -> OperatorCheck {
    let c = conv_g(f);
    let margin = 10.0 * f.grid().dx();
    OperatorCheck {
        label: label.into(),
        helmholtz_inverse: interior_sup(&apply_helmholtz(&c), f, margin),
        derivative_kernel: interior_sup(&conv_dg(f), &derivative(&c), margin),
    }
}

/// `G * e^{-|x|}` against `½ (1 + |x|) e^{-|x|}`, relative sup error.
pub fn peak_convolution_error(grid: &Grid1D) -> Result<f64> {
    let f = grid.sample("peak", |x| (-x.abs()).exp())?;
    let exact = grid.sample("exact", |x| 0.5 * (1.0 + x.abs()) * (-x.abs()).exp())?;
    Ok(interior_sup(&conv_g(&f), &exact, 0.0))
}

/// The operator checks run for the acceptance suite.
pub fn reference_operator_checks(grid: &Grid1D) -> Result<Vec<OperatorCheck>> {
    let samples = [
        ("smoothed peak", InitialData::SmoothedPeakon { c: 1.0, center: 0.0, epsilon: 0.5 }),
        ("gaussian", study_data()),
        ("compact bump", InitialData::CompactBump { amplitude: 0.25, center: 0.0, width: 2.0 }),
    ];
    samples.iter().map(|(label, d)| Ok(operator_check(label, &d.sample(grid)?))).collect()
}

/// Relative drift of `H¹` and `M₀` at `t_end` for Gaussian data.
pub fn conservation_drift(grid: &Grid1D, cfg: &TimeStepConfig) -> Result<(f64, f64)> {
    let u0 = study_data().sample(grid)?;
    let traj = evolve(u0.clone(), cfg, &mut [])?;
    traj.outcome?;
    let u = &traj.final_state.u;
    let rel = |a: f64, b: f64| if b == 0.0 { a.abs() } else { (a - b).abs() / b.abs() };
    Ok((rel(h1(u), h1(&u0)), rel(m0(u), m0(&u0))))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KernelWeightRow {
    pub theta: f64,
    pub cutoffs: Vec<f64>,
    pub measured: Vec<f64>,
    pub exact: Vec<f64>,
    /// `(max - min) / min` over the cutoffs.
    pub variation: f64,
}

/// `sup φ_N (e^{-|·|} * 1/φ_N)` on a grid with a node at `x = N`, spacing
/// about `spacing`.
pub fn kernel_weight_study(thetas: &[f64], cutoffs: &[f64], spacing: f64) -> Result<Vec<KernelWeightRow>> {
    let mut rows = Vec::new();
    for &theta in thetas {
        let mut measured = Vec::new();
        let mut exact = Vec::new();
        for &n in cutoffs {
            let w = WeightProfile::new(theta, n)?;
            let g = Grid1D::new(-20.0, n + 20.0, ((n + 40.0) / spacing).round() as usize + 1)?;
            measured.push(kernel_weight_sup(&g, &w));
            exact.push(kernel_weight_sup_exact(&w));
        }
        let lo = measured.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = measured.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        rows.push(KernelWeightRow { theta, cutoffs: cutoffs.to_vec(), measured, exact, variation: (hi - lo) / lo });
    }
    Ok(rows)
}

/// One verdict per `θ`: the bound must not vary by more than `tol` across
/// the cutoffs.
pub fn kernel_weight_verdicts(rows: &[KernelWeightRow], tol: f64) -> Vec<Verdict> {
    rows.iter()
        .map(|r| {
            Verdict::at_most("AC11", format!("N-uniform bound at theta = {}", r.theta), r.variation, tol)
                .with_detail(format!("bounds {:?} for N = {:?}", r.measured, r.cutoffs))
        })
        .collect()
}

/// Everything the `convergence` command measures.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub operators: Vec<OperatorCheck>,
    pub peak_error: f64,
    pub temporal: OrderStudy,
    pub spatial: OrderStudy,
    pub flow: OrderStudy,
    pub drift_h1: f64,
    pub drift_m0: f64,
    pub kernel_weight: Vec<KernelWeightRow>,
    pub verdicts: Vec<Verdict>,
}

impl ConvergenceReport {
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }
}

pub const OPERATOR_TOL: f64 = 1e-4;
pub const TEMPORAL_ORDER: f64 = 4.0;
pub const TEMPORAL_ORDER_TOL: f64 = 0.2;
pub const SPATIAL_ORDER_MIN: f64 = 1.8;
pub const KERNEL_WEIGHT_TOL: f64 = 0.05;

/// Runs the studies on `grid` (operator checks and drift) and on the fixed
/// refinement ladders used for the order measurements.
pub fn convergence_suite(grid: &Grid1D, time: &TimeStepConfig, conservation_tol: f64) -> Result<ConvergenceReport> {
    let operators = reference_operator_checks(grid)?;
    let peak_error = peak_convolution_error(grid)?;
    let temporal = temporal_order(&Grid1D::new(-30.0, 30.0, 513)?, &[0.2, 0.1, 0.05], 1.0)?;
    let spatial = spatial_order(20.0, &[128, 256, 512, 1024], 0.01, 0.5)?;
    let flow = flow_residual_order(20.0, &[256, 512, 1024], 0.25, 0.5)?;
    let (drift_h1, drift_m0) = conservation_drift(grid, time)?;
    let kernel_weight = kernel_weight_study(&[0.25, 0.5, 0.75, 0.9], &[8.0, 16.0, 32.0], 0.005)?;

    let mut verdicts: Vec<Verdict> =
        operators.iter().map(|c| Verdict::at_most("AC1", format!("operators on {}", c.label), c.worst(), OPERATOR_TOL)).collect();
    verdicts.push(Verdict::at_most("AC1", "convolution of the peak", peak_error, OPERATOR_TOL));
    verdicts.push(Verdict::at_most(
        "AC2",
        "temporal order",
        (temporal.observed() - TEMPORAL_ORDER).abs(),
        TEMPORAL_ORDER_TOL,
    ).with_detail(format!("observed {}", temporal.observed())));
    verdicts.push(Verdict::at_least("AC2", "spatial order", spatial.observed(), SPATIAL_ORDER_MIN));
    verdicts.push(Verdict::at_least("AC3", "flow residual order", flow.observed(), SPATIAL_ORDER_MIN));
    verdicts.push(Verdict::at_most("AC3", "H1 drift", drift_h1, conservation_tol));
    verdicts.push(Verdict::at_most("AC3", "M0 drift", drift_m0, conservation_tol));
    verdicts.extend(kernel_weight_verdicts(&kernel_weight, KERNEL_WEIGHT_TOL));
    Ok(ConvergenceReport { operators, peak_error, temporal, spatial, flow, drift_h1, drift_m0, kernel_weight, verdicts })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_of_exact_power_law() {
        let s = OrderStudy::new("x", vec![0.4, 0.2, 0.1], vec![3.0 * 0.4f64.powi(3), 3.0 * 0.2f64.powi(3), 3.0 * 0.1f64.powi(3)]);
        assert!(s.orders.iter().all(|p| (p - 3.0).abs() < 1e-12));
        assert!((s.observed() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn operators_are_accurate_on_smooth_data() {
        let g = Grid1D::new(-30.0, 30.0, 4801).unwrap();
        for c in reference_operator_checks(&g).unwrap() {
            assert!(c.worst() < 1e-4, "{c:?}");
        }
        let e = peak_convolution_error(&g).unwrap();
        assert!(e < 1e-4, "{e}");
    }

    #[test]
    fn kernel_weight_grows_with_cutoff() {
        let rows = kernel_weight_study(&[0.5], &[2.0, 4.0], 0.01).unwrap();
        let r = &rows[0];
        assert!(r.measured[1] > r.measured[0]);
        for (m, e) in r.measured.iter().zip(&r.exact) {
            assert!((m - e).abs() < 1e-5 * e);
        }
    }

    #[test]
    fn temporal_order_is_four() {
        let g = Grid1D::new(-30.0, 30.0, 257).unwrap();
        let s = temporal_order(&g, &[0.2, 0.1, 0.05], 1.0).unwrap();
        assert!((s.observed() - 4.0).abs() < 0.3, "{s:?}");
    }
}
