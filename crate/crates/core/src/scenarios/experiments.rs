//! The experiments. Each one evolves its initial data, measures every
//! monitored snapshot and turns the measurements into verdicts.

use crate::cli_io::config::{Experiment, RunConfig};
use crate::diagnostics::{
    c_minus_estimate, c_plus_estimate, e_plus_scale, exp_weighted_integral, fit_tail_with_floor, h1, m0,
    momentum_support, tail_coefficients, weighted_sup, RhoAccumulator, TailCoefficients, WeightProfile,
};
use crate::dynamics::{evolve, SolverState};
use crate::error::{Error, Result, SolverError};
use crate::flowmap::{advance_flow_to, check_momentum_conservation, support_endpoints, FlowState, VelocityRecord};
use crate::greens::apply_helmholtz;
use crate::grid::{derivative, Field, Grid1D, Side};

use super::data::InitialData;
use super::report::{ExperimentReport, ProfileSnapshot, SeriesRow, Verdict};

/// Raw output of one evolution.
struct Simulation {
    grid: Grid1D,
    u0: Field,
    record: VelocityRecord,
    final_state: SolverState,
    outcome: std::result::Result<(), SolverError>,
    rho: Option<Field>,
}

fn simulate(cfg: &RunConfig, rho_until: Option<f64>) -> Result<Simulation> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let data = cfg.scenario.initial_data();
    let u0 = data.sample(&grid)?;
    let mut record = VelocityRecord::new();
    let mut rho = rho_until.map(RhoAccumulator::new);
    let traj = match rho.as_mut() {
        Some(r) => evolve(u0.clone(), &cfg.time, &mut [&mut record, r])?,
        None => evolve(u0.clone(), &cfg.time, &mut [&mut record])?,
    };
    Ok(Simulation {
        grid,
        u0,
        record,
        final_state: traj.final_state,
        outcome: traj.outcome,
        rho: rho.and_then(|r| r.rho()),
    })
}

/// Per-row measurements that do not go into the CSV.
#[derive(Clone, Debug, Default)]
struct RowExtra {
    r2_right: f64,
    r2_left: f64,
    /// `max|h|` outside the padded flow image of the initial support,
    /// relative to `max|h|`.
    h_outside: f64,
    /// Distance, in cells, by which the measured support leaves the padded
    /// flow image.
    support_excess: f64,
    wsup_u_left: f64,
    wsup_ux_left: f64,
}

struct Analysis {
    rows: Vec<SeriesRow>,
    extra: Vec<RowExtra>,
    coefficients: Vec<Option<TailCoefficients>>,
    flow_residual: Option<f64>,
    flow_error: Option<String>,
    profiles: Vec<ProfileSnapshot>,
}

fn weighted_sup_left(u: &Field, w: &WeightProfile) -> f64 {
    let g = u.grid();
    u.values().iter().enumerate().fold(0.0, |m, (i, v)| m.max(v.abs() * w.phi(-g.node(i))))
}

fn analyze(sim: &Simulation, cfg: &RunConfig, track: Option<(f64, f64)>) -> Result<Analysis> {
    let g = sim.grid;
    let tol = &cfg.tolerances;
    let d = &cfg.diagnostics;
    let right = g.tail_window(Side::Right, d.tail_margin, d.tail_width)?;
    let left = g.tail_window(Side::Left, d.tail_margin, d.tail_width)?;
    let weight = WeightProfile::new(cfg.weight_theta(), d.weight_cutoff)?;
    let pad = tol.support_pad_cells * g.dx();
    let h0 = apply_helmholtz(&sim.u0);

    let mut flow = track.map(|(a, b)| FlowState::seed(&g, &[a, b]));
    let mut flow_error = None;
    let mut flow_residual = None;
    let mut out = Analysis {
        rows: Vec::new(),
        extra: Vec::new(),
        coefficients: Vec::new(),
        flow_residual: None,
        flow_error: None,
        profiles: Vec::new(),
    };
    let snapshots = sim.record.times().len();
    for k in 0..snapshots {
        let t = sim.record.times()[k];
        let u = sim.record.snapshot(k);
        let h = apply_helmholtz(u);
        let du = derivative(u);
        let tc = tail_coefficients(&h, t).ok();
        let fit_r = fit_tail_with_floor(u, right.clone(), tol.value_floor).ok();
        let fit_l = fit_tail_with_floor(u, left.clone(), tol.value_floor).ok();
        let support = momentum_support(&h, tol.support_threshold)?;

        let (mut eta_a, mut eta_b) = (f64::NAN, f64::NAN);
        if let (Some(fs), Some((a, b))) = (flow.as_mut(), track) {
            match advance_flow_to(fs, &sim.record, t) {
                Ok(next) => {
                    *fs = next;
                    (eta_a, eta_b) = support_endpoints(fs, a, b)?;
                    flow_residual = Some(check_momentum_conservation(fs, &h, &h0)?.max);
                }
                Err(e) => {
                    flow_error = Some(e.to_string());
                    flow = None;
                }
            }
        }

        let mut extra = RowExtra {
            r2_right: fit_r.as_ref().map_or(f64::NAN, |f| f.r2),
            r2_left: fit_l.as_ref().map_or(f64::NAN, |f| f.r2),
            wsup_u_left: weighted_sup_left(u, &weight),
            wsup_ux_left: weighted_sup_left(&du, &weight),
            ..Default::default()
        };
        if eta_a.is_finite() && eta_b.is_finite() {
            let (lo, hi) = (eta_a - pad, eta_b + pad);
            let hmax = h.max_abs();
            let outside = h
                .values()
                .iter()
                .enumerate()
                .filter(|(i, _)| {
                    let x = g.node(*i);
                    x < lo || x > hi
                })
                .fold(0.0f64, |m, (_, v)| m.max(v.abs()));
            extra.h_outside = if hmax > 0.0 { outside / hmax } else { 0.0 };
            if let Some((sl, sr)) = support {
                extra.support_excess = ((lo - sl).max(sr - hi).max(0.0)) / g.dx();
            }
        }

        out.rows.push(SeriesRow {
            t,
            h1: h1(u),
            m0: m0(u),
            e_plus: tc.map_or(f64::NAN, |c| c.e_plus),
            e_minus: tc.map_or(f64::NAN, |c| c.e_minus),
            de_plus_pred: tc.map_or(f64::NAN, |c| c.de_plus_dt_pred),
            c_plus: c_plus_estimate(u, right.clone()).map_or(f64::NAN, |p| p.value),
            c_minus: c_minus_estimate(u, left.clone()).map_or(f64::NAN, |p| p.value),
            slope_right: fit_r.as_ref().map_or(f64::NAN, |f| f.slope),
            slope_left: fit_l.as_ref().map_or(f64::NAN, |f| f.slope),
            supp_left: support.map_or(f64::NAN, |s| s.0),
            supp_right: support.map_or(f64::NAN, |s| s.1),
            eta_a,
            eta_b,
            wsup_u: weighted_sup(u, &weight),
            wsup_ux: weighted_sup(&du, &weight),
        });
        out.extra.push(extra);
        out.coefficients.push(tc);

        let is_stop = k == 0 || k + 1 == snapshots || cfg.time.checkpoints.contains(&t);
        if is_stop && cfg.output.wants("profiles") {
            out.profiles.push(ProfileSnapshot {
                t,
                x: g.nodes().collect(),
                u: u.values().to_vec(),
                h: h.values().to_vec(),
            });
        }
    }
    out.flow_residual = flow_residual;
    out.flow_error = flow_error;
    Ok(out)
}

impl Simulation {
    fn is_zero(&self) -> bool {
        self.u0.max_abs() == 0.0
    }
}

/// Largest of the values; `NaN` if any value is `NaN`.
fn worst<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    it.into_iter().fold(f64::NEG_INFINITY, |m, v| if m.is_nan() || v.is_nan() { f64::NAN } else { m.max(v) })
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn start_report(cfg: &RunConfig, sim: &Simulation, an: &Analysis) -> ExperimentReport {
    let mut rep = ExperimentReport::new(
        cfg.scenario.experiment.name(),
        serde_json::to_value(cfg).expect("configuration serializes"),
    );
    rep.rows = an.rows.clone();
    rep.profiles = an.profiles.clone();
    if let Err(e) = &sim.outcome {
        rep.partial = true;
        rep.blow_up = Some(e.to_string());
        rep.flagged_row = an.rows.len().checked_sub(1);
    }
    rep.metric("steps", sim.final_state.step_count as f64);
    rep.metric("t_final", sim.final_state.t);
    rep.metric("dx", sim.grid.dx());
    let (dh1, dm0) = sim.final_state.drift();
    rep.metric("drift_h1", dh1);
    rep.metric("drift_m0", dm0);
    if let Some(r) = an.flow_residual {
        let scale = apply_helmholtz(&sim.u0).max_abs();
        rep.metric("flow_residual_max", r);
        rep.metric("flow_residual_rel", if scale > 0.0 { r / scale } else { 0.0 });
    }
    rep
}

fn drift_verdict(rep: &mut ExperimentReport, sim: &Simulation, cfg: &RunConfig) {
    let (dh1, dm0) = sim.final_state.drift();
    rep.push(Verdict::at_most("AC3", "H1 drift", dh1, cfg.tolerances.conservation_tol));
    rep.push(Verdict::at_most("AC3", "M0 drift", dm0, cfg.tolerances.conservation_tol));
}

/// Rows at the configured checkpoints with `t > 0`; the last row when no
/// checkpoint was reached.
fn checkpoint_rows(rows: &[SeriesRow], cfg: &RunConfig) -> Vec<usize> {
    let idx: Vec<usize> =
        (0..rows.len()).filter(|&k| rows[k].t > 0.0 && cfg.time.checkpoints.contains(&rows[k].t)).collect();
    if idx.is_empty() {
        rows.len().checked_sub(1).filter(|&k| rows[k].t > 0.0).into_iter().collect()
    } else {
        idx
    }
}

fn e_plus_zero_verdicts(rep: &mut ExperimentReport, u0: &Field, cfg: &RunConfig) {
    let h0 = apply_helmholtz(u0);
    for (sign, name) in [(1.0, "E+(0) vanishes"), (-1.0, "E-(0) vanishes")] {
        let residual = exp_weighted_integral(&h0, sign).abs();
        let scale = exp_weighted_integral(&u0.map_with_x("|u0|", |_, v| v.abs()), sign);
        let measured = if scale > 0.0 { residual / scale } else { residual };
        rep.push(Verdict::at_most("AC4", name, measured, cfg.tolerances.e_plus_zero_tol));
    }
    rep.metric("e_plus_0", exp_weighted_integral(&h0, 1.0));
    rep.metric("e_plus_scale", e_plus_scale(u0));
}

/// Strict monotonicity of `E±` and the rate law for `E₊`.
fn monotone_verdicts(rep: &mut ExperimentReport, rows: &[SeriesRow], cfg: &RunConfig, zero: bool) {
    let eps = cfg.tolerances.monotone_eps;
    let ep: Vec<f64> = rows.iter().map(|r| r.e_plus).collect();
    let em: Vec<f64> = rows.iter().map(|r| r.e_minus).collect();
    let rise = -worst(ep.windows(2).map(|w| -(w[1] - w[0])));
    let fall = worst(em.windows(2).map(|w| w[1] - w[0]));
    if zero {
        rep.push(Verdict::new("AC5", "E+ strictly increasing", 0.0, eps, true).with_detail("zero data"));
        rep.push(Verdict::new("AC5", "E- strictly decreasing", 0.0, eps, true).with_detail("zero data"));
        rep.push(Verdict::new("AC5", "dE+/dt matches prediction", 0.0, 0.0, true).with_detail("zero data"));
        return;
    }
    rep.push(Verdict::new("AC5", "E+ strictly increasing", rise, eps, rise > eps));
    rep.push(Verdict::new("AC5", "E- strictly decreasing", fall, -eps, fall < -eps));
    // three-point derivative on a possibly non-uniform time grid
    let mismatch = worst((1..rows.len().saturating_sub(1)).map(|k| {
        let (t0, t1, t2) = (rows[k - 1].t, rows[k].t, rows[k + 1].t);
        let (a, b) = (t1 - t0, t2 - t1);
        let fd = -ep[k - 1] * b / (a * (a + b)) + ep[k] * (b - a) / (a * b) + ep[k + 1] * a / (b * (a + b));
        rel(fd, rows[k].de_plus_pred)
    }));
    rep.push(Verdict::at_most("AC5", "dE+/dt matches prediction", mismatch, cfg.tolerances.derivative_match_tol));
}

/// Exponential-tail verdicts at checkpoint rows: slope, fit quality, plateau
/// against `E±`, and optionally the signs of `c±`.
fn tail_verdicts(
    rep: &mut ExperimentReport,
    an: &Analysis,
    cfg: &RunConfig,
    idx: &[usize],
    signs: bool,
    zero: bool,
) {
    let tol = &cfg.tolerances;
    let rows = &an.rows;
    if zero {
        let below = rows.iter().all(|r| r.slope_right.is_nan() && r.slope_left.is_nan());
        rep.push(
            Verdict::new("AC6", "tails below floor for zero data", below as u8 as f64, 1.0, below)
                .with_detail("zero data"),
        );
        return;
    }
    for (side, target) in [("right", -1.0), ("left", 1.0)] {
        let slope = |r: &SeriesRow| if side == "right" { r.slope_right } else { r.slope_left };
        let r2 = |k: usize| if side == "right" { an.extra[k].r2_right } else { an.extra[k].r2_left };
        let (c, e) = if side == "right" { ("c+", "E+") } else { ("c-", "E-") };
        let pair = |r: &SeriesRow| if side == "right" { (r.c_plus, r.e_plus) } else { (r.c_minus, r.e_minus) };

        let dev = worst(idx.iter().map(|&k| (slope(&rows[k]) - target).abs()));
        rep.push(Verdict::at_most("AC6", format!("{side} tail slope {target:+}"), dev, tol.slope_tol));
        let fit = -worst(idx.iter().map(|&k| -r2(k)));
        rep.push(Verdict::new("AC6", format!("{side} tail fit r2"), fit, tol.r2_min, fit > tol.r2_min));
        let m = worst(idx.iter().map(|&k| {
            let (cv, ev) = pair(&rows[k]);
            rel(cv, ev)
        }));
        rep.push(Verdict::at_most("AC6", format!("{c} matches {e}"), m, tol.e_match_tol));
        if signs {
            if side == "right" {
                let lowest = -worst(idx.iter().map(|&k| -rows[k].c_plus));
                rep.push(Verdict::new("AC6", "c+ positive", lowest, 0.0, lowest > 0.0));
            } else {
                let highest = worst(idx.iter().map(|&k| rows[k].c_minus));
                rep.push(Verdict::new("AC6", "c- negative", highest, 0.0, highest < 0.0));
            }
        }
    }
}

fn need(cond: bool, message: impl Into<String>) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Precondition(message.into()))
    }
}

/// Dispatches on `cfg.scenario.experiment`.
pub fn run_experiment(cfg: &RunConfig) -> Result<ExperimentReport> {
    match cfg.scenario.experiment {
        Experiment::Persistence => persistence(cfg),
        Experiment::CompactSupport => compact_support(cfg),
        Experiment::UniqueContinuation => unique_continuation(cfg),
        Experiment::PeakonValidation => peakon_validation(cfg),
        Experiment::FastDecay => fast_decay(cfg),
        Experiment::OptimalTail => optimal_tail(cfg),
    }
}

fn with(cfg: &RunConfig, experiment: Experiment, t_end: f64) -> RunConfig {
    let mut c = cfg.clone();
    c.scenario.experiment = experiment;
    c.time.t_end = t_end;
    c
}

/// Sech data with `e^{-θ|x|}` tails evolved to `t_end`.
pub fn run_persistence(theta: f64, t_end: f64, cfg: &RunConfig) -> Result<ExperimentReport> {
    let mut c = with(cfg, Experiment::Persistence, t_end);
    c.scenario.theta = theta;
    persistence(&c)
}

pub fn run_compact_support(t_end: f64, cfg: &RunConfig) -> Result<ExperimentReport> {
    compact_support(&with(cfg, Experiment::CompactSupport, t_end))
}

/// Runs to `t1` and compares `c₊(t1)` with `½ ∫ e^{y} ρ(y) dy`.
pub fn run_unique_continuation(t1: f64, cfg: &RunConfig) -> Result<ExperimentReport> {
    let mut c = with(cfg, Experiment::UniqueContinuation, t1);
    c.scenario.t1 = t1;
    unique_continuation(&c)
}

pub fn run_peakon_validation(c: f64, eps: f64, t_end: f64, cfg: &RunConfig) -> Result<ExperimentReport> {
    let mut k = with(cfg, Experiment::PeakonValidation, t_end);
    k.scenario.c = c;
    k.scenario.epsilon = eps;
    peakon_validation(&k)
}

pub fn run_fast_decay(mu: f64, t_end: f64, cfg: &RunConfig) -> Result<ExperimentReport> {
    let mut c = with(cfg, Experiment::FastDecay, t_end);
    c.scenario.mu = mu;
    fast_decay(&c)
}

pub fn run_optimal_tail(t_end: f64, cfg: &RunConfig) -> Result<ExperimentReport> {
    optimal_tail(&with(cfg, Experiment::OptimalTail, t_end))
}

fn persistence(cfg: &RunConfig) -> Result<ExperimentReport> {
    let data = cfg.scenario.initial_data();
    need(matches!(data, InitialData::SechTail { .. }), "the persistence experiment needs sech_tail data")?;
    let sim = simulate(cfg, None)?;
    let an = analyze(&sim, cfg, None)?;
    let mut rep = start_report(cfg, &sim, &an);
    let theta = cfg.scenario.theta;
    let margin = cfg.tolerances.persistence_slope_margin;
    let rows = &an.rows;

    let zero = sim.is_zero();
    let right: Vec<f64> = rows.iter().map(|r| r.slope_right).filter(|s| !s.is_nan()).collect();
    let left: Vec<f64> = rows.iter().map(|r| r.slope_left).filter(|s| !s.is_nan()).collect();
    let complete = right.len() == rows.len() && left.len() == rows.len();
    if zero {
        rep.push(Verdict::new("AC8", "right tail slope bound", f64::NAN, -theta + margin, true).with_detail("zero data"));
        rep.push(Verdict::new("AC8", "left tail slope bound", f64::NAN, theta - margin, true).with_detail("zero data"));
    } else {
        let hi = if complete { worst(right.iter().copied()) } else { f64::NAN };
        let lo = if complete { -worst(left.iter().map(|s| -s)) } else { f64::NAN };
        rep.push(Verdict::at_most("AC8", "right tail slope bound", hi, -theta + margin));
        rep.push(Verdict::at_least("AC8", "left tail slope bound", lo, theta - margin));
        rep.metric("slope_right_min", -worst(right.iter().map(|s| -s)));
        rep.metric("slope_right_max", hi);
        rep.metric("slope_left_min", lo);
        rep.metric("slope_left_max", worst(left.iter().copied()));
    }
    let ratio = |series: Vec<f64>| {
        let first = series[0];
        let peak = worst(series);
        if first > 0.0 {
            peak / first
        } else if peak == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    };
    let r_right = ratio(rows.iter().map(|r| r.wsup_u + r.wsup_ux).collect());
    let r_left = ratio(an.extra.iter().map(|e| e.wsup_u_left + e.wsup_ux_left).collect());
    rep.push(Verdict::new("AC8", "weighted norms bounded", r_right, f64::INFINITY, r_right.is_finite()));
    rep.push(Verdict::new("AC8", "mirrored weighted norms bounded", r_left, f64::INFINITY, r_left.is_finite()));
    rep.metric("weighted_norm_ratio", r_right);
    rep.metric("weighted_norm_ratio_left", r_left);
    drift_verdict(&mut rep, &sim, cfg);
    rep.finish();
    Ok(rep)
}

fn compact_data(cfg: &RunConfig, grid: &Grid1D) -> Result<(f64, f64)> {
    let data = cfg.scenario.initial_data();
    let (a, b) = data.support().ok_or_else(|| Error::Precondition("this experiment needs compact_bump data".into()))?;
    let d = &cfg.diagnostics;
    let room = d.tail_margin + d.tail_width;
    need(
        a > grid.x_min() + room && b < grid.x_max() - room,
        format!("support [{a}, {b}] must stay clear of the tail windows"),
    )?;
    Ok((a, b))
}

fn compact_support(cfg: &RunConfig) -> Result<ExperimentReport> {
    let (a, b) = compact_data(cfg, &cfg.grid()?)?;
    let sim = simulate(cfg, None)?;
    let an = analyze(&sim, cfg, Some((a, b)))?;
    let mut rep = start_report(cfg, &sim, &an);
    let zero = sim.is_zero();
    let tol = &cfg.tolerances;

    e_plus_zero_verdicts(&mut rep, &sim.u0, cfg);
    monotone_verdicts(&mut rep, &an.rows, cfg, zero);
    let idx = checkpoint_rows(&an.rows, cfg);
    tail_verdicts(&mut rep, &an, cfg, &idx, true, zero);
    let first = &an.rows[0];
    let compact_start = first.slope_right.is_nan() && first.slope_left.is_nan();
    rep.push(Verdict::new("AC6", "tails below floor at t = 0", compact_start as u8 as f64, 1.0, compact_start));

    if let Some(e) = &an.flow_error {
        rep.push(Verdict::new("AC9", "flow map", f64::NAN, 0.0, false).with_detail(e.clone()));
    } else {
        let outside = worst(an.extra.iter().map(|e| e.h_outside));
        rep.push(Verdict::at_most("AC9", "momentum outside flow image", outside, tol.support_threshold));
        let excess = worst(an.extra.iter().map(|e| e.support_excess));
        rep.push(Verdict::at_most("AC9", "support bracketed by eta_a, eta_b", excess, 0.0));
        rep.metric("momentum_outside_max", outside);
    }
    drift_verdict(&mut rep, &sim, cfg);
    rep.finish();
    Ok(rep)
}

fn unique_continuation(cfg: &RunConfig) -> Result<ExperimentReport> {
    let mut cfg = cfg.clone();
    cfg.time.t_end = cfg.scenario.t1;
    let cfg = &cfg;
    let (a, b) = compact_data(cfg, &cfg.grid()?)?;
    let t1 = cfg.scenario.t1;
    let sim = simulate(cfg, Some(t1))?;
    let an = analyze(&sim, cfg, Some((a, b)))?;
    let mut rep = start_report(cfg, &sim, &an);
    let zero = sim.is_zero();

    let rho = sim.rho.clone().unwrap_or_else(|| sim.grid.zeros("ρ"));
    let c0 = exp_weighted_integral(&rho, 1.0);
    let last = an.rows.last().expect("at least the initial row");
    let c_plus = if last.c_plus.is_nan() && zero { 0.0 } else { last.c_plus };
    rep.metric("c0", c0);
    rep.metric("c_plus_t1", c_plus);
    rep.metric("e_plus_t1", last.e_plus);
    rep.metric("t1", last.t);
    let right = sim.grid.tail_window(Side::Right, cfg.diagnostics.tail_margin, cfg.diagnostics.tail_width)?;
    if let Ok(fit) = fit_tail_with_floor(&sim.final_state.u, right, cfg.tolerances.value_floor) {
        rep.metric("fit_prefactor_t1", fit.log_prefactor.exp());
        rep.metric("fit_slope_t1", fit.slope);
    }

    e_plus_zero_verdicts(&mut rep, &sim.u0, cfg);
    if zero {
        rep.push(Verdict::new("AC7", "c+(t1) equals source integral", 0.0, cfg.tolerances.uc_match_tol, c0 == 0.0));
        rep.push(Verdict::new("AC7", "c+(t1) positive", c_plus, 0.0, c_plus == 0.0).with_detail("zero data"));
    } else {
        rep.push(Verdict::at_most("AC7", "c+(t1) equals source integral", rel(c_plus, c0), cfg.tolerances.uc_match_tol));
        rep.push(Verdict::new("AC7", "c+(t1) positive", c_plus, 0.0, c_plus > 0.0));
    }
    drift_verdict(&mut rep, &sim, cfg);
    rep.finish();
    Ok(rep)
}

/// Crest position: argmax refined by the vertex of the parabola through the
/// three nodes around it.
pub fn peak_position(u: &Field) -> Option<f64> {
    let v = u.values();
    let (i, &m) = v.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1))?;
    if m <= 0.0 {
        return None;
    }
    let g = u.grid();
    if i == 0 || i + 1 == v.len() {
        return Some(g.node(i));
    }
    let (a, b, c) = (v[i - 1], v[i], v[i + 1]);
    let curv = a - 2.0 * b + c;
    let shift = if curv != 0.0 { 0.5 * (a - c) / curv } else { 0.0 };
    Some(g.node(i) + shift * g.dx())
}

fn peakon_validation(cfg: &RunConfig) -> Result<ExperimentReport> {
    let data = cfg.scenario.initial_data();
    need(
        matches!(data, InitialData::SmoothedPeakon { .. }),
        "the peakon experiment needs smoothed_peakon data",
    )?;
    let sim = simulate(cfg, None)?;
    let an = analyze(&sim, cfg, None)?;
    let mut rep = start_report(cfg, &sim, &an);
    let tol = &cfg.tolerances;
    let (c, q) = (cfg.scenario.c, cfg.scenario.center);
    let t = sim.final_state.t;

    let displacement = match (peak_position(&sim.u0), peak_position(&sim.final_state.u)) {
        (Some(p0), Some(p1)) => p1 - p0,
        _ => 0.0,
    };
    rep.metric("displacement", displacement);
    rep.metric("speed", if t > 0.0 { displacement / t } else { 0.0 });
    rep.push(Verdict::at_most("AC10", "peak displacement", (displacement - c * t).abs(), tol.peakon_distance_tol));

    let scale = sim.u0.max_abs();
    let mut shape = 0.0f64;
    for (i, x) in sim.grid.nodes().enumerate() {
        if let Some(v0) = sim.u0.interpolate(x - displacement) {
            shape = shape.max((sim.final_state.u.values()[i] - v0).abs());
        }
    }
    let shape = if scale > 0.0 { shape / scale } else { 0.0 };
    rep.push(Verdict::at_most("AC10", "shape error", shape, tol.peakon_shape_tol));

    let last = an.rows.last().expect("at least the initial row");
    if scale > 0.0 {
        rep.push(Verdict::at_most("AC10", "right tail slope -1", (last.slope_right + 1.0).abs(), tol.slope_tol));
        let expected = c * q.exp();
        let e0 = an.rows[0].e_plus;
        rep.push(
            Verdict::at_most("AC4", "negative control E+(0) = c e^q", rel(e0, expected), tol.negative_control_tol)
                .with_detail(format!("E+(0) = {e0}, c e^q = {expected}")),
        );
    }
    rep.finish();
    Ok(rep)
}

fn fast_decay(cfg: &RunConfig) -> Result<ExperimentReport> {
    let data = cfg.scenario.initial_data();
    let mu = cfg.scenario.mu;
    need(
        data.decay_rate() > 1.0 + mu,
        format!("{data:?} decays like e^{{-{}|x|}}, not faster than e^{{-(1+{mu})|x|}}", data.decay_rate()),
    )?;
    let sim = simulate(cfg, None)?;
    let an = analyze(&sim, cfg, None)?;
    let mut rep = start_report(cfg, &sim, &an);
    let zero = sim.is_zero();
    let tol = &cfg.tolerances;

    let x0 = data.center().unwrap_or(0.0);
    let [lo, hi] = cfg.diagnostics.h_tail_window;
    let g = sim.grid;
    let wr = g.window_between(x0 + lo, x0 + hi)?;
    let wl = g.window_between(x0 - hi, x0 - lo)?;
    let (mut steep_r, mut steep_l) = (f64::NEG_INFINITY, f64::INFINITY);
    for k in 0..sim.record.times().len() {
        let h = apply_helmholtz(sim.record.snapshot(k));
        let sr = fit_tail_with_floor(&h, wr.clone(), tol.value_floor).map_or(f64::NAN, |f| f.slope);
        let sl = fit_tail_with_floor(&h, wl.clone(), tol.value_floor).map_or(f64::NAN, |f| f.slope);
        steep_r = if steep_r.is_nan() || sr.is_nan() { f64::NAN } else { steep_r.max(sr) };
        steep_l = if steep_l.is_nan() || sl.is_nan() { f64::NAN } else { steep_l.min(sl) };
    }
    if zero {
        rep.push(Verdict::new("AC6", "momentum tail rate right", f64::NAN, -(1.0 + mu) + tol.slope_tol, true).with_detail("zero data"));
        rep.push(Verdict::new("AC6", "momentum tail rate left", f64::NAN, 1.0 + mu - tol.slope_tol, true).with_detail("zero data"));
    } else {
        rep.push(Verdict::at_most("AC6", "momentum tail rate right", steep_r, -(1.0 + mu) + tol.slope_tol));
        rep.push(Verdict::at_least("AC6", "momentum tail rate left", steep_l, 1.0 + mu - tol.slope_tol));
    }
    rep.metric("h_slope_right_max", steep_r);
    rep.metric("h_slope_left_min", steep_l);

    monotone_verdicts(&mut rep, &an.rows, cfg, zero);
    let idx = checkpoint_rows(&an.rows, cfg);
    tail_verdicts(&mut rep, &an, cfg, &idx, true, zero);
    drift_verdict(&mut rep, &sim, cfg);
    rep.finish();
    Ok(rep)
}

fn optimal_tail(cfg: &RunConfig) -> Result<ExperimentReport> {
    let data = cfg.scenario.initial_data();
    need(data.decay_rate() == 1.0, "the optimal-tail experiment needs data with e^{-|x|} tails")?;
    let sim = simulate(cfg, None)?;
    let an = analyze(&sim, cfg, None)?;
    let mut rep = start_report(cfg, &sim, &an);
    let zero = sim.is_zero();
    let mut idx = vec![0];
    idx.extend(checkpoint_rows(&an.rows, cfg));
    tail_verdicts(&mut rep, &an, cfg, &idx, false, zero);
    if !zero {
        let steepest = worst(an.rows.iter().map(|r| -r.slope_right));
        rep.metric("steepest_right_rate", steepest);
    }
    drift_verdict(&mut rep, &sim, cfg);
    rep.finish();
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli_io::config::RunConfig;

    fn small(e: Experiment) -> RunConfig {
        let mut cfg = RunConfig::reference(e);
        cfg.grid.x_min = -40.0;
        cfg.grid.x_max = 40.0;
        cfg.grid.n = 1601;
        cfg.diagnostics.tail_margin = 20.0;
        cfg.diagnostics.tail_width = 10.0;
        cfg.time.t_end = 0.5;
        cfg.time.checkpoints = vec![0.25, 0.5];
        cfg
    }

    #[test]
    fn zero_data_is_a_degenerate_pass() {
        for e in [Experiment::CompactSupport, Experiment::Persistence, Experiment::FastDecay, Experiment::UniqueContinuation] {
            let mut cfg = small(e);
            cfg.scenario.amplitude = 0.0;
            let rep = run_experiment(&cfg).unwrap();
            assert!(rep.verdicts.iter().all(|v| v.pass), "{e:?}: {:#?}", rep.verdicts);
            assert!(rep.rows.iter().all(|r| r.h1 == 0.0 && r.e_plus == 0.0 || r.e_plus.is_nan()));
        }
    }

    #[test]
    fn peak_position_refines_between_nodes() {
        let g = Grid1D::new(-5.0, 5.0, 101).unwrap();
        let u = g.sample("u", |x| 1.0 - (x - 0.037).powi(2)).unwrap();
        assert!((peak_position(&u).unwrap() - 0.037).abs() < 1e-12);
        assert_eq!(peak_position(&g.zeros("u")), None);
    }

    #[test]
    fn preconditions_are_enforced() {
        let mut cfg = small(Experiment::FastDecay);
        cfg.scenario.kind = Some(crate::cli_io::config::DataKind::SechTail);
        cfg.scenario.theta = 0.9;
        assert!(matches!(run_experiment(&cfg), Err(Error::Precondition(_))));
        let mut cfg = small(Experiment::CompactSupport);
        cfg.scenario.kind = Some(crate::cli_io::config::DataKind::Gaussian);
        assert!(matches!(run_experiment(&cfg), Err(Error::Precondition(_))));
    }

    #[test]
    fn doubling_amplitude_increases_the_source() {
        let mut cfg = small(Experiment::UniqueContinuation);
        cfg.scenario.t1 = 0.25;
        let c0 = |a: f64| {
            let mut c = cfg.clone();
            c.scenario.amplitude = a;
            run_experiment(&c).unwrap().metrics["c0"]
        };
        assert!(c0(0.5) > c0(0.25));
    }
}

#[cfg(test)]
mod reproducibility {
    use super::*;
    use crate::cli_io::output::{report_json, series_csv};
    use crate::scenarios::report::is_criterion;

    fn quick(e: Experiment) -> RunConfig {
        let mut cfg = RunConfig::reference(e);
        cfg.grid.x_min = -40.0;
        cfg.grid.x_max = 40.0;
        cfg.grid.n = 1601;
        cfg.diagnostics.tail_margin = 20.0;
        cfg.diagnostics.tail_width = 10.0;
        cfg.time.t_end = 0.5;
        cfg.time.checkpoints = vec![0.25, 0.5];
        cfg.scenario.epsilon = 0.25;
        cfg
    }

    #[test]
    fn reports_are_bit_identical_and_well_formed() {
        for e in Experiment::ALL {
            let cfg = quick(e);
            let a = run_experiment(&cfg).unwrap();
            let b = run_experiment(&cfg).unwrap();
            assert_eq!(report_json(&a), report_json(&b), "{e:?}");
            assert_eq!(series_csv(&a.rows), series_csv(&b.rows), "{e:?}");
            assert!(a.rows.windows(2).all(|p| p[1].t > p[0].t));
            assert!(a.verdicts.iter().all(|v| is_criterion(&v.id)));
            assert!(!a.verdicts.is_empty());
        }
    }

    #[test]
    fn peakon_speed_follows_amplitude() {
        let mut cfg = quick(Experiment::PeakonValidation);
        cfg.grid.n = 3201;
        let d = |c: f64| run_peakon_validation(c, 0.1, 0.5, &cfg).unwrap().metrics["displacement"];
        assert!((d(1.0) - 0.5).abs() < 0.02);
        assert!((d(2.0) - 1.0).abs() < 0.03);
        assert_eq!(d(0.0), 0.0);
    }

    #[test]
    fn high_theta_persistence_keeps_finite_weighted_norms() {
        let rep = run_persistence(0.9, 0.5, &quick(Experiment::Persistence)).unwrap();
        let r = rep.metrics["weighted_norm_ratio"];
        assert!(r.is_finite() && r > 0.0);
    }
}
