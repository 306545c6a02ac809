//! Time integration of `u_t + u u_x + ∂x G * F(u) = 0` and of the momentum
//! transport `h_t + u h_x = -2 u_x h`.

use serde::{Deserialize, Serialize};

use crate::diagnostics::{f_field, h1, m0};
use crate::error::{Error, Result, SolverError};
use crate::greens::{conv_dg, conv_g};
use crate::grid::{derivative, Field};

/// Lower bound on `max|u|` in the CFL formula.
pub const U_FLOOR: f64 = 1e-12;

/// Steps shorter than this are treated as a collapse of the time step.
pub const DT_MIN: f64 = 1e-12;

/// Values below this magnitude are flushed to zero when `tail_clamp` is on.
pub const CLAMP_LEVEL: f64 = 1e-300;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Baselines {
    pub h1: f64,
    pub m0: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverState {
    pub t: f64,
    pub u: Field,
    pub step_count: usize,
    pub baselines: Baselines,
}

impl SolverState {
    pub fn new(u0: Field) -> Self {
        let baselines = Baselines { h1: h1(&u0), m0: m0(&u0) };
        Self { t: 0.0, u: u0, step_count: 0, baselines }
    }

    /// Relative drift of `(H1, M0)` from their initial values. A zero
    /// baseline is compared in absolute terms.
    pub fn drift(&self) -> (f64, f64) {
        let rel = |now: f64, base: f64| (now - base).abs() / if base != 0.0 { base.abs() } else { 1.0 };
        (rel(h1(&self.u), self.baselines.h1), rel(m0(&self.u), self.baselines.m0))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeStepConfig {
    pub cfl: f64,
    pub dt_max: f64,
    pub t_end: f64,
    pub monitor_stride: usize,
    /// Times that must be hit exactly and reported to monitors.
    #[serde(default)]
    pub checkpoints: Vec<f64>,
    #[serde(default)]
    pub tail_clamp: bool,
}

impl Default for TimeStepConfig {
    fn default() -> Self {
        Self { cfl: 0.25, dt_max: 0.05, t_end: 1.0, monitor_stride: 1, checkpoints: Vec::new(), tail_clamp: false }
    }
}

fn bad(key: &str, message: &str) -> Error {
    Error::Parameter { key: key.into(), message: message.into() }
}

impl TimeStepConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl <= 0.5) {
            return Err(bad("cfl", "must be in (0, 0.5]"));
        }
        if !(self.dt_max > 0.0 && self.dt_max.is_finite()) {
            return Err(bad("dt_max", "must be positive"));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(bad("t_end", "must be positive"));
        }
        if self.monitor_stride == 0 {
            return Err(bad("monitor_stride", "must be at least 1"));
        }
        if self.checkpoints.iter().any(|c| !(c.is_finite() && *c > 0.0)) {
            return Err(bad("checkpoints", "must be positive times"));
        }
        Ok(())
    }

    /// `min(dt_max, cfl·Δx / max(|u|, U_FLOOR))`.
    pub fn stable_dt(&self, u: &Field) -> f64 {
        let speed = u.max_abs().max(U_FLOOR);
        self.dt_max.min(self.cfl * u.grid().dx() / speed)
    }

    /// First checkpoint or `t_end` strictly after `t`.
    fn next_stop(&self, t: f64) -> f64 {
        self.checkpoints
            .iter()
            .copied()
            .filter(|&c| c > t * (1.0 + 1e-14) + 1e-14 && c < self.t_end)
            .fold(self.t_end, f64::min)
    }
}

/// `-u ∂x u - ∂x G * F(u)`.
pub fn rhs(u: &Field) -> Field {
    let du = derivative(u);
    let nonlocal = conv_dg(&f_field(u));
    let values = u
        .values()
        .iter()
        .zip(du.values())
        .zip(nonlocal.values())
        .map(|((a, b), c)| -a * b - c)
        .collect();
    Field::from_raw(*u.grid(), values, "rhs")
}

/// `-u ∂x h - 2 (∂x u) h`.
pub fn rhs_momentum(h: &Field, u: &Field) -> Result<Field> {
    if h.grid() != u.grid() {
        return Err(Error::GridMismatch);
    }
    let dh = derivative(h);
    let du = derivative(u);
    let values = (0..h.values().len())
        .map(|i| -u.values()[i] * dh.values()[i] - 2.0 * du.values()[i] * h.values()[i])
        .collect();
    Ok(Field::from_raw(*h.grid(), values, "rhs_h"))
}

fn axpy(base: &Field, k: &Field, a: f64) -> Field {
    let values = base.values().iter().zip(k.values()).map(|(x, y)| x + a * y).collect();
    Field::from_raw(*base.grid(), values, base.role())
}

/// One classical RK4 step of `y' = f(y)`. Fails on the first non-finite stage.
fn rk4(y: &Field, dt: f64, t: f64, f: impl Fn(&Field) -> Field) -> std::result::Result<Field, SolverError> {
    let check = |k: Field, stage: usize| match k.first_non_finite() {
        None => Ok(k),
        Some((i, v)) => Err(SolverError::BlowUp {
            t,
            detail: format!("stage {stage} produced {v} at x = {}", k.grid().node(i)),
        }),
    };
    let k1 = check(f(y), 1)?;
    let k2 = check(f(&axpy(y, &k1, 0.5 * dt)), 2)?;
    let k3 = check(f(&axpy(y, &k2, 0.5 * dt)), 3)?;
    let k4 = check(f(&axpy(y, &k3, dt)), 4)?;
    let values = (0..y.values().len())
        .map(|i| {
            y.values()[i]
                + dt / 6.0 * (k1.values()[i] + 2.0 * k2.values()[i] + 2.0 * k3.values()[i] + k4.values()[i])
        })
        .collect();
    check(Field::from_raw(*y.grid(), values, y.role()), 5)
}

fn clamp_tails(u: Field) -> Field {
    let role = u.role().to_string();
    let grid = *u.grid();
    let values = u.into_values().into_iter().map(|v| if v.abs() < CLAMP_LEVEL { 0.0 } else { v }).collect();
    Field::from_raw(grid, values, &role)
}

/// Length of the next step from `t`: the stable step, shortened to land on
/// the next stop without leaving a sliver behind.
fn plan_dt(stable: f64, t: f64, stop: f64) -> f64 {
    let remaining = stop - t;
    if remaining <= stable {
        remaining
    } else if remaining < 2.0 * stable {
        0.5 * remaining
    } else {
        stable
    }
}

/// Advances `s` by one RK4 step sized per `cfg`, landing exactly on the next
/// checkpoint or on `t_end` when they come within reach.
pub fn step_rk4(s: &SolverState, cfg: &TimeStepConfig) -> std::result::Result<SolverState, SolverError> {
    let stop = cfg.next_stop(s.t);
    let dt = plan_dt(cfg.stable_dt(&s.u), s.t, stop);
    if !(dt >= DT_MIN) {
        return Err(SolverError::StepUnderflow { t: s.t, dt });
    }
    let mut next = step_rk4_dt(s, dt)?;
    if (next.t - stop).abs() <= 1e-12 * stop.max(1.0) {
        next.t = stop;
    }
    if cfg.tail_clamp {
        next.u = clamp_tails(next.u);
    }
    Ok(next)
}

/// One RK4 step of fixed length `dt`.
pub fn step_rk4_dt(s: &SolverState, dt: f64) -> std::result::Result<SolverState, SolverError> {
    let u = rk4(&s.u, dt, s.t, rhs)?;
    Ok(SolverState { t: s.t + dt, u, step_count: s.step_count + 1, baselines: s.baselines })
}

/// Read-only view handed to monitors.
pub struct Snapshot<'a> {
    pub t: f64,
    pub step: usize,
    pub u: &'a Field,
}

pub trait Monitor {
    fn observe(&mut self, snap: &Snapshot<'_>);
}

impl<F: FnMut(&Snapshot<'_>)> Monitor for F {
    fn observe(&mut self, snap: &Snapshot<'_>) {
        self(snap)
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    /// Times at which the monitors fired.
    pub times: Vec<f64>,
    pub final_state: SolverState,
    /// `Err` when the run stopped early; `final_state` is then the last good
    /// state.
    pub outcome: std::result::Result<(), SolverError>,
}

impl Trajectory {
    pub fn is_partial(&self) -> bool {
        self.outcome.is_err()
    }
}

/// Integrates from `u0` to `cfg.t_end`. Monitors fire at `t = 0`, every
/// `monitor_stride` steps, at each checkpoint and at `t_end`.
pub fn evolve(u0: Field, cfg: &TimeStepConfig, monitors: &mut [&mut dyn Monitor]) -> Result<Trajectory> {
    cfg.validate()?;
    let mut state = SolverState::new(u0);
    let mut times = Vec::new();
    let mut fire = |state: &SolverState, times: &mut Vec<f64>| {
        let snap = Snapshot { t: state.t, step: state.step_count, u: &state.u };
        for m in monitors.iter_mut() {
            m.observe(&snap);
        }
        times.push(state.t);
    };
    fire(&state, &mut times);
    while state.t < cfg.t_end {
        match step_rk4(&state, cfg) {
            Ok(next) => {
                state = next;
                let at_stop = state.t == cfg.t_end || cfg.checkpoints.contains(&state.t);
                if at_stop || state.step_count.is_multiple_of(cfg.monitor_stride) {
                    fire(&state, &mut times);
                }
            }
            Err(e) => return Ok(Trajectory { times, final_state: state, outcome: Err(e) }),
        }
    }
    Ok(Trajectory { times, final_state: state, outcome: Ok(()) })
}

/// Result of [`evolve_momentum`].
#[derive(Clone, Debug)]
pub struct MomentumRun {
    pub t: f64,
    pub steps: usize,
    pub h: Field,
    /// `G * h` at the final time.
    pub u: Field,
    pub outcome: std::result::Result<(), SolverError>,
}

/// Integrates the momentum transport equation from `h0`, reconstructing
/// `u = G * h` at every stage.
pub fn evolve_momentum(h0: Field, cfg: &TimeStepConfig) -> Result<MomentumRun> {
    cfg.validate()?;
    let mut h = h0;
    let mut t = 0.0;
    let mut steps = 0;
    let f = |h: &Field| {
        let u = conv_g(h);
        rhs_momentum(h, &u).expect("same grid")
    };
    let mut outcome = Ok(());
    while t < cfg.t_end {
        let stop = cfg.next_stop(t);
        let dt = plan_dt(cfg.stable_dt(&conv_g(&h)), t, stop);
        if !(dt >= DT_MIN) {
            outcome = Err(SolverError::StepUnderflow { t, dt });
            break;
        }
        match rk4(&h, dt, t, f) {
            Ok(next) => {
                h = next;
                t = if (t + dt - stop).abs() <= 1e-12 * stop.max(1.0) { stop } else { t + dt };
                steps += 1;
            }
            Err(e) => {
                outcome = Err(e);
                break;
            }
        }
    }
    let u = conv_g(&h);
    Ok(MomentumRun { t, steps, h, u, outcome })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::greens::apply_helmholtz;
    use crate::grid::Grid1D;

    fn gaussian(g: &Grid1D, a: f64) -> Field {
        g.sample("u", |x| a * (-x * x / 2.0).exp()).unwrap()
    }

    #[test]
    fn zero_is_a_fixed_point() {
        let g = Grid1D::new(-20.0, 20.0, 401).unwrap();
        assert_eq!(rhs(&g.zeros("u")).max_abs(), 0.0);
        let cfg = TimeStepConfig { t_end: 0.5, ..Default::default() };
        let tr = evolve(g.zeros("u"), &cfg, &mut []).unwrap();
        assert_eq!(tr.final_state.u.max_abs(), 0.0);
        assert_eq!(tr.final_state.t, 0.5);
    }

    #[test]
    fn rhs_preserves_oddness() {
        let g = Grid1D::new(-20.0, 20.0, 401).unwrap();
        let u = g.sample("u", |x| x * (-x * x).exp()).unwrap();
        let r = rhs(&u);
        let n = g.n();
        for i in 0..n {
            assert!((r.values()[i] + r.values()[n - 1 - i]).abs() < 1e-14);
        }
    }

    #[test]
    fn peak_is_a_traveling_wave() {
        let g = Grid1D::new(-30.0, 30.0, 6001).unwrap();
        let (c, x0) = (1.0, 0.0);
        let u = g.sample("u", |x| c * (-(x - x0).abs()).exp()).unwrap();
        let r = rhs(&u);
        let du = derivative(&u);
        for i in 0..g.n() {
            let x = g.node(i);
            if (x - x0).abs() > 3.0 * g.dx() && x.abs() < 25.0 {
                let want = -c * du.values()[i];
                assert!((r.values()[i] - want).abs() < 2e-3, "x={x}: {} vs {want}", r.values()[i]);
            }
        }
    }

    #[test]
    fn momentum_rhs_trivial_cases() {
        let g = Grid1D::new(-10.0, 10.0, 201).unwrap();
        let h = gaussian(&g, 1.0);
        assert_eq!(rhs_momentum(&g.zeros("h"), &h).unwrap().max_abs(), 0.0);
        assert_eq!(rhs_momentum(&h, &g.zeros("u")).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn momentum_rhs_is_the_transformed_rhs() {
        let err = |n: usize| {
            let g = Grid1D::new(-20.0, 20.0, n).unwrap();
            let u = gaussian(&g, 0.5);
            let lhs = apply_helmholtz(&rhs(&u));
            let rhs = rhs_momentum(&apply_helmholtz(&u), &u).unwrap();
            lhs.zip_map(&rhs, "d", |a, b| a - b).unwrap().max_abs()
        };
        let (a, b) = (err(401), err(801));
        assert!(a < 1e-3 && b < a / 8.0, "{a} {b}");
    }

    #[test]
    fn lands_on_checkpoints_and_end() {
        let g = Grid1D::new(-20.0, 20.0, 401).unwrap();
        let cfg = TimeStepConfig {
            t_end: 1.0,
            dt_max: 0.07,
            monitor_stride: 1000,
            checkpoints: vec![0.25, 0.5],
            ..Default::default()
        };
        let mut seen = Vec::new();
        let mut rec = |s: &Snapshot<'_>| seen.push(s.t);
        let tr = evolve(gaussian(&g, 0.25), &cfg, &mut [&mut rec]).unwrap();
        assert_eq!(seen, vec![0.0, 0.25, 0.5, 1.0]);
        assert_eq!(tr.times, seen);
    }

    #[test]
    fn series_length_bookkeeping() {
        let g = Grid1D::new(-20.0, 20.0, 401).unwrap();
        for stride in [1, 3, 4, 7] {
            let cfg = TimeStepConfig { t_end: 1.0, dt_max: 0.05, monitor_stride: stride, ..Default::default() };
            let tr = evolve(gaussian(&g, 0.25), &cfg, &mut []).unwrap();
            let steps = tr.final_state.step_count;
            assert_eq!(tr.times.len(), steps.div_ceil(stride) + 1, "stride {stride}");
            assert!(tr.times.windows(2).all(|w| w[1] > w[0]));
        }
    }

    #[test]
    fn richardson_step_order() {
        let g = Grid1D::new(-20.0, 20.0, 201).unwrap();
        let s = SolverState::new(gaussian(&g, 0.5));
        let diff = |dt: f64| {
            let one = step_rk4_dt(&s, dt).unwrap();
            let two = step_rk4_dt(&step_rk4_dt(&s, 0.5 * dt).unwrap(), 0.5 * dt).unwrap();
            one.u.zip_map(&two.u, "d", |a, b| a - b).unwrap().max_abs()
        };
        let order = (diff(0.2) / diff(0.1)).log2();
        assert!((order - 5.0).abs() < 0.3, "local order {order}");
    }

    #[test]
    fn blow_up_keeps_last_good_state() {
        let g = Grid1D::new(-20.0, 20.0, 201).unwrap();
        let s = SolverState::new(gaussian(&g, 0.5));
        let err = step_rk4_dt(&s, 1e200).unwrap_err();
        assert!(matches!(err, SolverError::BlowUp { .. }));
        assert_eq!(s.t, 0.0);
        let cfg = TimeStepConfig { cfl: 0.25, dt_max: 1e-13, ..Default::default() };
        assert!(matches!(step_rk4(&s, &cfg), Err(SolverError::StepUnderflow { .. })));
    }

    #[test]
    fn dual_evolution_agrees() {
        let g = Grid1D::new(-30.0, 30.0, 601).unwrap();
        let u0 = gaussian(&g, 0.25);
        let cfg = TimeStepConfig { t_end: 0.5, dt_max: 0.02, ..Default::default() };
        let direct = evolve(u0.clone(), &cfg, &mut []).unwrap().final_state.u;
        let via_h = evolve_momentum(apply_helmholtz(&u0), &cfg).unwrap();
        assert_eq!(via_h.t, 0.5);
        let d = direct.zip_map(&via_h.u, "d", |a, b| a - b).unwrap().max_abs();
        assert!(d < 1e-5, "difference {d}");
    }
}
