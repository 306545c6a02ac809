//! Lagrangian flow `dη/dt = u(η, t)`, `η(x, 0) = x`, integrated offline from
//! stored velocity snapshots, and the conservation law
//! `h(η, t) (∂x η)² = h₀(x)` along it.

use serde::{Deserialize, Serialize};

use crate::dynamics::{Monitor, Snapshot};
use crate::error::{Error, FlowError, Result};
use crate::grid::{derivative, Field, Grid1D};

/// Snapshots of `u` and `∂x u`, interpolated cubically in space and linearly
/// in time.
#[derive(Clone, Debug, Default)]
pub struct VelocityRecord {
    times: Vec<f64>,
    u: Vec<Field>,
    ux: Vec<Field>,
}

impl VelocityRecord {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a snapshot. Times must increase and all snapshots must share
    /// a grid.
    pub fn push(&mut self, t: f64, u: &Field) -> Result<()> {
        if let Some(&last) = self.times.last() {
            if t <= last {
                return Err(Error::Precondition(format!("snapshot time {t} does not follow {last}")));
            }
            if self.u[0].grid() != u.grid() {
                return Err(Error::GridMismatch);
            }
        }
        self.times.push(t);
        self.ux.push(derivative(u));
        self.u.push(u.clone());
        Ok(())
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Stored velocity at the `k`-th snapshot time.
    pub fn snapshot(&self, k: usize) -> &Field {
        &self.u[k]
    }

    pub fn grid(&self) -> Option<&Grid1D> {
        self.u.first().map(|f| f.grid())
    }

    /// `(u, ∂x u)` at `(x, t)`; `None` if `x` is off the grid.
    fn eval(&self, k: usize, s: f64, x: f64) -> Option<(f64, f64)> {
        let a = (self.u[k].interpolate(x)?, self.ux[k].interpolate(x)?);
        if s == 0.0 {
            return Some(a);
        }
        let b = (self.u[k + 1].interpolate(x)?, self.ux[k + 1].interpolate(x)?);
        Some(((1.0 - s) * a.0 + s * b.0, (1.0 - s) * a.1 + s * b.1))
    }
}

impl Monitor for VelocityRecord {
    fn observe(&mut self, snap: &Snapshot<'_>) {
        // a repeated time is a duplicate report of the same state
        if self.times.last().is_some_and(|&t| snap.t <= t) {
            return;
        }
        self.push(snap.t, snap.u).expect("monitor snapshots share one grid");
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowState {
    pub labels: Vec<f64>,
    pub eta: Vec<f64>,
    pub jac: Vec<f64>,
    /// Particles that left the domain; they are frozen where they left.
    pub escaped: Vec<bool>,
    pub t: f64,
}

impl FlowState {
    /// Identity map on the given labels at `t = 0`.
    pub fn identity(mut labels: Vec<f64>) -> Self {
        labels.sort_by(f64::total_cmp);
        labels.dedup();
        let n = labels.len();
        Self { eta: labels.clone(), labels, jac: vec![1.0; n], escaped: vec![false; n], t: 0.0 }
    }

    /// One particle per grid node plus one at each of `extra`. An extra label
    /// within `1e-9 Δx` of a node replaces that node.
    pub fn seed(grid: &Grid1D, extra: &[f64]) -> Self {
        let tol = 1e-9 * grid.dx();
        let mut labels: Vec<f64> =
            grid.nodes().filter(|x| extra.iter().all(|e| (x - e).abs() > tol)).collect();
        labels.extend_from_slice(extra);
        Self::identity(labels)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// `η` strictly increasing in the label.
    pub fn is_monotone(&self) -> bool {
        self.eta.windows(2).all(|w| w[1] > w[0])
    }

    fn index_of(&self, label: f64) -> std::result::Result<usize, FlowError> {
        self.labels.iter().position(|&l| l == label).ok_or(FlowError::UnknownLabel(label))
    }
}

/// Advances every particle from `fs.t` to the last time of `record` with one
/// RK4 step per snapshot interval.
pub fn advance_flow(fs: &FlowState, record: &VelocityRecord) -> std::result::Result<FlowState, FlowError> {
    let end = *record.times.last().ok_or(FlowError::OutsideRecord(fs.t))?;
    advance_flow_to(fs, record, end)
}

/// As [`advance_flow`], stopping at `t_to`, which must be a snapshot time.
pub fn advance_flow_to(
    fs: &FlowState,
    record: &VelocityRecord,
    t_to: f64,
) -> std::result::Result<FlowState, FlowError> {
    let times = &record.times;
    let find = |t: f64| times.iter().position(|&s| s == t);
    let start = find(fs.t).ok_or(FlowError::OutsideRecord(fs.t))?;
    let stop = find(t_to).ok_or(FlowError::OutsideRecord(t_to))?;
    let mut out = fs.clone();
    for k in start..stop {
        let dt = times[k + 1] - times[k];
        for p in 0..out.len() {
            if out.escaped[p] {
                continue;
            }
            match rk4_particle(record, k, dt, out.eta[p], out.jac[p]) {
                Some((eta, jac)) => {
                    out.eta[p] = eta;
                    out.jac[p] = jac;
                }
                None => out.escaped[p] = true,
            }
        }
        out.t = times[k + 1];
        if let Some(p) = (0..out.len()).find(|&p| !out.escaped[p] && !(out.jac[p] > 0.0)) {
            return Err(FlowError::Degenerated { label: out.labels[p], t: out.t, jac: out.jac[p] });
        }
    }
    Ok(out)
}

fn rk4_particle(rec: &VelocityRecord, k: usize, dt: f64, eta: f64, jac: f64) -> Option<(f64, f64)> {
    let f = |s: f64, e: f64, j: f64| rec.eval(k, s, e).map(|(u, ux)| (u, ux * j));
    let (a1, b1) = f(0.0, eta, jac)?;
    let (a2, b2) = f(0.5, eta + 0.5 * dt * a1, jac + 0.5 * dt * b1)?;
    let (a3, b3) = f(0.5, eta + 0.5 * dt * a2, jac + 0.5 * dt * b2)?;
    let (a4, b4) = f(1.0, eta + dt * a3, jac + dt * b3)?;
    let eta = eta + dt / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
    let jac = jac + dt / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4);
    rec.grid()?.contains(eta).then_some((eta, jac))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConservationResidual {
    pub max: f64,
    pub rms: f64,
    pub count: usize,
}

/// Residual `h_now(η)·(∂x η)² - h₀(x)` over tracked particles with
/// `|h₀| > 1e-10 · max|h₀|`.
pub fn check_momentum_conservation(fs: &FlowState, h_now: &Field, h0: &Field) -> Result<ConservationResidual> {
    if h_now.grid() != h0.grid() {
        return Err(Error::GridMismatch);
    }
    let cut = 1e-10 * h0.max_abs();
    let (mut max, mut sq, mut count) = (0.0f64, 0.0, 0usize);
    for p in 0..fs.len() {
        if fs.escaped[p] {
            continue;
        }
        let Some(initial) = h0.interpolate(fs.labels[p]) else { continue };
        if !(initial.abs() > cut) {
            continue;
        }
        let Some(now) = h_now.interpolate(fs.eta[p]) else { continue };
        let r = now * fs.jac[p] * fs.jac[p] - initial;
        max = max.max(r.abs());
        sq += r * r;
        count += 1;
    }
    let rms = if count > 0 { (sq / count as f64).sqrt() } else { 0.0 };
    Ok(ConservationResidual { max, rms, count })
}

/// `(η(a, t), η(b, t))`.
pub fn support_endpoints(fs: &FlowState, a: f64, b: f64) -> std::result::Result<(f64, f64), FlowError> {
    Ok((fs.eta[fs.index_of(a)?], fs.eta[fs.index_of(b)?]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(g: &Grid1D, times: &[f64], f: impl Fn(f64, f64) -> f64) -> VelocityRecord {
        let mut r = VelocityRecord::new();
        for &t in times {
            r.push(t, &g.sample("u", |x| f(x, t)).unwrap()).unwrap();
        }
        r
    }

    #[test]
    fn zero_velocity_is_identity() {
        let g = Grid1D::new(-5.0, 5.0, 101).unwrap();
        let fs = FlowState::seed(&g, &[-1.0, 1.234]);
        let rec = record(&g, &[0.0, 0.5, 1.0], |_, _| 0.0);
        let out = advance_flow(&fs, &rec).unwrap();
        assert_eq!(out.eta, fs.labels);
        assert!(out.jac.iter().all(|&j| j == 1.0));
        assert_eq!(support_endpoints(&out, -1.0, 1.234).unwrap(), (-1.0, 1.234));
    }

    #[test]
    fn constant_velocity_translates() {
        let g = Grid1D::new(-5.0, 5.0, 101).unwrap();
        let fs = FlowState::identity(vec![-1.0, 0.0, 2.0]);
        let rec = record(&g, &[0.0, 0.25, 0.5], |_, _| 0.8);
        let out = advance_flow(&fs, &rec).unwrap();
        for (e, l) in out.eta.iter().zip(&out.labels) {
            assert!((e - l - 0.4).abs() < 1e-13);
        }
        assert!(out.jac.iter().all(|&j| (j - 1.0).abs() < 1e-12));
    }

    #[test]
    fn frozen_peak_moves_origin_at_speed_c() {
        let g = Grid1D::new(-10.0, 10.0, 20001).unwrap();
        let c = 0.6;
        let dt = 1e-4;
        let fs = FlowState::identity(vec![0.0]);
        let rec = record(&g, &[0.0, dt], |x, _| c * (-x.abs()).exp());
        let out = advance_flow(&fs, &rec).unwrap();
        let speed = (out.eta[0] - 0.0) / dt;
        assert!((speed - c).abs() < 1e-4, "speed {speed}");
    }

    #[test]
    fn linear_strain_has_exact_jacobian() {
        // u = k x gives η = x e^{kt}, ∂xη = e^{kt}
        let g = Grid1D::new(-5.0, 5.0, 201).unwrap();
        let k = 0.3;
        let times: Vec<f64> = (0..=20).map(|i| i as f64 * 0.05).collect();
        let rec = record(&g, &times, |x, _| k * x);
        let fs = FlowState::identity(vec![-2.0, 0.5, 1.0]);
        let out = advance_flow(&fs, &rec).unwrap();
        for (e, l) in out.eta.iter().zip(&out.labels) {
            assert!((e - l * k.exp()).abs() < 1e-8);
        }
        assert!(out.jac.iter().all(|&j| (j - k.exp()).abs() < 1e-8));
        assert!(out.is_monotone());
    }

    #[test]
    fn compression_degenerates() {
        let g = Grid1D::new(-5.0, 5.0, 201).unwrap();
        // strain switched on within one interval, too coarse to resolve
        let rec = record(&g, &[0.0, 1.0], |x, t| -6.0 * t * x);
        let fs = FlowState::identity(vec![0.0]);
        assert!(matches!(advance_flow(&fs, &rec), Err(FlowError::Degenerated { .. })));
    }

    #[test]
    fn escape_and_unknown_labels() {
        let g = Grid1D::new(-1.0, 1.0, 101).unwrap();
        let rec = record(&g, &[0.0, 1.0], |_, _| 1.0);
        let fs = FlowState::identity(vec![-0.5, 0.9]);
        let out = advance_flow(&fs, &rec).unwrap();
        assert_eq!(out.escaped, vec![false, true]);
        assert_eq!(support_endpoints(&out, -0.5, 0.3), Err(FlowError::UnknownLabel(0.3)));
        let late = FlowState { t: 3.0, ..fs };
        assert_eq!(advance_flow(&late, &rec), Err(FlowError::OutsideRecord(3.0)));
    }

    #[test]
    fn residual_vanishes_at_start() {
        let g = Grid1D::new(-5.0, 5.0, 101).unwrap();
        let h0 = g.sample("h", |x| (-x * x).exp()).unwrap();
        let fs = FlowState::seed(&g, &[0.123]);
        let r = check_momentum_conservation(&fs, &h0, &h0).unwrap();
        assert_eq!(r.max, 0.0);
        assert!(r.count > 0);
        let z = g.zeros("h");
        assert_eq!(check_momentum_conservation(&fs, &z, &z).unwrap().count, 0);
    }

    #[test]
    fn seeding_replaces_coincident_nodes() {
        let g = Grid1D::new(-1.0, 1.0, 21).unwrap();
        let fs = FlowState::seed(&g, &[0.0, 0.05]);
        assert_eq!(fs.len(), 22);
        assert!(fs.labels.contains(&0.0) && fs.labels.contains(&0.05));
        assert!(fs.is_monotone());
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use crate::dynamics::{evolve, TimeStepConfig};
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn flow_stays_monotone(a in -0.25f64..0.25, c in -2.0f64..2.0) {
            let g = Grid1D::new(-20.0, 20.0, 321).unwrap();
            let u0 = g.sample("u0", |x| a * (-(x - c).powi(2) / 2.0).exp()).unwrap();
            let mut record = VelocityRecord::new();
            let cfg = TimeStepConfig { t_end: 1.0, ..TimeStepConfig::default() };
            evolve(u0, &cfg, &mut [&mut record]).unwrap();
            let mut fs = FlowState::seed(&g, &[]);
            for &t in &record.times()[1..] {
                fs = advance_flow_to(&fs, &record, t).unwrap();
                prop_assert!(fs.is_monotone());
            }
        }
    }
}
