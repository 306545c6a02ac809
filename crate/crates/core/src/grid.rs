//! Uniform grid on a truncated line, sampled fields, fourth-order finite
//! differences, trapezoid quadrature and tail windows.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::NeumaierSum;

/// Smallest admissible number of nodes.
pub const MIN_NODES: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    x_min: f64,
    x_max: f64,
    n: usize,
    dx: f64,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite()) {
            return Err(Error::InvalidGrid("endpoints must be finite".into()));
        }
        if x_min >= x_max {
            return Err(Error::InvalidGrid(format!("x_min = {x_min} must be below x_max = {x_max}")));
        }
        if n < MIN_NODES {
            return Err(Error::InvalidGrid(format!("need at least {MIN_NODES} nodes, got {n}")));
        }
        let dx = (x_max - x_min) / (n - 1) as f64;
        Ok(Self { x_min, x_max, n, dx })
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Position of node `i`. The last node is exactly `x_max`.
    #[inline]
    pub fn node(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.x_max
        } else {
            self.x_min + i as f64 * self.dx
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.node(i))
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.x_min && x <= self.x_max
    }

    /// Samples `f` at every node.
    pub fn sample(&self, role: &str, f: impl Fn(f64) -> f64) -> Result<Field> {
        let values = self.nodes().map(f).collect();
        Field::new(*self, values, role)
    }

    pub fn zeros(&self, role: &str) -> Field {
        Field::from_raw(*self, vec![0.0; self.n], role)
    }

    /// Node indices covering `[x_max - margin - width, x_max - margin]` on the
    /// right, or the mirror image on the left.
    pub fn tail_window(&self, side: Side, margin: f64, width: f64) -> Result<Range<usize>> {
        let half = 0.5 * (self.x_max - self.x_min);
        if !(margin >= 0.0 && width > 0.0) {
            return Err(Error::Window(format!("margin {margin} and width {width} must be non-negative / positive")));
        }
        if margin + width >= half {
            return Err(Error::Window(format!(
                "margin + width = {} exceeds half the domain length {half}",
                margin + width
            )));
        }
        let (lo, hi) = match side {
            Side::Right => (self.x_max - margin - width, self.x_max - margin),
            Side::Left => (self.x_min + margin, self.x_min + margin + width),
        };
        let start = (((lo - self.x_min) / self.dx) - 1e-9).ceil().max(0.0) as usize;
        let end = ((((hi - self.x_min) / self.dx) + 1e-9).floor() as usize + 1).min(self.n);
        if start >= end {
            return Err(Error::Window(format!("no nodes in [{lo}, {hi}]")));
        }
        Ok(start..end)
    }

    /// Window of nodes with positions in `[lo, hi]`.
    pub fn window_between(&self, lo: f64, hi: f64) -> Result<Range<usize>> {
        let start = (((lo - self.x_min) / self.dx) - 1e-9).ceil().max(0.0) as usize;
        let end = ((((hi - self.x_min) / self.dx) + 1e-9).floor().max(-1.0) + 1.0) as usize;
        let end = end.min(self.n);
        if lo > hi || start >= end {
            return Err(Error::Window(format!("no nodes in [{lo}, {hi}]")));
        }
        Ok(start..end)
    }

    /// Lagrange weights of the four-node stencil used to interpolate at `x`:
    /// returns the first stencil index and the weights.
    fn cubic_stencil(&self, x: f64) -> Option<(usize, [f64; 4])> {
        let tol = 1e-12 * self.dx;
        if x < self.x_min - tol || x > self.x_max + tol {
            return None;
        }
        let r = ((x - self.x_min) / self.dx).clamp(0.0, (self.n - 1) as f64);
        let cell = (r.floor() as usize).min(self.n - 2);
        let j0 = cell.saturating_sub(1).min(self.n - 4);
        let s = r - j0 as f64; // local coordinate, stencil nodes at 0, 1, 2, 3
        let w = [
            -(s - 1.0) * (s - 2.0) * (s - 3.0) / 6.0,
            s * (s - 2.0) * (s - 3.0) / 2.0,
            -s * (s - 1.0) * (s - 3.0) / 2.0,
            s * (s - 1.0) * (s - 2.0) / 6.0,
        ];
        Some((j0, w))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

/// Samples of one real function on a [`Grid1D`].
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    grid: Grid1D,
    values: Vec<f64>,
    role: String,
}

impl Field {
    /// Checked constructor: the length must match the grid and every value
    /// must be finite.
    pub fn new(grid: Grid1D, values: Vec<f64>, role: &str) -> Result<Self> {
        if values.len() != grid.n {
            return Err(Error::LengthMismatch { expected: grid.n, got: values.len() });
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { index, x: grid.node(index), value });
        }
        Ok(Self { grid, values, role: role.to_string() })
    }

    pub(crate) fn from_raw(grid: Grid1D, values: Vec<f64>, role: &str) -> Self {
        debug_assert_eq!(values.len(), grid.n);
        Self { grid, values, role: role.to_string() }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn role(&self) -> &str {
        &self.role
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn with_role(mut self, role: &str) -> Self {
        self.role = role.to_string();
        self
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// First non-finite entry, if any.
    pub fn first_non_finite(&self) -> Option<(usize, f64)> {
        self.values.iter().copied().enumerate().find(|(_, v)| !v.is_finite())
    }

    /// Pointwise combination of two fields on the same grid.
    pub fn zip_map(&self, other: &Field, role: &str, f: impl Fn(f64, f64) -> f64) -> Result<Field> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Ok(Field::from_raw(self.grid, values, role))
    }

    /// Pointwise map with access to the node position.
    pub fn map_with_x(&self, role: &str, f: impl Fn(f64, f64) -> f64) -> Field {
        let values = self.values.iter().enumerate().map(|(i, &v)| f(self.grid.node(i), v)).collect();
        Field::from_raw(self.grid, values, role)
    }

    /// Cubic Lagrange interpolation at `x`; `None` outside the grid.
    pub fn interpolate(&self, x: f64) -> Option<f64> {
        let (j0, w) = self.grid.cubic_stencil(x)?;
        let v = &self.values[j0..j0 + 4];
        Some(w[0] * v[0] + w[1] * v[1] + w[2] * v[2] + w[3] * v[3])
    }
}

/// Fourth-order first derivative: central five-point stencil in the interior,
/// one-sided five-point stencils at the two outermost nodes on each side.
pub fn derivative(f: &Field) -> Field {
    let v = &f.values;
    let n = v.len();
    let c = 1.0 / (12.0 * f.grid.dx);
    let mut out = vec![0.0; n];
    out[0] = c * (-25.0 * v[0] + 48.0 * v[1] - 36.0 * v[2] + 16.0 * v[3] - 3.0 * v[4]);
    out[1] = c * (-3.0 * v[0] - 10.0 * v[1] + 18.0 * v[2] - 6.0 * v[3] + v[4]);
    for i in 2..n - 2 {
        out[i] = c * (v[i - 2] - 8.0 * v[i - 1] + 8.0 * v[i + 1] - v[i + 2]);
    }
    out[n - 2] = c * (3.0 * v[n - 1] + 10.0 * v[n - 2] - 18.0 * v[n - 3] + 6.0 * v[n - 4] - v[n - 5]);
    out[n - 1] = c * (25.0 * v[n - 1] - 48.0 * v[n - 2] + 36.0 * v[n - 3] - 16.0 * v[n - 4] + 3.0 * v[n - 5]);
    Field::from_raw(f.grid, out, &format!("∂x {}", f.role))
}

/// Fourth-order second derivative: five-point central stencil inside,
/// six-point one-sided stencils at the boundary pairs.
pub fn second_derivative(f: &Field) -> Field {
    let v = &f.values;
    let n = v.len();
    let c = 1.0 / (12.0 * f.grid.dx * f.grid.dx);
    let mut out = vec![0.0; n];
    out[0] = c * (45.0 * v[0] - 154.0 * v[1] + 214.0 * v[2] - 156.0 * v[3] + 61.0 * v[4] - 10.0 * v[5]);
    out[1] = c * (10.0 * v[0] - 15.0 * v[1] - 4.0 * v[2] + 14.0 * v[3] - 6.0 * v[4] + v[5]);
    for i in 2..n - 2 {
        out[i] = c * (-v[i - 2] + 16.0 * v[i - 1] - 30.0 * v[i] + 16.0 * v[i + 1] - v[i + 2]);
    }
    out[n - 2] = c * (10.0 * v[n - 1] - 15.0 * v[n - 2] - 4.0 * v[n - 3] + 14.0 * v[n - 4] - 6.0 * v[n - 5] + v[n - 6]);
    out[n - 1] =
        c * (45.0 * v[n - 1] - 154.0 * v[n - 2] + 214.0 * v[n - 3] - 156.0 * v[n - 4] + 61.0 * v[n - 5] - 10.0 * v[n - 6]);
    Field::from_raw(f.grid, out, &format!("∂x² {}", f.role))
}

/// Composite trapezoid rule over all nodes.
pub fn integrate(f: &Field) -> f64 {
    integrate_values(&f.values, f.grid.dx)
}

pub(crate) fn integrate_values(v: &[f64], dx: f64) -> f64 {
    let n = v.len();
    let mut s: NeumaierSum = v[1..n - 1].iter().copied().collect();
    s.add(0.5 * (v[0] + v[n - 1]));
    dx * s.total()
}


#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn quartic_derivative_is_exact(c in prop::array::uniform5(-2.0f64..2.0), n in 16usize..80) {
            let g = Grid1D::new(-1.5, 2.0, n).unwrap();
            let p = |x: f64| c[0] + x * (c[1] + x * (c[2] + x * (c[3] + x * c[4])));
            let dp = |x: f64| c[1] + x * (2.0 * c[2] + x * (3.0 * c[3] + x * 4.0 * c[4]));
            let d = derivative(&g.sample("p", p).unwrap());
            for i in 2..n - 2 {
                prop_assert!((d.values()[i] - dp(g.node(i))).abs() < 1e-9);
            }
        }

        #[test]
        fn windows_stay_inside(margin in 0.0f64..10.0, width in 0.5f64..10.0) {
            let g = Grid1D::new(-30.0, 30.0, 601).unwrap();
            for side in [Side::Left, Side::Right] {
                let w = g.tail_window(side, margin, width).unwrap();
                prop_assert!(w.end <= g.n() && w.start < w.end);
            }
        }
    }
}
