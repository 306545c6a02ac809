//! Initial-data library.

use std::fmt;
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::grid::{Field, Grid1D};
use crate::quadrature::integrate_composite;

/// Profile function of a custom initial datum.
pub type Profile = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum InitialData {
    /// `A exp(1 - 1/(1 - s²))` for `|s| < 1`, `s = (x - x₀)/w`; zero outside.
    CompactBump { amplitude: f64, center: f64, width: f64 },
    /// `A / cosh(θ (x - x₀))`, tails `2A e^{-θ|x - x₀|}`.
    SechTail { amplitude: f64, center: f64, theta: f64 },
    /// `A exp(-((x - x₀)/w)²)`.
    Gaussian { amplitude: f64, center: f64, width: f64 },
    /// `c e^{-|x - x₀|}`.
    Peakon { c: f64, center: f64 },
    /// Peakon convolved with a unit-mass bump of half-width `ε`.
    SmoothedPeakon { c: f64, center: f64, epsilon: f64 },
    /// Arbitrary profile with a declared exponential decay rate of its tails
    /// (`f64::INFINITY` for faster than any exponential).
    Custom { label: String, profile: Profile, decay_rate: f64 },
}

impl fmt::Debug for InitialData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::CompactBump { amplitude, center, width } => {
                write!(f, "CompactBump(A={amplitude}, x0={center}, w={width})")
            }
            Self::SechTail { amplitude, center, theta } => write!(f, "SechTail(A={amplitude}, x0={center}, θ={theta})"),
            Self::Gaussian { amplitude, center, width } => write!(f, "Gaussian(A={amplitude}, x0={center}, w={width})"),
            Self::Peakon { c, center } => write!(f, "Peakon(c={c}, x0={center})"),
            Self::SmoothedPeakon { c, center, epsilon } => write!(f, "SmoothedPeakon(c={c}, x0={center}, ε={epsilon})"),
            Self::Custom { label, decay_rate, .. } => write!(f, "Custom({label}, rate={decay_rate})"),
        }
    }
}

fn bump(s: f64) -> f64 {
    if s.abs() < 1.0 {
        (1.0 - 1.0 / (1.0 - s * s)).exp()
    } else {
        0.0
    }
}

/// `∫_{-1}^{1} bump(s) ds`.
fn bump_mass() -> f64 {
    static MASS: OnceLock<f64> = OnceLock::new();
    *MASS.get_or_init(|| integrate_composite(bump, -1.0, 1.0, 64, 16))
}

/// `∫ ψ_ε(s) e^{-|d - s|} ds` for the unit-mass mollifier `ψ_ε`.
fn mollified_peak(d: f64, eps: f64) -> f64 {
    let z = bump_mass();
    let f = |s: f64| bump(s / eps) / (eps * z) * (-(d - s).abs()).exp();
    if d.abs() >= eps {
        integrate_composite(f, -eps, eps, 16, 8)
    } else {
        // split at the kink of the peak
        integrate_composite(f, -eps, d, 16, 8) + integrate_composite(f, d, eps, 16, 8)
    }
}

impl InitialData {
    /// Profile value at `x`.
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Self::CompactBump { amplitude, center, width } => amplitude * bump((x - center) / width),
            Self::SechTail { amplitude, center, theta } => amplitude / (theta * (x - center)).cosh(),
            Self::Gaussian { amplitude, center, width } => amplitude * (-((x - center) / width).powi(2)).exp(),
            Self::Peakon { c, center } => c * (-(x - center).abs()).exp(),
            Self::SmoothedPeakon { c, center, epsilon } => {
                if *c == 0.0 {
                    0.0
                } else {
                    c * mollified_peak(x - center, *epsilon)
                }
            }
            Self::Custom { profile, .. } => profile(x),
        }
    }

    pub fn sample(&self, grid: &Grid1D) -> Result<Field> {
        grid.sample("u0", |x| self.eval(x))
    }

    /// Rate `r` with `|u₀(x)| = O(e^{-r|x|})`.
    pub fn decay_rate(&self) -> f64 {
        match self {
            Self::CompactBump { .. } | Self::Gaussian { .. } => f64::INFINITY,
            Self::SechTail { theta, .. } => *theta,
            Self::Peakon { .. } | Self::SmoothedPeakon { .. } => 1.0,
            Self::Custom { decay_rate, .. } => *decay_rate,
        }
    }

    /// Closed support `[a, b]` of compactly supported data.
    pub fn support(&self) -> Option<(f64, f64)> {
        match self {
            Self::CompactBump { center, width, .. } => Some((center - width, center + width)),
            _ => None,
        }
    }

    /// Unsmoothed peak position.
    pub fn center(&self) -> Option<f64> {
        match self {
            Self::CompactBump { center, .. }
            | Self::SechTail { center, .. }
            | Self::Gaussian { center, .. }
            | Self::Peakon { center, .. }
            | Self::SmoothedPeakon { center, .. } => Some(*center),
            Self::Custom { .. } => None,
        }
    }

    /// Exponential profile `A e^{-|x - x₀|}` smoothed at its crest,
    /// `2A / (e^{x - x₀} + e^{-(x - x₀)})`, with tails exactly of order
    /// `e^{-|x|}` and a derivative of the same order.
    pub fn exponential_tail(amplitude: f64, center: f64) -> Self {
        Self::Custom {
            label: format!("exponential tail (A={amplitude}, x0={center})"),
            profile: Arc::new(move |x| amplitude / (x - center).cosh()),
            decay_rate: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, message: &str| Err(Error::Parameter { key: key.into(), message: message.into() });
        match self {
            Self::CompactBump { width, .. } | Self::Gaussian { width, .. } if !(*width > 0.0) => {
                bad("width", "must be positive")
            }
            Self::SechTail { theta, .. } if !(*theta > 0.0) => bad("theta", "must be positive"),
            Self::SmoothedPeakon { epsilon, .. } if !(*epsilon > 0.0) => bad("epsilon", "must be positive"),
            _ => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_is_compact_and_smooth() {
        let d = InitialData::CompactBump { amplitude: 0.25, center: 1.0, width: 2.0 };
        assert_eq!(d.eval(-1.0), 0.0);
        assert_eq!(d.eval(3.5), 0.0);
        assert!((d.eval(1.0) - 0.25).abs() < 1e-15);
        assert_eq!(d.support(), Some((-1.0, 3.0)));
        assert!(d.decay_rate().is_infinite());
    }

    #[test]
    fn sech_tail_rate() {
        let d = InitialData::SechTail { amplitude: 0.25, center: 0.0, theta: 0.5 };
        let x = 40.0;
        assert!((d.eval(x) / (0.5 * (-0.5 * x).exp()) - 1.0).abs() < 1e-12);
        assert_eq!(d.decay_rate(), 0.5);
    }

    #[test]
    fn smoothed_peak_has_unit_mass_mollifier() {
        let d = InitialData::SmoothedPeakon { c: 1.0, center: 0.0, epsilon: 0.1 };
        // far from the crest the smoothed peak is c e^{-|x|} times ∫ψ e^{s}
        let m = integrate_composite(|s| bump(s / 0.1) / (0.1 * bump_mass()) * s.exp(), -0.1, 0.1, 16, 8);
        assert!((d.eval(3.0) - m * (-3f64).exp()).abs() < 1e-13);
        assert!(m > 1.0 && m < 1.002);
        assert!(d.eval(0.0) < 1.0 && d.eval(0.0) > 0.95);
        assert!((d.eval(0.03) - d.eval(-0.03)).abs() < 1e-14);
    }

    #[test]
    fn exponential_tail_profile() {
        let d = InitialData::exponential_tail(0.25, 0.0);
        assert!((d.eval(30.0) / (0.5 * (-30f64).exp()) - 1.0).abs() < 1e-12);
        assert_eq!(d.decay_rate(), 1.0);
    }
}
