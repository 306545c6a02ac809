//! Run configuration, read from TOML. Unknown keys are rejected.

use serde::{Deserialize, Serialize};

use crate::dynamics::TimeStepConfig;
use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::scenarios::InitialData;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default = "default_time")]
    pub time: TimeStepConfig,
    pub scenario: ScenarioConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub diagnostics: DiagnosticsConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { x_min: -60.0, x_max: 60.0, n: 8192 }
    }
}

fn default_time() -> TimeStepConfig {
    TimeStepConfig { checkpoints: vec![0.25, 0.5, 1.0], ..TimeStepConfig::default() }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Persistence,
    CompactSupport,
    UniqueContinuation,
    PeakonValidation,
    FastDecay,
    OptimalTail,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Self::Persistence,
        Self::CompactSupport,
        Self::UniqueContinuation,
        Self::PeakonValidation,
        Self::FastDecay,
        Self::OptimalTail,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Persistence => "persistence",
            Self::CompactSupport => "compact_support",
            Self::UniqueContinuation => "unique_continuation",
            Self::PeakonValidation => "peakon_validation",
            Self::FastDecay => "fast_decay",
            Self::OptimalTail => "optimal_tail",
        }
    }

    pub fn summary(self) -> &'static str {
        match self {
            Self::Persistence => "e^{-θx} tails of u and u_x persist; weighted sup norms stay bounded",
            Self::CompactSupport => "compact data: E+(0)=0, monotone E±, exact e^{∓x} tails, transported momentum support",
            Self::UniqueContinuation => "c+(t1) equals the time-integrated source; nonzero data never decays like o(e^{-x})",
            Self::PeakonValidation => "smoothed peakon travels at its amplitude and keeps its shape",
            Self::FastDecay => "momentum keeps its e^{-(1+μ)|x|} decay while u acquires e^{∓x} plateaus",
            Self::OptimalTail => "data with e^{-|x|} tails keep exactly that rate",
        }
    }

    pub fn default_kind(self) -> DataKind {
        match self {
            Self::Persistence => DataKind::SechTail,
            Self::CompactSupport | Self::UniqueContinuation => DataKind::CompactBump,
            Self::PeakonValidation => DataKind::SmoothedPeakon,
            Self::FastDecay => DataKind::Gaussian,
            Self::OptimalTail => DataKind::Custom,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataKind {
    CompactBump,
    SechTail,
    Gaussian,
    Peakon,
    SmoothedPeakon,
    /// The built-in `A / cosh(x - x₀)` profile with exact `e^{-|x|}` tails.
    Custom,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub experiment: Experiment,
    /// Defaults to the data kind the experiment is built around.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<DataKind>,
    #[serde(default = "d_amplitude")]
    pub amplitude: f64,
    #[serde(default)]
    pub center: f64,
    #[serde(default = "d_width")]
    pub width: f64,
    #[serde(default = "d_theta")]
    pub theta: f64,
    #[serde(default = "d_c")]
    pub c: f64,
    #[serde(default = "d_epsilon")]
    pub epsilon: f64,
    #[serde(default = "d_mu")]
    pub mu: f64,
    /// Admissibility exponent of the derivative tail; only range-checked.
    #[serde(default = "d_alpha")]
    pub alpha: f64,
    #[serde(default = "d_t1")]
    pub t1: f64,
}

fn d_amplitude() -> f64 {
    0.25
}
fn d_width() -> f64 {
    2.0
}
fn d_theta() -> f64 {
    0.5
}
fn d_c() -> f64 {
    1.0
}
fn d_epsilon() -> f64 {
    0.1
}
fn d_mu() -> f64 {
    0.5
}
fn d_alpha() -> f64 {
    0.75
}
fn d_t1() -> f64 {
    0.5
}

impl ScenarioConfig {
    pub fn new(experiment: Experiment) -> Self {
        Self {
            experiment,
            kind: None,
            amplitude: d_amplitude(),
            center: 0.0,
            width: d_width(),
            theta: d_theta(),
            c: d_c(),
            epsilon: d_epsilon(),
            mu: d_mu(),
            alpha: d_alpha(),
            t1: d_t1(),
        }
    }

    pub fn kind(&self) -> DataKind {
        self.kind.unwrap_or(self.experiment.default_kind())
    }

    pub fn initial_data(&self) -> InitialData {
        let (amplitude, center) = (self.amplitude, self.center);
        match self.kind() {
            DataKind::CompactBump => InitialData::CompactBump { amplitude, center, width: self.width },
            DataKind::SechTail => InitialData::SechTail { amplitude, center, theta: self.theta },
            DataKind::Gaussian => InitialData::Gaussian { amplitude, center, width: self.width },
            DataKind::Peakon => InitialData::Peakon { c: self.c, center },
            DataKind::SmoothedPeakon => InitialData::SmoothedPeakon { c: self.c, center, epsilon: self.epsilon },
            DataKind::Custom => InitialData::exponential_tail(amplitude, center),
        }
    }
}

/// Pass/fail thresholds. All must be positive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Allowed deviation of a fitted tail slope from its target.
    pub slope_tol: f64,
    pub r2_min: f64,
    /// Relative mismatch allowed between a tail plateau and `E±`.
    pub e_match_tol: f64,
    pub support_pad_cells: f64,
    pub support_threshold: f64,
    pub value_floor: f64,
    pub e_plus_zero_tol: f64,
    pub monotone_eps: f64,
    pub derivative_match_tol: f64,
    pub uc_match_tol: f64,
    pub persistence_slope_margin: f64,
    pub peakon_distance_tol: f64,
    pub peakon_shape_tol: f64,
    pub negative_control_tol: f64,
    pub conservation_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            slope_tol: 0.05,
            r2_min: 0.999,
            e_match_tol: 0.005,
            support_pad_cells: 3.0,
            support_threshold: 1e-8,
            value_floor: 1e-13,
            e_plus_zero_tol: 1e-6,
            monotone_eps: 1e-10,
            derivative_match_tol: 0.01,
            uc_match_tol: 0.02,
            persistence_slope_margin: 0.02,
            peakon_distance_tol: 0.02,
            peakon_shape_tol: 0.02,
            negative_control_tol: 0.01,
            conservation_tol: 1e-6,
        }
    }
}

impl Tolerances {
    fn entries(&self) -> [(&'static str, f64); 15] {
        [
            ("slope_tol", self.slope_tol),
            ("r2_min", self.r2_min),
            ("e_match_tol", self.e_match_tol),
            ("support_pad_cells", self.support_pad_cells),
            ("support_threshold", self.support_threshold),
            ("value_floor", self.value_floor),
            ("e_plus_zero_tol", self.e_plus_zero_tol),
            ("monotone_eps", self.monotone_eps),
            ("derivative_match_tol", self.derivative_match_tol),
            ("uc_match_tol", self.uc_match_tol),
            ("persistence_slope_margin", self.persistence_slope_margin),
            ("peakon_distance_tol", self.peakon_distance_tol),
            ("peakon_shape_tol", self.peakon_shape_tol),
            ("negative_control_tol", self.negative_control_tol),
            ("conservation_tol", self.conservation_tol),
        ]
    }
}

/// Where tails are measured and how the persistence weight is built.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiagnosticsConfig {
    /// Distance of the tail windows from the domain ends.
    pub tail_margin: f64,
    pub tail_width: f64,
    /// Cutoff `N` of the weight `φ_N`.
    pub weight_cutoff: f64,
    /// Exponent of `φ_N`; defaults to `scenario.theta`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weight_theta: Option<f64>,
    /// Window, as offsets from the data center, where the momentum tail is
    /// fitted in the fast-decay experiment.
    pub h_tail_window: [f64; 2],
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        Self { tail_margin: 35.0, tail_width: 15.0, weight_cutoff: 40.0, weight_theta: None, h_tail_window: [5.0, 10.0] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub directory: String,
    /// Any of `csv`, `json`, `profiles`.
    pub formats: Vec<String>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { directory: "ch-tails-out".into(), formats: vec!["csv".into(), "json".into(), "profiles".into()] }
    }
}

impl OutputConfig {
    pub fn wants(&self, format: &str) -> bool {
        self.formats.iter().any(|f| f == format)
    }
}

pub const FORMATS: [&str; 3] = ["csv", "json", "profiles"];

fn param(key: &str, message: impl Into<String>) -> Error {
    Error::Parameter { key: key.into(), message: message.into() }
}

impl RunConfig {
    /// Default configuration for `experiment` at reference resolution.
    pub fn reference(experiment: Experiment) -> Self {
        Self {
            grid: GridConfig::default(),
            time: default_time(),
            scenario: ScenarioConfig::new(experiment),
            tolerances: Tolerances::default(),
            diagnostics: DiagnosticsConfig::default(),
            output: OutputConfig::default(),
        }
    }

    pub fn grid(&self) -> Result<Grid1D> {
        Grid1D::new(self.grid.x_min, self.grid.x_max, self.grid.n)
            .map_err(|e| param("grid", e.to_string()))
    }

    pub fn weight_theta(&self) -> f64 {
        self.diagnostics.weight_theta.unwrap_or(self.scenario.theta)
    }

    /// Range checks; each error names the offending key.
    pub fn validate(&self) -> Result<()> {
        let grid = self.grid()?;
        self.time.validate()?;
        for (key, v) in self.tolerances.entries() {
            if !(v > 0.0 && v.is_finite()) {
                return Err(param(key, "tolerances must be positive"));
            }
        }
        if self.tolerances.r2_min >= 1.0 {
            return Err(param("r2_min", "must be below 1"));
        }
        let s = &self.scenario;
        let kind = s.kind();
        for (key, v) in [("amplitude", s.amplitude), ("center", s.center), ("c", s.c)] {
            if !v.is_finite() {
                return Err(param(key, "must be finite"));
            }
        }
        if (s.experiment == Experiment::Persistence || kind == DataKind::SechTail)
            && !(s.theta > 0.0 && s.theta < 1.0) {
                return Err(param("theta", "theta must be in (0,1)"));
            }
        if matches!(kind, DataKind::CompactBump | DataKind::Gaussian) && !(s.width > 0.0) {
            return Err(param("width", "must be positive"));
        }
        if kind == DataKind::SmoothedPeakon {
            if !(s.epsilon > 0.0) {
                return Err(param("epsilon", "must be positive"));
            }
            if s.experiment == Experiment::PeakonValidation && s.epsilon < 4.0 * grid.dx() {
                return Err(param("epsilon", format!("must be at least 4Δx = {}", 4.0 * grid.dx())));
            }
        }
        if !(s.mu > 0.0 && s.mu.is_finite()) {
            return Err(param("mu", "must be positive"));
        }
        if !(s.alpha > 0.5 && s.alpha < 1.0) {
            return Err(param("alpha", "alpha must be in (1/2,1)"));
        }
        if s.experiment == Experiment::UniqueContinuation && !(s.t1 > 0.0 && s.t1 <= self.time.t_end) {
            return Err(param("t1", "t1 must be in (0, t_end]"));
        }
        if let Some(t) = self.diagnostics.weight_theta {
            if !(t > 0.0 && t < 1.0) {
                return Err(param("weight_theta", "theta must be in (0,1)"));
            }
        }
        let d = &self.diagnostics;
        if !(d.weight_cutoff > 0.0 && d.weight_cutoff.is_finite()) {
            return Err(param("weight_cutoff", "must be positive"));
        }
        if !(d.tail_margin >= 0.0 && d.tail_width > 0.0) {
            return Err(param("tail_margin", "margin must be non-negative and width positive"));
        }
        if d.tail_margin + d.tail_width >= 0.5 * (grid.x_max() - grid.x_min()) {
            return Err(param("tail_width", "tail_margin + tail_width must be below half the domain length"));
        }
        if !(d.h_tail_window[0] < d.h_tail_window[1]) {
            return Err(param("h_tail_window", "must be an increasing pair"));
        }
        if let Some(f) = self.output.formats.iter().find(|f| !FORMATS.contains(&f.as_str())) {
            return Err(param("formats", format!("unknown format `{f}`")));
        }
        Ok(())
    }
}

/// Parses and validates a TOML document.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Parameter {
        key: e.span().map(|s| text[s].trim().to_string()).unwrap_or_default(),
        message: e.message().trim().to_string(),
    })?;
    cfg.validate()?;
    Ok(cfg)
}

/// TOML rendering that [`parse_config`] reads back unchanged.
pub fn print_config(cfg: &RunConfig) -> String {
    toml::to_string(cfg).expect("configuration is always representable")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_document_gets_defaults() {
        let cfg = parse_config("[scenario]\nexperiment = \"compact_support\"\n").unwrap();
        assert_eq!(cfg.tolerances, Tolerances::default());
        assert_eq!(cfg.grid, GridConfig::default());
        assert_eq!(cfg.time.checkpoints, vec![0.25, 0.5, 1.0]);
        assert_eq!(cfg.scenario.kind(), DataKind::CompactBump);
    }

    #[test]
    fn theta_out_of_range_names_the_key() {
        let err = parse_config("[scenario]\nexperiment = \"persistence\"\ntheta = 1.5\n").unwrap_err();
        assert!(err.to_string().contains("theta must be in (0,1)"), "{err}");
    }

    #[test]
    fn duplicate_key_names_the_key() {
        let err = parse_config("[scenario]\nexperiment = \"persistence\"\ntheta = 0.5\ntheta = 0.6\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("duplicate") && msg.contains("theta"), "{msg}");
    }

    #[test]
    fn unknown_key_is_rejected() {
        let err = parse_config("[scenario]\nexperiment = \"persistence\"\n[tolerances]\nslope_tool = 0.1\n").unwrap_err();
        assert!(err.to_string().contains("slope_tool"), "{err}");
    }

    #[test]
    fn missing_experiment_is_reported() {
        let err = parse_config("[scenario]\namplitude = 0.1\n").unwrap_err();
        assert!(err.to_string().contains("experiment"), "{err}");
    }

    #[test]
    fn type_mismatch_names_the_key() {
        let err = parse_config("[grid]\nn = \"many\"\n[scenario]\nexperiment = \"fast_decay\"\n").unwrap_err();
        assert!(err.to_string().contains("many") || err.to_string().contains('n'), "{err}");
    }

    #[test]
    fn non_positive_tolerance_is_rejected() {
        let err = parse_config("[scenario]\nexperiment = \"fast_decay\"\n[tolerances]\nslope_tol = 0.0\n").unwrap_err();
        assert!(err.to_string().contains("slope_tol"), "{err}");
    }

    #[test]
    fn print_then_parse_is_identity() {
        for e in Experiment::ALL {
            let cfg = RunConfig::reference(e);
            assert_eq!(parse_config(&print_config(&cfg)).unwrap(), cfg);
        }
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    fn any_config() -> impl Strategy<Value = RunConfig> {
        (
            prop::sample::select(Experiment::ALL.to_vec()),
            0.0f64..0.3,
            0.05f64..0.95,
            1usize..4,
            0.1f64..2.0,
            prop::option::of(0.05f64..0.95),
            1e-9f64..1e-2,
            prop::sample::subsequence(FORMATS.to_vec(), 0..=3),
        )
            .prop_map(|(e, amplitude, theta, stride, t_end, wt, tol, formats)| {
                let mut cfg = RunConfig::reference(e);
                cfg.scenario.amplitude = amplitude;
                cfg.scenario.theta = theta;
                cfg.scenario.t1 = t_end / 2.0;
                cfg.time.monitor_stride = stride;
                cfg.time.t_end = t_end;
                cfg.diagnostics.weight_theta = wt;
                cfg.tolerances.slope_tol = tol;
                cfg.output.formats = formats.into_iter().map(String::from).collect();
                cfg
            })
    }

    proptest! {
        #[test]
        fn print_then_parse_is_identity(cfg in any_config()) {
            prop_assume!(cfg.validate().is_ok());
            prop_assert_eq!(parse_config(&print_config(&cfg)).unwrap(), cfg);
        }

        #[test]
        fn bad_theta_names_the_key(theta in prop_oneof![-5.0f64..=0.0, 1.0f64..5.0]) {
            let text = format!("[scenario]\nexperiment = \"persistence\"\ntheta = {theta:?}\n");
            match parse_config(&text) {
                Err(Error::Parameter { key, message }) => {
                    prop_assert_eq!(key, "theta");
                    prop_assert_eq!(message, "theta must be in (0,1)");
                }
                other => prop_assert!(false, "{:?}", other),
            }
        }
    }
}
