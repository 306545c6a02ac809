use std::collections::BTreeMap;

use serde::Serialize;

/// Acceptance criteria that verdicts refer to, by id.
pub const CRITERIA: [(&str, &str); 11] = [
    ("AC1", "operator correctness"),
    ("AC2", "solver order"),
    ("AC3", "conservation"),
    ("AC4", "E+ vanishes for compact data"),
    ("AC5", "monotone tail coefficients"),
    ("AC6", "exact exponential tails"),
    ("AC7", "unique continuation cross-check"),
    ("AC8", "persistence of weighted decay"),
    ("AC9", "momentum support"),
    ("AC10", "peakon validation"),
    ("AC11", "kernel-weight bound"),
];

pub fn is_criterion(id: &str) -> bool {
    CRITERIA.iter().any(|(c, _)| *c == id)
}

/// One monitored time. Unavailable quantities are `NaN`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeriesRow {
    pub t: f64,
    pub h1: f64,
    pub m0: f64,
    pub e_plus: f64,
    pub e_minus: f64,
    pub de_plus_pred: f64,
    pub c_plus: f64,
    pub c_minus: f64,
    pub slope_right: f64,
    pub slope_left: f64,
    pub supp_left: f64,
    pub supp_right: f64,
    pub eta_a: f64,
    pub eta_b: f64,
    pub wsup_u: f64,
    pub wsup_ux: f64,
}

impl SeriesRow {
    pub const HEADER: &'static str =
        "t,H1,M0,E_plus,E_minus,dEplus_pred,c_plus,c_minus,slope_right,slope_left,supp_left,supp_right,eta_a,eta_b,wsup_u,wsup_ux";

    pub fn values(&self) -> [f64; 16] {
        [
            self.t,
            self.h1,
            self.m0,
            self.e_plus,
            self.e_minus,
            self.de_plus_pred,
            self.c_plus,
            self.c_minus,
            self.slope_right,
            self.slope_left,
            self.supp_left,
            self.supp_right,
            self.eta_a,
            self.eta_b,
            self.wsup_u,
            self.wsup_ux,
        ]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub id: String,
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

impl Verdict {
    pub fn new(id: &str, name: impl Into<String>, measured: f64, tolerance: f64, pass: bool) -> Self {
        debug_assert!(is_criterion(id));
        Self { id: id.into(), name: name.into(), measured, tolerance, pass, detail: String::new() }
    }

    /// `measured ≤ tolerance`; `NaN` fails.
    pub fn at_most(id: &str, name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Self::new(id, name, measured, tolerance, measured <= tolerance)
    }

    /// `measured ≥ tolerance`; `NaN` fails.
    pub fn at_least(id: &str, name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Self::new(id, name, measured, tolerance, measured >= tolerance)
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    /// The solver stopped before the final time.
    Inconclusive,
}

/// Snapshot written as `profile_t<k>.csv`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProfileSnapshot {
    pub t: f64,
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub h: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub name: String,
    pub config: serde_json::Value,
    pub status: Status,
    pub verdicts: Vec<Verdict>,
    pub metrics: BTreeMap<String, f64>,
    pub partial: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub blow_up: Option<String>,
    /// Index of the last row of a partial run.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flagged_row: Option<usize>,
    #[serde(skip)]
    pub rows: Vec<SeriesRow>,
    #[serde(skip)]
    pub profiles: Vec<ProfileSnapshot>,
}

impl ExperimentReport {
    pub fn new(name: &str, config: serde_json::Value) -> Self {
        Self {
            name: name.into(),
            config,
            status: Status::Pass,
            verdicts: Vec::new(),
            metrics: BTreeMap::new(),
            partial: false,
            blow_up: None,
            flagged_row: None,
            rows: Vec::new(),
            profiles: Vec::new(),
        }
    }

    pub fn push(&mut self, v: Verdict) {
        self.verdicts.push(v);
    }

    pub fn metric(&mut self, key: &str, value: f64) {
        self.metrics.insert(key.into(), value);
    }

    /// Recomputes `status` from the verdicts and the partial flag.
    pub fn finish(&mut self) {
        self.status = if self.partial {
            Status::Inconclusive
        } else if self.verdicts.iter().all(|v| v.pass) {
            Status::Pass
        } else {
            Status::Fail
        };
    }

    pub fn verdict(&self, id: &str, name: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.id == id && v.name == name)
    }

    /// Verdicts that refer to criterion `id`.
    pub fn verdicts_for<'a>(&'a self, id: &'a str) -> impl Iterator<Item = &'a Verdict> + 'a {
        self.verdicts.iter().filter(move |v| v.id == id)
    }
}
