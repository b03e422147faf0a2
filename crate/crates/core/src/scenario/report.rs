//! Scenario reports and their files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::cohomology::{CohomologyGroup, ExactnessReport};
use crate::dynamics::{EomReport, Quantization};
use crate::error::Result;
use crate::scenario::config::ScenarioConfig;
use crate::wilson::WilsonDiagnostics;

const ROUND_OFF: f64 = 1e-12;

/// Whether a number comes from exact arithmetic or carries discretization error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Exact,
    Numeric,
}

/// A reported number with its tolerance and, when an oracle exists, its error.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Measured {
    pub value: f64,
    pub mode: Mode,
    pub tolerance: f64,
    pub oracle: Option<f64>,
    pub error: Option<f64>,
}

impl Measured {
    pub fn numeric(value: f64, tolerance: f64) -> Self {
        Measured { value, mode: Mode::Numeric, tolerance, oracle: None, error: None }
    }

    pub fn against(value: f64, oracle: f64, tolerance: f64) -> Self {
        Measured { value, mode: Mode::Numeric, tolerance, oracle: Some(oracle), error: Some((value - oracle).abs()) }
    }

    /// Relative error when the oracle is nonzero, absolute otherwise.
    pub fn within(&self) -> bool {
        match (self.oracle, self.error) {
            (Some(o), Some(e)) if o != 0.0 => e <= self.tolerance * o.abs(),
            (Some(_), Some(e)) => e <= self.tolerance,
            _ => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CohomologyRow {
    pub space: String,
    pub degree: usize,
    pub group: CohomologyGroup,
    pub mode: Mode,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GerbeSummary {
    /// Free coordinates of the jump class in `H¹(Z)`.
    pub class: Vec<i64>,
    pub winding: i64,
    pub trivial: bool,
    pub mode: Mode,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Charges {
    pub electric: Measured,
    /// Per chart, weighted by a partition of unity on the corner circle.
    pub magnetic: Vec<Measured>,
    pub magnetic_total: Measured,
    pub magnetic_convention: String,
    pub bracket: Measured,
    /// The presymplectic potential on the electric smearing direction.
    pub potential_on_alpha: Measured,
    pub gauge_drift: Measured,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SphereSummary {
    /// Absent when only exact invariants were requested.
    pub charge: Option<Measured>,
    pub exactness: ExactnessReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesRow {
    pub level: usize,
    pub h: f64,
    pub value: f64,
    pub error: Option<f64>,
}

/// One observable across refinement levels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Series {
    pub observable: String,
    pub oracle: Option<f64>,
    pub rows: Vec<SeriesRow>,
    pub fitted_order: Option<f64>,
}

impl Series {
    pub fn new(observable: &str, oracle: Option<f64>) -> Self {
        Series { observable: observable.into(), oracle, rows: Vec::new(), fitted_order: None }
    }

    pub fn push(&mut self, level: usize, h: f64, value: f64) {
        let error = self.oracle.map(|o| (value - o).abs());
        self.rows.push(SeriesRow { level, h, value, error });
    }

    /// Least-squares slope of `log |error|` against `log h`. Errors at round-off level
    /// carry no rate and are left out.
    pub fn fit(&mut self) {
        let floor = ROUND_OFF * self.oracle.map_or(1.0, |o| o.abs().max(1.0));
        let pts: Vec<(f64, f64)> = self
            .rows
            .iter()
            .filter_map(|r| r.error.filter(|&e| e > floor).map(|e| (r.h.ln(), e.ln())))
            .collect();
        if pts.len() < 2 {
            return;
        }
        let n = pts.len() as f64;
        let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        self.fitted_order = (sxx > 0.0).then(|| sxy / sxx);
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("h,value,error\n");
        for r in &self.rows {
            let err = r.error.map(|e| format!("{e:e}")).unwrap_or_default();
            writeln!(out, "{:e},{:e},{err}", r.h, r.value).expect("writing to a string");
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub mode: Mode,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    InvariantFailure,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioReport {
    pub scenario: String,
    pub status: Status,
    pub config: ScenarioConfig,
    pub cohomology: Vec<CohomologyRow>,
    pub quantization: Option<Quantization>,
    pub gerbe: Option<GerbeSummary>,
    pub wilson: Option<WilsonDiagnostics>,
    pub eom: Option<EomReport>,
    pub charges: Option<Charges>,
    pub sphere: Option<SphereSummary>,
    pub convergence: Vec<Series>,
    pub checks: Vec<Check>,
}

impl ScenarioReport {
    pub fn exact_failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.mode == Mode::Exact && !c.passed)
    }

    pub fn numeric_failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.mode == Mode::Numeric && !c.passed)
    }

    /// 0 ok, 1 invariant failure, 3 infeasible; numeric checks count only when `strict`.
    pub fn exit_code(&self, strict: bool) -> i32 {
        if self.status == Status::Infeasible {
            3
        } else if self.exact_failures().next().is_some() || (strict && self.numeric_failures().next().is_some()) {
            1
        } else {
            0
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}

/// Wall-clock time per pipeline stage, kept out of the report so that reports are
/// reproducible byte for byte.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Timings {
    pub stages: Vec<(String, f64)>,
}

impl Timings {
    pub fn record<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let start = std::time::Instant::now();
        let out = f();
        self.stages.push((stage.into(), start.elapsed().as_secs_f64()));
        out
    }
}

/// Writes `report.json`, `timings.json` and one CSV per convergence series.
pub fn emit_outputs(report: &ScenarioReport, timings: &Timings, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut put = |name: String, body: String| -> Result<()> {
        let path = dir.join(name);
        std::fs::write(&path, body)?;
        written.push(path);
        Ok(())
    };
    put("report.json".into(), report.to_json()?)?;
    for s in &report.convergence {
        put(format!("{}.csv", s.observable), s.to_csv())?;
    }
    put("timings.json".into(), serde_json::to_string_pretty(timings)? + "\n")?;
    Ok(written)
}
