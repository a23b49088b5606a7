//! Scenario configuration files, the parallel replicate runner, and study
//! reports.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;

use netspill_core::estimator::{Arm, EstimatorKind};
use netspill_core::graph::Network;
use netspill_core::simulate::{
    aggregate, run_replicate, study_network, PartitionChoice, ReplicateOutcome, Scenario, SimulationReport,
    StudyConfig,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::io::fmt_sig;

fn default_m() -> usize {
    100
}
fn default_mean_size() -> f64 {
    10.0
}
fn default_degree() -> usize {
    4
}
fn default_reps() -> usize {
    1000
}
fn default_alpha_grid() -> Vec<f64> {
    vec![0.25, 0.5, 0.75]
}

/// JSON scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: String,
    #[serde(default = "default_m")]
    pub m: usize,
    #[serde(default = "default_mean_size")]
    pub mean_size: f64,
    #[serde(default = "default_degree")]
    pub degree: usize,
    #[serde(default = "default_reps")]
    pub reps: usize,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "default_alpha_grid")]
    pub alpha_grid: Vec<f64>,
    #[serde(default)]
    pub estimators: Option<Vec<String>>,
    #[serde(default)]
    pub partition: Option<String>,
    #[serde(default)]
    pub ci_level: Option<f64>,
    /// Edge list for the fixed-network scenarios.
    #[serde(default)]
    pub edges: Option<PathBuf>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            scenario: "main".into(),
            m: default_m(),
            mean_size: default_mean_size(),
            degree: default_degree(),
            reps: default_reps(),
            seed: None,
            alpha_grid: default_alpha_grid(),
            estimators: None,
            partition: None,
            ci_level: None,
            edges: None,
        }
    }
}

pub fn parse_estimators(names: &[String]) -> CliResult<Vec<EstimatorKind>> {
    let mut out = Vec::new();
    for name in names {
        let kinds = match name.as_str() {
            "both" => vec![EstimatorKind::Ipw1, EstimatorKind::Ipw2],
            other => vec![EstimatorKind::parse(other)
                .ok_or_else(|| CliError::validation("INVALID_CONFIG", format!("unknown estimator `{other}`")))?],
        };
        for k in kinds {
            if !out.contains(&k) {
                out.push(k);
            }
        }
    }
    Ok(out)
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::validation("INVALID_CONFIG", e.to_string()))
    }

    /// Core configuration, with `seed` standing in for a missing seed.
    pub fn to_study(&self, seed: u64) -> CliResult<StudyConfig> {
        let invalid = |msg: String| CliError::validation("INVALID_CONFIG", msg);
        let scenario = Scenario::parse(&self.scenario).ok_or_else(|| invalid(format!("unknown scenario `{}`", self.scenario)))?;
        let defaults = StudyConfig::default();
        let estimators = match &self.estimators {
            Some(names) => parse_estimators(names)?,
            None => defaults.estimators.clone(),
        };
        let partition = match &self.partition {
            Some(p) => PartitionChoice::parse(p).ok_or_else(|| invalid(format!("unknown partition `{p}`")))?,
            None => PartitionChoice::Observed,
        };
        let config = StudyConfig {
            scenario,
            components: self.m,
            mean_size: self.mean_size,
            degree: self.degree,
            reps: self.reps,
            seed: self.seed.unwrap_or(seed),
            alphas: self.alpha_grid.clone(),
            estimators,
            partition,
            ci_level: self.ci_level.unwrap_or(defaults.ci_level),
            max_failure_rate: defaults.max_failure_rate,
        };
        config.validate()?;
        Ok(config)
    }
}

/// Runs `f` on a pool of `threads` workers (all cores when `None`).
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> CliResult<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        if t == 0 {
            return Err(CliError::validation("INVALID_CONFIG", "--threads must be positive"));
        }
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::runtime("THREAD_POOL", e.to_string()))?;
    Ok(pool.install(f))
}

/// Replicate outcomes in replicate order, computed in parallel.
pub fn run_replicates(config: &StudyConfig, net: &Network) -> netspill_core::Result<Vec<ReplicateOutcome>> {
    (0..config.reps as u64)
        .into_par_iter()
        .map(|r| run_replicate(config, net, r))
        .collect()
}

/// Parallel counterpart of the serial core study; identical output.
pub fn run_study(config: &StudyConfig, supplied: Option<&Network>) -> netspill_core::Result<SimulationReport> {
    config.validate()?;
    let net = study_network(config, supplied)?;
    aggregate(config, &run_replicates(config, &net)?)
}

pub fn arm_label(arm: Arm) -> &'static str {
    match arm {
        Arm::Exposed => "exposed",
        Arm::Unexposed => "unexposed",
        Arm::Marginal => "marginal",
    }
}

/// Half-width of a 95% binomial interval around 0.95 with `reps` draws.
pub fn ecp_margin(reps: usize) -> f64 {
    1.959964 * (0.95 * 0.05 / reps as f64).sqrt()
}

pub const REPORT_HEADER: [&str; 8] = ["estimator", "estimand", "alpha", "true", "bias", "ese", "ase", "ecp"];

/// CSV report (6 significant digits). Undefined ESE is written as `NA`.
pub fn write_report_csv<W: Write>(mut w: W, report: &SimulationReport) -> CliResult<()> {
    let io = |e: std::io::Error| CliError::runtime("IO_ERROR", e.to_string());
    writeln!(
        w,
        "# scenario={} reps={} seed={} ci_level={}",
        report.scenario.name(),
        report.reps,
        report.seed,
        report.ci_level
    )
    .map_err(io)?;
    writeln!(w, "# ecp margin of error +/-{}", fmt_sig(ecp_margin(report.reps), 3)).map_err(io)?;
    if report.reps < 2 {
        writeln!(w, "# ese undefined with fewer than 2 replicates").map_err(io)?;
    }
    for (kind, failed) in &report.failures {
        writeln!(w, "# failures {}={failed}", kind.name()).map_err(io)?;
    }
    let mut out = csv::Writer::from_writer(w);
    let csv_err = |e: csv::Error| CliError::runtime("IO_ERROR", e.to_string());
    out.write_record(REPORT_HEADER).map_err(csv_err)?;
    for row in &report.rows {
        out.write_record([
            row.estimator.name().to_string(),
            arm_label(row.arm).to_string(),
            fmt_sig(row.alpha, 6),
            fmt_sig(row.truth, 6),
            fmt_sig(row.bias, 6),
            fmt_sig(row.ese, 6),
            fmt_sig(row.ase, 6),
            fmt_sig(row.ecp, 6),
        ])
        .map_err(csv_err)?;
    }
    out.flush().map_err(io)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRowJson {
    pub estimator: String,
    pub estimand: String,
    pub alpha: f64,
    #[serde(rename = "true")]
    pub truth: f64,
    pub bias: f64,
    /// `None` when undefined (fewer than two replicates).
    pub ese: Option<f64>,
    pub ase: f64,
    pub ecp: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HealthJson {
    pub asymmetry: f64,
    pub min_eigenvalue: f64,
    pub psi_sum: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSummary {
    pub scenario: String,
    pub reps: usize,
    pub seed: u64,
    pub ci_level: f64,
    pub ecp_margin: f64,
    pub failures: BTreeMap<String, usize>,
    pub health: BTreeMap<String, HealthJson>,
    pub rows: Vec<ReportRowJson>,
}

pub fn report_summary(report: &SimulationReport) -> ReportSummary {
    ReportSummary {
        scenario: report.scenario.name().into(),
        reps: report.reps,
        seed: report.seed,
        ci_level: report.ci_level,
        ecp_margin: ecp_margin(report.reps),
        failures: report.failures.iter().map(|(k, f)| (k.name().to_string(), *f)).collect(),
        health: report
            .health
            .iter()
            .map(|(k, h)| {
                (
                    k.name().to_string(),
                    HealthJson {
                        asymmetry: h.asymmetry,
                        min_eigenvalue: h.min_eigenvalue,
                        psi_sum: h.psi_sum,
                    },
                )
            })
            .collect(),
        rows: report
            .rows
            .iter()
            .map(|r| ReportRowJson {
                estimator: r.estimator.name().into(),
                estimand: arm_label(r.arm).into(),
                alpha: r.alpha,
                truth: r.truth,
                bias: r.bias,
                ese: r.ese.is_finite().then_some(r.ese),
                ase: r.ase,
                ecp: r.ecp,
            })
            .collect(),
    }
}
