//! Monte-Carlo harness: synthetic networks and trial data, replicated
//! estimation, and bias / ESE / ASE / coverage summaries.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use libm::sqrt;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::{Aggregator, Design, StudyData};
use crate::error::{Error, Result};
use crate::estimator::{Arm, EstimatorKind, WeightOptions};
use crate::graph::{components, fast_greedy_communities, ComponentPartition, Network};
use crate::linalg::min_symmetric_eigenvalue;
use crate::math::{max_abs, normal_quantile};
use crate::optim::OptimOptions;
use crate::policy::AllocationPolicy;
use crate::propensity::{fit_component_propensity, fit_ipw1, fit_ipw2, Ipw1Options, PropensityModel};
use crate::variance::{estimate_theta, psi_matrix, sandwich, ThetaVector};

mod exposure;
mod network;
mod outcomes;

pub use exposure::{gen_covariates, gen_exposures, CovariateKind, ExposureMechanism, RANDOM_EFFECT_SD};
pub use network::{gen_regular_network, regular_component};
pub use outcomes::{
    gen_potential_outcomes, stratified_probability, true_estimands, OutcomeModel, PotentialOutcomeTable,
    MAX_FULL_VECTOR_DEGREE,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Main,
    NoRanef,
    ShiftedExposure,
    StratifiedViolation,
    /// Fixed user-supplied network (e.g. the bundled TRIP-like fixture).
    TripLike,
    /// As `TripLike`, with four covariates in the exposure model.
    TripLikeCovariates,
    RegenNetwork,
}

impl Scenario {
    pub const ALL: [Scenario; 7] = [
        Self::Main,
        Self::NoRanef,
        Self::ShiftedExposure,
        Self::StratifiedViolation,
        Self::TripLike,
        Self::TripLikeCovariates,
        Self::RegenNetwork,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Main => "main",
            Self::NoRanef => "no-ranef",
            Self::ShiftedExposure => "shifted-exposure",
            Self::StratifiedViolation => "stratified-violation",
            Self::TripLike => "trip-like",
            Self::TripLikeCovariates => "trip-like-covariates",
            Self::RegenNetwork => "regen-network",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|v| v.name() == s)
    }

    pub fn exposure(self) -> ExposureMechanism {
        match self {
            Self::NoRanef => ExposureMechanism::NoRandomEffect,
            Self::ShiftedExposure => ExposureMechanism::Shifted,
            Self::TripLikeCovariates => ExposureMechanism::FourCovariate,
            _ => ExposureMechanism::RandomEffect,
        }
    }

    pub fn outcome(self) -> OutcomeModel {
        match self {
            Self::StratifiedViolation => OutcomeModel::FullVector,
            _ => OutcomeModel::Stratified,
        }
    }

    pub fn covariates(self) -> CovariateKind {
        match self {
            Self::TripLikeCovariates => CovariateKind::Four,
            _ => CovariateKind::Binary,
        }
    }

    /// Whether the network is supplied rather than generated.
    pub fn uses_fixed_network(self) -> bool {
        matches!(self, Self::TripLike | Self::TripLikeCovariates)
    }
}

/// Which partition defines the independent units for the variance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PartitionChoice {
    #[default]
    Observed,
    Community,
}

impl PartitionChoice {
    pub fn name(self) -> &'static str {
        match self {
            Self::Observed => "observed",
            Self::Community => "community",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "observed" => Some(Self::Observed),
            "community" => Some(Self::Community),
            _ => None,
        }
    }

    pub fn apply(self, net: &Network) -> ComponentPartition {
        match self {
            Self::Observed => components(net),
            Self::Community => fast_greedy_communities(net),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub scenario: Scenario,
    pub components: usize,
    pub mean_size: f64,
    pub degree: usize,
    pub reps: usize,
    pub seed: u64,
    pub alphas: Vec<f64>,
    pub estimators: Vec<EstimatorKind>,
    pub partition: PartitionChoice,
    pub ci_level: f64,
    /// Study fails when more than this fraction of replicates fail.
    pub max_failure_rate: f64,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            scenario: Scenario::Main,
            components: 100,
            mean_size: 10.0,
            degree: 4,
            reps: 1000,
            seed: 1,
            alphas: vec![0.25, 0.5, 0.75],
            estimators: vec![EstimatorKind::Ipw1, EstimatorKind::Ipw2],
            partition: PartitionChoice::Observed,
            ci_level: 0.95,
            max_failure_rate: 0.05,
        }
    }
}

impl StudyConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.reps == 0 {
            return bad("reps must be at least 1".into());
        }
        if !self.scenario.uses_fixed_network() && self.components < 2 {
            return bad("at least two components are required".into());
        }
        if self.alphas.is_empty() {
            return bad("alpha grid is empty".into());
        }
        for &a in &self.alphas {
            AllocationPolicy::new(a)?;
        }
        if !(self.ci_level > 0.0 && self.ci_level < 1.0) {
            return bad(alloc::format!("ci level {} outside (0, 1)", self.ci_level));
        }
        if self.estimators.is_empty() {
            return bad("no estimators requested".into());
        }
        Ok(())
    }
}

/// `splitmix64` output for `x`.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generator for replicate `r`: seeded with `seed ⊕ splitmix64(r)`.
pub fn replicate_rng(seed: u64, r: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ splitmix64(r))
}

/// Generator for the fixed network of a study, on its own stream.
pub fn network_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    rng
}

/// Network shared by all replicates: the supplied one for fixed-network
/// scenarios, otherwise generated once from the seed.
pub fn study_network(config: &StudyConfig, supplied: Option<&Network>) -> Result<Network> {
    if config.scenario.uses_fixed_network() {
        return supplied
            .cloned()
            .ok_or_else(|| Error::InvalidConfig(alloc::format!("scenario {} needs a network", config.scenario.name())));
    }
    gen_regular_network(config.components, config.mean_size, config.degree, &mut network_rng(config.seed))
}

/// Numerical health of one replicate's sandwich.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SandwichHealth {
    /// Largest `|Σ_ab − Σ_ba|` before symmetrization.
    pub asymmetry: f64,
    pub min_eigenvalue: f64,
    /// `‖Σ_ν ψ_ν(θ̂)‖_∞`.
    pub psi_sum: f64,
}

/// One estimator's output on one replicate, in stacked target order.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorDraw {
    pub estimates: Vec<f64>,
    pub se: Vec<f64>,
    pub health: SandwichHealth,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateOutcome {
    pub truth: Vec<f64>,
    pub draws: Vec<(EstimatorKind, core::result::Result<EstimatorDraw, Error>)>,
}

/// Fits one estimator on a simulated data set and computes its sandwich.
pub fn estimate_draw(
    kind: EstimatorKind,
    design: &Design,
    observed: &ComponentPartition,
    inference: &ComponentPartition,
    alphas: &[AllocationPolicy],
) -> Result<EstimatorDraw> {
    let weights = WeightOptions::default();
    match kind {
        EstimatorKind::Ipw1 => draw_from(&fit_ipw1(design, &Ipw1Options::default())?, design, inference, alphas, &weights),
        EstimatorKind::Ipw2 => draw_from(
            &fit_ipw2(design, Aggregator::Mean, OptimOptions::default())?,
            design,
            inference,
            alphas,
            &weights,
        ),
        EstimatorKind::Component => draw_from(
            &fit_component_propensity(design, observed, &Ipw1Options::default())?,
            design,
            observed,
            alphas,
            &weights,
        ),
    }
}

fn draw_from<M: PropensityModel>(
    model: &M,
    design: &Design,
    partition: &ComponentPartition,
    alphas: &[AllocationPolicy],
    weights: &WeightOptions,
) -> Result<EstimatorDraw> {
    let theta: ThetaVector = estimate_theta(model, design, partition, alphas, weights)?;
    let cov = sandwich(model, design, partition, &theta, weights)?;
    let psi = psi_matrix(model, design, partition, &theta, weights)?;
    let sums: Vec<f64> = (0..psi.ncols()).map(|c| psi.column(c).sum()).collect();
    let p = theta.nuisance.len();
    let se = (0..theta.targets.len())
        .map(|t| sqrt(cov.sigma[(p + t, p + t)].max(0.0)))
        .collect();
    Ok(EstimatorDraw {
        estimates: theta.targets.clone(),
        se,
        health: SandwichHealth {
            asymmetry: cov.raw_asymmetry,
            min_eigenvalue: min_symmetric_eigenvalue(&cov.sigma),
            psi_sum: max_abs(&sums),
        },
    })
}

/// Steps 1–3 for replicate `r`, then every requested estimator.
pub fn run_replicate(config: &StudyConfig, net: &Network, r: u64) -> Result<ReplicateOutcome> {
    let mut rng = replicate_rng(config.seed, r);
    let regenerated;
    let net = if config.scenario == Scenario::RegenNetwork {
        regenerated = gen_regular_network(config.components, config.mean_size, config.degree, &mut rng)?;
        &regenerated
    } else {
        net
    };
    let observed = components(net);
    let inference = config.partition.apply(net);

    let covariates = gen_covariates(net.n(), config.scenario.covariates(), &mut rng);
    let z: Vec<f64> = covariates.iter().map(|row| row[0]).collect();
    let table = gen_potential_outcomes(net, &z, config.scenario.outcome(), &mut rng)?;
    let exposure = gen_exposures(&covariates, &observed, config.scenario.exposure(), &mut rng);
    let outcome = table.observe(net, &exposure);
    let truth = true_estimands(&table, &config.alphas);

    let data = StudyData::new(exposure, outcome, covariates)?;
    let design = Design::new(net, &data, Aggregator::Mean)?;
    let alphas: Vec<AllocationPolicy> = config.alphas.iter().map(|&a| AllocationPolicy::new(a)).collect::<Result<_>>()?;
    let draws = config
        .estimators
        .iter()
        .map(|&kind| (kind, estimate_draw(kind, &design, &observed, &inference, &alphas)))
        .collect();
    Ok(ReplicateOutcome { truth, draws })
}

/// One summary row of a study.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub estimator: EstimatorKind,
    pub arm: Arm,
    pub alpha: f64,
    /// Mean true value over replicates.
    pub truth: f64,
    pub bias: f64,
    /// Sample SD of the estimates; NaN with fewer than two replicates.
    pub ese: f64,
    pub ase: f64,
    pub ecp: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationReport {
    pub scenario: Scenario,
    pub reps: usize,
    pub seed: u64,
    pub ci_level: f64,
    pub rows: Vec<ReportRow>,
    /// Failed replicates per estimator.
    pub failures: Vec<(EstimatorKind, usize)>,
    /// Worst sandwich health over successful replicates, per estimator.
    pub health: Vec<(EstimatorKind, SandwichHealth)>,
}

/// Row order: exposed, unexposed, then marginal arm; α ascending within.
pub const REPORT_ARMS: [Arm; 3] = [Arm::Exposed, Arm::Unexposed, Arm::Marginal];

/// Summarizes replicate outcomes (in replicate order).
pub fn aggregate(config: &StudyConfig, outcomes: &[ReplicateOutcome]) -> Result<SimulationReport> {
    let reps = outcomes.len();
    let n_alpha = config.alphas.len();
    let z = normal_quantile(1.0 - (1.0 - config.ci_level) / 2.0);
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let mut health = Vec::new();
    let mean_truth: Vec<f64> = (0..3 * n_alpha)
        .map(|t| outcomes.iter().map(|o| o.truth[t]).sum::<f64>() / reps as f64)
        .collect();

    for (e, &kind) in config.estimators.iter().enumerate() {
        let ok: Vec<(&Vec<f64>, &EstimatorDraw)> = outcomes
            .iter()
            .filter_map(|o| o.draws[e].1.as_ref().ok().map(|d| (&o.truth, d)))
            .collect();
        let failed = reps - ok.len();
        if failed as f64 > config.max_failure_rate * reps as f64 {
            return Err(Error::StudyFailures {
                estimator: kind.name(),
                failed,
                reps,
            });
        }
        failures.push((kind, failed));
        let mut worst = SandwichHealth {
            asymmetry: 0.0,
            min_eigenvalue: f64::INFINITY,
            psi_sum: 0.0,
        };
        for (_, d) in &ok {
            worst.asymmetry = worst.asymmetry.max(d.health.asymmetry);
            worst.min_eigenvalue = worst.min_eigenvalue.min(d.health.min_eigenvalue);
            worst.psi_sum = worst.psi_sum.max(d.health.psi_sum);
        }
        health.push((kind, worst));

        let k = ok.len() as f64;
        for arm in REPORT_ARMS {
            for a in 0..n_alpha {
                let t = 3 * a + arm.offset();
                let mean_est = ok.iter().map(|(_, d)| d.estimates[t]).sum::<f64>() / k;
                let bias = ok.iter().map(|(tr, d)| d.estimates[t] - tr[t]).sum::<f64>() / k;
                let ese = if ok.len() > 1 {
                    let ss: f64 = ok.iter().map(|(_, d)| (d.estimates[t] - mean_est) * (d.estimates[t] - mean_est)).sum();
                    sqrt(ss / (k - 1.0))
                } else {
                    f64::NAN
                };
                let ase = ok.iter().map(|(_, d)| d.se[t]).sum::<f64>() / k;
                let hits = ok
                    .iter()
                    .filter(|(tr, d)| (d.estimates[t] - tr[t]).abs() <= z * d.se[t])
                    .count();
                rows.push(ReportRow {
                    estimator: kind,
                    arm,
                    alpha: config.alphas[a],
                    truth: mean_truth[t],
                    bias,
                    ese,
                    ase,
                    ecp: hits as f64 / k,
                });
            }
        }
    }
    Ok(SimulationReport {
        scenario: config.scenario,
        reps,
        seed: config.seed,
        ci_level: config.ci_level,
        rows,
        failures,
        health,
    })
}

/// Serial study: replicates `0..reps` in order.
pub fn run_study(config: &StudyConfig, supplied: Option<&Network>) -> Result<SimulationReport> {
    config.validate()?;
    let net = study_network(config, supplied)?;
    let outcomes = (0..config.reps as u64)
        .map(|r| run_replicate(config, &net, r))
        .collect::<Result<Vec<_>>>()?;
    aggregate(config, &outcomes)
}
