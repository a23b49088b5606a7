//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.
//!
//! `NETSPILL_FULL=1` runs the 1000-replicate version of the m=200 study
//! (about twice as long); the default is the 500-replicate mode with its
//! wider coverage window. `NETSPILL_ONLY=2,7` restricts the run (criterion
//! 7 needs 2 and 3).

use std::time::{Duration, Instant};

use netspill::cli::{estimate, EstimateRequest};
use netspill::{fixture, io, study};
use netspill_core::data::{Aggregator, Design, StudyData};
use netspill_core::estimator::{contributions, y_hat, Arm, EffectKind, EstimatorKind, WeightOptions};
use netspill_core::graph::{components, fast_greedy_with_trace, modularity, Network};
use netspill_core::math::{expit, ln_choose};
use netspill_core::optim::OptimOptions;
use netspill_core::policy::{pi_count, pi_vector, AllocationPolicy};
use netspill_core::propensity::{eval_f1, fit_ipw1, fit_ipw2, Ipw1Fit, Ipw1Options, KnownPropensity, Numerator, PropensityModel};
use netspill_core::simulate::{
    aggregate, gen_covariates, gen_exposures, gen_potential_outcomes, gen_regular_network, network_rng,
    study_network, true_estimands, CovariateKind, ExposureMechanism, OutcomeModel, PartitionChoice,
    ReplicateOutcome, Scenario, SimulationReport, StudyConfig,
};
use netspill_core::variance::{analyze, effect_grid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// Tolerances.
const ENUMERATION_TOL: f64 = 1e-10;
const ENUMERATION_SECONDS: f64 = 5.0;
const QUADRATURE_TOL: f64 = 1e-6;
const IDENTITY_TOL: f64 = 1e-12;
const MAIN_BIAS: f64 = 0.006;
const MAIN_ECP_FULL: (f64, f64) = (0.92, 0.97);
const MAIN_ECP_HALF: (f64, f64) = (0.91, 0.98);
const MAIN_MINUTES_FULL: f64 = 30.0;
const MAIN_MINUTES_HALF: f64 = 15.0;
const MISSPEC_IPW2_ECP_BELOW: f64 = 0.92;
const MISSPEC_IPW1_ECP_AT_LEAST: f64 = 0.90;
const ASE_ESE_RATIO: f64 = 0.25;
const ASYMMETRY_TOL: f64 = 1e-10;
const EIGEN_TOL: f64 = -1e-8;
const PSI_SUM_TOL: f64 = 1e-6;

const ALPHAS: [f64; 3] = [0.25, 0.5, 0.75];

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn policy(a: f64) -> AllocationPolicy {
    AllocationPolicy::new(a).unwrap()
}

fn label(arm: Arm, alpha: f64) -> String {
    match arm {
        Arm::Exposed => format!("Y(1,{alpha})"),
        Arm::Unexposed => format!("Y(0,{alpha})"),
        Arm::Marginal => format!("Y({alpha})"),
    }
}

// 1. Exact unbiasedness with known propensities.

fn enumeration() -> Verdict {
    let start = Instant::now();
    // A 4-cycle with one chord and a 5-node "house".
    let net = Network::from_index_edges(
        9,
        &[(0, 1), (1, 2), (2, 3), (3, 0), (0, 2), (4, 5), (5, 6), (6, 7), (7, 8), (8, 4), (5, 8)],
    )
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let z: Vec<f64> = (0..9).map(|_| f64::from(u8::from(rng.random_bool(0.5)))).collect();
    let table = gen_potential_outcomes(&net, &z, OutcomeModel::Stratified, &mut rng).unwrap();
    let p: Vec<f64> = (0..9).map(|_| rng.random_range(0.2..0.8)).collect();
    let truth = true_estimands(&table, &ALPHAS);
    let partition = components(&net);
    let mut worst: f64 = 0.0;
    for (numerator, kind) in [(Numerator::Vector, EstimatorKind::Ipw1), (Numerator::Count, EstimatorKind::Ipw2)] {
        let model = KnownPropensity::new(p.clone(), numerator);
        let mut expected = [0.0; 9];
        for mask in 0u32..1 << 9 {
            let a: Vec<bool> = (0..9).map(|i| mask >> i & 1 == 1).collect();
            let prob: f64 = (0..9).map(|i| if a[i] { p[i] } else { 1.0 - p[i] }).product();
            let y = table.observe(&net, &a);
            let data = StudyData::new(a, y, vec![vec![]; 9]).unwrap();
            let design = Design::new(&net, &data, Aggregator::Mean).unwrap();
            for (ai, &alpha) in ALPHAS.iter().enumerate() {
                for arm in [Arm::Unexposed, Arm::Exposed] {
                    let v = y_hat(kind, &model, &design, &partition, arm, policy(alpha), &WeightOptions::default())
                        .unwrap()
                        .value;
                    expected[3 * ai + arm.offset()] += prob * v;
                }
            }
        }
        for ai in 0..ALPHAS.len() {
            for arm in [Arm::Unexposed, Arm::Exposed] {
                let t = 3 * ai + arm.offset();
                worst = worst.max((expected[t] - truth[t]).abs());
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        worst < ENUMERATION_TOL && secs < ENUMERATION_SECONDS,
        format!("max |E[Y^] - y| = {worst:.2e} (tol {ENUMERATION_TOL:e}), {secs:.2} s (limit {ENUMERATION_SECONDS} s)"),
    )
}

// 2, 3, 6. Simulation studies.

struct Study {
    outcomes: Vec<ReplicateOutcome>,
    report: SimulationReport,
    elapsed: Duration,
}

fn run_study(scenario: Scenario, m: usize, reps: usize, seed: u64, estimators: Vec<EstimatorKind>) -> Study {
    let config = StudyConfig {
        scenario,
        components: m,
        reps,
        seed,
        alphas: ALPHAS.to_vec(),
        estimators,
        partition: PartitionChoice::Observed,
        ..StudyConfig::default()
    };
    let start = Instant::now();
    let net = study_network(&config, None).unwrap();
    let outcomes = study::run_replicates(&config, &net).unwrap();
    let report = aggregate(&config, &outcomes).unwrap();
    Study {
        outcomes,
        report,
        elapsed: start.elapsed(),
    }
}

fn rows_for(report: &SimulationReport, kind: EstimatorKind) -> Vec<&netspill_core::simulate::ReportRow> {
    report.rows.iter().filter(|r| r.estimator == kind).collect()
}

fn print_rows(report: &SimulationReport, kind: EstimatorKind) {
    println!("    {:<11} {:>8} {:>8} {:>7} {:>7} {:>6}", kind.name(), "true", "bias", "ESE", "ASE", "ECP");
    for r in rows_for(report, kind) {
        println!(
            "    {:<11} {:>8.4} {:>8.4} {:>7.4} {:>7.4} {:>6.3}",
            label(r.arm, r.alpha),
            r.truth,
            r.bias,
            r.ese,
            r.ase,
            r.ecp
        );
    }
}

fn main_study(full: bool) -> (Verdict, Study) {
    let reps = if full { 1000 } else { 500 };
    let (window, minutes) = if full {
        (MAIN_ECP_FULL, MAIN_MINUTES_FULL)
    } else {
        (MAIN_ECP_HALF, MAIN_MINUTES_HALF)
    };
    let s = run_study(Scenario::Main, 200, reps, 2026, vec![EstimatorKind::Ipw1]);
    print_rows(&s.report, EstimatorKind::Ipw1);
    let rows = rows_for(&s.report, EstimatorKind::Ipw1);
    let max_bias = rows.iter().map(|r| r.bias.abs()).fold(0.0, f64::max);
    let ecp_lo = rows.iter().map(|r| r.ecp).fold(1.0, f64::min);
    let ecp_hi = rows.iter().map(|r| r.ecp).fold(0.0, f64::max);
    let mins = s.elapsed.as_secs_f64() / 60.0;
    let pass = rows.len() == 9
        && max_bias <= MAIN_BIAS
        && ecp_lo >= window.0
        && ecp_hi <= window.1
        && mins < minutes;
    let detail = format!(
        "{reps} reps: max |bias| {max_bias:.4} (<= {MAIN_BIAS}), ECP [{ecp_lo:.3}, {ecp_hi:.3}] within [{}, {}], {mins:.1} min (< {minutes})",
        window.0, window.1
    );
    (verdict(pass, detail), s)
}

fn misspecified() -> (Verdict, Study) {
    let s = run_study(Scenario::NoRanef, 100, 1000, 7, vec![EstimatorKind::Ipw1, EstimatorKind::Ipw2]);
    print_rows(&s.report, EstimatorKind::Ipw1);
    print_rows(&s.report, EstimatorKind::Ipw2);
    let ipw2 = rows_for(&s.report, EstimatorKind::Ipw2);
    let ipw1 = rows_for(&s.report, EstimatorKind::Ipw1);
    let outer: Vec<f64> = ipw2.iter().filter(|r| r.alpha != 0.5).map(|r| r.ecp).collect();
    let center: Vec<f64> = ipw1.iter().filter(|r| r.alpha == 0.5).map(|r| r.ecp).collect();
    let outer_max = outer.iter().copied().fold(0.0, f64::max);
    let center_min = center.iter().copied().fold(1.0, f64::min);
    let pass = outer.len() == 6
        && center.len() == 3
        && outer_max < MISSPEC_IPW2_ECP_BELOW
        && center_min >= MISSPEC_IPW1_ECP_AT_LEAST;
    let detail = format!(
        "IPW2 max ECP at alpha 0.25/0.75 = {outer_max:.3} (< {MISSPEC_IPW2_ECP_BELOW}); IPW1 min ECP at 0.5 = {center_min:.3} (>= {MISSPEC_IPW1_ECP_AT_LEAST})"
    );
    (verdict(pass, detail), s)
}

fn variance_comparison() -> Verdict {
    let s = run_study(Scenario::Main, 100, 500, 31, vec![EstimatorKind::Ipw1, EstimatorKind::Component]);
    print_rows(&s.report, EstimatorKind::Ipw1);
    print_rows(&s.report, EstimatorKind::Component);
    let ipw1 = rows_for(&s.report, EstimatorKind::Ipw1);
    let comp = rows_for(&s.report, EstimatorKind::Component);
    let mut pass = ipw1.len() == 9 && comp.len() == 9;
    let mut worst_ratio: f64 = 0.0;
    let mut max_share: f64 = 0.0;
    for (a, b) in ipw1.iter().zip(&comp) {
        assert_eq!((a.arm, a.alpha), (b.arm, b.alpha));
        let ratio = (a.ase - a.ese).abs() / a.ese;
        worst_ratio = worst_ratio.max(ratio);
        max_share = max_share.max(a.ase / b.ase);
        pass &= a.ase < b.ase && ratio <= ASE_ESE_RATIO;
    }
    verdict(
        pass,
        format!(
            "max ASE(IPW1)/ASE(component) = {max_share:.3} (< 1); max |ASE-ESE|/ESE = {worst_ratio:.3} (<= {ASE_ESE_RATIO})"
        ),
    )
}

// 4. Quadrature.

fn f1_oracle(gamma: &[f64], psi: f64, design: &Design, i: usize) -> f64 {
    let hood = design.closed_neighborhood(i);
    let eta: Vec<f64> = hood.iter().map(|&j| design.x(j).iter().zip(gamma).map(|(x, g)| x * g).sum()).collect();
    let sd = psi.sqrt();
    let (lo, hi) = (-10.0 * sd, 10.0 * sd);
    let steps = 100_000;
    let h = (hi - lo) / steps as f64;
    let integrand = |b: f64| {
        let density = (-0.5 * b * b / psi).exp() / (2.0 * std::f64::consts::PI * psi).sqrt();
        hood.iter()
            .zip(&eta)
            .map(|(&j, e)| {
                let p = expit(e + b);
                if design.exposure()[j] { p } else { 1.0 - p }
            })
            .product::<f64>()
            * density
    };
    let inner: f64 = (1..steps).map(|k| integrand(lo + k as f64 * h)).sum();
    h * (inner + 0.5 * (integrand(lo) + integrand(hi)))
}

fn quadrature() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for &psi in &[0.05, 0.25, 0.5, 1.0, 2.0] {
        for d in 1..=8 {
            let edges: Vec<(usize, usize)> = (1..=d).map(|j| (0, j)).collect();
            let net = Network::from_index_edges(d + 1, &edges).unwrap();
            let exposure: Vec<bool> = (0..=d).map(|_| rng.random_bool(0.4)).collect();
            let cov: Vec<Vec<f64>> = (0..=d).map(|_| vec![rng.random_range(-1.0..1.0)]).collect();
            let data = StudyData::new(exposure, vec![0.0; d + 1], cov).unwrap();
            let design = Design::new(&net, &data, Aggregator::Mean).unwrap();
            let gamma = vec![rng.random_range(-1.0..1.0), rng.random_range(-1.5..1.5)];
            let fit = Ipw1Fit::from_parameters(gamma.clone(), psi, 25);
            let got = eval_f1(&fit, &design, 0).unwrap();
            worst = worst.max((got - f1_oracle(&gamma, psi, &design, 0)).abs());
            cases += 1;
        }
    }
    verdict(worst < QUADRATURE_TOL, format!("{cases} (psi, d) cases, max |f1 - oracle| = {worst:.2e} (tol {QUADRATURE_TOL:e})"))
}

// 5. Algebraic identities.

fn simulated_design(seed: u64, m: usize) -> (Network, Design) {
    let mut rng = network_rng(seed);
    let net = gen_regular_network(m, 10.0, 4, &mut rng).unwrap();
    let cov = gen_covariates(net.n(), CovariateKind::Binary, &mut rng);
    let z: Vec<f64> = cov.iter().map(|r| r[0]).collect();
    let table = gen_potential_outcomes(&net, &z, OutcomeModel::Stratified, &mut rng).unwrap();
    let exposure = gen_exposures(&cov, &components(&net), ExposureMechanism::RandomEffect, &mut rng);
    let y = table.observe(&net, &exposure);
    let data = StudyData::new(exposure, y, cov).unwrap();
    let design = Design::new(&net, &data, Aggregator::Mean).unwrap();
    (net, design)
}

fn identities() -> Verdict {
    let mut worst = [0.0f64; 4];
    let opts = WeightOptions::default();
    for seed in 0..6 {
        let (net, design) = simulated_design(100 + seed, 30);
        let partition = components(&net);
        let f1 = fit_ipw1(&design, &Ipw1Options::default()).unwrap();
        let f2 = fit_ipw2(&design, Aggregator::Mean, OptimOptions::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let alphas: Vec<AllocationPolicy> = {
            let mut a: Vec<f64> = (0..3).map(|_| rng.random_range(0.05..0.95)).collect();
            a.sort_by(f64::total_cmp);
            a.into_iter().map(policy).collect()
        };
        for &alpha in &alphas {
            let a = alpha.alpha();
            let y1 = |arm| y_hat(EstimatorKind::Ipw1, &f1, &design, &partition, arm, alpha, &opts).unwrap().value;
            let y2 = |arm| y_hat(EstimatorKind::Ipw2, &f2, &design, &partition, arm, alpha, &opts).unwrap().value;
            for y in [&y1 as &dyn Fn(Arm) -> f64, &y2] {
                let mix = a * y(Arm::Exposed) + (1.0 - a) * y(Arm::Unexposed);
                worst[0] = worst[0].max((y(Arm::Marginal) - mix).abs());
            }
            // The binomial coefficient in π(S; α) cancels against the one in f₂.
            let terms = f2.evaluate(&design, false).unwrap();
            let c = contributions(&terms, Numerator::Count, &design, Arm::Exposed, alpha, &opts);
            for i in 0..design.n() {
                if !design.exposure()[i] {
                    continue;
                }
                let (s, d) = (design.exposed_neighbors(i), design.degree(i));
                let p1 = f2.p_neighbor(&design, i);
                let p2 = f2.p_individual(&design, i);
                let ratio = (a / p1).powi(s as i32) * ((1.0 - a) / (1.0 - p1)).powi((d - s) as i32) / p2;
                let want = design.outcome()[i] * ratio;
                worst[1] = worst[1].max((c[i] - want).abs() / want.abs().max(1.0));
            }
        }
        for d in 0..=12 {
            for &alpha in &alphas {
                let count: f64 = (0..=d).map(|s| pi_count(s, d, alpha).unwrap()).sum();
                let vector: f64 = (0..=d).map(|s| ln_choose(d, s).exp() * pi_vector(s, d, alpha).unwrap()).sum();
                worst[2] = worst[2].max((count - 1.0).abs()).max((vector - 1.0).abs());
            }
        }
        let requests = effect_grid(alphas.len(), &[EffectKind::Indirect, EffectKind::Overall]);
        let an = analyze(EstimatorKind::Ipw2, &f2, &design, &partition, &alphas, &requests, 0.95, &opts).unwrap();
        for (i, _) in alphas.iter().enumerate() {
            for kind in [EffectKind::Indirect, EffectKind::Overall] {
                let (arm1, arm0) = kind.arms();
                let v = an.theta.target(arm1, i) - an.theta.target(arm0, i);
                worst[3] = worst[3].max(v.abs());
            }
        }
    }
    let pass = worst.iter().all(|&w| w <= IDENTITY_TOL);
    verdict(
        pass,
        format!(
            "marginal mix {:.1e}, binomial cancellation {:.1e}, pi sums {:.1e}, IE/OE(a,a) {:.1e} (tol {IDENTITY_TOL:e})",
            worst[0], worst[1], worst[2], worst[3]
        ),
    )
}

// 7. Sandwich health on every converged replicate.

fn health(studies: &[&Study]) -> Verdict {
    let mut checked = 0;
    let mut failed = 0;
    let (mut asym, mut eig, mut psi) = (0.0f64, f64::INFINITY, 0.0f64);
    for s in studies {
        for o in &s.outcomes {
            for (_, draw) in &o.draws {
                let Ok(d) = draw else {
                    failed += 1;
                    continue;
                };
                checked += 1;
                asym = asym.max(d.health.asymmetry);
                eig = eig.min(d.health.min_eigenvalue);
                psi = psi.max(d.health.psi_sum);
            }
        }
    }
    verdict(
        checked > 0 && asym <= ASYMMETRY_TOL && eig >= EIGEN_TOL && psi < PSI_SUM_TOL,
        format!(
            "{checked} fits ({failed} failed): max asymmetry {asym:.1e} (<= {ASYMMETRY_TOL:e}), min eigenvalue {eig:.1e} (>= {EIGEN_TOL:e}), max psi sum {psi:.1e} (< {PSI_SUM_TOL:e})"
        ),
    )
}

// 8. Community detection and the synthetic network pipeline.

fn all_partitions(n: usize) -> Vec<Vec<usize>> {
    fn grow(prefix: &mut Vec<usize>, n: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        let next = prefix.iter().max().map_or(0, |m| m + 1);
        for l in 0..=next {
            prefix.push(l);
            grow(prefix, n, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    grow(&mut Vec::new(), n, &mut out);
    out
}

fn communities() -> Verdict {
    let mut edges = Vec::new();
    for base in [0, 4] {
        for u in 0..4 {
            for v in u + 1..4 {
                edges.push((base + u, base + v));
            }
        }
    }
    edges.push((3, 4));
    let toy = Network::from_index_edges(8, &edges).unwrap();
    let (part, trace) = fast_greedy_with_trace(&toy);
    let best = all_partitions(8)
        .into_iter()
        .max_by(|a, b| modularity(&toy, a).total_cmp(&modularity(&toy, b)))
        .unwrap();
    let same = |a: &[usize], b: &[usize]| (0..8).all(|i| (0..8).all(|j| (a[i] == a[j]) == (b[i] == b[j])));
    let planted: Vec<usize> = (0..8).map(|i| i / 4).collect();
    let toy_ok = trace.strictly_increasing() && same(part.assignment(), &best) && same(&best, &planted);

    let mut increasing = trace.strictly_increasing();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..50 {
        let n = rng.random_range(4..40);
        let e: Vec<(usize, usize)> = (0..rng.random_range(1..3 * n))
            .map(|_| (rng.random_range(0..n), rng.random_range(0..n)))
            .filter(|(a, b)| a != b)
            .collect();
        let net = Network::from_index_edges(n, &e).unwrap();
        increasing &= fast_greedy_with_trace(&net).1.strictly_increasing();
    }
    let net = fixture::network();
    increasing &= fast_greedy_with_trace(&net).1.strictly_increasing();

    let prepared = io::prepare(&net, &fixture::data()).unwrap();
    let mut pipeline_rows = Vec::new();
    for partition in [PartitionChoice::Observed, PartitionChoice::Community] {
        let req = EstimateRequest {
            estimators: vec![EstimatorKind::Ipw1, EstimatorKind::Ipw2],
            alphas: [0.2, 0.3, 0.4, 0.5].into_iter().map(policy).collect(),
            effects: EffectKind::ALL.to_vec(),
            partition,
            ci_level: 0.95,
            weights: WeightOptions::default(),
        };
        match estimate(&prepared, &req) {
            Ok(runs) => pipeline_rows.extend(runs.iter().map(|r| r.analysis.effects.len())),
            Err(e) => return verdict(false, format!("fixture pipeline failed: {e}")),
        }
    }
    let pipeline_ok = pipeline_rows == vec![22; 4];
    verdict(
        toy_ok && increasing && pipeline_ok,
        format!(
            "two cliques recovered: {toy_ok}; merges strictly increasing: {increasing}; fixture rows per run {pipeline_rows:?} (want 22)"
        ),
    )
}

fn wanted(only: &Option<Vec<u32>>, id: u32) -> bool {
    only.as_ref().is_none_or(|v| v.contains(&id))
}

fn main() {
    let full = std::env::var("NETSPILL_FULL").is_ok_and(|v| v == "1");
    let only: Option<Vec<u32>> = std::env::var("NETSPILL_ONLY")
        .ok()
        .map(|v| v.split(',').filter_map(|s| s.trim().parse().ok()).collect());
    let mut results: Vec<(u32, &str, Verdict)> = Vec::new();
    let mut record = |id: u32, name: &'static str, v: Verdict| {
        println!("criterion {id} [{}] {name}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        results.push((id, name, v));
    };

    if wanted(&only, 1) {
        record(1, "known-propensity enumeration", enumeration());
    }
    let main = (wanted(&only, 2) || wanted(&only, 7)).then(|| main_study(full));
    let misspec = (wanted(&only, 3) || wanted(&only, 7)).then(misspecified);
    if let (true, Some((v, _))) = (wanted(&only, 2), &main) {
        record(2, "main scenario, m=200", verdict(v.pass, v.detail.clone()));
    }
    if let (true, Some((v, _))) = (wanted(&only, 3), &misspec) {
        record(3, "no-random-effect exposure", verdict(v.pass, v.detail.clone()));
    }
    if wanted(&only, 4) {
        record(4, "quadrature vs dense integration", quadrature());
    }
    if wanted(&only, 5) {
        record(5, "algebraic identities", identities());
    }
    if wanted(&only, 6) {
        record(6, "variance vs component baseline", variance_comparison());
    }
    if let (true, Some((_, a)), Some((_, b))) = (wanted(&only, 7), &main, &misspec) {
        record(7, "sandwich health", health(&[a, b]));
    }
    if wanted(&only, 8) {
        record(8, "community detection and pipeline", communities());
    }

    println!();
    for (id, name, v) in &results {
        println!("{} criterion {id}: {name}", if v.pass { "PASS" } else { "FAIL" });
    }
    let failed = results.iter().filter(|r| !r.2.pass).count();
    if failed > 0 {
        println!("{failed} of {} criteria failed", results.len());
        std::process::exit(1);
    }
}
