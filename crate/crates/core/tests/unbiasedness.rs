//! With known propensities, averaging Ŷ over every exposure vector weighted
//! by its probability recovers the population-average potential outcomes.

mod common;

use netspill_core::data::{Aggregator, Design, StudyData};
use netspill_core::estimator::{y_hat, Arm, EstimatorKind, WeightOptions};
use netspill_core::graph::{components, Network};
use netspill_core::policy::AllocationPolicy;
use netspill_core::propensity::{KnownPropensity, Numerator};
use netspill_core::simulate::{gen_potential_outcomes, true_estimands, OutcomeModel, PotentialOutcomeTable};
use proptest::prelude::*;
use rand::Rng;

const ALPHAS: [f64; 3] = [0.25, 0.5, 0.75];

/// `E[Ŷ]` for each (α, arm) in the stacked target order.
fn enumerate(net: &Network, table: &PotentialOutcomeTable, p: &[f64], numerator: Numerator) -> Vec<f64> {
    let n = net.n();
    let partition = components(net);
    let model = KnownPropensity::new(p.to_vec(), numerator);
    let kind = match numerator {
        Numerator::Vector => EstimatorKind::Ipw1,
        Numerator::Count => EstimatorKind::Ipw2,
    };
    let mut expected = vec![0.0; 3 * ALPHAS.len()];
    for mask in 0u32..1 << n {
        let a: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
        let prob: f64 = (0..n).map(|i| if a[i] { p[i] } else { 1.0 - p[i] }).product();
        let y = table.observe(net, &a);
        let data = StudyData::new(a, y, vec![vec![]; n]).unwrap();
        let design = Design::new(net, &data, Aggregator::Mean).unwrap();
        for (ai, &alpha) in ALPHAS.iter().enumerate() {
            let policy = AllocationPolicy::new(alpha).unwrap();
            for arm in Arm::ALL {
                let v = y_hat(kind, &model, &design, &partition, arm, policy, &WeightOptions::default())
                    .unwrap()
                    .value;
                expected[3 * ai + arm.offset()] += prob * v;
            }
        }
    }
    expected
}

fn setup(sizes: &[usize], model: OutcomeModel, seed: u64) -> (Network, PotentialOutcomeTable, Vec<f64>) {
    let mut rng = common::rng(seed);
    let net = common::random_network(sizes, 0.3, &mut rng);
    let z: Vec<f64> = (0..net.n()).map(|_| f64::from(u8::from(rng.random::<bool>()))).collect();
    let table = gen_potential_outcomes(&net, &z, model, &mut rng).unwrap();
    let p: Vec<f64> = (0..net.n()).map(|_| rng.random_range(0.15..0.85)).collect();
    (net, table, p)
}

fn assert_unbiased(expected: &[f64], truth: &[f64]) {
    for (k, (e, t)) in expected.iter().zip(truth).enumerate() {
        assert!((e - t).abs() < 1e-10, "target {k}: E[Ŷ] = {e}, truth = {t}");
    }
}

#[test]
fn two_components_of_four_and_five() {
    let (net, table, p) = setup(&[4, 5], OutcomeModel::Stratified, 11);
    let truth = true_estimands(&table, &ALPHAS);
    for numerator in [Numerator::Vector, Numerator::Count] {
        assert_unbiased(&enumerate(&net, &table, &p, numerator), &truth);
    }
}

#[test]
fn vector_numerator_is_unbiased_without_stratification() {
    let (net, table, p) = setup(&[5, 4], OutcomeModel::FullVector, 3);
    let truth = true_estimands(&table, &ALPHAS);
    assert_unbiased(&enumerate(&net, &table, &p, Numerator::Vector), &truth);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn random_networks_up_to_ten_nodes(
        sizes in prop::collection::vec(2usize..6, 1..3),
        seed in any::<u64>(),
    ) {
        prop_assume!(sizes.iter().sum::<usize>() <= 10);
        let (net, table, p) = setup(&sizes, OutcomeModel::Stratified, seed);
        let truth = true_estimands(&table, &ALPHAS);
        for numerator in [Numerator::Vector, Numerator::Count] {
            assert_unbiased(&enumerate(&net, &table, &p, numerator), &truth);
        }
    }
}
