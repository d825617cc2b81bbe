use std::collections::BTreeMap;
use std::f64::consts::PI;

use noon_core::montecarlo::{ExactRates, Simulation, Tally};
use noon_core::{
    analytics, compare, detection_table, make_noon, odd_analytics_with, resolving_analytics,
    simulate_cascade, simulate_resolving, unit_propagate, CascadeSpec, DetectionEvent,
    DetectorKind, DetectorModel, NoonSpec, OddBranchWeights, Reflectance, Verdict,
};
use noon_core::unit::{MODE_A, MODE_B};
use statrs::distribution::{ChiSquared, ContinuousCDF};

const SHOTS: u64 = 1_000_000;

fn threshold() -> DetectorModel {
    DetectorModel::ideal(DetectorKind::Threshold)
}

fn within_3_sigma(hat: f64, p: f64, n: u64) -> bool {
    (hat - p).abs() <= 3.0 * (p * (1.0 - p) / n as f64).sqrt()
}

#[test]
fn three_photon_optimum() {
    let spec = CascadeSpec::optimal(3, 0.3).unwrap();
    let r = simulate_cascade(&spec, threshold(), SHOTS, 1).unwrap();
    assert!(within_3_sigma(r.efficiency_hat, 2.0 / 9.0, SHOTS), "{}", r.efficiency_hat);
    assert!(r.correct <= r.accepted && r.accepted <= r.shots);
}

#[test]
fn seven_photon_fidelity() {
    let spec = CascadeSpec::uniform(7, PI / 14.0, 0.31).unwrap();
    let r = simulate_cascade(&spec, threshold(), SHOTS, 2).unwrap();
    let predicted = analytics(&spec).unwrap();
    let f = r.fidelity_hat.unwrap();
    assert!(within_3_sigma(f, predicted.p_cond, r.accepted), "{f} vs {}", predicted.p_cond);
    assert_eq!(compare(&r, &predicted).verdict, Verdict::Pass);
}

#[test]
fn zero_shots_is_an_error() {
    let spec = CascadeSpec::uniform(5, 0.0, 0.3).unwrap();
    assert!(simulate_cascade(&spec, threshold(), 0, 1).is_err());
    assert!(simulate_resolving(4, 0.0, Reflectance::BALANCED, 1.0, 0, 1).is_err());
}

#[test]
fn invalid_inputs_fail_before_sampling() {
    assert!(simulate_resolving(1, 0.0, Reflectance::BALANCED, 1.0, 10, 1).is_err());
    assert!(simulate_resolving(4, 0.0, Reflectance::BALANCED, 0.0, 10, 1).is_err());
    assert!(simulate_resolving(4, f64::NAN, Reflectance::BALANCED, 1.0, 10, 1).is_err());
}

#[test]
fn resolving_examples() {
    let rho = Reflectance::new(0.75).unwrap();
    let r = simulate_resolving(4, 0.9, rho, 1.0, SHOTS, 3).unwrap();
    assert!(within_3_sigma(r.efficiency_hat, 27.0 / 64.0, SHOTS));
    assert_eq!(r.fidelity_hat, Some(1.0));
    let c = compare(&r, &resolving_analytics(4, rho).unwrap());
    assert_eq!(c.z_fidelity, Some(0.0));
    assert_eq!(c.verdict, Verdict::Pass);

    let r = simulate_resolving(2, 0.9, Reflectance::BALANCED, 1.0, SHOTS, 4).unwrap();
    assert!(within_3_sigma(r.efficiency_hat, 0.5, SHOTS));

    let r = simulate_resolving(3, 0.9, Reflectance::new(0.0).unwrap(), 1.0, 1000, 4).unwrap();
    assert_eq!(r.accepted, 0);
    assert_eq!(r.efficiency_hat, 0.0);
    assert_eq!(r.fidelity_hat, None);
}

#[test]
fn report_is_identical_for_any_shard_count() {
    let spec = CascadeSpec::uniform(7, PI / 14.0, 0.31).unwrap();
    let sim = Simulation::cascade(&spec, threshold()).unwrap();
    let base = sim.run(200_000, 99, 1).unwrap();
    for shards in [2, 3, 8, 13] {
        let mut r = sim.run(200_000, 99, shards).unwrap();
        assert_eq!(r.shards, shards);
        r.shards = 1;
        assert_eq!(serde_json::to_string(&r).unwrap(), serde_json::to_string(&base).unwrap());
    }
    let again = sim.run(200_000, 99, 1).unwrap();
    assert_eq!(serde_json::to_string(&again).unwrap(), serde_json::to_string(&base).unwrap());
    let other = sim.run(200_000, 100, 1).unwrap();
    assert_ne!(other.correct, base.correct);
}

#[test]
fn tallies_merge_associatively() {
    let spec = CascadeSpec::uniform(4, 0.2, 0.5).unwrap();
    let sim = Simulation::cascade(&spec, threshold()).unwrap();
    let parts: Vec<Tally> = [0..300, 300..1000, 1000..1001, 1001..5000]
        .into_iter()
        .map(|r| sim.tally(8, r))
        .collect();
    let left = parts[0].merge(parts[1]).merge(parts[2]).merge(parts[3]);
    let right = parts[0].merge(parts[1].merge(parts[2].merge(parts[3])));
    assert_eq!(left, right);
    assert_eq!(left, sim.tally(8, 0..5000));
}

#[test]
fn sampled_outcomes_follow_the_detection_table() {
    let rho = Reflectance::new(0.75).unwrap();
    let sim = Simulation::resolving(4, 0.4, rho, DetectorModel::ideal(DetectorKind::Resolving)).unwrap();
    let mut counts: BTreeMap<DetectionEvent, u64> = BTreeMap::new();
    for i in 0..SHOTS {
        *counts.entry(sim.shot(2024, i).events[0]).or_default() += 1;
    }
    let input = make_noon(NoonSpec::standard(4, 0.4).unwrap(), (MODE_A, MODE_B)).unwrap();
    let table = detection_table(&unit_propagate(&input, rho).unwrap()).unwrap();
    let mut stat = 0.0;
    let mut bins = 0;
    let (mut pooled_obs, mut pooled_exp) = (0.0, 0.0);
    for outcome in &table {
        let expected = outcome.probability * SHOTS as f64;
        let observed = counts.remove(&outcome.event).unwrap_or(0) as f64;
        if expected < 5.0 {
            pooled_obs += observed;
            pooled_exp += expected;
            continue;
        }
        stat += (observed - expected).powi(2) / expected;
        bins += 1;
    }
    assert!(counts.is_empty(), "sampled events outside the table: {counts:?}");
    if pooled_exp > 0.0 {
        stat += (pooled_obs - pooled_exp).powi(2) / pooled_exp;
        bins += 1;
    }
    let p = 1.0 - ChiSquared::new((bins - 1) as f64).unwrap().cdf(stat);
    assert!(p > 0.001, "chi-square {stat} on {bins} bins, p = {p}");
}

#[test]
fn threshold_accepts_a_superset_of_resolving() {
    let spec = CascadeSpec::uniform(5, 0.3, 0.45).unwrap();
    for eta in [1.0, 0.8] {
        let res = Simulation::cascade(&spec, DetectorModel::new(DetectorKind::Resolving, eta).unwrap()).unwrap();
        let thr = Simulation::cascade(&spec, DetectorModel::new(DetectorKind::Threshold, eta).unwrap()).unwrap();
        let (mut only_threshold, mut both) = (0, 0);
        for i in 0..200_000 {
            let a = res.shot(77, i);
            let b = thr.shot(77, i);
            let common = a.events.len().min(b.events.len());
            assert_eq!(a.events[..common], b.events[..common]);
            if a.accepted {
                assert!(b.accepted, "shot {i}");
                both += 1;
            } else if b.accepted {
                only_threshold += 1;
            }
        }
        assert!(both > 0 && only_threshold > 0);
    }
}

#[test]
fn accepted_fidelity_is_all_or_nothing() {
    for n in [4u32, 5, 6, 7] {
        let spec = CascadeSpec::uniform(n, 0.37, 0.4).unwrap();
        for kind in [DetectorKind::Threshold, DetectorKind::Resolving] {
            let sim = Simulation::cascade(&spec, DetectorModel::ideal(kind)).unwrap();
            for i in 0..50_000 {
                let shot = sim.shot(5, i);
                let Some(f) = shot.fidelity else { continue };
                match kind {
                    DetectorKind::Resolving => assert!(f >= 1.0 - 1e-9, "N={n}: {f}"),
                    DetectorKind::Threshold => assert!(f >= 1.0 - 1e-9 || f <= 1e-9, "N={n}: {f}"),
                }
            }
        }
    }
}

#[test]
fn thinned_runs_match_exact_rates() {
    let rho = Reflectance::new(0.75).unwrap();
    let sim = Simulation::resolving(4, 0.2, rho, DetectorModel::new(DetectorKind::Resolving, 0.7).unwrap()).unwrap();
    let exact: ExactRates = sim.exact();
    let r = sim.run(400_000, 6, 4).unwrap();
    assert!(within_3_sigma(r.efficiency_hat, exact.p_correct, r.shots));
    assert!(within_3_sigma(r.accepted as f64 / r.shots as f64, exact.p_accept, r.shots));
    assert!(exact.p_accept > exact.p_correct);
    assert!((r.literal_penalty - 0.49).abs() < 1e-15);

    let spec = CascadeSpec::uniform(5, 0.2, 0.4).unwrap();
    let sim = Simulation::cascade(&spec, DetectorModel::new(DetectorKind::Threshold, 0.8).unwrap()).unwrap();
    let exact = sim.exact();
    let r = sim.run(400_000, 6, 4).unwrap();
    assert_eq!(compare(&r, &exact).verdict, Verdict::Pass);
}

#[test]
fn wrong_phase_is_detected() {
    let spec = CascadeSpec::uniform(7, PI / 14.0, 0.31).unwrap();
    let r = simulate_cascade(&spec, threshold(), SHOTS, 31).unwrap();
    let wrong = CascadeSpec::uniform(7, 0.0, 0.31).unwrap();
    let literal = odd_analytics_with(&wrong, OddBranchWeights::Literal).unwrap();
    let c = compare(&r, &literal);
    assert_eq!(c.verdict, Verdict::Fail);
    assert!(c.z_fidelity.unwrap().abs() > 3.0);

    let spec = CascadeSpec::uniform(4, PI / 8.0, 0.4).unwrap();
    let r = simulate_cascade(&spec, threshold(), SHOTS, 32).unwrap();
    assert_eq!(compare(&r, &analytics(&spec).unwrap()).verdict, Verdict::Pass);
    let wrong = analytics(&CascadeSpec::uniform(4, PI / 2.0, 0.4).unwrap()).unwrap();
    let c = compare(&r, &wrong);
    assert_eq!(c.verdict, Verdict::Fail);
}

#[test]
fn nothing_accepted_is_inconclusive() {
    let spec = CascadeSpec::uniform(9, 0.1, 0.05).unwrap();
    let r = simulate_cascade(&spec, threshold(), 1000, 1).unwrap();
    assert_eq!(r.accepted, 0);
    let c = compare(&r, &analytics(&spec).unwrap());
    assert_eq!(c.verdict, Verdict::Inconclusive);
}

#[test]
fn report_carries_reproducibility_fields() {
    let r = simulate_resolving(3, 0.1, Reflectance::BALANCED, 0.9, 100, 42).unwrap();
    let json: serde_json::Value = serde_json::to_value(&r).unwrap();
    assert_eq!(json["seed"], 42);
    assert_eq!(json["library_version"], env!("CARGO_PKG_VERSION"));
    assert!(json["shards"].as_u64().unwrap() >= 1);
    assert_eq!(json["detector"]["kind"], "resolving");
}
