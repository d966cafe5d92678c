mod common;

use catchup::ingest::{build_cohort, scan_rescuable, CohortFilter};
use catchup::regression::fit;
use catchup::synth::{embed_cases, generate, GenConfig};
use catchup::TargetIndex;

fn correlation(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

fn g1_g4_correlation(noise: f64) -> f64 {
    let recs = generate(&GenConfig { n_records: 5000, noise_spread: noise, seed: 17, ..GenConfig::default() }).unwrap();
    let g1: Vec<f64> = recs.iter().map(|r| r.grades[0].value().unwrap() as f64).collect();
    let g4: Vec<f64> = recs.iter().map(|r| r.grades[3].value().unwrap() as f64).collect();
    correlation(&g1, &g4)
}

#[test]
fn correlation_rises_as_noise_falls() {
    let rhos: Vec<f64> = [2.0, 1.0, 0.5].into_iter().map(g1_g4_correlation).collect();
    for r in &rhos {
        assert!(*r > 0.0 && *r < 1.0, "{rhos:?}");
    }
    assert!(rhos[0] < rhos[1] && rhos[1] < rhos[2], "{rhos:?}");
}

#[test]
fn observed_missing_rate_tracks_configuration() {
    for (rate, seed) in [(0.05, 1), (0.2, 2), (0.5, 3)] {
        let recs = generate(&GenConfig { n_records: 8000, missing_rate: rate, seed, ..GenConfig::default() }).unwrap();
        let missing = recs.iter().filter(|r| r.grades[3].is_missing()).count() as f64 / recs.len() as f64;
        assert!((missing - rate).abs() <= 0.02, "rate {rate}: observed {missing}");
        for r in &recs {
            for g in r.grades {
                assert!(g.is_missing() || (1..=9).contains(&g.value().unwrap()));
            }
        }
    }
}

#[test]
fn noiseless_population_gives_degenerate_fit() {
    let recs = generate(&GenConfig { n_records: 500, noise_spread: 0.0, ..GenConfig::default() }).unwrap();
    let cohort = build_cohort(&recs, CohortFilter { complete_only: true, ..CohortFilter::all() }, TargetIndex::SES);
    let model = fit(&cohort.observations()).unwrap();
    assert!(model.degenerate);
}

#[test]
fn embedded_reference_cases_are_the_only_valid_rescues() {
    let recs = generate(&GenConfig { n_records: 2000, ..GenConfig::default() }).unwrap();
    let out = embed_cases(recs, &common::reference_cases()).unwrap();
    let valid: Vec<u64> = scan_rescuable(&out, TargetIndex::SES)
        .into_iter()
        .filter(|c| c.valid)
        .map(|c| c.case_id)
        .collect();
    assert_eq!(valid, vec![77594, 77833, 80183, 122915]);
}
