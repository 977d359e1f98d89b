use drivetune_core::hrv::{compute_features, sliding_features, HrvAccumulator, RrSample};
use proptest::prelude::*;

/// Two-pass textbook formulas, no streaming.
fn oracle(rr: &[f64]) -> (f64, f64, f64) {
    let n = rr.len() as f64;
    let mean = rr.iter().sum::<f64>() / n;
    let var = rr.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    let ssd: f64 = rr.windows(2).map(|w| (w[1] - w[0]) * (w[1] - w[0])).sum();
    (60_000.0 / mean, var.sqrt(), (ssd / (n - 1.0)).sqrt())
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    a == b || (a - b).abs() <= tol * a.abs().max(b.abs())
}

fn window(rr: &[f64]) -> Vec<RrSample> {
    let mut t = 0u64;
    rr.iter()
        .map(|&x| {
            t += x as u64;
            RrSample::new(t, x)
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn matches_direct_summation(rr in prop::collection::vec(301.0f64..1999.0, 10..200)) {
        let f = compute_features(&window(&rr)).unwrap();
        let (hr, sdnn, rmssd) = oracle(&rr);
        prop_assert!(rel_close(f.mean_hr, hr, 1e-9), "{} vs {}", f.mean_hr, hr);
        prop_assert!(rel_close(f.sdnn, sdnn, 1e-9), "{} vs {}", f.sdnn, sdnn);
        prop_assert!(rel_close(f.rmssd, rmssd, 1e-9), "{} vs {}", f.rmssd, rmssd);
        prop_assert_eq!(f.sample_count, rr.len());
    }

    #[test]
    fn accumulator_agrees_with_batch(rr in prop::collection::vec(301.0f64..1999.0, 10..80)) {
        let w = window(&rr);
        let mut acc = HrvAccumulator::new();
        for s in &w {
            acc.push(*s).unwrap();
        }
        prop_assert_eq!(acc.features().unwrap(), compute_features(&w).unwrap());
    }

    #[test]
    fn features_ignore_a_constant_shift_in_timestamps(
        rr in prop::collection::vec(301.0f64..1999.0, 10..50),
        shift in 0u64..1_000_000,
    ) {
        let w = window(&rr);
        let shifted: Vec<RrSample> = w.iter().map(|s| RrSample::new(s.timestamp_ms + shift, s.rr_ms)).collect();
        let (a, b) = (compute_features(&w).unwrap(), compute_features(&shifted).unwrap());
        prop_assert_eq!((a.mean_hr, a.sdnn, a.rmssd), (b.mean_hr, b.sdnn, b.rmssd));
    }
}

#[test]
fn sliding_windows_match_oracle() {
    let rr: Vec<f64> = (0..100).map(|i| 800.0 + 40.0 * ((i as f64) * 0.7).sin()).collect();
    let w = window(&rr);
    let feats: Vec<_> = sliding_features(&w, 20, 10).collect::<Result<_, _>>().unwrap();
    assert_eq!(feats.len(), 9);
    for (k, f) in feats.iter().enumerate() {
        let (hr, sdnn, rmssd) = oracle(&rr[k * 10..k * 10 + 20]);
        assert!(rel_close(f.mean_hr, hr, 1e-9));
        assert!(rel_close(f.sdnn, sdnn, 1e-9));
        assert!(rel_close(f.rmssd, rmssd, 1e-9));
    }
}

#[test]
fn f32_windows_stay_close_to_the_f64_oracle() {
    let rr: Vec<f64> = (0..60).map(|i| if i % 3 == 0 { 910.0 } else { 780.5 }).collect();
    let w32: Vec<RrSample<f32>> = window(&rr).iter().map(|s| RrSample::new(s.timestamp_ms, s.rr_ms as f32)).collect();
    let f = compute_features(&w32).unwrap();
    let (hr, sdnn, rmssd) = oracle(&rr);
    assert!(rel_close(f.mean_hr as f64, hr, 1e-5));
    assert!(rel_close(f.sdnn as f64, sdnn, 1e-4));
    assert!(rel_close(f.rmssd as f64, rmssd, 1e-4));
}
