use std::sync::Arc;

use hindex_core::estimator::{estimate_h_index, strong_estimate, weak_estimate, EstimatorParams, SamplingMode};
use hindex_core::gen::{generate_array, GenSpec};
use hindex_core::{ArrayData, ArrayOracle, RngHandle};

fn shared(n: usize, h: usize, seed: u64) -> Arc<ArrayData> {
    let values = generate_array(&GenSpec::new(n, h), &RngHandle::from_seed(seed)).unwrap();
    Arc::new(ArrayData::new(values).unwrap())
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
    (m, v.sqrt())
}

#[test]
fn weak_hits_agree_across_modes() {
    let data = shared(20_000, 400, 1);
    let t = 400;
    let hits = |mode: SamplingMode, seed: u64| -> Vec<f64> {
        (0..400)
            .map(|i| {
                let mut o = ArrayOracle::from_shared(data.clone());
                let v = weak_estimate(&mut o, t, &RngHandle::new(seed, i), mode).unwrap();
                assert_eq!(o.query_count(), v.queries_used);
                v.hits as f64
            })
            .collect()
    };
    let (a, sa) = mean_sd(&hits(SamplingMode::PerRead, 2));
    let (b, sb) = mean_sd(&hits(SamplingMode::Batched, 3));
    // k = 3200 draws at rate 400/20000: mean 64
    assert!((a - 64.0).abs() < 2.0 && (b - 64.0).abs() < 2.0, "{a} {b}");
    assert!((sa - sb).abs() < 1.5, "{sa} {sb}");
}

#[test]
fn strong_estimates_agree_across_modes() {
    let data = shared(20_000, 500, 4);
    let run = |mode: SamplingMode, seed: u64| -> Vec<f64> {
        (0..300)
            .map(|i| {
                let mut o = ArrayOracle::from_shared(data.clone());
                strong_estimate(&mut o, 500, 0.25, &RngHandle::new(seed, i), mode)
                    .unwrap()
                    .h_tilde as f64
            })
            .collect()
    };
    let (a, sa) = mean_sd(&run(SamplingMode::PerRead, 5));
    let (b, sb) = mean_sd(&run(SamplingMode::Batched, 6));
    let se = (sa * sa / 300.0 + sb * sb / 300.0).sqrt();
    assert!((a - b).abs() < 4.0 * se, "{a} vs {b}, se {se}");
    assert!((sa / sb - 1.0).abs() < 0.25, "{sa} {sb}");
}

#[test]
fn while_loop_stops_within_a_constant_factor_of_h() {
    let params = EstimatorParams::new(0.25, 0.05).unwrap();
    for (n, h) in [(100_000, 500), (100_000, 3000), (50_000, 80)] {
        let data = shared(n, h, 7);
        for seed in 0..100 {
            let mut o = ArrayOracle::from_shared(data.clone());
            let e = estimate_h_index(&mut o, &params, &RngHandle::from_seed(seed)).unwrap();
            let t = e.t_final as usize;
            assert!(4 * t > h && t <= 8 * h, "n={n} h={h}: stopped at {t}");
            assert!(e.thresholds.windows(2).all(|w| w[1] == w[0] / 4));
            assert_eq!(o.query_count(), e.queries_used);
            let exact = if e.exact_fallback { n as u64 } else { 0 };
            assert_eq!(e.queries_used, e.weak_queries + e.strong_queries + exact);
        }
    }
}
