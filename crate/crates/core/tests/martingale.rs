//! Statistical behavior of the wealth processes under the null, plus
//! structural fuzzing of both engines.

use rayon::prelude::*;
use seqaudit_core::bounds::PrivacyParams;
use seqaudit_core::kernel::Point;
use seqaudit_core::mechanisms::{StreamFamily, StreamSpec};
use seqaudit_core::rng::{derive_seed, next_unit, stream_rng};
use seqaudit_core::seq_test::{
    run_audit, BandwidthSpec, Decision, PairStream, Strategy, TestConfig, TestState,
};

fn null_stream(seed: u64) -> impl PairStream {
    StreamSpec {
        family: StreamFamily::GaussianShift {
            dim: 1,
            shift: vec![0.0],
        },
        seed,
    }
    .build(0)
    .unwrap()
}

fn h0_config(strategy: Strategy) -> TestConfig {
    TestConfig {
        privacy: PrivacyParams::new(0.0, 0.0).unwrap(),
        alpha: 0.05,
        n_max: Some(500),
        pilot_size: 20,
        bandwidth: BandwidthSpec::MedianHeuristic,
        strategy,
        seed: 0,
    }
}

/// Under identical distributions the wealth is a (super)martingale: its mean
/// across runs stays at or below 1 up to CLT noise at every checkpoint.
#[test]
fn wealth_mean_bounded_under_null() {
    let runs = 1000;
    let checkpoints = [10usize, 100, 500];
    let cfg = h0_config(Strategy::OnsSupermartingale);
    let wealth_at: Vec<[f64; 3]> = (0..runs)
        .into_par_iter()
        .map(|rep| {
            let mut stream = null_stream(derive_seed(0xA11, rep));
            let mut local = cfg.clone();
            local.seed = rep;
            let result = run_audit(&local, &mut stream).unwrap();
            let mut out = [f64::NAN; 3];
            for (slot, &cp) in out.iter_mut().zip(&checkpoints) {
                // frozen wealth carries forward past a rejection
                let record = result
                    .trace
                    .iter()
                    .take(cp)
                    .next_back()
                    .expect("500 recorded steps");
                *slot = record.log_wealth.exp();
            }
            out
        })
        .collect();
    for (i, &cp) in checkpoints.iter().enumerate() {
        let values: Vec<f64> = wealth_at.iter().map(|w| w[i]).collect();
        let mean = values.iter().sum::<f64>() / runs as f64;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / runs as f64;
        let band = 2.58 * (var / runs as f64).sqrt();
        assert!(
            mean <= 1.0 + band,
            "checkpoint {cp}: mean wealth {mean} above 1 + {band}"
        );
    }
}

/// Structural fuzz over random configurations and short streams: wealth stays
/// nonnegative, rejection freezes the state, traces line up with t.
#[test]
fn fuzzed_sequences_preserve_invariants() {
    let sequences = 1000u64;
    (0..sequences).into_par_iter().for_each(|i| {
        let mut rng = stream_rng(derive_seed(0xF0, i), 1);
        let strategy = if i % 2 == 0 {
            Strategy::OnsSupermartingale
        } else {
            Strategy::EProcess
        };
        let cfg = TestConfig {
            privacy: PrivacyParams::new(next_unit(&mut rng) * 2.0, next_unit(&mut rng) * 0.5)
                .unwrap(),
            alpha: 0.02 + 0.4 * next_unit(&mut rng),
            n_max: None,
            pilot_size: 0,
            bandwidth: BandwidthSpec::Fixed(0.2 + 2.0 * next_unit(&mut rng)),
            strategy,
            seed: i,
        };
        let mut state = TestState::init(&cfg, &[], &[]).unwrap();
        let steps = 5 + (i % 26);
        let spread = 6.0 * next_unit(&mut rng);
        for _ in 0..steps {
            let x = spread * next_unit(&mut rng);
            let y = if next_unit(&mut rng) < 0.15 {
                x // inject identical pairs
            } else {
                spread * next_unit(&mut rng) + spread
            };
            let x = Point::scalar(x).unwrap();
            let y = Point::scalar(y).unwrap();
            if state.decision() == Decision::Reject {
                break;
            }
            let before_t = state.t();
            state.step(x, y).unwrap();
            assert!(state.wealth() >= 0.0);
            assert!(state.log_wealth().is_finite());
            assert_eq!(state.t(), before_t + 1);
            assert_eq!(state.trace().len() as u64, state.t());
        }
        if state.decision() == Decision::Reject {
            assert!(state.log_wealth() >= -(cfg.alpha.ln()));
            let t = state.t();
            let lw = state.log_wealth();
            assert!(state
                .step(Point::scalar(0.0).unwrap(), Point::scalar(1.0).unwrap())
                .is_err());
            assert_eq!(state.t(), t);
            assert_eq!(state.log_wealth(), lw);
            assert_eq!(state.trace().last().unwrap().decision, Decision::Reject);
        }
    });
}

/// Anytime Type-I control at a reduced scale (the acceptance suite runs the
/// full protocol): with identical streams, few runs ever cross 1/α.
#[test]
fn ville_fraction_small_scale() {
    let runs = 200u64;
    let cfg = h0_config(Strategy::EProcess);
    let rejections: u64 = (0..runs)
        .into_par_iter()
        .map(|rep| {
            let mut stream = null_stream(derive_seed(0xB22, rep));
            let mut local = cfg.clone();
            local.n_max = Some(300);
            local.seed = rep;
            run_audit(&local, &mut stream).unwrap().rejected as u64
        })
        .sum();
    // binomial 3σ band around α = 0.05 at 200 runs
    assert!(
        rejections as f64 <= runs as f64 * 0.05 + 3.0 * (runs as f64 * 0.05 * 0.95).sqrt(),
        "{rejections} rejections out of {runs}"
    );
}
