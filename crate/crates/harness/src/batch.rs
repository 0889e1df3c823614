//! Simplified fixed-batch MMD comparator.
//!
//! Computes the unbiased MMD² U-statistic on a fixed batch of paired samples
//! and rejects when a bootstrap percentile lower confidence bound exceeds
//! the squared MMD threshold for the claimed (ε, δ). This is a deliberately
//! simplified stand-in for the original batch tester it is compared against:
//! same statistic, nonparametric paired bootstrap for the interval.

use rand_chacha::rand_core::RngCore;

use seqaudit_core::bounds::{
    mmd_threshold_legacy, mmd_threshold_new, PrivacyParams, ThresholdFormula,
};
use seqaudit_core::kernel::{median_heuristic, rbf_eval, KernelConfig, Point};
use seqaudit_core::rng::stream_rng;

use crate::{HarnessError, Result};

/// Bandwidth choice for the batch tester: median heuristic on the first 20
/// points (10 pairs, excluded from the statistic) or the constant 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BatchBandwidth {
    MedianHeuristic,
    FixedOne,
}

/// Pairs consumed by the median-heuristic pilot.
pub const BATCH_PILOT_PAIRS: usize = 10;

#[derive(Debug, Clone)]
pub struct BatchOutcome {
    pub reject: bool,
    /// Unbiased MMD² estimate on the test pairs.
    pub mmd_sq: f64,
    /// Bootstrap percentile lower confidence bound on MMD².
    pub lower_bound: f64,
    pub tau: f64,
    pub bandwidth: f64,
}

/// Runs the batch test on n paired samples.
///
/// Rejects iff the level-(1−α) bootstrap lower bound L on MMD² satisfies
/// `L > τ²` for the selected bound formula. Deterministic given `seed`.
#[allow(clippy::too_many_arguments)]
pub fn batch_mmd_test(
    x: &[Point],
    y: &[Point],
    privacy: &PrivacyParams,
    alpha: f64,
    bound: ThresholdFormula,
    bandwidth: BatchBandwidth,
    bootstrap_resamples: usize,
    seed: u64,
) -> Result<BatchOutcome> {
    if x.len() != y.len() {
        return Err(HarnessError::Usage(format!(
            "paired batches must match: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(HarnessError::Usage(format!("alpha {alpha} outside (0, 1)")));
    }
    if bootstrap_resamples < 500 {
        return Err(HarnessError::Usage(
            "bootstrap needs at least 500 resamples".into(),
        ));
    }
    let (kernel, skip) = match bandwidth {
        BatchBandwidth::FixedOne => (KernelConfig::fixed(1.0)?, 0),
        BatchBandwidth::MedianHeuristic => {
            if x.len() < BATCH_PILOT_PAIRS + 4 {
                return Err(HarnessError::Usage(format!(
                    "median heuristic needs {} pilot pairs plus 4 test pairs, got {}",
                    BATCH_PILOT_PAIRS,
                    x.len()
                )));
            }
            let pooled: Vec<Point> = x[..BATCH_PILOT_PAIRS]
                .iter()
                .chain(y[..BATCH_PILOT_PAIRS].iter())
                .cloned()
                .collect();
            (median_heuristic(&pooled)?, BATCH_PILOT_PAIRS)
        }
    };
    let x = &x[skip..];
    let y = &y[skip..];
    let m = x.len();
    if m < 4 {
        return Err(HarnessError::Usage(format!(
            "U-statistic needs at least 4 pairs, got {m}"
        )));
    }

    // h(a, b) = K(x_a,x_b) + K(y_a,y_b) − K(x_a,y_b) − K(y_a,x_b)
    let mut h = vec![0.0f64; m * m];
    for a in 0..m {
        for b in a..m {
            let val = rbf_eval(&x[a], &x[b], &kernel)? + rbf_eval(&y[a], &y[b], &kernel)?
                - rbf_eval(&x[a], &y[b], &kernel)?
                - rbf_eval(&y[a], &x[b], &kernel)?;
            h[a * m + b] = val;
            h[b * m + a] = val;
        }
    }
    let pairs_norm = (m * (m - 1)) as f64;
    let total: f64 = h.iter().sum();
    let trace: f64 = (0..m).map(|a| h[a * m + a]).sum();
    let mmd_sq = (total - trace) / pairs_norm;

    // paired bootstrap of the U-statistic via resample counts, restricted to
    // distinct-index pairs: duplicate indices would re-introduce the
    // diagonal h(a,a) ≥ 0 and bias the resampled statistic upward under H₀.
    // Σ_{a≠b} w_a w_b h(a,b) = wᵀHw − Σ_a w_a²·h(a,a), normalized by
    // Σ_{a≠b} w_a w_b = m² − Σ_a w_a².
    let mut rng = stream_rng(seed, 0xB007);
    let mut stats = Vec::with_capacity(bootstrap_resamples);
    let mut counts = vec![0.0f64; m];
    for _ in 0..bootstrap_resamples {
        counts.fill(0.0);
        for _ in 0..m {
            counts[(rng.next_u64() % m as u64) as usize] += 1.0;
        }
        let mut quad = 0.0;
        let mut diag = 0.0;
        let mut count_sq = 0.0;
        for a in 0..m {
            let wa = counts[a];
            if wa == 0.0 {
                continue;
            }
            let row = &h[a * m..(a + 1) * m];
            let mut dot = [0.0f64; 4];
            let chunks = row.chunks_exact(4);
            let rem = chunks.remainder();
            let mut wchunks = counts.chunks_exact(4);
            for c in chunks {
                let w = wchunks.next().expect("same length");
                dot[0] += c[0] * w[0];
                dot[1] += c[1] * w[1];
                dot[2] += c[2] * w[2];
                dot[3] += c[3] * w[3];
            }
            let tail: f64 = rem
                .iter()
                .zip(&counts[m - rem.len()..])
                .map(|(r, w)| r * w)
                .sum();
            quad += wa * (dot[0] + dot[1] + dot[2] + dot[3] + tail);
            diag += wa * wa * row[a];
            count_sq += wa * wa;
        }
        let distinct_pairs = (m * m) as f64 - count_sq;
        stats.push((quad - diag) / distinct_pairs);
    }
    stats.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite statistics"));
    let idx = ((alpha * bootstrap_resamples as f64) as usize).min(bootstrap_resamples - 1);
    let lower_bound = stats[idx];

    let tau = match bound {
        ThresholdFormula::New => mmd_threshold_new(privacy).tau(),
        ThresholdFormula::Legacy => mmd_threshold_legacy(privacy).tau(),
    };
    Ok(BatchOutcome {
        reject: lower_bound > tau * tau,
        mmd_sq,
        lower_bound,
        tau,
        bandwidth: kernel.bandwidth(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use seqaudit_core::mechanisms::sample_std_normal;

    fn pts(values: &[f64]) -> Vec<Point> {
        values.iter().map(|&v| Point::scalar(v).unwrap()).collect()
    }

    fn privacy() -> PrivacyParams {
        PrivacyParams::new(0.01, 1e-5).unwrap()
    }

    #[test]
    fn identical_batches_never_reject() {
        let vals: Vec<f64> = (0..64).map(|i| (i as f64 * 0.37).sin()).collect();
        let x = pts(&vals);
        let outcome = batch_mmd_test(
            &x,
            &x,
            &privacy(),
            0.05,
            ThresholdFormula::New,
            BatchBandwidth::FixedOne,
            500,
            3,
        )
        .unwrap();
        assert!(!outcome.reject);
        assert_eq!(outcome.mmd_sq, 0.0);
        assert_eq!(outcome.lower_bound, 0.0);
    }

    #[test]
    fn separated_gaussians_reject() {
        let mut rng = stream_rng(5, 0);
        let n = 400;
        let x: Vec<Point> = (0..n)
            .map(|_| Point::scalar(sample_std_normal(&mut rng)).unwrap())
            .collect();
        let y: Vec<Point> = (0..n)
            .map(|_| Point::scalar(sample_std_normal(&mut rng) + 3.0).unwrap())
            .collect();
        for bw in [BatchBandwidth::FixedOne, BatchBandwidth::MedianHeuristic] {
            let outcome =
                batch_mmd_test(&x, &y, &privacy(), 0.05, ThresholdFormula::New, bw, 500, 7)
                    .unwrap();
            assert!(outcome.reject, "{bw:?} must detect a 3σ separation");
            assert!(outcome.mmd_sq > 0.5);
        }
    }

    #[test]
    fn legacy_bound_rejects_imply_new_bound_rejects() {
        // τ_new < τ_legacy, so with identical resamples the new bound can
        // only reject more
        let mut rng = stream_rng(11, 0);
        for trial in 0..10u64 {
            let gap = 0.02 * trial as f64;
            let n = 200;
            let x: Vec<Point> = (0..n)
                .map(|_| Point::scalar(sample_std_normal(&mut rng)).unwrap())
                .collect();
            let y: Vec<Point> = (0..n)
                .map(|_| Point::scalar(sample_std_normal(&mut rng) + gap).unwrap())
                .collect();
            let run = |bound| {
                batch_mmd_test(
                    &x,
                    &y,
                    &privacy(),
                    0.05,
                    bound,
                    BatchBandwidth::FixedOne,
                    500,
                    trial,
                )
                .unwrap()
            };
            let new = run(ThresholdFormula::New);
            let legacy = run(ThresholdFormula::Legacy);
            assert_eq!(new.lower_bound, legacy.lower_bound);
            if legacy.reject {
                assert!(new.reject);
            }
        }
    }

    #[test]
    fn usage_errors() {
        let x = pts(&[0.0, 1.0, 2.0]);
        assert!(batch_mmd_test(
            &x,
            &x,
            &privacy(),
            0.05,
            ThresholdFormula::New,
            BatchBandwidth::FixedOne,
            500,
            0
        )
        .is_err());
        let x = pts(&(0..12).map(|i| i as f64).collect::<Vec<_>>());
        assert!(batch_mmd_test(
            &x,
            &x,
            &privacy(),
            0.05,
            ThresholdFormula::New,
            BatchBandwidth::MedianHeuristic,
            500,
            0
        )
        .is_err());
        let x = pts(&(0..64).map(|i| i as f64).collect::<Vec<_>>());
        assert!(batch_mmd_test(
            &x,
            &x,
            &privacy(),
            0.05,
            ThresholdFormula::New,
            BatchBandwidth::FixedOne,
            10,
            0
        )
        .is_err());
    }
}
