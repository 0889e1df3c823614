//! Flat JSON experiment configuration.
//!
//! Every experiment reads the same document; each subcommand uses the fields
//! relevant to it and ignores the rest. Omitted fields take the benchmark
//! protocol defaults (20 repetitions, α = 0.05, δ = 1e−5, ε ∈ {0.01, 0.1}
//! with 2000/5000 step budgets, 20-point median-heuristic pilot).

use std::path::Path;

use serde::{Deserialize, Serialize};

use seqaudit_core::bounds::PrivacyParams;
use seqaudit_core::mechanisms::{gaussian_sigma_for, StreamSpec};
use seqaudit_core::rng::fnv1a64;
use seqaudit_core::seq_test::{BandwidthSpec, Strategy, TestConfig};

use crate::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Independent audits per table cell.
    pub repetitions: u32,
    pub alpha: f64,
    /// δ used for every (ε, δ) pair audited by the tables.
    pub delta: f64,
    /// ε values for the mechanism tables, paired with `n_max_per_epsilon`.
    pub epsilons: Vec<f64>,
    pub n_max_per_epsilon: Vec<u64>,
    /// Step budget for single-ε experiments (synthetic, decoupling, audit).
    pub n_max: u64,
    /// Pooled pilot size in points; consumed before testing.
    pub pilot_size: usize,
    pub bandwidth: BandwidthSpec,
    pub strategy: Strategy,
    /// Master seed; every replication and stream derives from it.
    pub seed: u64,
    /// Pairs per fixed-batch comparison test.
    pub batch_size: usize,
    pub bootstrap_resamples: usize,
    /// Repetitions for the 8-variant decoupling grid.
    pub decouple_repetitions: u32,
    /// Ascending candidate grid for ε lower-bound sweeps.
    pub candidate_epsilons: Vec<f64>,
    /// Canary noise for the private DP-SGD fixture (default: calibrated for
    /// ε = 0.01, δ = 1e−5, sensitivity 1).
    pub canary_sigma_private: f64,
    /// Canary noise for the non-private fixture (clearly detectable gap).
    pub canary_sigma_nonprivate: f64,
    pub dpsgd_runs: u32,
    pub dpsgd_steps: u64,
    /// Simulations for the identical-uniform and perturbed-uniform studies.
    pub uniform_sims: u32,
    /// Simulations per Gaussian-shift grid cell.
    pub gaussian_sims: u32,
    pub gaussian_dims: Vec<usize>,
    pub gaussian_shift_norms: Vec<f64>,
    pub perturb_amplitude: f64,
    pub perturbations: u32,
    /// Sample source for `audit` and `sweep-epsilon`.
    pub stream: Option<StreamSpec>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            repetitions: 20,
            alpha: 0.05,
            delta: 1e-5,
            epsilons: vec![0.01, 0.1],
            n_max_per_epsilon: vec![2000, 5000],
            n_max: 2000,
            pilot_size: 20,
            bandwidth: BandwidthSpec::MedianHeuristic,
            strategy: Strategy::OnsSupermartingale,
            seed: 42,
            batch_size: 1000,
            bootstrap_resamples: 1000,
            decouple_repetitions: 10,
            candidate_epsilons: default_candidates(),
            canary_sigma_private: gaussian_sigma_for(0.01, 1e-5, 1.0).expect("static calibration"),
            canary_sigma_nonprivate: 0.1,
            dpsgd_runs: 5,
            dpsgd_steps: 500,
            uniform_sims: 100,
            gaussian_sims: 20,
            gaussian_dims: vec![1, 2, 3, 4, 5],
            gaussian_shift_norms: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            perturb_amplitude: 1.0,
            perturbations: 1,
            stream: None,
        }
    }
}

/// 0.01 plus a 0.05-spaced grid up to 1.5.
fn default_candidates() -> Vec<f64> {
    let mut grid = vec![0.01];
    for k in 1..=30u32 {
        grid.push((k * 5) as f64 / 100.0);
    }
    grid
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let cfg: ExperimentConfig = serde_json::from_str(&text)
            .map_err(|e| HarnessError::Usage(format!("invalid config {}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.repetitions == 0 || self.decouple_repetitions == 0 {
            return Err(HarnessError::Usage("repetitions must be ≥ 1".into()));
        }
        if self.epsilons.len() != self.n_max_per_epsilon.len() || self.epsilons.is_empty() {
            return Err(HarnessError::Usage(
                "epsilons and n_max_per_epsilon must be nonempty and equal length".into(),
            ));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(HarnessError::Usage(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        PrivacyParams::new(0.0, self.delta)?;
        if let Some(stream) = &self.stream {
            stream.validate()?;
        }
        Ok(())
    }

    /// Step budget for a table ε (falls back to `n_max`).
    pub fn n_max_for(&self, epsilon: f64) -> u64 {
        self.epsilons
            .iter()
            .position(|&e| e == epsilon)
            .map(|i| self.n_max_per_epsilon[i])
            .unwrap_or(self.n_max)
    }

    /// Core test configuration for one audit replication.
    pub fn test_config(&self, privacy: PrivacyParams, n_max: u64, seed: u64) -> TestConfig {
        TestConfig {
            privacy,
            alpha: self.alpha,
            n_max: Some(n_max),
            pilot_size: self.pilot_size,
            bandwidth: self.bandwidth,
            strategy: self.strategy,
            seed,
        }
    }

    /// Stable hash of the full document (written into CSV headers).
    pub fn fingerprint(&self) -> u64 {
        let json = serde_json::to_string(self).expect("config serializes");
        fnv1a64(json.as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_follow_protocol() {
        let cfg = ExperimentConfig::default();
        assert_eq!(cfg.repetitions, 20);
        assert_eq!(cfg.n_max_for(0.01), 2000);
        assert_eq!(cfg.n_max_for(0.1), 5000);
        assert_eq!(cfg.n_max_for(0.33), 2000); // fallback
        assert_eq!(cfg.pilot_size, 20);
        assert!((cfg.canary_sigma_private - 484.4805262605389).abs() < 1e-9);
        assert_eq!(cfg.candidate_epsilons[0], 0.01);
        assert_eq!(*cfg.candidate_epsilons.last().unwrap(), 1.5);
        cfg.validate().unwrap();
    }

    #[test]
    fn fingerprint_changes_with_fields() {
        let a = ExperimentConfig::default();
        let mut b = a.clone();
        b.seed = 43;
        assert_ne!(a.fingerprint(), b.fingerprint());
    }

    #[test]
    fn json_roundtrip() {
        let cfg = ExperimentConfig::default();
        let json = serde_json::to_string_pretty(&cfg).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn partial_json_uses_defaults() {
        let cfg: ExperimentConfig =
            serde_json::from_str(r#"{"repetitions": 5, "seed": 7}"#).unwrap();
        assert_eq!(cfg.repetitions, 5);
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.alpha, 0.05);
    }

    #[test]
    fn unknown_fields_rejected() {
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"not_a_field": 1}"#).is_err());
    }
}
